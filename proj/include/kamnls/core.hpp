#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace kamnls {

using cplx = std::complex<double>;
using Rat = boost::multiprecision::cpp_rational;

constexpr double PI = 3.14159265358979323846264338327950288;

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

// Complex number over an exact rational field.  Used where coefficient
// algebra must stay exact (chi coefficients, twist matrix on rationals,
// weak-BNF generators for rational cubic data).
struct CRat {
    Rat re{0}, im{0};
    CRat() = default;
    CRat(Rat r) : re(std::move(r)) {}
    CRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}
    CRat(long r) : re(r) {}
    friend CRat operator+(const CRat& a, const CRat& b) { return {a.re + b.re, a.im + b.im}; }
    friend CRat operator-(const CRat& a, const CRat& b) { return {a.re - b.re, a.im - b.im}; }
    friend CRat operator-(const CRat& a) { return {-a.re, -a.im}; }
    friend CRat operator*(const CRat& a, const CRat& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend CRat operator/(const CRat& a, const Rat& b) { return {a.re / b, a.im / b}; }
    CRat& operator+=(const CRat& b) { re += b.re; im += b.im; return *this; }
    bool is_zero() const { return re == 0 && im == 0; }
    cplx to_cplx() const { return {rat_to_double(re), rat_to_double(im)}; }
};

template <class T> struct scalar_traits;
template <> struct scalar_traits<double> {
    static double from_int(long v) { return double(v); }
    static bool is_zero(double v, double tol = 0.0) { return std::abs(v) <= tol; }
};
template <> struct scalar_traits<Rat> {
    static Rat from_int(long v) { return Rat(v); }
    static bool is_zero(const Rat& v, double = 0.0) { return v == 0; }
};
template <> struct scalar_traits<cplx> {
    static cplx from_int(long v) { return cplx(double(v), 0.0); }
    static cplx imag_unit() { return cplx(0.0, 1.0); }
    static bool is_zero(const cplx& v, double tol = 0.0) { return std::abs(v) <= tol; }
};
template <> struct scalar_traits<CRat> {
    static CRat from_int(long v) { return CRat(v); }
    static CRat imag_unit() { return CRat(Rat(0), Rat(1)); }
    static bool is_zero(const CRat& v, double = 0.0) { return v.is_zero(); }
};

// ---- small integer vectors (Fourier multi-indices in theta) ----

using IVec = std::vector<int>;

inline int l1(const IVec& v) {
    int s = 0;
    for (int x : v) s += std::abs(x);
    return s;
}
inline int linf(const IVec& v) {
    int s = 0;
    for (int x : v) s = std::max(s, std::abs(x));
    return s;
}
inline IVec ivneg(IVec v) { for (int& x : v) x = -x; return v; }
inline IVec ivadd(const IVec& a, const IVec& b) {
    IVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}
inline int ivsum(const IVec& v) { return std::accumulate(v.begin(), v.end(), 0); }
inline double dot(const std::vector<double>& w, const IVec& l) {
    double s = 0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * l[i];
    return s;
}

// <l> = max(1,|l|_1); the joint bracket uses |l|_1 + |j|.
inline double bra(const IVec& l) { return std::max(1, l1(l)); }
inline double bra(const IVec& l, int j) { return std::max(1, l1(l) + std::abs(j)); }
inline double bra(int h) { return std::max(1, std::abs(h)); }

// ---- deterministic RNG helpers ----

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(eng);
    }
    double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(eng); }
    cplx cnormal(double sd = 1.0) { return {normal(sd), normal(sd)}; }
    int uniform_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng); }
};

// Halton low-discrepancy sequence with a seed-controlled rotation (recorded in
// reports so measure runs are reproducible).
struct Halton {
    std::vector<int> bases;
    std::vector<double> shift;
    uint64_t n = 0;
    Halton(int dim, uint64_t seed) {
        static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
        Rng rng(seed);
        for (int i = 0; i < dim; ++i) {
            bases.push_back(primes[i % 8]);
            shift.push_back(rng.uniform(0.0, 1.0));
        }
    }
    std::vector<double> next() {
        ++n;
        std::vector<double> p(bases.size());
        for (size_t i = 0; i < bases.size(); ++i) {
            double f = 1.0, r = 0.0;
            uint64_t k = n;
            while (k) {
                f /= bases[i];
                r += f * double(k % bases[i]);
                k /= bases[i];
            }
            p[i] = r + shift[i];
            p[i] -= std::floor(p[i]);
        }
        return p;
    }
};

// Least-squares fit of y = a + b x; returns (b, R^2).
inline std::pair<double, double> linfit_slope_r2(const std::vector<double>& x,
                                                 const std::vector<double>& y) {
    size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    double b = sxy / sxx;
    double r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {b, r2};
}

struct KamError : std::runtime_error {
    std::string tag;
    KamError(std::string t, const std::string& msg)
        : std::runtime_error(t + ": " + msg), tag(std::move(t)) {}
};

}  // namespace kamnls
