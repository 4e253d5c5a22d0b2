#pragma once

// Truncated Fourier tables on T^d_theta x T_x.  A Fun stores coefficients
// c(l,j) for |l|_1 <= L, |j| <= J, representing sum c(l,j) e^{i l.theta} e^{i j x}.
// J = 0 doubles as "function of theta only".  Grid transforms go through FFTW.

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <unordered_map>

#include "kamnls/core.hpp"

namespace kamnls {

struct Lattice {
    int d, L;
    std::vector<IVec> pts;
    std::unordered_map<uint64_t, int> lookup;

    uint64_t pack(const IVec& l) const {
        uint64_t key = 0, base = 2 * L + 3;
        for (int c : l) key = key * base + uint64_t(c + L + 1);
        return key;
    }
    int index(const IVec& l) const {
        if (linf(l) > L) return -1;
        auto it = lookup.find(pack(l));
        return it == lookup.end() ? -1 : it->second;
    }
    int size() const { return int(pts.size()); }

    static std::shared_ptr<const Lattice> make(int d, int L) {
        static std::map<std::pair<int, int>, std::shared_ptr<const Lattice>> cache;
        static std::mutex mtx;
        std::lock_guard<std::mutex> g(mtx);
        auto key = std::make_pair(d, L);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto lat = std::make_shared<Lattice>();
        lat->d = d;
        lat->L = L;
        IVec l(d, -L);
        // enumerate the box, keep the l^1 ball
        while (true) {
            if (l1(l) <= L) {
                lat->lookup[lat->pack(l)] = int(lat->pts.size());
                lat->pts.push_back(l);
            }
            int k = d - 1;
            while (k >= 0 && l[k] == L) { l[k] = -L; --k; }
            if (k < 0) break;
            ++l[k];
        }
        cache[key] = lat;
        return lat;
    }
};

struct Fun {
    std::shared_ptr<const Lattice> lat;
    int J = 0;
    std::vector<cplx> v;

    Fun() = default;
    Fun(std::shared_ptr<const Lattice> l, int j) : lat(std::move(l)), J(j) {
        v.assign(size_t(lat->size()) * (2 * J + 1), cplx(0));
    }
    static Fun theta_only(int d, int L) { return Fun(Lattice::make(d, L), 0); }

    int nj() const { return 2 * J + 1; }
    cplx& at(int il, int j) { return v[size_t(il) * nj() + (j + J)]; }
    const cplx& at(int il, int j) const { return v[size_t(il) * nj() + (j + J)]; }
    cplx get(const IVec& l, int j) const {
        if (std::abs(j) > J) return 0;
        int il = lat->index(l);
        return il < 0 ? cplx(0) : at(il, j);
    }
    void add(const IVec& l, int j, cplx val) {
        int il = lat->index(l);
        if (il < 0 || std::abs(j) > J)
            throw KamError("fourier", "mode outside truncation");
        at(il, j) += val;
    }
    void set(const IVec& l, int j, cplx val) {
        int il = lat->index(l);
        if (il < 0 || std::abs(j) > J)
            throw KamError("fourier", "mode outside truncation");
        at(il, j) = val;
    }

    Fun& operator+=(const Fun& o) {
        require_same_shape(o);
        for (size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    Fun& operator-=(const Fun& o) {
        require_same_shape(o);
        for (size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    Fun& operator*=(cplx s) {
        for (auto& x : v) x *= s;
        return *this;
    }
    friend Fun operator+(Fun a, const Fun& b) { return a += b; }
    friend Fun operator-(Fun a, const Fun& b) { return a -= b; }
    friend Fun operator*(cplx s, Fun a) { return a *= s; }

    void require_same_shape(const Fun& o) const {
        if (lat.get() != o.lat.get() || J != o.J)
            throw KamError("fourier", "shape mismatch");
    }

    bool same_shape(const Fun& o) const { return lat.get() == o.lat.get() && J == o.J; }

    // \bar f as a function: coefficients conj(c(-l,-j))
    Fun conj_fun() const {
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il) {
            int im = lat->index(ivneg(lat->pts[il]));
            for (int j = -J; j <= J; ++j) r.at(il, j) = std::conj(at(im, -j));
        }
        return r;
    }
    Fun reflect_x() const {  // f(theta,-x)
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il)
            for (int j = -J; j <= J; ++j) r.at(il, j) = at(il, -j);
        return r;
    }
    Fun reflect_theta() const {  // f(-theta,x)
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il) {
            int im = lat->index(ivneg(lat->pts[il]));
            for (int j = -J; j <= J; ++j) r.at(il, j) = at(im, j);
        }
        return r;
    }
    Fun dx() const {
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il)
            for (int j = -J; j <= J; ++j) r.at(il, j) = cplx(0, j) * at(il, j);
        return r;
    }
    // zero-average primitive in x
    Fun dx_inv() const {
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il)
            for (int j = -J; j <= J; ++j)
                r.at(il, j) = j == 0 ? cplx(0) : at(il, j) / cplx(0, j);
        return r;
    }
    Fun omega_dtheta(const std::vector<double>& om) const {
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il) {
            cplx f(0, dot(om, lat->pts[il]));
            for (int j = -J; j <= J; ++j) r.at(il, j) = f * at(il, j);
        }
        return r;
    }
    // (omega.d_theta)^{-1} Pi_K on the zero-average part; refuses divisors
    // below 1e-14 (an unflagged resonance, not a rounding issue).
    Fun omega_dtheta_inv(const std::vector<double>& om, int Kcut) const {
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il) {
            const IVec& l = lat->pts[il];
            if (l1(l) == 0 || l1(l) > Kcut) continue;
            double div = dot(om, l);
            if (std::abs(div) < 1e-14)
                throw KamError("small-divisor", "omega.l below 1e-14 at some |l|<=K");
            for (int j = -J; j <= J; ++j) r.at(il, j) = at(il, j) / cplx(0, div);
        }
        return r;
    }
    Fun average_x() const {
        Fun r(lat, 0);
        for (int il = 0; il < lat->size(); ++il) r.at(il, 0) = at(il, 0);
        return r;
    }
    cplx average_theta_x() const {
        IVec z(lat->d, 0);
        return get(z, 0);
    }
    Fun project_theta(int K) const {  // keep |l|_1 <= K
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il) {
            if (l1(lat->pts[il]) > K) continue;
            for (int j = -J; j <= J; ++j) r.at(il, j) = at(il, j);
        }
        return r;
    }
    Fun project_joint(int K) const {  // keep max(|l|_1,|j|) <= K
        Fun r(lat, J);
        for (int il = 0; il < lat->size(); ++il) {
            if (l1(lat->pts[il]) > K) continue;
            for (int j = -J; j <= J; ++j)
                if (std::abs(j) <= K) r.at(il, j) = at(il, j);
        }
        return r;
    }
    Fun zero_average_theta() const {
        Fun r = *this;
        IVec z(lat->d, 0);
        int il = lat->index(z);
        for (int j = -J; j <= J; ++j) r.at(il, j) = 0;
        return r;
    }

    double max_abs() const {
        double m = 0;
        for (auto& x : v) m = std::max(m, std::abs(x));
        return m;
    }

    // H^p norm of a function of theta alone (normasob)
    double hp_norm(double s, double p) const {
        double acc = 0;
        for (int il = 0; il < lat->size(); ++il) {
            const IVec& l = lat->pts[il];
            double w = std::exp(2 * s * l1(l)) * std::pow(bra(l), 2 * p);
            for (int j = -J; j <= J; ++j) acc += w * std::norm(at(il, j));
        }
        return std::sqrt(acc);
    }
    // weighted (s,a,p) norm on (theta,x) tables (equation3 without the 1/r0)
    double sap_norm(double s, double a, double p) const {
        double acc = 0;
        for (int il = 0; il < lat->size(); ++il) {
            const IVec& l = lat->pts[il];
            double ws = std::exp(2 * s * l1(l));
            for (int j = -J; j <= J; ++j) {
                double w = ws * std::exp(2 * a * std::abs(j)) * std::pow(bra(l, j), 2 * p);
                acc += w * std::norm(at(il, j));
            }
        }
        return std::sqrt(acc);
    }

    bool is_real_func(double tol = 1e-12) const {
        for (int il = 0; il < lat->size(); ++il) {
            int im = lat->index(ivneg(lat->pts[il]));
            for (int j = -J; j <= J; ++j)
                if (std::abs(at(il, j) - std::conj(at(im, -j))) > tol) return false;
        }
        return true;
    }
    bool is_even_theta(double tol = 1e-12) const {
        for (int il = 0; il < lat->size(); ++il) {
            int im = lat->index(ivneg(lat->pts[il]));
            for (int j = -J; j <= J; ++j)
                if (std::abs(at(il, j) - at(im, j)) > tol) return false;
        }
        return true;
    }
    bool is_even_x(double tol = 1e-12) const {
        for (int il = 0; il < lat->size(); ++il)
            for (int j = -J; j <= J; ++j)
                if (std::abs(at(il, j) - at(il, -j)) > tol) return false;
        return true;
    }
    bool is_odd_x(double tol = 1e-12) const {
        for (int il = 0; il < lat->size(); ++il)
            for (int j = -J; j <= J; ++j)
                if (std::abs(at(il, j) + at(il, -j)) > tol) return false;
        return true;
    }
    // gauge selection rule for coefficient functions (massapilota): only
    // sum(l_i) = 0 harmonics may appear
    bool zero_momentum_support(double tol = 1e-12) const {
        for (int il = 0; il < lat->size(); ++il) {
            if (ivsum(lat->pts[il]) == 0) continue;
            for (int j = -J; j <= J; ++j)
                if (std::abs(at(il, j)) > tol) return false;
        }
        return true;
    }
};

// ---- grids (FFTW) ----

namespace detail {

inline int fast_size(int n) {
    auto smooth = [](int m) {
        for (int p : {2, 3, 5, 7})
            while (m % p == 0) m /= p;
        return m == 1;
    };
    while (!smooth(n)) ++n;
    return n;
}

struct FftBuf {
    fftw_complex* p = nullptr;
    size_t n = 0;
    explicit FftBuf(size_t n_) : n(n_) {
        p = fftw_alloc_complex(n);
        std::fill_n(reinterpret_cast<double*>(p), 2 * n, 0.0);
    }
    ~FftBuf() { fftw_free(p); }
    FftBuf(const FftBuf&) = delete;
    cplx* c() { return reinterpret_cast<cplx*>(p); }
};

inline void run_fft(std::vector<int> dims, cplx* data, int sign) {
    static std::mutex mtx;
    std::lock_guard<std::mutex> g(mtx);
    fftw_plan plan = fftw_plan_dft(int(dims.size()), dims.data(),
                                   reinterpret_cast<fftw_complex*>(data),
                                   reinterpret_cast<fftw_complex*>(data), sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

}  // namespace detail

// Sampling grid for functions on T^d x T; sizes are chosen FFT-friendly.
struct GridSpec {
    std::vector<int> nth;  // per theta axis
    int nx = 1;
    size_t total() const {
        size_t t = nx;
        for (int n : nth) t *= n;
        return t;
    }
    std::vector<int> dims() const {
        std::vector<int> d = nth;
        d.push_back(nx);
        return d;
    }
    static GridSpec for_fun(const Fun& f, double oversample_theta = 1.0,
                            double oversample_x = 1.0) {
        GridSpec g;
        for (int k = 0; k < f.lat->d; ++k)
            g.nth.push_back(detail::fast_size(int(std::ceil(oversample_theta * (2 * f.lat->L + 1)))));
        g.nx = detail::fast_size(std::max(1, int(std::ceil(oversample_x * (2 * f.J + 1)))));
        return g;
    }
};

// values[t1,...,td,s] = f(2 pi t/n, 2 pi s/nx)
inline std::vector<cplx> to_grid(const Fun& f, const GridSpec& g) {
    std::vector<cplx> data(g.total(), cplx(0));
    const int d = f.lat->d;
    // scatter coefficients at wrapped indices
    std::vector<size_t> stride(d + 1);
    stride[d] = 1;
    // layout: theta axes outer, x inner
    std::vector<int> dims = g.dims();
    std::vector<size_t> str(d + 1);
    str[d] = 1;
    for (int k = d - 1; k >= 0; --k) str[k] = str[k + 1] * dims[k + 1];
    for (int il = 0; il < f.lat->size(); ++il) {
        const IVec& l = f.lat->pts[il];
        size_t base = 0;
        for (int k = 0; k < d; ++k) base += size_t(((l[k] % g.nth[k]) + g.nth[k]) % g.nth[k]) * str[k];
        for (int j = -f.J; j <= f.J; ++j) {
            size_t idx = base + size_t(((j % g.nx) + g.nx) % g.nx);
            data[idx] += f.at(il, j);
        }
    }
    detail::run_fft(dims, data.data(), FFTW_BACKWARD);
    return data;
}

inline void from_grid(Fun& f, std::vector<cplx> data, const GridSpec& g) {
    const int d = f.lat->d;
    std::vector<int> dims = g.dims();
    detail::run_fft(dims, data.data(), FFTW_FORWARD);
    double inv = 1.0 / double(g.total());
    std::vector<size_t> str(d + 1);
    str[d] = 1;
    for (int k = d - 1; k >= 0; --k) str[k] = str[k + 1] * dims[k + 1];
    std::fill(f.v.begin(), f.v.end(), cplx(0));
    for (int il = 0; il < f.lat->size(); ++il) {
        const IVec& l = f.lat->pts[il];
        size_t base = 0;
        for (int k = 0; k < d; ++k) base += size_t(((l[k] % g.nth[k]) + g.nth[k]) % g.nth[k]) * str[k];
        for (int j = -f.J; j <= f.J; ++j)
            f.at(il, j) = data[base + size_t(((j % g.nx) + g.nx) % g.nx)] * inv;
    }
}

// product of band-limited tables, exact on the retained modes when the grid
// resolves degree * cutoff
inline Fun mul(const Fun& a, const Fun& b, std::shared_ptr<const Lattice> target_lat = nullptr,
               int targetJ = -1) {
    if (a.lat->d != b.lat->d) throw KamError("fourier", "dimension mismatch in product");
    auto tl = target_lat ? target_lat : (a.lat->L >= b.lat->L ? a.lat : b.lat);
    int tJ = targetJ >= 0 ? targetJ : std::max(a.J, b.J);
    int Lbig = a.lat->L + b.lat->L, Jbig = a.J + b.J;
    GridSpec g;
    for (int k = 0; k < a.lat->d; ++k) g.nth.push_back(detail::fast_size(Lbig + tl->L + 1));
    g.nx = detail::fast_size(Jbig + tJ + 1);
    auto ga = to_grid(a, g);
    auto gb = to_grid(b, g);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] *= gb[i];
    Fun r(tl, tJ);
    from_grid(r, std::move(ga), g);
    return r;
}

// pointwise analytic map applied on a grid (sqrt, inverse, ...), projected
// back onto the shape of f; oversampling controls the aliasing floor
inline Fun pointwise(const Fun& f, const std::function<cplx(cplx)>& fn, double os = 4.0) {
    GridSpec g = GridSpec::for_fun(f, os, f.J > 0 ? os : 1.0);
    auto gf = to_grid(f, g);
    for (auto& xv : gf) xv = fn(xv);
    Fun r(f.lat, f.J);
    from_grid(r, std::move(gf), g);
    return r;
}

// u(theta, x + alpha(theta,x)); alpha must share theta dimension with u
inline Fun compose_x(const Fun& u, const Fun& alpha, double os = 2.0) {
    if (u.lat->d != alpha.lat->d) throw KamError("fourier", "compose_x dim mismatch");
    int Lg = std::max(u.lat->L, alpha.lat->L);
    int Jg = std::max(u.J, alpha.J);
    GridSpec g;
    for (int k = 0; k < u.lat->d; ++k) g.nth.push_back(detail::fast_size(int(os * (2 * Lg + 1)) + 1));
    g.nx = detail::fast_size(int(os * (2 * Jg + 1)) + 1);
    auto galpha = to_grid(alpha, g);

    // mixed representation of u: theta on grid, x spectral
    size_t nth_total = g.total() / g.nx;
    std::vector<cplx> uhat(nth_total * u.nj(), cplx(0));
    {
        GridSpec gth;
        gth.nth = g.nth;
        gth.nx = 1;
        Fun slice(u.lat, 0);
        for (int j = -u.J; j <= u.J; ++j) {
            for (int il = 0; il < u.lat->size(); ++il) slice.at(il, 0) = u.at(il, j);
            auto gs = to_grid(slice, gth);
            for (size_t t = 0; t < nth_total; ++t) uhat[t * u.nj() + (j + u.J)] = gs[t];
        }
    }
    std::vector<cplx> out(g.total());
    for (size_t t = 0; t < nth_total; ++t) {
        for (int s = 0; s < g.nx; ++s) {
            double xs = 2.0 * PI * s / g.nx;
            cplx z = std::exp(cplx(0, 1) * (cplx(xs, 0) + galpha[t * g.nx + s]));
            cplx zi = 1.0 / z;
            cplx acc = uhat[t * u.nj() + u.J];  // j = 0
            cplx zp = 1, zm = 1;
            for (int j = 1; j <= u.J; ++j) {
                zp *= z;
                zm *= zi;
                acc += uhat[t * u.nj() + (j + u.J)] * zp + uhat[t * u.nj() + (-j + u.J)] * zm;
            }
            out[t * g.nx + s] = acc;
        }
    }
    Fun r(u.lat, u.J);
    from_grid(r, std::move(out), g);
    return r;
}

// u(theta + beta(theta), x) with beta : T^d -> C^d given as theta-only tables
inline Fun compose_theta(const Fun& u, const std::vector<Fun>& beta, double os = 2.0) {
    const int d = u.lat->d;
    if (int(beta.size()) != d) throw KamError("fourier", "compose_theta needs d components");
    int Lg = u.lat->L;
    for (auto& bk : beta) Lg = std::max(Lg, bk.lat->L);
    GridSpec gth;
    for (int k = 0; k < d; ++k) gth.nth.push_back(detail::fast_size(int(os * (2 * Lg + 1)) + 1));
    gth.nx = 1;
    size_t nth_total = gth.total();
    std::vector<std::vector<cplx>> gbeta(d);
    for (int k = 0; k < d; ++k) gbeta[k] = to_grid(beta[k], gth);

    const int nlat = u.lat->size(), nj = u.nj(), Lmax = u.lat->L;
    std::vector<cplx> mixed(nth_total * nj, cplx(0));  // theta on grid, x spectral
    std::vector<std::vector<cplx>> pw(d, std::vector<cplx>(2 * Lmax + 1));
    std::vector<int> tc(d, 0);
    for (size_t t = 0; t < nth_total; ++t) {
        for (int k = 0; k < d; ++k) {
            cplx e = std::exp(cplx(0, 1) * gbeta[k][t]);
            cplx ei = 1.0 / e;
            pw[k][Lmax] = 1;
            for (int m = 1; m <= Lmax; ++m) {
                pw[k][Lmax + m] = pw[k][Lmax + m - 1] * e;
                pw[k][Lmax - m] = pw[k][Lmax - m + 1] * ei;
            }
        }
        for (int il = 0; il < nlat; ++il) {
            const IVec& l = u.lat->pts[il];
            cplx ph = 1;
            for (int k = 0; k < d; ++k) {
                double ang = 2.0 * PI * double(l[k]) * tc[k] / gth.nth[k];
                ph *= cplx(std::cos(ang), std::sin(ang)) * pw[k][Lmax + l[k]];
            }
            const cplx* row = &u.v[size_t(il) * nj];
            cplx* out = &mixed[t * nj];
            for (int jj = 0; jj < nj; ++jj)
                if (row[jj] != cplx(0)) out[jj] += ph * row[jj];
        }
        // advance grid coordinates
        for (int k = d - 1; k >= 0; --k) {
            if (++tc[k] < gth.nth[k]) break;
            tc[k] = 0;
        }
    }
    Fun r(u.lat, u.J);
    Fun shifted(u.lat, 0);
    std::vector<cplx> vals(nth_total);
    for (int jj = 0; jj < nj; ++jj) {
        for (size_t t = 0; t < nth_total; ++t) vals[t] = mixed[t * nj + jj];
        from_grid(shifted, vals, gth);
        for (int il = 0; il < nlat; ++il) r.at(il, jj - u.J) = shifted.at(il, 0);
    }
    return r;
}

// Diophantine check on |l| <= K
inline bool diophantine_ok(const std::vector<double>& om, double gamma, double tau, int K, int d,
                           IVec* violator = nullptr) {
    auto lat = Lattice::make(d, K);
    for (auto& l : lat->pts) {
        if (l1(l) == 0) continue;
        if (std::abs(dot(om, l)) < gamma / std::pow(bra(l), tau)) {
            if (violator) *violator = l;
            return false;
        }
    }
    return true;
}

}  // namespace kamnls
