#pragma once

// Polynomial vector fields on the doubled sequence space {u^sigma_j}.
// Monomials are  prod_f u^{sigma_f}_{j_f}  d/d u^{sigma_t}_{j_t}; this is the
// representation the weak Birkhoff normal form works in.

#include <Eigen/Dense>

#include "kamnls/core.hpp"

namespace kamnls {

struct ModeFactor {
    int sig;  // +1 / -1
    int j;    // in Z
    auto operator<=>(const ModeFactor&) const = default;
};

struct ModeKey {
    std::vector<ModeFactor> factors;  // kept sorted
    ModeFactor target;
    auto operator<=>(const ModeKey&) const = default;
    int degree() const { return int(factors.size()); }
    long momentum() const {  // sum sig_f j_f - sig_t j_t
        long m = -long(target.sig) * target.j;
        for (auto& f : factors) m += long(f.sig) * f.j;
        return m;
    }
    long gauge_charge() const {  // sum sig_f - sig_t
        long g = -target.sig;
        for (auto& f : factors) g += f.sig;
        return g;
    }
    // i (sigma_t j_t^2 - sum_f sigma_f j_f^2) is ad(N) on this monomial
    long adN_weight() const {
        long w = long(target.sig) * target.j * target.j;
        for (auto& f : factors) w -= long(f.sig) * f.j * f.j;
        return w;
    }
    ModeKey flip_sigma() const {
        ModeKey k = *this;
        k.target.sig = -k.target.sig;
        for (auto& f : k.factors) f.sig = -f.sig;
        std::sort(k.factors.begin(), k.factors.end());
        return k;
    }
};

template <class C>
struct ModeField {
    int J = 0;  // |j| <= J for every index
    std::map<ModeKey, C> terms;

    explicit ModeField(int j = 0) : J(j) {}

    void add(ModeKey k, C c) {
        if (scalar_traits<C>::is_zero(c)) return;
        if (std::abs(k.target.j) > J) return;
        for (auto& f : k.factors)
            if (std::abs(f.j) > J) return;
        std::sort(k.factors.begin(), k.factors.end());
        auto [it, fresh] = terms.emplace(std::move(k), c);
        if (!fresh) {
            it->second += c;
            if (scalar_traits<C>::is_zero(it->second)) terms.erase(it);
        }
    }

    ModeField& operator+=(const ModeField& o) {
        for (auto& [k, c] : o.terms) add(k, c);
        return *this;
    }
    ModeField operator*(C s) const {
        ModeField r(J);
        for (auto& [k, c] : terms) r.add(k, c * s);
        return r;
    }

    ModeField filter(const std::function<bool(const ModeKey&)>& pred) const {
        ModeField r(J);
        for (auto& [k, c] : terms)
            if (pred(k)) r.add(k, c);
        return r;
    }
    ModeField degree_part(int deg) const {
        return filter([deg](const ModeKey& k) { return k.degree() == deg; });
    }
    ModeField truncate_degree(int cap) const {
        return filter([cap](const ModeKey& k) { return k.degree() <= cap; });
    }

    // [g, F] = dF[g] - dg[F], keeping only monomials of degree <= degcap
    friend ModeField bracket(const ModeField& g, const ModeField& F,
                             int degcap = std::numeric_limits<int>::max()) {
        ModeField r(std::min(g.J, F.J));
        using Entry = std::pair<const ModeKey*, const C*>;
        auto index_by_target = [](const ModeField& f) {
            std::map<ModeFactor, std::vector<Entry>> ix;
            for (auto& [k, c] : f.terms) ix[k.target].push_back({&k, &c});
            return ix;
        };
        auto gix = index_by_target(g);
        auto fix = index_by_target(F);
        auto insert_derivative = [&r, degcap](const ModeKey& kx, const C& cx, const ModeKey& kg,
                                              const C& cg, int sign) {
            if (kx.degree() - 1 + kg.degree() > degcap) return;
            for (size_t pos = 0; pos < kx.factors.size(); ++pos) {
                if (!(kx.factors[pos] == kg.target)) continue;
                ModeKey nk;
                nk.target = kx.target;
                nk.factors.reserve(kx.factors.size() - 1 + kg.factors.size());
                for (size_t q = 0; q < kx.factors.size(); ++q)
                    if (q != pos) nk.factors.push_back(kx.factors[q]);
                for (auto& f : kg.factors) nk.factors.push_back(f);
                C val = cx * cg;
                if (sign < 0) val = -val;
                r.add(std::move(nk), val);
            }
        };
        auto sweep = [&](const ModeField& X, const std::map<ModeFactor, std::vector<Entry>>& yix,
                         int sign) {
            for (auto& [kx, cx] : X.terms) {
                const ModeFactor* prev = nullptr;
                for (auto& f : kx.factors) {
                    if (prev && *prev == f) continue;  // positions handled inside
                    prev = &f;
                    auto it = yix.find(f);
                    if (it == yix.end()) continue;
                    for (auto& e : it->second) insert_derivative(kx, cx, *e.first, *e.second, sign);
                }
            }
        };
        sweep(F, gix, +1);
        sweep(g, fix, -1);
        return r;
    }

    int min_degree() const {
        int m = std::numeric_limits<int>::max();
        for (auto& [k, c] : terms) m = std::min(m, k.degree());
        return terms.empty() ? 0 : m;
    }

    // push-forward along the time-1 flow of g, as a Lie series truncated at
    // total degree `cap`:  sum_k (-1)^k/k! ad_g^k F
    friend ModeField pushforward_time1(const ModeField& g, const ModeField& F, int cap) {
        ModeField acc = F.truncate_degree(cap);
        ModeField term = acc;
        const int raise = std::max(1, g.min_degree() - 1);
        C fact = scalar_traits<C>::from_int(1);
        for (int k = 1; k <= 2 * cap; ++k) {
            term = bracket(g, term.truncate_degree(cap - raise), cap);
            if (term.terms.empty()) break;
            fact = fact * scalar_traits<C>::from_int(-k);  // accumulate (-1)^k k!
            ModeField scaled(term.J);
            for (auto& [key, c] : term.terms) scaled.add(key, divide(c, fact));
            acc += scaled;
        }
        return acc;
    }

    static C divide(const C& a, const C& b);

    // real-on-real: coefficient of the sigma-flipped monomial is the conjugate
    bool real_on_real(double tol = 1e-12) const;

    bool gauge_preserving() const {
        for (auto& [k, c] : terms)
            if (k.gauge_charge() != 0) return false;
        return true;
    }
    bool momentum_preserving() const {
        for (auto& [k, c] : terms)
            if (k.momentum() != 0) return false;
        return true;
    }
};

template <>
inline cplx ModeField<cplx>::divide(const cplx& a, const cplx& b) { return a / b; }
template <>
inline CRat ModeField<CRat>::divide(const CRat& a, const CRat& b) {
    // b is real in every use here (signed factorials)
    if (b.im != 0) throw KamError("modefield", "rational division by non-real");
    return {a.re / b.re, a.im / b.re};
}

template <>
inline bool ModeField<cplx>::real_on_real(double tol) const {
    for (auto& [k, c] : terms) {
        auto it = terms.find(k.flip_sigma());
        cplx other = it == terms.end() ? cplx(0) : it->second;
        if (std::abs(std::conj(c) - other) > tol) return false;
    }
    return true;
}
template <>
inline bool ModeField<CRat>::real_on_real(double) const {
    for (auto& [k, c] : terms) {
        auto it = terms.find(k.flip_sigma());
        CRat other = it == terms.end() ? CRat() : it->second;
        if (!(c.re == other.re && c.im == -other.im)) return false;
    }
    return true;
}

inline ModeField<cplx> to_double(const ModeField<CRat>& f) {
    ModeField<cplx> r(f.J);
    for (auto& [k, c] : f.terms) r.add(k, c.to_cplx());
    return r;
}

// ---- pointwise evaluation / flows (doubles only) ----

// state layout: index(sigma,j) = (sigma>0 ? 0 : 1)*(2J+1) + (j+J)
struct ModeState {
    int J;
    Eigen::VectorXcd u;  // size 2(2J+1)
    explicit ModeState(int j) : J(j), u(Eigen::VectorXcd::Zero(2 * (2 * j + 1))) {}
    int idx(int sig, int j) const { return (sig > 0 ? 0 : 1) * (2 * J + 1) + (j + J); }
    cplx& at(int sig, int j) { return u[idx(sig, j)]; }
    cplx at(int sig, int j) const { return u[idx(sig, j)]; }
};

inline Eigen::VectorXcd eval_field(const ModeField<cplx>& F, const ModeState& s) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.u.size());
    for (auto& [k, c] : F.terms) {
        cplx v = c;
        for (auto& f : k.factors) v *= s.at(f.sig, f.j);
        out[s.idx(k.target.sig, k.target.j)] += v;
    }
    return out;
}

inline Eigen::MatrixXcd linearize_field(const ModeField<cplx>& F, const ModeState& s) {
    const int n = int(s.u.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (auto& [k, c] : F.terms) {
        int row = s.idx(k.target.sig, k.target.j);
        for (size_t pos = 0; pos < k.factors.size(); ++pos) {
            cplx v = c;
            for (size_t q = 0; q < k.factors.size(); ++q)
                if (q != pos) v *= s.at(k.factors[q].sig, k.factors[q].j);
            M(row, s.idx(k.factors[pos].sig, k.factors[pos].j)) += v;
        }
    }
    return M;
}

// time-t flow of the polynomial field by fixed-step RK4
inline ModeState flow(const ModeField<cplx>& F, ModeState s, double t, int nsteps = 64) {
    double h = t / nsteps;
    for (int i = 0; i < nsteps; ++i) {
        ModeState tmp = s;
        Eigen::VectorXcd k1 = eval_field(F, s);
        tmp.u = s.u + 0.5 * h * k1;
        Eigen::VectorXcd k2 = eval_field(F, tmp);
        tmp.u = s.u + 0.5 * h * k2;
        Eigen::VectorXcd k3 = eval_field(F, tmp);
        tmp.u = s.u + h * k3;
        Eigen::VectorXcd k4 = eval_field(F, tmp);
        s.u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return s;
}

// the reversibility involution S u^sigma_j = -u^{-sigma}_{-j}
inline ModeState involution(const ModeState& s) {
    ModeState r(s.J);
    for (int sig : {+1, -1})
        for (int j = -s.J; j <= s.J; ++j) r.at(sig, j) = -s.at(-sig, -j);
    return r;
}

inline Eigen::VectorXcd involution_vec(const ModeState& s, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(v.size());
    for (int sig : {+1, -1})
        for (int j = -s.J; j <= s.J; ++j)
            r[s.idx(sig, j)] = -v[s.idx(-sig, -j)];
    return r;
}

// functional check of  -S o F = F o S  at a test point
inline double reversibility_defect(const ModeField<cplx>& F, const ModeState& s) {
    Eigen::VectorXcd lhs = -involution_vec(s, eval_field(F, s));
    Eigen::VectorXcd rhs = eval_field(F, involution(s));
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace kamnls
