#pragma once

// Exponent budgets, smallness inequalities and iteration schedules for the
// finite-step KAM driver.  Exponents are kept as exact rationals/integers;
// K_n is carried as log2(K_n) so large steps never overflow.

#include "kamnls/core.hpp"

namespace kamnls {

struct ExponentBudget {
    int d = 2;
    long tau = 4;
    long p0 = 2;       // ceil((d+1)/2)
    long mu1 = 0;
    long mu = 35;      // 5(mu1+7)
    long kappa0 = 41;  // mu+6
    long kappa1 = 0, kappa2 = 0;
    long eta = 0;
    long eta1 = 0;     // 2 p0 + 2 tau + 4
    long kappa3 = 0;   // kappa1 + eta1
    long kappa4 = 0;   // 7 tau + 3
    long kappa5 = 0;   // 7 tau + 5
    long m1 = 0;       // d + 2 p0 + 10
    long m2 = 0;       // m1 + kappa5
    long p1 = 0;       // p0 + m2
    long dp = 0;       // p2 - p1
    long p2 = 0;
    long nu = 2;       // loss of regularity of the NLS field
    Rat a_exp{0};      // 1/(4 kappa0 + kappa2 + 1)

    bool below_theorem_dimension() const { return d <= 2; }
};

struct ExpCheck {
    bool exp1 = false, exp2 = false, exp3 = false, exp4 = false;
    bool all() const { return exp1 && exp2 && exp3 && exp4; }
};

// Re-evaluates the four strict exponent inequalities exactly.
inline ExpCheck check_exponents(const ExponentBudget& b) {
    ExpCheck c;
    Rat k0(b.kappa0), k1(b.kappa1), k2(b.kappa2), k3(b.kappa3), dp(b.dp);
    Rat e1 = std::max({Rat(Rat(2, 3) * (k0 + k3)), Rat(2 * k0), Rat(6 * k0 + k2 + 1)});
    c.exp1 = k1 > e1;
    Rat e2 = std::max(Rat(4 * k0), Rat(k0 + 2 * std::max(k1, k3) - Rat(3, 2) * k1));
    c.exp2 = k2 > e2;
    c.exp3 = Rat(b.eta) > Rat(Rat(b.mu) + Rat(1, 2) * k2 + 1);
    Rat e4 = std::max(Rat(k0 + Rat(3, 2) * k2 + std::max(k1, k3)),
                      Rat(5 * k0 + Rat(3, 2) * k2 + k1 + 1));
    c.exp4 = dp > e4;
    return c;
}

namespace detail {
// smallest integer strictly greater than q
inline long next_int_above(const Rat& q) {
    using boost::multiprecision::cpp_int;
    cpp_int num = numerator(q), den = denominator(q);
    cpp_int fl = num / den;
    if (num < 0 && num % den != 0) fl -= 1;
    return (fl + 1).convert_to<long>();
}
}  // namespace detail

// Integer sweep for the smallest (kappa1, kappa2, eta, dp) at or above the
// seeds.  The constraint system is monotone and contracting, so the loop
// stabilises; the ceiling guards against pathological seeds.
inline ExponentBudget derive_budget(int d, long tau, long mu1, long seed_k1 = 0,
                                    long seed_k2 = 0, long ceiling = 1000000) {
    if (d < 2) throw KamError("params", "torus dimension must be >= 2");
    if (tau < d + 1) throw KamError("params", "tau must be >= d+1");
    if (mu1 < 0) throw KamError("params", "mu1 must be >= 0");
    ExponentBudget b;
    b.d = d;
    b.tau = tau;
    b.p0 = (d + 2) / 2;  // ceil((d+1)/2)
    b.mu1 = mu1;
    b.mu = 5 * (mu1 + 7);
    b.kappa0 = b.mu + 6;
    b.eta1 = 2 * b.p0 + 2 * tau + 4;
    b.kappa4 = 7 * tau + 3;
    b.kappa5 = 7 * tau + 5;
    b.m1 = d + 2 * b.p0 + 10;
    b.m2 = b.m1 + b.kappa5;
    b.p1 = b.p0 + b.m2;

    long k1 = std::max(seed_k1, 1L), k2 = std::max(seed_k2, 1L);
    Rat K0(b.kappa0);
    for (int iter = 0; iter < 200; ++iter) {
        long k3 = k1 + b.eta1;
        Rat r1 = std::max({Rat(Rat(2, 3) * (K0 + k3)), Rat(2 * K0), Rat(6 * K0 + k2 + 1)});
        long nk1 = std::max(k1, detail::next_int_above(r1));
        long nk3 = nk1 + b.eta1;
        Rat r2 = std::max(Rat(4 * K0), Rat(K0 + 2 * Rat(std::max(nk1, nk3)) - Rat(3, 2) * nk1));
        long nk2 = std::max(k2, detail::next_int_above(r2));
        if (nk1 > ceiling || nk2 > ceiling)
            throw KamError("params", "exponent sweep exceeded ceiling (unsatisfiable seeds)");
        if (nk1 == k1 && nk2 == k2) break;
        k1 = nk1;
        k2 = nk2;
    }
    b.kappa1 = k1;
    b.kappa2 = k2;
    b.kappa3 = k1 + b.eta1;
    b.eta = detail::next_int_above(Rat(b.mu) + Rat(1, 2) * k2 + 1);
    b.dp = detail::next_int_above(
        std::max(Rat(Rat(b.kappa0) + Rat(3, 2) * k2 + std::max(k1, b.kappa3)),
                 Rat(Rat(5) * b.kappa0 + Rat(3, 2) * k2 + k1 + 1)));
    b.p2 = b.p1 + b.dp;
    b.a_exp = Rat(1, 4 * b.kappa0 + k2 + 1);
    if (!check_exponents(b).all())
        throw KamError("params", "derived budget fails its own re-check");
    return b;
}

// ---- smallness conditions (pure evaluation, log10 arithmetic) ----

struct SmallnessItem {
    std::string name;
    double log10_lhs;  // inequality is lhs < 1 (or <= 1), i.e. log10 <= 0
    bool strict;
    bool pass;
};

struct SmallnessReport {
    bool order_ok;  // 0 < eps0 <= R0 <= G0
    std::vector<SmallnessItem> items;
    bool all() const {
        if (!order_ok) return false;
        for (auto& it : items)
            if (!it.pass) return false;
        return true;
    }
};

// Evaluates the five smallness bounds with K0 given as log10(K0).
inline SmallnessReport check_smallness_log(const ExponentBudget& b, double eps0, double G0,
                                           double R0, double log10_K0) {
    if (eps0 < 0 || G0 <= 0 || R0 <= 0)
        throw KamError("params", "smallness inputs must be positive");
    SmallnessReport rep;
    rep.order_ok = eps0 > 0 && eps0 <= R0 && R0 <= G0;
    auto lg = [](double x) { return std::log10(x); };
    double le = lg(eps0), lG = lg(G0), lR = lg(R0), lK = log10_K0;
    auto push = [&](std::string name, double l10, bool strict) {
        bool pass = strict ? (l10 < 0.0) : (l10 <= 0.0);
        rep.items.push_back({std::move(name), l10, strict, pass});
    };
    push("eps0*G0^3", le + 3 * lG, true);
    push("eps0*G0^2/R0", le + 2 * lG - lR, true);
    double inner = lR + lG + (b.kappa0 + 0.5 * b.kappa2) * lK;
    push("G0^2/R0*eps0*K0^k0*max(1,R0*G0*K0^(k0+k2/2))",
         2 * lG - lR + le + b.kappa0 * lK + std::max(0.0, inner), true);
    double mx = std::max(b.kappa1 * lK, le + b.kappa3 * lK);
    push("max(K0^k1,eps0*K0^k3)*K0^(k0-dp+k2/2)*G0/eps0",
         mx + (b.kappa0 - b.dp + 0.5 * b.kappa2) * lK + lG - le, false);
    push("max(K0^k1,eps0*K0^k3)*K0^(k0-3k1/2)*G0/R0",
         mx + (b.kappa0 - 1.5 * b.kappa1) * lK + lG - lR, false);
    return rep;
}

inline SmallnessReport check_smallness(const ExponentBudget& b, double eps0, double G0, double R0,
                                       double K0) {
    return check_smallness_log(b, eps0, G0, R0, std::log10(K0));
}

// The scale ties of the abstract scheme: eps0 = |xi|^(1/4), gamma0 = c|xi|,
// R0 = G0 sqrt(eps0), K0 = eps0^(-a) G0.
struct TiedScales {
    double eps0, gamma0, R0, log10_K0;
};
inline TiedScales tied_scales(const ExponentBudget& b, double xi_norm, double c_gamma, double G0) {
    TiedScales t;
    t.eps0 = std::pow(xi_norm, 0.25);
    t.gamma0 = c_gamma * xi_norm;
    t.R0 = G0 * std::sqrt(t.eps0);
    t.log10_K0 = -rat_to_double(b.a_exp) * std::log10(t.eps0) + std::log10(G0);
    return t;
}

inline SmallnessReport check_smallness_tied(const ExponentBudget& b, double xi_norm,
                                            double c_gamma, double G0) {
    TiedScales t = tied_scales(b, xi_norm, c_gamma, G0);
    return check_smallness_log(b, t.eps0, G0, t.R0, t.log10_K0);
}

// Deterministic bisection on log10|xi| for the largest |xi| at which every
// smallness bound holds under the ties.  Bit-for-bit reproducible.
inline double smallness_threshold_log10xi(const ExponentBudget& b, double c_gamma, double G0,
                                          double lo = -320.0, double hi = 0.0, int iters = 200) {
    auto ok = [&](double l10xi) {
        return check_smallness_tied(b, std::pow(10.0, l10xi), c_gamma, G0).all();
    };
    if (!ok(lo)) return -std::numeric_limits<double>::infinity();
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

// ---- iteration schedule (numeretti / strega7) ----

struct IterationSchedule {
    int n = 0;
    double log2_Kn = 0;
    double Kn = 0;  // inf if it overflows
    double gamma_n = 0, G_n = 0, R_n = 0;
    double a_n = 0, r_n = 0, s_n = 0;
    double rho_n = 0;
    long n_star = 0;  // reduction depth, rounded up
};

inline IterationSchedule schedule(const ExponentBudget& b, int n, double K0, double gamma0,
                                  double a0, double r0, double s0, double G0, double R0) {
    if (n < 0) throw KamError("params", "schedule step must be >= 0");
    IterationSchedule s;
    s.n = n;
    s.log2_Kn = std::pow(1.5, n) * std::log2(K0);
    s.Kn = std::exp2(s.log2_Kn);
    double g = gamma0;
    for (int m = 1; m <= n; ++m) g *= 1.0 - std::pow(0.5, m + 2);
    s.gamma_n = g;
    double half_geo = 0.0, geo = 0.0;
    for (int j = 1; j <= n; ++j) geo += std::pow(0.5, j);
    half_geo = 0.5 * geo;
    s.G_n = G0 * (1.0 + geo);
    s.R_n = R0 * (1.0 + geo);
    s.a_n = a0 * (1.0 - half_geo);
    s.r_n = r0 * (1.0 - half_geo);
    s.s_n = s0 * (1.0 - half_geo);
    s.rho_n = n == 0 ? 0.0 : std::pow(0.5, n + 8);
    double raw = n + std::log(double(b.kappa2) / double(b.kappa4)) / std::log(1.5);
    s.n_star = long(std::ceil(raw - 1e-12));
    return s;
}

}  // namespace kamnls
