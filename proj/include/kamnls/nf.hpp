#pragma once

// Cubic coefficient algebra, k-resonance classification and the weak
// Birkhoff normal form removing the non-resonant low-degree monomials.

#include <Eigen/SVD>

#include "kamnls/modefield.hpp"
#include "kamnls/sites.hpp"

namespace kamnls {

using CubicCoefficients = std::array<double, 8>;
using CubicCoefficientsQ = std::array<Rat, 8>;

inline CubicCoefficientsQ to_rational(const CubicCoefficients& a) {
    CubicCoefficientsQ q;
    for (int i = 0; i < 8; ++i) {
        // exact only for representable inputs; tests feed small rationals
        q[i] = Rat(llround(a[i] * 840.0), 840);
    }
    return q;
}

// chi_{j1 j2 j3 j} of the cubic term (weak3); even under a joint sign flip
template <class T>
T chi(const std::array<T, 8>& a, long j1, long j2, long j3, long /*j4*/) {
    auto K = [](long v) { return scalar_traits<T>::from_int(v); };
    return a[0] - a[1] * K(j3 * j3) + a[2] * K(j1 * j2) - a[5] * K(j2 * j2) -
           a[6] * K(j1 * j2) - a[3] * K(j1 * j2 * j3 * j3) + a[7] * K(j1 * j2 * j2 * j3) -
           a[4] * K(j1 * j1 * j2 * j2 * j3 * j3);
}

// ---- k-resonances (Def. 3.1) ----

enum class ResTag { Trivial, Nontrivial, NonResonant, OffMomentum };

struct ResonanceClass {
    ResTag tag;
    long divisor = 0;  // sum (-1)^{i+1} j_i^2, exact, when NonResonant
};

// tuple in the alternating order (j1, j2, ..., j_{2k}); momentum and divisor
// carry signs (+,-,+,-,...)
inline ResonanceClass classify_tuple(const std::vector<long>& js) {
    if (js.size() % 2 != 0) throw KamError("nf", "tuple must have even length");
    long mom = 0, div = 0;
    for (size_t i = 0; i < js.size(); ++i) {
        long s = (i % 2 == 0) ? 1 : -1;
        mom += s * js[i];
        div += s * js[i] * js[i];
    }
    if (mom != 0) return {ResTag::OffMomentum, div};
    if (div != 0) return {ResTag::NonResonant, div};
    std::vector<long> odd, even;
    for (size_t i = 0; i < js.size(); ++i) (i % 2 == 0 ? odd : even).push_back(js[i]);
    std::sort(odd.begin(), odd.end());
    std::sort(even.begin(), even.end());
    return {odd == even ? ResTag::Trivial : ResTag::Nontrivial, 0};
}

// exhaustive search for non-trivial 3-resonances with >= 5 entries in S (the
// genericity certificate of the site choice, Lemma 3.2)
inline std::vector<std::array<long, 6>> genericity_scan(const SiteSet& sites, long B) {
    std::vector<long> S;
    for (int v : sites.sp) { S.push_back(v); S.push_back(-v); }
    if (long(*std::max_element(sites.sp.begin(), sites.sp.end())) > B)
        throw KamError("nf", "bound must cover S+");
    std::vector<std::array<long, 6>> bad;
    auto consider = [&](std::array<long, 6> t) {
        for (long x : t)
            if (std::abs(x) > B) return;
        auto cls = classify_tuple({t[0], t[1], t[2], t[3], t[4], t[5]});
        if (cls.tag == ResTag::Nontrivial) bad.push_back(t);
    };
    const size_t ns = S.size();
    // one free slot (its value is forced by the momentum constraint)
    for (int freepos = 0; freepos < 6; ++freepos) {
        size_t total = 1;
        for (int i = 0; i < 5; ++i) total *= ns;
        for (size_t code = 0; code < total; ++code) {
            size_t rem = code;
            std::array<long, 6> t{};
            for (int pos = 0; pos < 6; ++pos) {
                if (pos == freepos) continue;
                t[pos] = S[rem % ns];
                rem /= ns;
            }
            long acc = 0;
            for (int pos = 0; pos < 6; ++pos) {
                if (pos == freepos) continue;
                acc += ((pos % 2 == 0) ? 1 : -1) * t[pos];
            }
            long sign = (freepos % 2 == 0) ? 1 : -1;
            t[freepos] = -sign * acc;  // forces momentum 0
            consider(t);
        }
    }
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    return bad;
}

// ---- the truncated NLS field (6.666) ----

// N = i sum sigma j^2 u^sigma_j d_{u^sigma_j}
template <class C>
ModeField<C> linear_part(int J) {
    ModeField<C> N(J);
    for (int sig : {+1, -1})
        for (int j = -J; j <= J; ++j) {
            ModeKey k;
            k.target = {sig, j};
            k.factors = {{sig, j}};
            C c = scalar_traits<C>::imag_unit() * scalar_traits<C>::from_int(sig) *
                  scalar_traits<C>::from_int(long(j) * j);
            N.add(k, c);
        }
    return N;
}

template <class C>
ModeField<C> cubic_part(const std::array<C, 8>& a, int J) {
    ModeField<C> F(J);
    const C mi = -scalar_traits<C>::imag_unit();
    for (int j1 = -J; j1 <= J; ++j1)
        for (int j2 = -J; j2 <= J; ++j2)
            for (int j3 = -J; j3 <= J; ++j3) {
                int j = j1 - j2 + j3;
                if (std::abs(j) > J) continue;
                C coef = chi<C>(a, j1, j2, j3, j);
                if (scalar_traits<C>::is_zero(coef)) continue;
                for (int sig : {+1, -1}) {
                    ModeKey k;
                    k.target = {sig, j};
                    k.factors = {{sig, j1}, {-sig, j2}, {sig, j3}};
                    C c = (sig > 0 ? mi : -mi) * coef;
                    F.add(k, c);
                }
            }
    return F;
}

template <class C>
ModeField<C> nls_field(const std::array<C, 8>& a, int J) {
    ModeField<C> F = linear_part<C>(J);
    F += cubic_part<C>(a, J);
    return F;
}

// alternating tuple of a monomial: same-sign factors at odd positions, the
// opposite-sign ones at even positions, target last (canonically sorted)
inline std::vector<long> alternating_tuple(const ModeKey& k) {
    std::vector<long> same, opp;
    for (auto& f : k.factors)
        (f.sig == k.target.sig ? same : opp).push_back(f.j);
    std::sort(same.begin(), same.end());
    std::sort(opp.begin(), opp.end());
    if (same.size() != opp.size() + 1) return {};  // not of NLS shape
    std::vector<long> t;
    for (size_t i = 0; i < opp.size(); ++i) {
        t.push_back(same[i]);
        t.push_back(opp[i]);
    }
    t.push_back(same.back());
    t.push_back(k.target.j);
    return t;
}

inline int count_outside_S(const SiteSet& sites, const std::vector<long>& t) {
    int n = 0;
    for (long x : t)
        if (!sites.in_S(int(x))) ++n;
    return n;
}

// Generator whose time-1 flow removes the selected monomials: coefficient
// c/(iW) with W = sigma_t j_t^2 - sum_f sigma_f j_f^2.  (Our push-forward is
// sum (-1)^k/k! ad_g^k, so the sign is opposite to the one displayed in the
// usual "e^{ad}" convention.)
template <class C>
ModeField<C> homological_generator(const ModeField<C>& F,
                                   const std::function<bool(const ModeKey&)>& select) {
    ModeField<C> g(F.J);
    const C mi = -scalar_traits<C>::imag_unit();
    for (auto& [k, c] : F.terms) {
        if (!select(k)) continue;
        long W = k.adN_weight();
        if (W == 0) throw KamError("internal-inconsistency", "zero divisor on selected monomial");
        C num = mi * c;  // c/(iW) = -i c / W
        g.add(k, ModeField<C>::divide(num, scalar_traits<C>::from_int(W)));
    }
    return g;
}

struct WbnfData {
    ModeField<CRat> F3, F5;               // generators (rational when a is)
    ModeField<CRat> transformed;          // Upsilon, degree <= 5
    std::vector<std::array<long, 6>> genericity_violations;
};

// Weak Birkhoff normal form of the truncated NLS field (Prop. 3.2).
inline WbnfData wbnf_transform(const CubicCoefficientsQ& a, const SiteSet& sites) {
    WbnfData out;
    out.genericity_violations = genericity_scan(sites, sites.J);
    if (!out.genericity_violations.empty())
        throw KamError("nf", "sites fail the genericity scan");
    const int J = sites.J;
    std::array<CRat, 8> ac;
    for (int i = 0; i < 8; ++i) ac[i] = CRat(a[i]);
    ModeField<CRat> F = nls_field<CRat>(ac, J);

    auto select3 = [&](const ModeKey& k) {
        if (k.degree() != 3) return false;
        auto t = alternating_tuple(k);
        if (t.empty()) return false;
        auto cls = classify_tuple(t);
        if (cls.tag != ResTag::NonResonant) return false;
        int outside = count_outside_S(sites, t);
        if (outside <= 1) return true;                       // A_1 cap N
        return sites.in_S(int(k.target.j));                  // extra sum, target in S
    };
    out.F3 = homological_generator<CRat>(F, select3);
    ModeField<CRat> Y = pushforward_time1(out.F3, F, 5);

    auto select5 = [&](const ModeKey& k) {
        if (k.degree() != 5) return false;
        auto t6 = alternating_tuple(k);
        if (t6.empty()) return false;
        auto cls = classify_tuple(t6);
        return cls.tag == ResTag::NonResonant && count_outside_S(sites, t6) <= 1;
    };
    out.F5 = homological_generator<CRat>(Y, select5);
    out.transformed = pushforward_time1(out.F5, Y, 5);
    return out;
}

// Largest surviving coefficient over A_1 cap N monomials of the given degree,
// relative to the input coefficient scale (the removed-monomial certificate).
inline double wbnf_certificate(const ModeField<CRat>& ups, const SiteSet& sites, int degree) {
    double worst = 0;
    for (auto& [k, c] : ups.terms) {
        if (k.degree() != degree) continue;
        auto t = alternating_tuple(k);
        if (t.empty()) continue;
        if (classify_tuple(t).tag != ResTag::NonResonant) continue;
        if (count_outside_S(sites, t) > 1) continue;
        worst = std::max(worst, std::abs(c.to_cplx()));
    }
    return worst;
}

// integrable coefficients surviving on the tangential sites:
// C_j^j = chi_{jjjj},  C_j^k = chi_{kkjj} + chi_{jkkj}
template <class T>
T integrable_Cjj(const std::array<T, 8>& a, long j) {
    return chi<T>(a, j, j, j, j);
}
template <class T>
T integrable_Cjk(const std::array<T, 8>& a, long j, long k) {
    return chi<T>(a, k, k, j, j) + chi<T>(a, j, k, k, j);
}

// ---- finite-rank shape of the linearized remainder (Remark 3.3) ----

struct RemainderShape {
    int rank = 0;
    double offE_residual = 0;   // largest entry with both indices off E
    double rank_tail = 0;       // first singular value beyond the declared rank
    int declared_rank = 0;
    int E_bound = 0;            // E = span{ e^{ijx} : |j| <= E_bound }
};

inline RemainderShape linearized_remainder_shape(const WbnfData& wd, const CubicCoefficients& ad,
                                                 const SiteSet& sites, const ModeState& q,
                                                 double svd_tol = 1e-10) {
    const int J = sites.J;
    std::array<cplx, 8> ac;
    for (int i = 0; i < 8; ++i) ac[i] = ad[i];
    ModeField<cplx> chi_field = nls_field<cplx>(ac, J);
    ModeField<cplx> ups = to_double(wd.transformed);
    ModeField<cplx> f3 = to_double(wd.F3), f5 = to_double(wd.F5);

    // u = Phi^{-1}(q): reverse time-1 flows, inner transform first
    ModeState u = flow(f5, q, -1.0, 64);
    u = flow(f3, u, -1.0, 64);

    Eigen::MatrixXcd R = linearize_field(ups, q) - linearize_field(chi_field, u);
    RemainderShape rs;
    rs.E_bound = 5 * sites.sp.back();
    rs.declared_rank = 4 * (2 * rs.E_bound + 1);
    ModeState probe(J);
    for (int sig : {+1, -1})
        for (int j = -J; j <= J; ++j) {
            if (std::abs(j) <= rs.E_bound) continue;
            int row = probe.idx(sig, j);
            for (int sig2 : {+1, -1})
                for (int j2 = -J; j2 <= J; ++j2) {
                    if (std::abs(j2) <= rs.E_bound) continue;
                    rs.offE_residual = std::max(rs.offE_residual,
                                                std::abs(R(row, probe.idx(sig2, j2))));
                }
        }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
    auto sv = svd.singularValues();
    double top = sv.size() ? sv[0] : 0.0;
    for (int i = 0; i < int(sv.size()); ++i)
        if (sv[i] > svd_tol * std::max(top, 1e-300)) rs.rank = i + 1;
    if (rs.declared_rank < int(sv.size())) rs.rank_tail = sv[rs.declared_rank];
    return rs;
}

}  // namespace kamnls
