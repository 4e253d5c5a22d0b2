#pragma once

#include "kamnls/core.hpp"

namespace kamnls {

// Tangential sites S+ = {v_1 < ... < v_d} in N, their signed closure S, and
// the truncated normal sites S^c = (N \ S+) cap [1..J].
struct SiteSet {
    std::vector<int> sp;  // S+
    int J = 0;            // spatial cutoff
    int L = 0;            // angular cutoff
    std::vector<int> sc;  // S^c positive representatives

    SiteSet() = default;
    SiteSet(std::vector<int> splus, int j_cut, int l_cut) : sp(std::move(splus)), J(j_cut), L(l_cut) {
        std::sort(sp.begin(), sp.end());
        for (size_t i = 0; i < sp.size(); ++i) {
            if (sp[i] <= 0) throw KamError("sites", "sites must be positive");
            if (i && sp[i] == sp[i - 1]) throw KamError("sites", "sites must be distinct");
        }
        if (!sp.empty() && J <= sp.back()) throw KamError("sites", "J must exceed max site");
        for (int j = 1; j <= J; ++j)
            if (!in_splus(j)) sc.push_back(j);
    }
    int d() const { return int(sp.size()); }
    bool in_splus(int j) const { return std::binary_search(sp.begin(), sp.end(), j); }
    bool in_S(int j) const { return in_splus(std::abs(j)); }  // signed closure
    int site_index(int j) const {  // index of |j| in S+, -1 otherwise
        auto it = std::lower_bound(sp.begin(), sp.end(), std::abs(j));
        return (it != sp.end() && *it == std::abs(j)) ? int(it - sp.begin()) : -1;
    }
    int sc_index(int j) const {
        auto it = std::lower_bound(sc.begin(), sc.end(), std::abs(j));
        return (it != sc.end() && *it == std::abs(j)) ? int(it - sc.begin()) : -1;
    }
    int nsc() const { return int(sc.size()); }
};

}  // namespace kamnls
