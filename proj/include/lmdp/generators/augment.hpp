#pragma once

#include <vector>

#include "../model.hpp"
#include "family.hpp"

namespace lmdp {

/// M_m ⊗ μ over S × O, with (s, o) stored at index s·|O| + o:
/// T((s',o') | (s,o), a) = T_m(s' | s, a) μ(o'), initial ν_m ⊗ μ.
inline Component augment_mdp(const Lmdp& M, int m, const Dist& mu) {
    require(m >= 0 && m < M.L(), "component index out of range");
    const int S = M.S(), A = M.A(), O = static_cast<int>(mu.size());
    const int St = S * O;
    std::vector<double> T(static_cast<std::size_t>(St) * A * St, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            auto row = M.T(m, s, a);
            for (int o = 0; o < O; ++o) {
                double* out = T.data() + (static_cast<std::size_t>(s * O + o) * A + a) * St;
                for (int s2 = 0; s2 < S; ++s2) {
                    if (row[s2] == 0.0) continue;
                    for (int o2 = 0; o2 < O; ++o2) out[s2 * O + o2] = row[s2] * mu[o2];
                }
            }
        }
    std::vector<double> nu;
    nu.reserve(St);
    for (int s = 0; s < S; ++s)
        for (int o = 0; o < O; ++o) nu.push_back(M.nu(m)[s] * mu[o]);
    return {Dist(std::move(nu)), std::move(T)};
}

/// M ⊗ Q: one component M_{m(i)} ⊗ μ_i per i ∈ ∪ supp ξ_m (ascending i), weight
/// ρ_{m(i)} ξ_{m(i)}(i), reward R̃_h((s,o), a) = R_h(s, a).
inline Lmdp augment_lmdp(const Lmdp& M, const Family& Q) {
    require(Q.L() == M.L(), "family must have one mixing weight per component");
    const int O = Q.outcomes;
    std::vector<int> owner(Q.size(), -1);
    for (int m = 0; m < Q.L(); ++m)
        for (std::size_t i : Q.xi[m].support()) {
            require(owner[i] < 0, "family mixing weights must have disjoint supports");
            owner[i] = m;
        }
    std::vector<Component> comps;
    std::vector<double> rho;
    std::vector<int> origin, index;
    for (int i = 0; i < Q.size(); ++i) {
        if (owner[i] < 0) continue;
        comps.push_back(augment_mdp(M, owner[i], Q.mu[i]));
        rho.push_back(M.rho()[owner[i]] * Q.xi[owner[i]][i]);
        origin.push_back(owner[i]);
        index.push_back(i);
    }
    const int S = M.S() * O, A = M.A(), H = M.H();
    std::vector<double> R(static_cast<std::size_t>(H) * S * A);
    for (int h = 1; h <= H; ++h)
        for (int s = 0; s < M.S(); ++s)
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a) R[(static_cast<std::size_t>(h - 1) * S + s * O + o) * A + a] = M.R(h, s, a);
    nlohmann::json meta = {{"generator", "augmented"},
                           {"base", M.metadata()},
                           {"observations", O},
                           {"family_delta", Q.delta},
                           {"family_gamma", Q.gamma},
                           {"component_origin", origin},
                           {"family_index", index}};
    return Lmdp(S, A, H, Dist::normalized(std::move(rho)), std::move(comps), std::move(R), std::move(meta));
}

} // namespace lmdp
