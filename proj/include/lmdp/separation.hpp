#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "divergences.hpp"

namespace lmdp {

/// Smallest row TV between two supported components, with the row where it occurs.
struct StrongSeparation {
    double delta = kInf; // +∞ when fewer than two components are supported
    int m = -1, l = -1, s = -1, a = -1;
};

inline double row_tv(const Lmdp& M, int m, int l, int s, int a) {
    auto p = M.T(m, s, a), q = M.T(l, s, a);
    double d = 0.0;
    for (int j = 0; j < M.S(); ++j) d += std::abs(p[j] - q[j]);
    return 0.5 * d;
}

inline StrongSeparation min_pairwise_tv(const Lmdp& M) {
    StrongSeparation out;
    auto act = M.active();
    for (std::size_t i = 0; i < act.size(); ++i)
        for (std::size_t j = i + 1; j < act.size(); ++j)
            for (int s = 0; s < M.S(); ++s)
                for (int a = 0; a < M.A(); ++a) {
                    double d = row_tv(M, act[i], act[j], s, a);
                    if (d < out.delta) out = {d, act[i], act[j], s, a};
                }
    return out;
}

/// Which start states decodability quantifies over.
enum class DecodeScope { all_states, initial_support };

/// Every positive-probability prefix of length N (from each start state in scope)
/// is consistent with at most one supported component.
inline bool is_n_step_decodable(const Lmdp& M, int N, DecodeScope scope = DecodeScope::all_states,
                                const Budget& budget = Budget::from_env()) {
    require(N >= 1, "N must be >= 1");
    require(M.L() <= 64, "decodability check supports at most 64 components");
    std::uint64_t full = 0;
    for (int m : M.active()) full |= 1ull << m;
    std::set<std::pair<int, std::uint64_t>> layer;
    for (int s = 0; s < M.S(); ++s) {
        if (scope == DecodeScope::initial_support) {
            bool in = false;
            for (int m : M.active()) in = in || M.nu(m)[s] > 0.0;
            if (!in) continue;
        }
        layer.insert({s, full});
    }
    std::uint64_t work = 0;
    for (int h = 1; h < N; ++h) {
        std::set<std::pair<int, std::uint64_t>> next;
        for (auto [s, set] : layer) {
            if (std::popcount(set) <= 1) continue; // already decoded, stays decoded
            for (int a = 0; a < M.A(); ++a)
                for (int s2 = 0; s2 < M.S(); ++s2) {
                    if (++work > budget.max_leaves) throw BudgetExceeded("decodability check exceeds budget");
                    std::uint64_t keep = 0;
                    for (std::uint64_t rest = set; rest; rest &= rest - 1) {
                        int m = std::countr_zero(rest);
                        if (M.t(m, s, a, s2) > 0.0) keep |= 1ull << m;
                    }
                    if (keep) next.insert({s2, keep});
                }
        }
        layer.swap(next);
    }
    for (auto [s, set] : layer)
        if (std::popcount(set) > 1) return false;
    return true;
}

/// D_B between the (h−1)-transition trajectory distributions of components m and l
/// from s_start under Markov π, for h = 1..h_max.
inline std::vector<double> db_profile_markov(const Lmdp& M, const Markov& pi, int m, int l, int s_start,
                                             int h_max) {
    require(h_max >= 1 && h_max - 1 <= pi.H, "policy must cover h_max − 1 steps");
    require(pi.S == M.S() && pi.A == M.A(), "policy shape does not match the model");
    const int S = M.S(), A = M.A();
    std::vector<double> v(S, 0.0), out;
    v[s_start] = 1.0;
    for (int h = 1; h <= h_max; ++h) {
        double bc = detail::sum(v);
        out.push_back(bc > 0.0 ? std::max(0.0, -std::log(std::min(1.0, bc))) : kInf);
        if (h == h_max) break;
        std::vector<double> nv(S, 0.0);
        for (int s = 0; s < S; ++s) {
            if (v[s] == 0.0) continue;
            for (int a = 0; a < A; ++a) {
                double pa = pi.prob(h, s, a);
                if (pa == 0.0) continue;
                for (int s2 = 0; s2 < S; ++s2) nv[s2] += v[s] * pa * std::sqrt(M.t(m, s, a, s2) * M.t(l, s, a, s2));
            }
        }
        v.swap(nv);
    }
    return out;
}

namespace detail {
/// u^{(k)}(s) = max over deterministic Markov policies of the Bhattacharyya coefficient
/// of k-transition trajectories from s; returns u^{(0)}..u^{(k_max)}.
inline std::vector<std::vector<double>> max_bc_table(const Lmdp& M, int m, int l, int k_max) {
    const int S = M.S(), A = M.A();
    std::vector<std::vector<double>> u(k_max + 1, std::vector<double>(S, 1.0));
    for (int k = 1; k <= k_max; ++k)
        for (int s = 0; s < S; ++s) {
            double best = 0.0;
            for (int a = 0; a < A; ++a) {
                double x = 0.0;
                for (int s2 = 0; s2 < S; ++s2) x += std::sqrt(M.t(m, s, a, s2) * M.t(l, s, a, s2)) * u[k - 1][s2];
                best = std::max(best, x);
            }
            u[k][s] = best;
        }
    return u;
}

inline double neg_log_bc(double bc) { return bc > 0.0 ? std::max(0.0, -std::log(std::min(1.0, bc))) : kInf; }
} // namespace detail

/// min over policies of D_B(𝕄_{m,h}(π, s), 𝕄_{l,h}(π, s)).
inline double min_db_over_policies(const Lmdp& M, int m, int l, int s, int h) {
    require(h >= 1, "h must be >= 1");
    return detail::neg_log_bc(detail::max_bc_table(M, m, l, h - 1)[h - 1][s]);
}

/// Per-step lower bounds ϖ(1..h_max) on the trajectory Bhattacharyya divergence.
struct SeparationProfile {
    std::vector<double> varpi; // varpi[h − 1]
    bool all_policies = true;

    double at(int h) const { return varpi[h - 1]; }

    /// ϖ⁻¹(x) = min{h : ϖ(h) ≥ x}, empty when not attained within h_max.
    std::optional<int> inverse(double x) const {
        for (std::size_t h = 0; h < varpi.size(); ++h)
            if (varpi[h] >= x) return static_cast<int>(h) + 1;
        return std::nullopt;
    }
};

/// ϖ(h) = min over supported m ≠ l and all start states of min_db_over_policies.
/// With fewer than two supported components every entry is +∞.
inline SeparationProfile certified_varpi(const Lmdp& M, int h_max) {
    require(h_max >= 1, "h_max must be >= 1");
    SeparationProfile out;
    out.varpi.assign(h_max, kInf);
    auto act = M.active();
    for (std::size_t i = 0; i < act.size(); ++i)
        for (std::size_t j = i + 1; j < act.size(); ++j) {
            auto u = detail::max_bc_table(M, act[i], act[j], h_max - 1);
            for (int h = 1; h <= h_max; ++h)
                for (int s = 0; s < M.S(); ++s)
                    out.varpi[h - 1] = std::min(out.varpi[h - 1], detail::neg_log_bc(u[h - 1][s]));
        }
    return out;
}

/// Profile under a fixed Markov policy (min over pairs and start states).
inline SeparationProfile varpi_under_policy(const Lmdp& M, const Markov& pi, int h_max) {
    SeparationProfile out;
    out.all_policies = false;
    out.varpi.assign(h_max, kInf);
    auto act = M.active();
    for (std::size_t i = 0; i < act.size(); ++i)
        for (std::size_t j = i + 1; j < act.size(); ++j)
            for (int s = 0; s < M.S(); ++s) {
                auto p = db_profile_markov(M, pi, act[i], act[j], s, h_max);
                for (int h = 0; h < h_max; ++h) out.varpi[h] = std::min(out.varpi[h], p[h]);
            }
    return out;
}

/// Numerical rank of the S × (S·A) matrix whose column (s, a) is T_m(· | s, a).
inline int component_rank(const Lmdp& M, int m) {
    const int S = M.S(), A = M.A();
    Eigen::MatrixXd X(S, S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2) X(s2, s * A + a) = M.t(m, s, a, s2);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-9 * sv(0)) ++r;
    return r;
}

} // namespace lmdp
