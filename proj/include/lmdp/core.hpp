#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "budget.hpp"
#include "policy.hpp"

namespace lmdp {

/// ρ_m ν_m(s_1) Π_h T_m(s_{h+1} | s_h, a_h) for every component m.
inline std::vector<double> component_joint(const Lmdp& M, const Trajectory& t) {
    std::vector<double> w(M.L());
    for (int m = 0; m < M.L(); ++m) {
        double p = M.rho()[m] * M.nu(m)[t.states[0]];
        for (std::size_t i = 0; i + 1 < t.states.size() && p > 0.0; ++i)
            p *= M.t(m, t.states[i], t.actions[i], t.states[i + 1]);
        w[m] = p;
    }
    return w;
}

/// Probability of a trajectory or prefix under π, mixing over the latent index.
inline double traj_prob(const Lmdp& M, const Policy& pi, const Trajectory& t) {
    require(!t.states.empty() && t.length() <= M.H(), "trajectory length must be in [1, H]");
    require(t.actions.size() == t.states.size() || t.is_prefix(), "trajectory shape is inconsistent");
    double env = 0.0;
    for (double x : component_joint(M, t)) env += x;
    if (env == 0.0) return 0.0;
    return env * policy_prob(pi, M.A(), t);
}

namespace detail {

/// Depth-first walk over positive-probability prefixes τ̄_1..τ̄_depth under π.
/// The visitor receives (prefix, per-component joint, policy prob of the prefix's
/// actions, cursor, π(·|prefix)) and returns whether to expand children.
template <class Visitor>
class PrefixWalker {
public:
    PrefixWalker(const Lmdp& M, const Policy& pi, int depth, const Budget& budget, Visitor& v)
        : M_(M), pi_(pi), depth_(depth), budget_(budget), v_(v) {}

    void run() {
        const int L = M_.L();
        for (int s = 0; s < M_.S(); ++s) {
            std::vector<double> joint(L);
            bool any = false;
            for (int m = 0; m < L; ++m) {
                joint[m] = M_.rho()[m] * M_.nu(m)[s];
                any = any || joint[m] > 0.0;
            }
            if (!any) continue;
            t_.states = {s};
            t_.actions.clear();
            walk(1, joint, 1.0, PolicyCursor::start(pi_, s));
        }
    }

private:
    void walk(int h, const std::vector<double>& joint, double pol, const PolicyCursor& cur) {
        if (++visited_ > budget_.max_leaves)
            throw BudgetExceeded("history enumeration exceeds budget of " + std::to_string(budget_.max_leaves));
        const int A = M_.A(), S = M_.S(), L = M_.L();
        std::vector<double> act(A);
        cur.probs(A, act.data());
        if (!v_(t_, joint, pol, cur, act) || h >= depth_) return;
        const int s = t_.states.back();
        std::vector<double> child(L);
        for (int a = 0; a < A; ++a) {
            if (act[a] <= 0.0) continue;
            for (int s2 = 0; s2 < S; ++s2) {
                bool any = false;
                for (int m = 0; m < L; ++m) {
                    child[m] = joint[m] > 0.0 ? joint[m] * M_.t(m, s, a, s2) : 0.0;
                    any = any || child[m] > 0.0;
                }
                if (!any) continue;
                t_.actions.push_back(a);
                t_.states.push_back(s2);
                walk(h + 1, child, pol * act[a], cur.next(A, a, s2));
                t_.actions.pop_back();
                t_.states.pop_back();
            }
        }
    }

    const Lmdp& M_;
    const Policy& pi_;
    int depth_;
    const Budget& budget_;
    Visitor& v_;
    Trajectory t_;
    std::uint64_t visited_ = 0;
};

template <class Visitor>
void walk_prefixes(const Lmdp& M, const Policy& pi, int depth, const Budget& budget, Visitor&& v) {
    PrefixWalker<std::remove_reference_t<Visitor>> w(M, pi, depth, budget, v);
    w.run();
}

inline double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

} // namespace detail

/// Positive-probability trajectories (s_1, a_1, …, s_h, a_h) for h = upto, with probabilities.
struct TrajDist {
    std::vector<Trajectory> trajectories;
    std::vector<double> probs;
};

inline TrajDist traj_dist(const Lmdp& M, const Policy& pi, int upto, const Budget& budget = Budget::from_env()) {
    require(upto >= 1 && upto <= M.H(), "traj_dist length must be in [1, H]");
    TrajDist out;
    detail::walk_prefixes(M, pi, upto, budget,
                          [&](const Trajectory& t, const std::vector<double>& joint, double pol, const PolicyCursor&,
                              const std::vector<double>& act) {
                              if (t.length() < upto) return true;
                              double p = detail::sum(joint) * pol;
                              for (int a = 0; a < M.A(); ++a) {
                                  if (act[a] <= 0.0) continue;
                                  Trajectory full = t;
                                  full.actions.push_back(a);
                                  out.trajectories.push_back(std::move(full));
                                  out.probs.push_back(p * act[a]);
                              }
                              return false;
                          });
    return out;
}

/// Expected total reward V(π) = Σ_h E[R_h(s_h, a_h)].
inline double value(const Lmdp& M, const Policy& pi, const Budget& budget = Budget::from_env()) {
    if (const auto* mix = pi.get<Mixture>()) {
        double v = 0.0;
        for (std::size_t i = 0; i < mix->parts.size(); ++i)
            if (mix->weights[i] > 0.0) v += mix->weights[i] * value(M, *mix->parts[i], budget);
        return v;
    }
    double v = 0.0;
    detail::walk_prefixes(M, pi, M.H(), budget,
                          [&](const Trajectory& t, const std::vector<double>& joint, double pol, const PolicyCursor&,
                              const std::vector<double>& act) {
                              const int h = t.length(), s = t.states.back();
                              double r = 0.0;
                              for (int a = 0; a < M.A(); ++a)
                                  if (act[a] > 0.0) r += act[a] * M.R(h, s, a);
                              v += detail::sum(joint) * pol * r;
                              return true;
                          });
    return v;
}

/// Sample one episode. Seeded runs are reproducible.
inline Trajectory simulate(const Lmdp& M, const PolicyPtr& pi, std::mt19937_64& rng) {
    Trajectory t;
    std::discrete_distribution<int> pick_m(M.rho().weights().begin(), M.rho().weights().end());
    const int m = pick_m(rng);
    std::discrete_distribution<int> pick_s(M.nu(m).weights().begin(), M.nu(m).weights().end());
    int s = pick_s(rng);
    PolicyPtr resolved = resolve_mixtures(pi, rng, &t.branch);
    auto cur = PolicyCursor::start(*resolved, s);
    std::vector<double> act(M.A());
    t.latent = m;
    for (int h = 1; h <= M.H(); ++h) {
        t.states.push_back(s);
        cur.probs(M.A(), act.data());
        std::discrete_distribution<int> pick_a(act.begin(), act.end());
        const int a = pick_a(rng);
        t.actions.push_back(a);
        if (h == M.H()) break;
        auto row = M.T(m, s, a);
        std::discrete_distribution<int> pick_next(row.begin(), row.end());
        const int s2 = pick_next(rng);
        cur = cur.next(M.A(), a, s2);
        s = s2;
    }
    return t;
}

inline Trajectory simulate(const Lmdp& M, const PolicyPtr& pi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate(M, pi, rng);
}

/// Finite-horizon solution of one component MDP from step h0 on.
struct MdpSolution {
    int h0 = 1;
    std::vector<std::vector<double>> V; // V[h − h0][s], h = h0..H+1
    std::vector<std::vector<double>> Q; // Q[h − h0][s·A + a], h = h0..H
    std::vector<std::vector<int>> act;  // greedy action, lowest index on ties

    double v(int h, int s) const { return V[h - h0][s]; }
    int action(int h, int s) const { return act[h - h0][s]; }
};

inline MdpSolution mdp_value_iteration(const Lmdp& M, int m, int h0 = 1) {
    require(m >= 0 && m < M.L(), "component index out of range");
    require(h0 >= 1 && h0 <= M.H() + 1, "start step must be in [1, H+1]");
    const int S = M.S(), A = M.A(), H = M.H();
    MdpSolution out;
    out.h0 = h0;
    out.V.assign(H - h0 + 2, std::vector<double>(S, 0.0));
    out.Q.assign(H - h0 + 1, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
    out.act.assign(H - h0 + 1, std::vector<int>(S, 0));
    for (int h = H; h >= h0; --h) {
        const auto& next = out.V[h - h0 + 1];
        for (int s = 0; s < S; ++s) {
            double best = -kInf;
            for (int a = 0; a < A; ++a) {
                double q = M.R(h, s, a);
                if (h < H) {
                    auto row = M.T(m, s, a);
                    for (int s2 = 0; s2 < S; ++s2) q += row[s2] * next[s2];
                }
                out.Q[h - h0][s * A + a] = q;
                if (q > best) {
                    best = q;
                    out.act[h - h0][s] = a;
                }
            }
            out.V[h - h0][s] = best;
        }
    }
    return out;
}

/// Optimal value over all history-dependent policies with an optimal deterministic policy.
struct OptimalSolution {
    double value = 0.0;
    PolicyPtr policy;          // deterministic HistoryTree over H steps
    std::vector<double> root;  // V*(τ̄_1) for every s_1 (0 when unreachable)
};

/// Exhaustive backward induction over the full history tree.
inline OptimalSolution brute_force_optimal(const Lmdp& M, const Budget& budget = Budget::from_env()) {
    const int S = M.S(), A = M.A(), H = M.H(), L = M.L();
    HistoryIndex idx{S, A};
    budget.check_power(static_cast<std::uint64_t>(S) * A, H, 1, "brute_force_optimal history tree");
    std::vector<std::vector<double>> layers(H);
    for (int h = 1; h <= H; ++h) {
        layers[h - 1].assign(idx.layer_size(h) * A, 0.0);
        for (std::uint64_t c = 0; c < idx.layer_size(h); ++c) layers[h - 1][c * A] = 1.0;
    }
    // J(τ̄_h) = max_a [R_h(s_h, a)·Z(τ̄_h) + Σ_{s'} J(τ̄_h, a, s')], Z the unnormalised prefix mass.
    auto J = [&](auto&& self, int h, std::uint64_t code, const std::vector<double>& joint) -> double {
        const int s = idx.last_state(code);
        const double Z = detail::sum(joint);
        double best = -kInf;
        int best_a = 0;
        std::vector<double> child(L);
        for (int a = 0; a < A; ++a) {
            double q = M.R(h, s, a) * Z;
            if (h < H) {
                for (int s2 = 0; s2 < S; ++s2) {
                    bool any = false;
                    for (int m = 0; m < L; ++m) {
                        child[m] = joint[m] > 0.0 ? joint[m] * M.t(m, s, a, s2) : 0.0;
                        any = any || child[m] > 0.0;
                    }
                    if (any) q += self(self, h + 1, idx.child(code, a, s2), child);
                }
            }
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        auto& row = layers[h - 1];
        row[code * A] = 0.0;
        row[code * A + best_a] = 1.0;
        return best;
    };
    OptimalSolution out;
    out.root.assign(S, 0.0);
    for (int s = 0; s < S; ++s) {
        std::vector<double> joint(L);
        for (int m = 0; m < L; ++m) joint[m] = M.rho()[m] * M.nu(m)[s];
        double Z = detail::sum(joint);
        if (Z <= 0.0) continue;
        double j = J(J, 1, static_cast<std::uint64_t>(s), joint);
        out.value += j;
        out.root[s] = j / Z;
    }
    out.policy = Policy::history_tree(S, A, std::move(layers));
    return out;
}

/// Optimal value by backward induction over (step, state, belief), merging
/// histories whose beliefs agree after rounding to 2^-40. Exact up to that rounding;
/// scales to large observation spaces where the history tree does not fit.
inline double optimal_value_belief_dp(const Lmdp& M, const Budget& budget = Budget::from_env()) {
    const int S = M.S(), A = M.A(), H = M.H(), L = M.L();
    // Last step: value max_a R_H(s, a) does not depend on the belief.
    std::vector<double> gH(S, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) gH[s] = std::max(gH[s], M.R(H, s, a));
    // E[m][s·A + a] = Σ_{s'} T_m(s'|s,a) gH(s')
    std::vector<std::vector<double>> E(L, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
    for (int m = 0; m < L; ++m)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double e = 0.0;
                auto row = M.T(m, s, a);
                for (int s2 = 0; s2 < S; ++s2) e += row[s2] * gH[s2];
                E[m][s * A + a] = e;
            }
    // Successor states reachable from (s, a) under some component.
    std::vector<std::vector<int>> succ(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2)
                for (int m = 0; m < L; ++m)
                    if (M.t(m, s, a, s2) > 0.0) {
                        succ[s * A + a].push_back(s2);
                        break;
                    }

    auto penultimate = [&](int s, const std::vector<double>& b) {
        double best = -kInf;
        for (int a = 0; a < A; ++a) {
            double q = M.R(H - 1, s, a);
            for (int m = 0; m < L; ++m) q += b[m] * E[m][s * A + a];
            best = std::max(best, q);
        }
        return best;
    };

    struct KeyHash {
        std::size_t operator()(const std::vector<std::int64_t>& k) const {
            std::uint64_t h = 1469598103934665603ull;
            for (auto x : k) h = (h ^ static_cast<std::uint64_t>(x)) * 1099511628211ull;
            return static_cast<std::size_t>(h);
        }
    };
    std::vector<std::unordered_map<std::vector<std::int64_t>, double, KeyHash>> memo(H + 1);
    std::uint64_t entries = 0;
    const double scale = std::ldexp(1.0, 40);

    auto V = [&](auto&& self, int h, int s, const std::vector<double>& b) -> double {
        if (h == H) return gH[s];
        if (h == H - 1) return penultimate(s, b);
        std::vector<std::int64_t> key(L + 1);
        key[0] = s;
        for (int m = 0; m < L; ++m) key[m + 1] = std::llround(b[m] * scale);
        auto it = memo[h].find(key);
        if (it != memo[h].end()) return it->second;
        if (++entries > budget.max_leaves)
            throw BudgetExceeded("belief DP exceeds budget of " + std::to_string(budget.max_leaves));
        double best = -kInf;
        std::vector<double> nb(L);
        for (int a = 0; a < A; ++a) {
            double q = M.R(h, s, a);
            for (int s2 : succ[s * A + a]) {
                double p = 0.0;
                for (int m = 0; m < L; ++m) {
                    nb[m] = b[m] * M.t(m, s, a, s2);
                    p += nb[m];
                }
                if (p <= 0.0) continue;
                for (double& x : nb) x /= p;
                q += p * self(self, h + 1, s2, nb);
            }
            best = std::max(best, q);
        }
        memo[h].emplace(std::move(key), best);
        return best;
    };

    double total = 0.0;
    for (int s = 0; s < S; ++s) {
        std::vector<double> b(L);
        double p = 0.0;
        for (int m = 0; m < L; ++m) {
            b[m] = M.rho()[m] * M.nu(m)[s];
            p += b[m];
        }
        if (p <= 0.0) continue;
        for (double& x : b) x /= p;
        total += p * V(V, 1, s, b);
    }
    return total;
}

} // namespace lmdp
