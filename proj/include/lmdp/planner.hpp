#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "inference.hpp"
#include "separation.hpp"

namespace lmdp {

/// How the value at the end of the window is stitched from the per-component tails.
enum class StitchRule {
    decoded_only, // ℙ(m̂ | τ̄_W) · V̂_{m̂,W}(s_W) with m̂ the decoded index
    full_mixture  // Σ_m ℙ(m | τ̄_W) · V̂_{m,W}(s_W)
};

struct PlanOptions {
    StitchRule stitch = StitchRule::decoded_only;
    bool keep_q = false; // also store Q̂(τ̄_h, a) for the head
    Budget budget = Budget::from_env();
};

/// Output of short-memory planning: a history-dependent head below step W,
/// a decoder on τ̄_W, and per-component Markov tails from step W on.
struct PlannerPolicy {
    int S = 0, A = 0, H = 0, L = 0, W = 1;
    std::vector<MdpSolution> tails;              // tails[m], valid for h ≥ W
    std::vector<int> decoder;                    // decoder[code(τ̄_W)]
    std::vector<std::vector<int>> head;          // head[h − 1][code(τ̄_h)], h < W
    std::vector<std::vector<double>> head_value; // V̂(τ̄_h), h = 1..W
    std::vector<std::vector<double>> head_q;     // Q̂(τ̄_h, a) at [h − 1][code·A + a] when requested
    double certificate = 0.0;                    // E_{s_1}[V̂(τ̄_1)]

    /// Action at prefix τ̄_h (deterministic).
    int action(const Trajectory& prefix) const {
        HistoryIndex idx{S, A};
        const int h = prefix.length();
        if (h < W) return head[h - 1][idx.encode(prefix, h)];
        int m = decoder[idx.encode(prefix, W)];
        return tails[m].action(h, prefix.states.back());
    }

    /// Materialise as a HistoryTree over all H steps.
    PolicyPtr to_policy(const Budget& budget = Budget::from_env()) const {
        HistoryIndex idx{S, A};
        budget.check_power(static_cast<std::uint64_t>(S) * A, H, 1, "planner policy materialisation");
        std::vector<std::vector<double>> layers(H);
        for (int h = 1; h <= H; ++h) {
            const auto n = idx.layer_size(h);
            auto& layer = layers[h - 1];
            layer.assign(n * A, 0.0);
            for (std::uint64_t c = 0; c < n; ++c) {
                int a;
                if (h < W) {
                    a = head[h - 1][c];
                } else {
                    int m = decoder[idx.ancestor(c, h, W)];
                    a = tails[m].action(h, idx.last_state(c));
                }
                layer[c * A + a] = 1.0;
            }
        }
        return Policy::history_tree(S, A, std::move(layers));
    }
};

/// Smallest W with ϖ(W) ≥ log(L/ε); empty when no window up to H is certified.
inline std::optional<int> choose_window(const Lmdp& M, double epsilon) {
    require(epsilon > 0.0, "epsilon must be positive");
    auto prof = certified_varpi(M, M.H());
    return prof.inverse(std::log(static_cast<double>(M.L()) / epsilon));
}

inline PlannerPolicy plan(const Lmdp& M, int W, const PlanOptions& opt = {}) {
    require(W >= 1 && W <= M.H(), "window must be in [1, H]");
    const int S = M.S(), A = M.A(), L = M.L();
    HistoryIndex idx{S, A};
    opt.budget.check_power(static_cast<std::uint64_t>(S) * A, W - 1, S, "planner history head");

    PlannerPolicy P;
    P.S = S;
    P.A = A;
    P.H = M.H();
    P.L = L;
    P.W = W;
    for (int m = 0; m < L; ++m) P.tails.push_back(mdp_value_iteration(M, m, W));

    const int fallback = M.active().front();
    P.decoder.assign(idx.layer_size(W), fallback);
    P.head.resize(W - 1);
    P.head_value.resize(W);
    for (int h = 1; h <= W; ++h) {
        P.head_value[h - 1].assign(idx.layer_size(h), 0.0);
        if (h < W) P.head[h - 1].assign(idx.layer_size(h), 0);
    }
    if (opt.keep_q) {
        P.head_q.resize(W - 1);
        for (int h = 1; h < W; ++h) P.head_q[h - 1].assign(idx.layer_size(h) * A, 0.0);
    }

    Trajectory t;
    // Returns V̂(τ̄_h) for a reachable prefix with unnormalised component masses `joint`.
    auto visit = [&](auto&& self, int h, std::uint64_t code, const std::vector<double>& joint) -> double {
        const double Z = detail::sum(joint);
        const int s = t.states.back();
        double v;
        if (h == W) {
            int d = mle_decode(M, t).m;
            P.decoder[code] = d;
            if (opt.stitch == StitchRule::decoded_only) {
                v = joint[d] / Z * P.tails[d].v(W, s);
            } else {
                v = 0.0;
                for (int m = 0; m < L; ++m) v += joint[m] / Z * P.tails[m].v(W, s);
            }
        } else {
            double best = -kInf;
            int best_a = 0;
            std::vector<double> child(L);
            for (int a = 0; a < A; ++a) {
                double q = M.R(h, s, a);
                for (int s2 = 0; s2 < S; ++s2) {
                    double p = 0.0;
                    for (int m = 0; m < L; ++m) {
                        child[m] = joint[m] > 0.0 ? joint[m] * M.t(m, s, a, s2) : 0.0;
                        p += child[m];
                    }
                    if (p <= 0.0) continue;
                    t.actions.push_back(a);
                    t.states.push_back(s2);
                    q += p / Z * self(self, h + 1, idx.child(code, a, s2), child);
                    t.actions.pop_back();
                    t.states.pop_back();
                }
                if (opt.keep_q) P.head_q[h - 1][code * A + a] = q;
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            P.head[h - 1][code] = best_a;
            v = best;
        }
        P.head_value[h - 1][code] = v;
        return v;
    };

    for (int s = 0; s < S; ++s) {
        std::vector<double> joint(L);
        for (int m = 0; m < L; ++m) joint[m] = M.rho()[m] * M.nu(m)[s];
        const double Z = detail::sum(joint);
        if (Z <= 0.0) continue;
        t.states = {s};
        t.actions.clear();
        P.certificate += Z * visit(visit, 1, static_cast<std::uint64_t>(s), joint);
    }
    return P;
}

/// Plan with the window picked by choose_window.
inline PlannerPolicy plan_for_epsilon(const Lmdp& M, double epsilon, const PlanOptions& opt = {}) {
    auto W = choose_window(M, epsilon);
    if (!W) throw NumericalError("no certified window <= H for epsilon = " + std::to_string(epsilon));
    return plan(M, *W, opt);
}

} // namespace lmdp
