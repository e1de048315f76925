#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "core.hpp"

namespace lmdp {

/// Posterior over latent indices given a prefix τ̄_h (prior ρ).
inline Dist belief(const Lmdp& M, const Trajectory& prefix) {
    require(!prefix.states.empty() && prefix.is_prefix(), "belief needs a prefix (s_1, a_1, …, s_h)");
    auto w = component_joint(M, prefix);
    double tot = detail::sum(w);
    if (tot <= 0.0) throw PreconditionError("belief: prefix has zero probability under every component");
    for (double& x : w) x /= tot;
    return Dist(std::move(w));
}

struct Decoded {
    int m = 0;
    bool tie = false; // several maximisers, or every supported score is −∞
};

/// log ρ_m + log ν_m(s_1) + Σ log T_m(s_{h+1} | s_h, a_h) for every component.
inline std::vector<double> log_scores(const Lmdp& M, const Trajectory& prefix) {
    std::vector<double> out(M.L());
    for (int m = 0; m < M.L(); ++m) {
        double sc = std::log(M.rho()[m]) + std::log(M.nu(m)[prefix.states[0]]);
        for (std::size_t i = 0; i + 1 < prefix.states.size(); ++i)
            sc += std::log(M.t(m, prefix.states[i], prefix.actions[i], prefix.states[i + 1]));
        out[m] = sc;
    }
    return out;
}

/// Maximum-likelihood latent index over supp(ρ); lowest index wins ties.
inline Decoded mle_decode(const Lmdp& M, const Trajectory& prefix) {
    require(!prefix.states.empty(), "mle_decode needs a nonempty prefix");
    auto sc = log_scores(M, prefix);
    Decoded d{-1, false};
    double best = -kInf;
    int count = 0;
    for (int m : M.active()) {
        if (d.m < 0) {
            d.m = m;
            best = sc[m];
            count = 1;
        } else if (sc[m] > best) {
            d.m = m;
            best = sc[m];
            count = 1;
        } else if (sc[m] == best) {
            ++count;
        }
    }
    d.tie = count > 1 || best == -kInf;
    return d;
}

/// e_{θ,W}(π): probability that the decode of τ̄_W differs from the true index.
inline double decoding_error_exact(const Lmdp& M, const Policy& pi, int W, const Budget& budget = Budget::from_env()) {
    require(W >= 1 && W <= M.H(), "window must be in [1, H]");
    double err = 0.0;
    detail::walk_prefixes(M, pi, W, budget,
                          [&](const Trajectory& t, const std::vector<double>& joint, double pol, const PolicyCursor&,
                              const std::vector<double>&) {
                              if (t.length() < W) return true;
                              int d = mle_decode(M, t).m;
                              double wrong = 0.0;
                              for (int m = 0; m < M.L(); ++m)
                                  if (m != d) wrong += joint[m];
                              err += pol * wrong;
                              return false;
                          });
    return err;
}

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    int n = 0;
};

/// SplitMix64 step, used to derive independent per-sample seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Monte-Carlo estimate of e_{θ,W}(π) from n simulated episodes.
inline McEstimate decoding_error_mc(const Lmdp& M, const PolicyPtr& pi, int W, int n, std::uint64_t seed) {
    require(W >= 1 && W <= M.H(), "window must be in [1, H]");
    require(n >= 1, "sample size must be positive");
    int wrong = 0;
    for (int i = 0; i < n; ++i) {
        auto t = simulate(M, pi, splitmix64(seed + static_cast<std::uint64_t>(i)));
        if (mle_decode(M, t.prefix(W)).m != t.latent) ++wrong;
    }
    McEstimate e;
    e.n = n;
    e.estimate = static_cast<double>(wrong) / n;
    e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / n);
    return e;
}

} // namespace lmdp
