#pragma once

#include <random>
#include <vector>

#include "core.hpp"
#include "separation.hpp"

namespace lmdp {

/// Dirichlet(alpha, …, alpha) sample of length n.
inline std::vector<double> random_simplex(int n, double alpha, std::mt19937_64& rng) {
    std::gamma_distribution<double> g(alpha, 1.0);
    std::vector<double> w(n);
    double s = 0.0;
    do {
        s = 0.0;
        for (double& x : w) s += (x = g(rng));
    } while (s <= 0.0);
    for (double& x : w) x /= s;
    return w;
}

/// Reward table with Σ_h max R_h = 1 (up to rounding), rewards drawn uniformly.
inline std::vector<double> random_reward(int S, int A, int H, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> R(static_cast<std::size_t>(H) * S * A);
    for (double& r : R) r = u(rng);
    for (int h = 0; h < H; ++h) {
        double mx = 0.0;
        for (int i = 0; i < S * A; ++i) mx = std::max(mx, R[h * S * A + i]);
        for (int i = 0; i < S * A; ++i) R[h * S * A + i] = R[h * S * A + i] / mx / H * (1.0 - 1e-12);
    }
    return R;
}

struct RandomLmdpSpec {
    int S = 3, A = 2, H = 4, L = 2;
    double alpha = 1.0;        // Dirichlet concentration of transition rows
    double min_row_tv = 0.0;   // resample a row tuple until all supported pairs are this far apart
    bool uniform_rho = false;
    bool shared_nu = false;
};

inline Lmdp random_lmdp(const RandomLmdpSpec& spec, std::mt19937_64& rng) {
    const int S = spec.S, A = spec.A, L = spec.L;
    std::vector<Component> comps(L);
    std::vector<double> nu0 = random_simplex(S, 1.0, rng);
    for (auto& c : comps) {
        c.nu = Dist::normalized(spec.shared_nu ? nu0 : random_simplex(S, 1.0, rng));
        c.T.assign(static_cast<std::size_t>(S) * A * S, 0.0);
    }
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            for (int attempt = 0;; ++attempt) {
                require(attempt < 100000, "random_lmdp could not meet the row separation");
                std::vector<std::vector<double>> rows;
                for (int m = 0; m < L; ++m) rows.push_back(random_simplex(S, spec.alpha, rng));
                bool ok = true;
                for (int m = 0; m < L && ok; ++m)
                    for (int l = m + 1; l < L && ok; ++l) {
                        double d = 0.0;
                        for (int j = 0; j < S; ++j) d += std::abs(rows[m][j] - rows[l][j]);
                        ok = 0.5 * d >= spec.min_row_tv;
                    }
                if (!ok) continue;
                for (int m = 0; m < L; ++m)
                    for (int j = 0; j < S; ++j) comps[m].T[(static_cast<std::size_t>(s) * A + a) * S + j] = rows[m][j];
                break;
            }
        }
    Dist rho = spec.uniform_rho ? Dist::uniform(L) : Dist::normalized(random_simplex(L, 2.0, rng));
    return Lmdp(S, A, spec.H, std::move(rho), std::move(comps), random_reward(S, A, spec.H, rng),
                {{"generator", "random"}});
}

/// Stochastic Markov policy with Dirichlet(1) action rows.
inline PolicyPtr random_markov_policy(int S, int A, int H, std::mt19937_64& rng) {
    std::vector<double> p;
    for (int i = 0; i < H * S; ++i)
        for (double x : random_simplex(A, 1.0, rng)) p.push_back(x);
    return Policy::markov(S, A, H, std::move(p));
}

/// Stochastic history-dependent policy over H steps with Dirichlet(alpha) action rows.
inline PolicyPtr random_history_policy(int S, int A, int H, std::mt19937_64& rng, double alpha = 1.0) {
    HistoryIndex idx{S, A};
    std::vector<std::vector<double>> layers(H);
    for (int h = 1; h <= H; ++h)
        for (std::uint64_t c = 0; c < idx.layer_size(h); ++c)
            for (double x : random_simplex(A, alpha, rng)) layers[h - 1].push_back(x);
    return Policy::history_tree(S, A, std::move(layers));
}

} // namespace lmdp
