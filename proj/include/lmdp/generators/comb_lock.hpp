#pragma once

#include <optional>
#include <string>
#include <vector>

#include "../model.hpp"

namespace lmdp {

/// State layout of comb_lock: 0 is the sink s⊖, h = 1..n is s⊕,h.
namespace comb {
inline constexpr int sink = 0;
inline int good(int h) { return h; }
} // namespace comb

namespace detail {
inline void set_row(std::vector<double>& T, int S, int A, int s, int a, int s2) {
    T[(static_cast<std::size_t>(s) * A + a) * S + s2] = 1.0;
}

inline std::vector<double> lock_reward(int S, int A, int H, int state, int step) {
    std::vector<double> R(static_cast<std::size_t>(H) * S * A, 0.0);
    if (step <= H)
        for (int a = 0; a < A; ++a) R[(static_cast<std::size_t>(step - 1) * S + state) * A + a] = 1.0;
    return R;
}

inline void check_theta(const std::vector<int>& theta, int n, int A) {
    require(static_cast<int>(theta.size()) == n - 1, "lock code must have n − 1 actions");
    for (int a : theta) require(a >= 0 && a < A, "lock code action out of range");
}
} // namespace detail

/// Combination lock M_θ with n latent components, uniform mixing, start s⊕,1 and
/// reward 1 for being in s⊕,n at step n+1. theta holds 𝐚_1..𝐚_{n−1}.
inline Lmdp comb_lock(int n, int A, int H, const std::vector<int>& theta) {
    require(n >= 2 && A >= 2, "combination lock needs n >= 2 and A >= 2");
    require(H >= n + 1, "combination lock needs H >= n + 1");
    detail::check_theta(theta, n, A);
    const int S = n + 1;
    std::vector<Component> comps;
    for (int m = 1; m <= n; ++m) {
        std::vector<double> T(static_cast<std::size_t>(S) * A * S, 0.0);
        for (int a = 0; a < A; ++a) detail::set_row(T, S, A, comb::sink, a, comb::sink);
        for (int h = 1; h <= n; ++h)
            for (int a = 0; a < A; ++a) {
                int to;
                if (m == 1) {
                    to = h == n ? comb::good(n) : (a == theta[h - 1] ? comb::good(h + 1) : comb::sink);
                } else if (h < m - 1) {
                    to = comb::good(h + 1);
                } else if (h == m - 1) {
                    to = a == theta[h - 1] ? comb::sink : comb::good(m);
                } else if (h < n) {
                    to = a == theta[h - 1] ? comb::good(h + 1) : comb::sink;
                } else {
                    to = comb::sink;
                }
                detail::set_row(T, S, A, comb::good(h), a, to);
            }
        comps.push_back({Dist::point(S, comb::good(1)), std::move(T)});
    }
    nlohmann::json meta = {{"generator", "comb-lock"}, {"n", n}, {"theta", theta}};
    return Lmdp(S, A, H, Dist::uniform(n), std::move(comps), detail::lock_reward(S, A, H, comb::good(n), n + 1),
                std::move(meta));
}

/// Reference lock M_θ̄: identical components, s⊕,h advances with probability (n−h)/(n−h+1).
inline Lmdp comb_lock_reference(int n, int A, int H) {
    require(n >= 2 && A >= 1, "combination lock needs n >= 2");
    require(H >= n + 1, "combination lock needs H >= n + 1");
    const int S = n + 1;
    std::vector<double> T(static_cast<std::size_t>(S) * A * S, 0.0);
    for (int a = 0; a < A; ++a) {
        detail::set_row(T, S, A, comb::sink, a, comb::sink);
        for (int h = 1; h <= n; ++h) {
            double stay = static_cast<double>(n - h) / (n - h + 1);
            if (h < n) T[(static_cast<std::size_t>(comb::good(h)) * A + a) * S + comb::good(h + 1)] = stay;
            T[(static_cast<std::size_t>(comb::good(h)) * A + a) * S + comb::sink] = 1.0 - stay;
        }
    }
    std::vector<Component> comps(n, Component{Dist::point(S, comb::good(1)), T});
    nlohmann::json meta = {{"generator", "comb-lock-reference"}, {"n", n}};
    return Lmdp(S, A, H, Dist::uniform(n), std::move(comps), detail::lock_reward(S, A, H, comb::good(n), n + 1),
                std::move(meta));
}

/// Indices of the decodable lock's states.
struct DecodableLockLayout {
    int n = 0, k = 0;
    int good(int i) const { return i + k - 1; }                 // s⊕,i, −k+1 ≤ i ≤ n+k
    int bad(int i) const { return (n + 2 * k) + (i - 2); }      // s⊖,i, 2 ≤ i ≤ n+k
    int terminal(int m) const { return (n + 2 * k) + (n + k - 1) + (m - 1); } // m = 1..n
    int S() const { return 3 * (n + k) - 1; }
};

/// N-step decodable variant of the lock: k = N − n padding states before s⊕,1,
/// a chain of sink states s⊖,i that ends in a component-specific terminal state.
inline Lmdp comb_lock_decodable(int N, int n, int A, std::optional<std::vector<int>> theta_opt = std::nullopt) {
    require(n >= 2 && A >= 2 && N >= n, "decodable lock needs N >= n >= 2 and A >= 2");
    std::vector<int> theta = theta_opt ? *theta_opt : std::vector<int>(n - 1, 0);
    detail::check_theta(theta, n, A);
    DecodableLockLayout lay{n, N - n};
    const int k = lay.k, S = lay.S();
    const int H = std::max(n + 2 * k, n + k + 1);
    std::vector<Component> comps;
    for (int m = 1; m <= n; ++m) {
        std::vector<double> T(static_cast<std::size_t>(S) * A * S, 0.0);
        auto fall = [&](int i) { return i <= n + k ? lay.bad(i) : lay.terminal(m); };
        for (int a = 0; a < A; ++a) {
            for (int i = -k + 1; i <= 0; ++i) detail::set_row(T, S, A, lay.good(i), a, lay.good(i + 1));
            for (int i = n + 1; i <= n + k; ++i)
                detail::set_row(T, S, A, lay.good(i), a, i < n + k ? lay.good(i + 1) : lay.terminal(m));
            for (int i = 2; i <= n + k; ++i)
                detail::set_row(T, S, A, lay.bad(i), a, i < n + k ? lay.bad(i + 1) : lay.terminal(m));
            for (int j = 1; j <= n; ++j) detail::set_row(T, S, A, lay.terminal(j), a, lay.terminal(m));
            for (int h = 1; h <= n; ++h) {
                int to;
                if (m == 1) {
                    to = h == n ? lay.good(n) : (a == theta[h - 1] ? lay.good(h + 1) : fall(h + 1));
                } else if (h < m - 1) {
                    to = lay.good(h + 1);
                } else if (h == m - 1) {
                    to = a == theta[h - 1] ? fall(m) : lay.good(m);
                } else if (h < n) {
                    to = a == theta[h - 1] ? lay.good(h + 1) : fall(h + 1);
                } else {
                    to = fall(n + 1);
                }
                detail::set_row(T, S, A, lay.good(h), a, to);
            }
        }
        comps.push_back({Dist::point(S, lay.good(-k + 1)), std::move(T)});
    }
    nlohmann::json meta = {{"generator", "comb-lock-decodable"}, {"N", N}, {"n", n}, {"theta", theta}};
    return Lmdp(S, A, H, Dist::uniform(n), std::move(comps),
                detail::lock_reward(S, A, H, lay.good(n), n + k + 1), std::move(meta));
}

} // namespace lmdp
