#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "../model.hpp"
#include "augment.hpp"
#include "family.hpp"

namespace lmdp {

/// CNF formula over variables 1..n; a literal is +v or −v.
struct Cnf {
    int n = 0;
    std::vector<std::vector<int>> clauses;
};

/// Exhaustive 2^n satisfiability check.
inline bool satisfiable(const Cnf& f) {
    require(f.n >= 1 && f.n <= 30, "satisfiable supports 1 <= n <= 30");
    for (std::uint64_t x = 0; x < (1ull << f.n); ++x) {
        bool all = true;
        for (const auto& c : f.clauses) {
            bool sat = false;
            for (int lit : c) {
                bool val = (x >> (std::abs(lit) - 1)) & 1u;
                if ((lit > 0) == val) {
                    sat = true;
                    break;
                }
            }
            if (!sat) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

/// 3SAT gadget: H = ⌈n/w⌉ + 1, states s⊖^1..s⊖^{H−1} (indices 0..H−2) and s⊕ (index H−1),
/// actions are w-bit assignments (bit j−1 is a[j]), one component per clause.
/// At s⊖^h the block of variables w(h−1)+1..wh is assigned; a satisfied clause moves to s⊕.
inline Lmdp sat_to_lmdp(const Cnf& f, int w) {
    require(f.n >= 1 && w >= 1 && w <= 16, "sat_to_lmdp needs n >= 1 and 1 <= w <= 16");
    require(!f.clauses.empty(), "formula needs at least one clause");
    for (const auto& c : f.clauses)
        for (int lit : c) require(lit != 0 && std::abs(lit) <= f.n, "literal out of range");
    const int H = (f.n + w - 1) / w + 1, S = H, A = 1 << w, plus = H - 1;
    std::vector<Component> comps;
    for (const auto& c : f.clauses) {
        std::vector<double> T(static_cast<std::size_t>(S) * A * S, 0.0);
        auto set = [&](int s, int a, int s2) { T[(static_cast<std::size_t>(s) * A + a) * S + s2] = 1.0; };
        for (int a = 0; a < A; ++a) set(plus, a, plus);
        for (int h = 1; h <= H - 1; ++h)
            for (int a = 0; a < A; ++a) {
                bool hit = false;
                for (int j = 1; j <= w && !hit; ++j) {
                    const int var = w * (h - 1) + j;
                    const bool bit = (a >> (j - 1)) & 1;
                    for (int lit : c)
                        if (std::abs(lit) == var && (lit > 0) == bit) hit = true;
                }
                set(h - 1, a, hit ? plus : std::min(h + 1, H - 1) - 1);
            }
        comps.push_back({Dist::point(S, 0), std::move(T)});
    }
    std::vector<double> R(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int a = 0; a < A; ++a) R[(static_cast<std::size_t>(H - 1) * S + plus) * A + a] = 1.0;
    nlohmann::json meta = {{"generator", "sat"}, {"n", f.n}, {"w", w}, {"clauses", f.clauses}};
    return Lmdp(S, A, H, Dist::uniform(f.clauses.size()), std::move(comps), std::move(R), std::move(meta));
}

/// δ-strongly separated embedding: each clause m splits into two components
/// M_m ⊗ Q_{+δ̄x_m} and M_m ⊗ Q_{−δ̄x_m} (δ̄ = 4δ) with x_m from a symmetric packing.
inline Lmdp sat_to_separated_lmdp(const Cnf& f, int w, double delta) {
    require(delta > 0.0 && delta <= 0.25, "delta must be in (0, 1/4]");
    Lmdp base = sat_to_lmdp(f, w);
    const int N = base.L();
    const int d = static_cast<int>(std::ceil(11.0 * std::log(2.0 * N)));
    auto xs = greedy_packing(N, d, true);
    const double dbar = 4.0 * delta;
    Family Q;
    Q.outcomes = 2 * d;
    Q.H = base.H();
    Q.delta = delta;
    for (int m = 0; m < N; ++m) {
        Point plus(d), minus(d);
        for (int j = 0; j < d; ++j) {
            plus[j] = dbar * xs[m][j];
            minus[j] = -dbar * xs[m][j];
        }
        Q.mu.push_back(qx_dist(plus));
        Q.mu.push_back(qx_dist(minus));
        std::vector<double> xi(2 * N, 0.0);
        xi[2 * m] = 0.5;
        xi[2 * m + 1] = 0.5;
        Q.xi.push_back(Dist(std::move(xi)));
    }
    Lmdp out = augment_lmdp(base, Q);
    out.metadata()["generator"] = "sat-separated";
    out.metadata()["delta"] = delta;
    out.metadata()["d"] = d;
    return out;
}

} // namespace lmdp
