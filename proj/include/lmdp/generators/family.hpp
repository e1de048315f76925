#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "../budget.hpp"
#include "../divergences.hpp"

namespace lmdp {

using Point = std::vector<double>;

/// Q_x over [2d]: outcome 2i is (1 + x_i)/2d, outcome 2i+1 is (1 − x_i)/2d.
inline Dist qx_dist(const Point& x) {
    require(!x.empty(), "qx_dist needs d >= 1");
    const double d = static_cast<double>(x.size());
    std::vector<double> w;
    w.reserve(2 * x.size());
    for (double xi : x) {
        require(xi >= -1.0 && xi <= 1.0, "qx_dist needs x in [-1, 1]^d");
        w.push_back((1.0 + xi) / (2.0 * d));
        w.push_back((1.0 - xi) / (2.0 * d));
    }
    return Dist(std::move(w));
}

inline double l1_distance(const Point& x, const Point& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s;
}

/// Greedy sieve over {−1,1}^d in Gray-code order: keep the first surviving vector,
/// drop everything within ℓ1 distance < d/2 of it (and, when symmetric, of its
/// negation), repeat until N vectors are kept.
inline std::vector<Point> greedy_packing(int N, int d, bool symmetric = false) {
    require(N >= 1 && d >= 1, "greedy_packing needs N, d >= 1");
    require(d <= 62, "greedy_packing supports d <= 62");
    const double need = std::ceil(11.0 * std::log(symmetric ? 2.0 * N : static_cast<double>(N)));
    require(d >= need, "greedy_packing needs d >= ceil(11 log N) (" + std::to_string(static_cast<int>(need)) + ")");
    // ‖x − y‖₁ = 2·popcount(x ⊕ y) for sign vectors encoded as bit masks.
    std::vector<std::uint64_t> kept;
    const std::uint64_t total = 1ull << d;
    for (std::uint64_t i = 0; i < total && static_cast<int>(kept.size()) < N; ++i) {
        const std::uint64_t y = i ^ (i >> 1);
        bool ok = true;
        for (std::uint64_t x : kept) {
            const int ham = std::popcount(x ^ y);
            if (4 * ham < d || (symmetric && 4 * (d - ham) < d)) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(y);
    }
    if (static_cast<int>(kept.size()) < N) throw NumericalError("greedy_packing: hypercube exhausted before N vectors");
    std::vector<Point> out;
    for (std::uint64_t x : kept) {
        Point p(d);
        for (int j = 0; j < d; ++j) p[j] = (x >> j) & 1u ? -1.0 : 1.0;
        out.push_back(std::move(p));
    }
    return out;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

/// Exponent vectors 𝐤 ∈ ℕ^d with |𝐤| ≤ max_degree, graded then lexicographic.
inline std::vector<std::vector<int>> monomials(int d, int max_degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> k(d, 0);
    for (int deg = 0; deg <= max_degree; ++deg) {
        auto rec = [&](auto&& self, int j, int left) -> void {
            if (j == d - 1) {
                k[j] = left;
                out.push_back(k);
                return;
            }
            for (int e = left; e >= 0; --e) {
                k[j] = e;
                self(self, j + 1, left - e);
            }
        };
        rec(rec, 0, deg);
    }
    return out;
}

inline double monomial_value(const Point& x, const std::vector<int>& k) {
    double v = 1.0;
    for (std::size_t j = 0; j < k.size(); ++j) v *= std::pow(x[j], k[j]);
    return v;
}

struct MomentMatch {
    Dist xi0, xi1;
    double residual = 0.0; // ‖X v‖₂ / ‖X‖_F of the certified null vector
    int equations = 0;
};

/// Disjoint-support ξ0, ξ1 over the points whose moments agree up to order K−1.
inline MomentMatch moment_matching(const std::vector<Point>& xs, int K) {
    require(K >= 1 && !xs.empty(), "moment_matching needs K >= 1 and points");
    const int d = static_cast<int>(xs.front().size());
    const auto mons = monomials(d, K - 1);
    const int rows = static_cast<int>(mons.size()), N = static_cast<int>(xs.size());
    require(N >= rows + 1, "moment_matching needs N >= C(K+d-1, d) + 1 points");
    Eigen::MatrixXd X(rows, N);
    for (int r = 0; r < rows; ++r)
        for (int i = 0; i < N; ++i) X(r, i) = monomial_value(xs[i], mons[r]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeFullV);
    Eigen::VectorXd v = svd.matrixV().col(N - 1);
    Eigen::Index big = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(big))) big = i;
    if (v(big) < 0.0) v = -v;
    const double scale = std::max(X.norm(), 1e-300);
    const double res = (X * v).norm() / scale;
    if (res > 1e-9) throw NumericalError("moment_matching: null vector residual too large");
    std::vector<double> p(N), q(N);
    double V = 0.0;
    for (int i = 0; i < N; ++i) {
        p[i] = std::max(v(i), 0.0);
        q[i] = std::max(-v(i), 0.0);
        V += p[i];
    }
    if (V <= 0.0) throw NumericalError("moment_matching: degenerate null vector");
    return {Dist::normalized(std::move(p)), Dist::normalized(std::move(q)), res, rows};
}

/// Collection μ_1..μ_{L'} over [outcomes] with mixing weights ξ_1..ξ_L over [L'].
struct Family {
    int outcomes = 0;
    int H = 1;
    double delta = 0.0; // certified pairwise TV lower bound
    double gamma = 0.0; // certified bound on TV(Q_k, Q_1)
    int K = 0;          // moments matched up to order K − 1 (base families)
    std::vector<Dist> mu;
    std::vector<Dist> xi;
    std::vector<Point> points; // x_i with μ_i = Q_{x_i} (base families only)

    int L() const { return static_cast<int>(xi.size()); }
    int size() const { return static_cast<int>(mu.size()); }

    /// Keep the first L mixing weights; the result is still a family.
    Family truncate(int L) const {
        require(L >= 1 && L <= this->L(), "truncate: L out of range");
        Family f = *this;
        f.xi.resize(L);
        return f;
    }
};

/// Bound Σ_{k=K}^{H} (e H δ∞² / K)^k on TV² between the moment-matched mixtures.
inline double moment_tail_bound(int H, int K, double delta_inf) {
    double s = 0.0;
    const double r = std::numbers::e * H * delta_inf * delta_inf / K;
    for (int k = K; k <= H; ++k) s += std::pow(r, k);
    return s;
}

inline Family family_from_points(std::vector<Point> xs, int K, int H, double delta, double gamma) {
    auto mm = moment_matching(xs, K);
    Family f;
    f.outcomes = static_cast<int>(2 * xs.front().size());
    f.H = H;
    f.delta = delta;
    f.gamma = gamma;
    f.K = K;
    for (const auto& x : xs) f.mu.push_back(qx_dist(x));
    f.xi = {mm.xi0, mm.xi1};
    f.points = std::move(xs);
    return f;
}

/// (2^r, H, δ, r·γ, N^r)-family: ξ̃_m = ξ_{m_r} ⊗ … ⊗ ξ_{m_1}, μ̃_𝐤 = μ_{k_1} ⊗ … ⊗ μ_{k_r}.
inline Family tensor_family(const Family& base, int r) {
    require(base.L() == 2, "tensor_family needs a 2-family");
    require(r >= 1 && r <= 16, "tensor_family needs 1 <= r <= 16");
    if (r == 1) return base;
    const int N = base.size();
    Family f;
    f.H = base.H;
    f.delta = base.delta;
    f.gamma = r * base.gamma;
    f.K = base.K;
    f.outcomes = static_cast<int>(std::pow(base.outcomes, r));
    std::vector<int> k(r, 0);
    const long total = static_cast<long>(std::pow(N, r));
    for (long idx = 0; idx < total; ++idx) {
        long rest = idx;
        for (int j = r - 1; j >= 0; --j) {
            k[j] = static_cast<int>(rest % N);
            rest /= N;
        }
        std::vector<Dist> parts;
        for (int j = 0; j < r; ++j) parts.push_back(base.mu[k[j]]);
        f.mu.push_back(product_dist(parts));
    }
    for (int m = 0; m < (1 << r); ++m) {
        std::vector<Dist> parts;
        for (int j = r - 1; j >= 0; --j) parts.push_back(base.xi[(m >> j) & 1]);
        f.xi.push_back(product_dist(parts));
    }
    return f;
}

/// Procedure of the computable-family lemma: packing, δ̄ = 4δ scaling, moment matching
/// with K = ⌈d/60⌉, then r-fold tensoring. γ certificate r·2^{−(K−1)/2}.
inline Family make_family(int r, int d, int H, double delta) {
    require(r >= 1 && H >= 1, "make_family needs r, H >= 1");
    require(delta > 0.0 && delta <= 0.25, "make_family needs delta in (0, 1/4]");
    require(d >= 480.0 * std::numbers::e * H * delta * delta, "make_family needs d >= 480 e H delta^2");
    const int K = (d + 59) / 60;
    const int N = static_cast<int>(binomial(K + d - 1, d)) + 1;
    auto xs = greedy_packing(N, d);
    const double dbar = 4.0 * delta;
    for (auto& x : xs)
        for (double& v : x) v *= dbar;
    auto base = family_from_points(std::move(xs), K, H, delta, std::pow(2.0, -(K - 1) / 2.0));
    return tensor_family(base, r);
}

namespace detail {
/// N points of the axis grid on [−δ∞, δ∞]^d with spacing `step`, spread through the grid.
inline std::vector<Point> grid_packing(int N, int d, double delta_inf, double step) {
    const long per = static_cast<long>(std::floor(2.0 * delta_inf / step + 1e-12)) + 1;
    const double total = std::pow(static_cast<double>(per), d);
    if (total < N) throw NumericalError("grid packing has fewer than N points");
    const long G = static_cast<long>(total);
    std::vector<Point> out;
    for (int j = 0; j < N; ++j) {
        long idx = N == 1 ? 0 : static_cast<long>((static_cast<long double>(j) * (G - 1)) / (N - 1));
        Point p(d);
        for (int c = d - 1; c >= 0; --c) {
            p[c] = -delta_inf + step * static_cast<double>(idx % per);
            idx /= per;
        }
        out.push_back(std::move(p));
    }
    return out;
}
} // namespace detail

/// Preset (a): δ∞ = 1, K = H + 1, d = ⌈4e²δH⌉. γ = 0.
inline Family family_preset_a(double delta, int H) {
    const double e2 = std::exp(2.0);
    require(H >= 1 && delta > 0.0 && delta <= 1.0 / (4.0 * e2), "preset (a) needs delta in (0, 1/(4e^2)]");
    const int d = static_cast<int>(std::ceil(4.0 * e2 * delta * H));
    const int K = H + 1;
    const int N = static_cast<int>(binomial(K + d - 1, d)) + 1;
    auto xs = detail::grid_packing(N, d, 1.0, 2.0 * d * delta);
    return family_from_points(std::move(xs), K, H, delta, 0.0);
}

/// Preset (b): K = ⌈λd⌉, δ∞ = 2e²δ(λ+1); γ = sqrt of the moment tail bound (≤ 4e^{−λd}).
inline Family family_preset_b(double delta, int H, double lambda, int d) {
    const double e2 = std::exp(2.0);
    require(H >= 1 && delta > 0.0 && delta <= 1.0 / (4.0 * e2), "preset (b) needs delta in (0, 1/(4e^2)]");
    require(lambda >= 1.0 && lambda <= 1.0 / (4.0 * e2 * delta), "preset (b) needs lambda in [1, 1/(4e^2 delta)]");
    require(d >= lambda * 4.0 * std::exp(7.0) * delta * delta * H, "preset (b) needs d >= 4 lambda e^7 delta^2 H");
    const int K = static_cast<int>(std::ceil(lambda * d));
    const double delta_inf = 2.0 * e2 * delta * (lambda + 1.0);
    const int N = static_cast<int>(binomial(K + d - 1, d)) + 1;
    auto xs = detail::grid_packing(N, d, delta_inf, 2.0 * d * delta);
    return family_from_points(std::move(xs), K, H, delta, std::sqrt(moment_tail_bound(H, K, delta_inf)));
}

/// Q_k = E_{i∼ξ_k} μ_i^{⊗H} over [outcomes]^H, outcome tuples lexicographic.
inline Dist family_mixture(const Family& f, int k, const Budget& budget = Budget::from_env()) {
    budget.check_power(static_cast<std::uint64_t>(f.outcomes), f.H, 1, "family_mixture outcome space");
    std::vector<double> out(static_cast<std::size_t>(std::pow(f.outcomes, f.H)), 0.0);
    for (std::size_t i : f.xi[k].support()) {
        const double wi = f.xi[k][i];
        // Expand μ_i^{⊗H} layer by layer.
        std::vector<double> prod{wi};
        for (int h = 0; h < f.H; ++h) {
            std::vector<double> next;
            next.reserve(prod.size() * f.outcomes);
            for (double p : prod)
                for (int o = 0; o < f.outcomes; ++o) next.push_back(p * f.mu[i][o]);
            prod.swap(next);
        }
        for (std::size_t o = 0; o < out.size(); ++o) out[o] += prod[o];
    }
    return Dist::normalized(std::move(out));
}

struct FamilyCheck {
    bool disjoint = true;
    double min_pairwise_tv = kInf; // over ∪ supp ξ_k
    double max_tv_to_first = -1.0; // max_k TV(Q_k, Q_1); −1 when not enumerated
    bool ok = false;
};

/// Re-verify the three family clauses; the TV clause is exact when |O|^H fits the budget.
inline FamilyCheck verify_family(const Family& f, const Budget& budget = Budget::from_env()) {
    FamilyCheck c;
    std::vector<int> owner(f.size(), -1);
    for (int k = 0; k < f.L(); ++k)
        for (std::size_t i : f.xi[k].support()) {
            if (owner[i] >= 0) c.disjoint = false;
            owner[i] = k;
        }
    for (int i = 0; i < f.size(); ++i)
        for (int j = i + 1; j < f.size(); ++j)
            if (owner[i] >= 0 && owner[j] >= 0) c.min_pairwise_tv = std::min(c.min_pairwise_tv, tv(f.mu[i], f.mu[j]));
    if (budget.fits_power(static_cast<std::uint64_t>(f.outcomes), f.H, static_cast<std::uint64_t>(f.size()))) {
        auto q1 = family_mixture(f, 0, budget);
        c.max_tv_to_first = 0.0;
        for (int k = 1; k < f.L(); ++k) c.max_tv_to_first = std::max(c.max_tv_to_first, tv(family_mixture(f, k, budget), q1));
    }
    c.ok = c.disjoint && c.min_pairwise_tv >= f.delta - 1e-12 &&
           (c.max_tv_to_first < 0.0 || c.max_tv_to_first <= f.gamma + 1e-9);
    return c;
}

/// Right-hand side ¼ Σ_ℓ C(H,ℓ) d^{−ℓ} ‖Δ_ℓ‖² for signed weights w = ξ0 − ξ1 on points x_i,
/// with ‖Δ_ℓ‖² = Σ_{i,j} w_i w_j ⟨x_i, x_j⟩^ℓ.
inline double unif_moments_bound(const std::vector<Point>& xs, const std::vector<double>& w, int H) {
    const std::size_t N = xs.size();
    const double d = static_cast<double>(xs.front().size());
    std::vector<double> gram(N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            double g = 0.0;
            for (std::size_t c = 0; c < xs[i].size(); ++c) g += xs[i][c] * xs[j][c];
            gram[i * N + j] = g;
        }
    double total = 0.0;
    for (int l = 0; l <= H; ++l) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) norm2 += w[i] * w[j] * std::pow(gram[i * N + j], l);
        total += binomial(H, l) * std::pow(d, -l) * norm2;
    }
    return 0.25 * total;
}

} // namespace lmdp
