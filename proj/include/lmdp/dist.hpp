#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace lmdp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerance on |sum - 1| accepted when validating a distribution.
inline constexpr double kSumTol = 1e-12;

/// Finite probability vector: nonnegative entries summing to one.
class Dist {
public:
    Dist() = default;

    explicit Dist(std::vector<double> w) : w_(std::move(w)) {
        require(!w_.empty(), "distribution must have at least one outcome");
        double s = 0.0;
        for (double x : w_) {
            require(std::isfinite(x) && x >= 0.0, "distribution entries must be finite and nonnegative");
            s += x;
        }
        require(std::abs(s - 1.0) <= kSumTol * std::max<double>(1.0, static_cast<double>(w_.size()) / 64.0),
                "distribution entries must sum to 1 (sum = " + std::to_string(s) + ")");
    }

    /// Rescale nonnegative weights to sum to one.
    static Dist normalized(std::vector<double> w) {
        double s = 0.0;
        for (double x : w) {
            require(std::isfinite(x) && x >= 0.0, "weights must be finite and nonnegative");
            s += x;
        }
        require(s > 0.0, "weights must have positive total mass");
        for (double& x : w) x /= s;
        return Dist(std::move(w));
    }

    static Dist uniform(std::size_t n) {
        require(n > 0, "uniform distribution needs n > 0");
        return Dist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static Dist point(std::size_t n, std::size_t i) {
        require(i < n, "point mass index out of range");
        std::vector<double> w(n, 0.0);
        w[i] = 1.0;
        return Dist(std::move(w));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }
    std::span<const double> span() const { return w_; }

    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] > 0.0) s.push_back(i);
        return s;
    }

    friend bool operator==(const Dist&, const Dist&) = default;

private:
    std::vector<double> w_;
};

/// Product distribution, outcomes in lexicographic order with the first factor most significant.
inline Dist product_dist(const std::vector<Dist>& factors) {
    require(!factors.empty(), "product_dist needs at least one factor");
    std::vector<double> out{1.0};
    for (const auto& f : factors) {
        std::vector<double> next;
        next.reserve(out.size() * f.size());
        for (double a : out)
            for (double b : f.weights()) next.push_back(a * b);
        out.swap(next);
    }
    return Dist(std::move(out));
}

/// Σ_i weights_i · parts_i over a common outcome set.
inline Dist mixture(std::span<const double> weights, const std::vector<Dist>& parts) {
    require(weights.size() == parts.size() && !parts.empty(), "mixture weights and parts must align");
    std::vector<double> out(parts.front().size(), 0.0);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        require(parts[i].size() == out.size(), "mixture parts must share an outcome set");
        for (std::size_t o = 0; o < out.size(); ++o) out[o] += weights[i] * parts[i][o];
    }
    return Dist(std::move(out));
}

} // namespace lmdp
