#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dist.hpp"

namespace lmdp {

namespace detail {
inline void check_same_space(const Dist& p, const Dist& q) {
    require(p.size() == q.size(), "distributions must share an outcome set");
}
} // namespace detail

/// Total variation distance ½Σ|p−q|.
inline double tv(const Dist& p, const Dist& q) {
    detail::check_same_space(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

/// Squared Hellinger distance ½Σ(√p−√q)².
inline double hellinger_sq(const Dist& p, const Dist& q) {
    detail::check_same_space(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += d * d;
    }
    return 0.5 * s;
}

/// Bhattacharyya coefficient Σ√(pq).
inline double bhattacharyya_coefficient(const Dist& p, const Dist& q) {
    detail::check_same_space(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
    return s;
}

/// Bhattacharyya divergence −log Σ√(pq); +∞ for disjoint supports.
inline double bhattacharyya(const Dist& p, const Dist& q) {
    double bc = bhattacharyya_coefficient(p, q);
    if (bc <= 0.0) return kInf;
    return std::max(0.0, -std::log(std::min(bc, 1.0)));
}

struct LeftInverse {
    Eigen::MatrixXd matrix; // L × |O|
    double l1_norm = 0.0;   // max column absolute sum
};

/// Left inverse M⁺ = (Z M)⁻¹ Z of the column-stochastic matrix M = [P_1 … P_L],
/// with Z[m,o] = P_m(o) / Σ_i P_i(o). Requires pairwise D_B ≥ log(2L).
inline LeftInverse left_inverse(const std::vector<Dist>& columns) {
    const std::size_t L = columns.size();
    require(L >= 1, "left_inverse needs at least one column");
    const std::size_t O = columns.front().size();
    for (const auto& c : columns) require(c.size() == O, "columns must share an outcome set");

    const double need = std::log(2.0 * static_cast<double>(L));
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = i + 1; j < L; ++j)
            require(bhattacharyya(columns[i], columns[j]) >= need - 1e-12,
                    "left_inverse precondition violated: pairwise Bhattacharyya divergence below log(2L)");

    Eigen::MatrixXd M(O, L), Z = Eigen::MatrixXd::Zero(L, O);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t o = 0; o < O; ++o) M(o, l) = columns[l][o];
    for (std::size_t o = 0; o < O; ++o) {
        double tot = M.row(o).sum();
        if (tot > 0.0)
            for (std::size_t m = 0; m < L; ++m) Z(m, o) = M(o, m) / tot;
    }
    Eigen::MatrixXd Y = Z * M;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Y);
    if (!lu.isInvertible()) throw NumericalError("left_inverse: Z·M is singular");

    LeftInverse out;
    out.matrix = lu.solve(Z);
    out.l1_norm = out.matrix.cwiseAbs().colwise().sum().maxCoeff();
    return out;
}

} // namespace lmdp
