#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dist.hpp"

namespace lmdp {

/// One MDP of the mixture: initial distribution and transition table T[s][a][s'].
struct Component {
    Dist nu;
    std::vector<double> T;
};

/// Latent MDP with known deterministic reward R_h(s, a). Steps are 1-based.
class Lmdp {
public:
    Lmdp() = default;

    Lmdp(int S, int A, int H, Dist rho, std::vector<Component> comps, std::vector<double> reward,
         nlohmann::json metadata = nlohmann::json::object())
        : S_(S), A_(A), H_(H), rho_(std::move(rho)), comps_(std::move(comps)), reward_(std::move(reward)),
          metadata_(std::move(metadata)) {
        validate();
    }

    int S() const { return S_; }
    int A() const { return A_; }
    int H() const { return H_; }
    int L() const { return static_cast<int>(comps_.size()); }

    const Dist& rho() const { return rho_; }
    const Dist& nu(int m) const { return comps_[m].nu; }
    const Component& component(int m) const { return comps_[m]; }
    const std::vector<Component>& components() const { return comps_; }

    std::span<const double> T(int m, int s, int a) const {
        return {comps_[m].T.data() + (static_cast<std::size_t>(s) * A_ + a) * S_, static_cast<std::size_t>(S_)};
    }
    double t(int m, int s, int a, int s2) const {
        return comps_[m].T[(static_cast<std::size_t>(s) * A_ + a) * S_ + s2];
    }

    double R(int h, int s, int a) const {
        return reward_[(static_cast<std::size_t>(h - 1) * S_ + s) * A_ + a];
    }
    const std::vector<double>& reward_table() const { return reward_; }

    /// Components with positive mixing weight, ascending.
    std::vector<int> active() const {
        std::vector<int> out;
        for (int m = 0; m < L(); ++m)
            if (rho_[m] > 0.0) out.push_back(m);
        return out;
    }

    const nlohmann::json& metadata() const { return metadata_; }
    nlohmann::json& metadata() { return metadata_; }

    /// Same dynamics with a different mixing distribution.
    Lmdp with_rho(Dist rho) const {
        Lmdp c = *this;
        c.rho_ = std::move(rho);
        c.validate();
        return c;
    }

    friend bool operator==(const Lmdp& a, const Lmdp& b) {
        if (a.S_ != b.S_ || a.A_ != b.A_ || a.H_ != b.H_ || !(a.rho_ == b.rho_) || a.reward_ != b.reward_ ||
            a.comps_.size() != b.comps_.size())
            return false;
        for (std::size_t m = 0; m < a.comps_.size(); ++m)
            if (!(a.comps_[m].nu == b.comps_[m].nu) || a.comps_[m].T != b.comps_[m].T) return false;
        return true;
    }

private:
    void validate() const {
        require(S_ >= 1 && A_ >= 1 && H_ >= 1, "S, A, H must be positive");
        require(!comps_.empty(), "an LMDP needs at least one component");
        require(rho_.size() == comps_.size(), "rho must have one weight per component");
        const std::size_t row = static_cast<std::size_t>(S_);
        for (const auto& c : comps_) {
            require(c.nu.size() == row, "initial distribution must range over the states");
            require(c.T.size() == row * A_ * row, "transition table must be S x A x S");
            for (std::size_t r = 0; r < row * A_; ++r) {
                double s = 0.0;
                for (std::size_t j = 0; j < row; ++j) {
                    double x = c.T[r * row + j];
                    require(std::isfinite(x) && x >= 0.0, "transition probabilities must be nonnegative");
                    s += x;
                }
                require(std::abs(s - 1.0) <= kSumTol, "transition rows must sum to 1");
            }
        }
        require(reward_.size() == static_cast<std::size_t>(H_) * S_ * A_, "reward table must be H x S x A");
        double total = 0.0;
        for (int h = 1; h <= H_; ++h) {
            double mx = 0.0;
            for (int s = 0; s < S_; ++s)
                for (int a = 0; a < A_; ++a) {
                    double r = R(h, s, a);
                    require(r >= 0.0 && r <= 1.0, "rewards must lie in [0, 1]");
                    mx = std::max(mx, r);
                }
            total += mx;
        }
        require(total <= 1.0 + 1e-12, "sum over steps of the maximal reward must not exceed 1");
    }

    int S_ = 0, A_ = 0, H_ = 0;
    Dist rho_;
    std::vector<Component> comps_;
    std::vector<double> reward_;
    nlohmann::json metadata_ = nlohmann::json::object();
};

/// Trajectory (s_1, a_1, …, s_h, a_h) or prefix τ̄_h = (s_1, a_1, …, s_h) when
/// actions.size() == states.size() − 1.
struct Trajectory {
    std::vector<int> states;
    std::vector<int> actions;
    int latent = -1; // sampled component, set by simulate
    int branch = -1; // index of the top-level mixture part that generated the actions, if any

    int length() const { return static_cast<int>(states.size()); }
    bool is_prefix() const { return actions.size() + 1 == states.size(); }

    /// τ̄_h of this trajectory.
    Trajectory prefix(int h) const {
        require(h >= 1 && h <= length(), "prefix length out of range");
        Trajectory p;
        p.states.assign(states.begin(), states.begin() + h);
        p.actions.assign(actions.begin(), actions.begin() + (h - 1));
        return p;
    }

    friend bool operator==(const Trajectory& a, const Trajectory& b) {
        return a.states == b.states && a.actions == b.actions;
    }
};

/// Mixed-radix code of prefixes: c(τ̄_1) = s_1, c(τ̄_{h+1}) = (c(τ̄_h)·A + a_h)·S + s_{h+1}.
struct HistoryIndex {
    int S = 0, A = 0;

    std::uint64_t child(std::uint64_t code, int a, int s2) const {
        return (code * static_cast<std::uint64_t>(A) + a) * static_cast<std::uint64_t>(S) + s2;
    }
    /// Number of prefixes of length h: S·(S·A)^{h−1}.
    std::uint64_t layer_size(int h) const {
        std::uint64_t n = static_cast<std::uint64_t>(S);
        for (int i = 1; i < h; ++i) n *= static_cast<std::uint64_t>(S) * A;
        return n;
    }
    std::uint64_t encode(const Trajectory& t, int h) const {
        std::uint64_t c = static_cast<std::uint64_t>(t.states[0]);
        for (int i = 1; i < h; ++i) c = child(c, t.actions[i - 1], t.states[i]);
        return c;
    }
    Trajectory decode(std::uint64_t code, int h) const {
        Trajectory t;
        t.states.assign(h, 0);
        t.actions.assign(h - 1, 0);
        for (int i = h - 1; i >= 1; --i) {
            t.states[i] = static_cast<int>(code % S);
            code /= S;
            t.actions[i - 1] = static_cast<int>(code % A);
            code /= A;
        }
        t.states[0] = static_cast<int>(code);
        return t;
    }
    /// Code of the length-g ancestor of a length-h prefix (g ≤ h).
    std::uint64_t ancestor(std::uint64_t code, int h, int g) const {
        for (int i = h; i > g; --i) code /= static_cast<std::uint64_t>(S) * A;
        return code;
    }
    /// Last state of a prefix.
    int last_state(std::uint64_t code) const { return static_cast<int>(code % S); }
};

} // namespace lmdp
