#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <variant>
#include <vector>

#include "model.hpp"

namespace lmdp {

class Policy;
using PolicyPtr = std::shared_ptr<const Policy>;

/// Fixed action sequence a_1, a_2, … regardless of the observed states.
struct OpenLoop {
    std::vector<int> actions;
};

/// π_h(a | s), stored as probs[((h−1)·S + s)·A + a] for h = 1..H.
struct Markov {
    int S = 0, A = 0, H = 0;
    std::vector<double> probs;

    double prob(int h, int s, int a) const {
        return probs[(static_cast<std::size_t>(h - 1) * S + s) * A + a];
    }
};

/// History-dependent policy: layers[h−1][code·A + a] = π(a | τ̄_h), where code is
/// the mixed-radix index of τ̄_h relative to the step where the tree starts.
struct HistoryTree {
    int S = 0, A = 0;
    std::vector<std::vector<double>> layers;
};

/// Randomise once per episode over parts.
struct Mixture {
    std::vector<double> weights;
    std::vector<PolicyPtr> parts;
};

/// Run head before step switch_step, then tail from s_{switch_step} on.
/// switch_step is an absolute step index.
struct Concat {
    PolicyPtr head;
    int switch_step = 1;
    PolicyPtr tail;
};

class Policy {
public:
    using Variant = std::variant<OpenLoop, Markov, HistoryTree, Mixture, Concat>;

    explicit Policy(Variant v) : v_(std::move(v)) {}

    const Variant& variant() const { return v_; }
    template <class T> const T* get() const { return std::get_if<T>(&v_); }

    static PolicyPtr open_loop(std::vector<int> actions) {
        for (int a : actions) require(a >= 0, "actions must be nonnegative");
        return std::make_shared<Policy>(OpenLoop{std::move(actions)});
    }

    static PolicyPtr markov(int S, int A, int H, std::vector<double> probs) {
        require(probs.size() == static_cast<std::size_t>(H) * S * A, "Markov policy table must be H x S x A");
        check_rows(probs, A);
        return std::make_shared<Policy>(Markov{S, A, H, std::move(probs)});
    }

    /// Deterministic Markov policy from table[h−1][s].
    static PolicyPtr markov_deterministic(int S, int A, const std::vector<std::vector<int>>& table) {
        std::vector<double> p(table.size() * S * A, 0.0);
        for (std::size_t h = 0; h < table.size(); ++h) {
            require(table[h].size() == static_cast<std::size_t>(S), "deterministic table rows must cover all states");
            for (int s = 0; s < S; ++s) {
                int a = table[h][s];
                require(a >= 0 && a < A, "action out of range");
                p[(h * S + s) * A + a] = 1.0;
            }
        }
        return std::make_shared<Policy>(Markov{S, A, static_cast<int>(table.size()), std::move(p)});
    }

    static PolicyPtr uniform(int S, int A, int H) {
        return std::make_shared<Policy>(
            Markov{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S * A, 1.0 / A)});
    }

    static PolicyPtr history_tree(int S, int A, std::vector<std::vector<double>> layers) {
        HistoryIndex idx{S, A};
        for (std::size_t h = 0; h < layers.size(); ++h) {
            require(layers[h].size() == idx.layer_size(static_cast<int>(h) + 1) * A,
                    "history tree layer has the wrong size");
            check_rows(layers[h], A);
        }
        return std::make_shared<Policy>(HistoryTree{S, A, std::move(layers)});
    }

    static PolicyPtr mixture(std::vector<double> weights, std::vector<PolicyPtr> parts) {
        require(!parts.empty() && weights.size() == parts.size(), "mixture needs one weight per part");
        Dist check(weights);
        (void)check;
        for (const auto& p : parts) require(p != nullptr, "mixture part is null");
        return std::make_shared<Policy>(Mixture{std::move(weights), std::move(parts)});
    }

    static PolicyPtr concat(PolicyPtr head, int switch_step, PolicyPtr tail) {
        require(head && tail, "concat parts must be non-null");
        require(switch_step >= 1, "switch step must be >= 1");
        return std::make_shared<Policy>(Concat{std::move(head), switch_step, std::move(tail)});
    }

private:
    static void check_rows(const std::vector<double>& p, int A) {
        for (std::size_t r = 0; r * A < p.size(); ++r) {
            double s = 0.0;
            for (int a = 0; a < A; ++a) {
                double x = p[r * A + a];
                require(std::isfinite(x) && x >= 0.0, "action probabilities must be nonnegative");
                s += x;
            }
            require(std::abs(s - 1.0) <= kSumTol, "action probabilities must sum to 1");
        }
    }

    Variant v_;
};

/// Walks a history node by node and reports π(· | τ̄_h) at the current node.
class PolicyCursor {
public:
    static PolicyCursor start(const Policy& p, int s1, int step = 1) {
        PolicyCursor c;
        c.p_ = &p;
        c.step_ = step;
        c.code_ = static_cast<std::uint64_t>(s1);
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Mixture>) {
                    c.post_ = v.weights;
                    for (const auto& part : v.parts) c.subs_.push_back(start(*part, s1, step));
                } else if constexpr (std::is_same_v<T, Concat>) {
                    c.in_tail_ = step >= v.switch_step;
                    c.subs_.push_back(start(c.in_tail_ ? *v.tail : *v.head, s1, step));
                }
            },
            p.variant());
        return c;
    }

    int step() const { return step_; }

    /// Fill out[0..A) with π(a | current prefix).
    void probs(int A, double* out) const {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, OpenLoop>) {
                    require(step_ <= static_cast<int>(v.actions.size()), "open-loop policy shorter than horizon");
                    int a0 = v.actions[step_ - 1];
                    require(a0 < A, "open-loop action out of range");
                    for (int a = 0; a < A; ++a) out[a] = a == a0 ? 1.0 : 0.0;
                } else if constexpr (std::is_same_v<T, Markov>) {
                    require(step_ <= v.H && v.A == A, "Markov policy does not cover this step");
                    int s = static_cast<int>(code_ % static_cast<std::uint64_t>(v.S));
                    for (int a = 0; a < A; ++a) out[a] = v.prob(step_, s, a);
                } else if constexpr (std::is_same_v<T, HistoryTree>) {
                    require(depth_ <= static_cast<int>(v.layers.size()) && v.A == A,
                            "history tree does not cover this step");
                    const double* row = v.layers[depth_ - 1].data() + code_ * static_cast<std::uint64_t>(A);
                    for (int a = 0; a < A; ++a) out[a] = row[a];
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    std::vector<double> tmp(A);
                    for (int a = 0; a < A; ++a) out[a] = 0.0;
                    for (std::size_t i = 0; i < subs_.size(); ++i) {
                        if (post_[i] == 0.0) continue;
                        subs_[i].probs(A, tmp.data());
                        for (int a = 0; a < A; ++a) out[a] += post_[i] * tmp[a];
                    }
                } else {
                    subs_[0].probs(A, out);
                }
            },
            p_->variant());
    }

    /// Cursor after taking action a and landing in s2.
    PolicyCursor next(int A, int a, int s2) const {
        PolicyCursor c = *this;
        c.step_ = step_ + 1;
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Markov>) {
                    c.code_ = static_cast<std::uint64_t>(s2);
                } else if constexpr (std::is_same_v<T, HistoryTree>) {
                    c.code_ = HistoryIndex{v.S, v.A}.child(code_, a, s2);
                    c.depth_ = depth_ + 1;
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    std::vector<double> tmp(A);
                    double tot = 0.0;
                    for (std::size_t i = 0; i < subs_.size(); ++i) {
                        if (post_[i] == 0.0) continue;
                        subs_[i].probs(A, tmp.data());
                        c.post_[i] = post_[i] * tmp[a];
                        tot += c.post_[i];
                    }
                    if (tot > 0.0) {
                        for (double& w : c.post_) w /= tot;
                    } else {
                        c.post_ = post_;
                    }
                    for (std::size_t i = 0; i < subs_.size(); ++i)
                        if (c.post_[i] > 0.0) c.subs_[i] = subs_[i].next(A, a, s2);
                } else if constexpr (std::is_same_v<T, Concat>) {
                    if (!in_tail_ && c.step_ >= v.switch_step) {
                        c.in_tail_ = true;
                        c.subs_[0] = start(*v.tail, s2, c.step_);
                    } else {
                        c.subs_[0] = subs_[0].next(A, a, s2);
                    }
                }
            },
            p_->variant());
        return c;
    }

private:
    const Policy* p_ = nullptr;
    int step_ = 1;
    int depth_ = 1;
    std::uint64_t code_ = 0;
    bool in_tail_ = false;
    std::vector<PolicyCursor> subs_;
    std::vector<double> post_;
};

/// π(τ) = Π_h π(a_h | τ̄_h) over the actions present in t.
inline double policy_prob(const Policy& p, int A, const Trajectory& t) {
    auto c = PolicyCursor::start(p, t.states[0]);
    std::vector<double> pr(A);
    double out = 1.0;
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
        c.probs(A, pr.data());
        out *= pr[t.actions[i]];
        if (out == 0.0) return 0.0;
        if (i + 1 < t.states.size()) c = c.next(A, t.actions[i], t.states[i + 1]);
    }
    return out;
}

/// Replace every mixture by one sampled part, so the result is a single
/// non-randomised-over-episodes policy. `branch` receives the top-level choice.
inline PolicyPtr resolve_mixtures(const PolicyPtr& p, std::mt19937_64& rng, int* branch = nullptr) {
    if (const auto* m = p->get<Mixture>()) {
        std::discrete_distribution<int> pick(m->weights.begin(), m->weights.end());
        int i = pick(rng);
        if (branch) *branch = i;
        return resolve_mixtures(m->parts[i], rng);
    }
    if (const auto* c = p->get<Concat>()) {
        auto h = resolve_mixtures(c->head, rng);
        auto t = resolve_mixtures(c->tail, rng);
        if (h == c->head && t == c->tail) return p;
        return Policy::concat(h, c->switch_step, t);
    }
    return p;
}

} // namespace lmdp
