#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "planner.hpp"

namespace lmdp {

/// Finite model class; all members share S, A, H, L and the reward table.
class ModelClass {
public:
    explicit ModelClass(std::vector<Lmdp> models) : models_(std::move(models)) {
        require(!models_.empty(), "model class must be nonempty");
        const auto& f = models_.front();
        for (const auto& m : models_)
            require(m.S() == f.S() && m.A() == f.A() && m.H() == f.H() && m.L() == f.L() &&
                        m.reward_table() == f.reward_table(),
                    "models in a class must share S, A, H, L and rewards");
    }
    std::size_t size() const { return models_.size(); }
    const Lmdp& operator[](std::size_t i) const { return models_[i]; }
    const Lmdp& front() const { return models_.front(); }

private:
    std::vector<Lmdp> models_;
};

/// The learner only sees episodes it runs.
class Environment {
public:
    virtual ~Environment() = default;
    virtual Trajectory run_episode(const PolicyPtr& pi) = 0;
};

class SimulatedEnvironment : public Environment {
public:
    SimulatedEnvironment(Lmdp model, std::uint64_t seed) : model_(std::move(model)), rng_(seed) {}
    Trajectory run_episode(const PolicyPtr& pi) override { return simulate(model_, pi, rng_); }

private:
    Lmdp model_;
    std::mt19937_64 rng_;
};

/// log Σ_m ρ_m ν_m(s_1) Π T_m(·); the policy factor is omitted. −∞ when impossible.
inline double trajectory_log_likelihood(const Lmdp& M, const Trajectory& t) {
    double p = detail::sum(component_joint(M, t));
    return p > 0.0 ? std::log(p) : -kInf;
}

struct Sample {
    PolicyPtr policy;
    Trajectory trajectory;
};

inline double log_likelihood(const Lmdp& M, const std::vector<Sample>& data) {
    double ll = 0.0;
    for (const auto& d : data) ll += trajectory_log_likelihood(M, d.trajectory);
    return ll;
}

/// ½(π ∘_W π_exp) + (1/2H) Σ_{h=0}^{H−1} (π ∘_h Unif ∘_{h+1} π_exp), where the
/// h-th part plays a uniform action at step h+1. Parts are ordered as written.
inline PolicyPtr explore_transform(const PolicyPtr& pi, const PolicyPtr& pi_exp, int W, int S, int A, int H) {
    require(W >= 1 && W <= H, "window must be in [1, H]");
    auto unif = Policy::uniform(S, A, H);
    std::vector<double> w{0.5};
    std::vector<PolicyPtr> parts{Policy::concat(pi, W, pi_exp)};
    for (int h = 0; h < H; ++h) {
        w.push_back(0.5 / H);
        parts.push_back(Policy::concat(pi, h + 1, Policy::concat(unif, h + 2, pi_exp)));
    }
    return Policy::mixture(std::move(w), std::move(parts));
}

/// β = 2 log|Θ| + 2 log(1/p) + 2.
inline double default_beta(std::size_t n_models, double p) {
    return 2.0 * std::log(static_cast<double>(n_models)) + 2.0 * std::log(1.0 / p) + 2.0;
}

using CandidateGenerator = std::function<std::vector<PolicyPtr>(const Lmdp&)>;

/// Planner outputs over a grid of windows.
inline CandidateGenerator planner_candidates(std::vector<int> windows, Budget budget = Budget::from_env()) {
    return [windows = std::move(windows), budget](const Lmdp& M) {
        std::vector<PolicyPtr> out;
        for (int W : windows) {
            if (W < 1 || W > M.H()) continue;
            PlanOptions o;
            o.budget = budget;
            out.push_back(plan(M, W, o).to_policy(budget));
        }
        return out;
    };
}

struct OmleConfig {
    int K = 100;
    int W = 1;              // decoding window
    double epsilon_s = 0.1; // decoding-error constraint
    double beta = 0.0;      // confidence radius; default_beta when ≤ 0
    double p = 0.01;
    std::uint64_t seed = 0;
    int mc_samples = 10'000;
    Budget budget = Budget::from_env();
    PolicyPtr explore; // π_exp, uniform when null
};

struct OmleIteration {
    int k = 0;
    std::vector<int> confidence_set;
    int theta = -1;
    int policy = -1;
    double optimistic_value = 0.0;
    double decoding_error = 0.0;
    int branch = -1;             // explore_transform part that generated the episode
    std::vector<double> loglik;  // after adding episode k
};

struct OmleResult {
    PolicyPtr output;                // Unif{π^1..π^K}, repeated policies merged
    std::vector<PolicyPtr> pool;     // candidate policies, indexed by OmleIteration::policy
    std::vector<int> counts;         // how often each pool policy was chosen
    std::vector<OmleIteration> trace;
    double beta = 0.0;

    /// One JSON object per line, one line per iteration.
    std::string trace_jsonl() const {
        std::string out;
        for (const auto& it : trace) {
            nlohmann::json j = {{"k", it.k},
                                {"confidence_set", it.confidence_set},
                                {"theta", it.theta},
                                {"policy", it.policy},
                                {"optimistic_value", it.optimistic_value},
                                {"decoding_error", it.decoding_error},
                                {"branch", it.branch},
                                {"loglik", it.loglik}};
            out += j.dump() + "\n";
        }
        return out;
    }
};

inline OmleResult omle_run(const ModelClass& cls, Environment& env, const OmleConfig& cfg,
                           const CandidateGenerator& candidates) {
    const Lmdp& base = cls.front();
    require(cfg.K >= 1, "K must be positive");
    require(cfg.W >= 1 && cfg.W <= base.H(), "decoding window must be in [1, H]");
    const int S = base.S(), A = base.A(), H = base.H();
    const std::size_t n = cls.size();

    OmleResult res;
    res.beta = cfg.beta > 0.0 ? cfg.beta : default_beta(n, cfg.p);
    for (std::size_t i = 0; i < n; ++i)
        for (auto& p : candidates(cls[i])) res.pool.push_back(std::move(p));
    require(!res.pool.empty(), "candidate generator produced no policies");
    const std::size_t np = res.pool.size();
    res.counts.assign(np, 0);

    // Value and decoding error of every (model, policy) pair.
    std::vector<std::vector<double>> val(n, std::vector<double>(np)), err(n, std::vector<double>(np));
    std::vector<std::vector<bool>> ok(n, std::vector<bool>(np));
    const bool exact = cfg.budget.fits_power(static_cast<std::uint64_t>(S) * A, cfg.W - 1, S);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < np; ++j) {
            val[i][j] = value(cls[i], *res.pool[j], cfg.budget);
            if (exact) {
                err[i][j] = decoding_error_exact(cls[i], *res.pool[j], cfg.W, cfg.budget);
                ok[i][j] = err[i][j] <= cfg.epsilon_s;
            } else {
                auto e = decoding_error_mc(cls[i], res.pool[j], cfg.W, cfg.mc_samples,
                                           splitmix64(cfg.seed ^ (i * 1000003ull + j)));
                err[i][j] = e.estimate;
                ok[i][j] = e.estimate + 2.0 * e.std_error <= cfg.epsilon_s;
            }
        }

    auto pi_exp = cfg.explore ? cfg.explore : Policy::uniform(S, A, H);
    std::vector<PolicyPtr> explore(np);
    std::vector<double> ll(n, 0.0);
    for (int k = 1; k <= cfg.K; ++k) {
        OmleIteration it;
        it.k = k;
        double mx = -kInf;
        for (double x : ll) mx = std::max(mx, x);
        for (std::size_t i = 0; i < n; ++i)
            if (ll[i] > -kInf && ll[i] >= mx - res.beta) it.confidence_set.push_back(static_cast<int>(i));
        double best = -kInf;
        for (int i : it.confidence_set)
            for (std::size_t j = 0; j < np; ++j)
                if (ok[i][j] && val[i][j] > best) {
                    best = val[i][j];
                    it.theta = i;
                    it.policy = static_cast<int>(j);
                }
        if (it.policy < 0)
            throw NumericalError("OMLE: no (model, policy) pair in the confidence set meets the decoding constraint");
        it.optimistic_value = best;
        it.decoding_error = err[it.theta][it.policy];
        auto& ex = explore[it.policy];
        if (!ex) ex = explore_transform(res.pool[it.policy], pi_exp, cfg.W, S, A, H);
        auto traj = env.run_episode(ex);
        it.branch = traj.branch;
        for (std::size_t i = 0; i < n; ++i) ll[i] += trajectory_log_likelihood(cls[i], traj);
        it.loglik = ll;
        ++res.counts[it.policy];
        res.trace.push_back(std::move(it));
    }

    std::vector<double> w;
    std::vector<PolicyPtr> parts;
    for (std::size_t j = 0; j < np; ++j)
        if (res.counts[j] > 0) {
            w.push_back(static_cast<double>(res.counts[j]) / cfg.K);
            parts.push_back(res.pool[j]);
        }
    res.output = Policy::mixture(std::move(w), std::move(parts));
    return res;
}

} // namespace lmdp
