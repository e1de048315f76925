#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace lmdp;
using namespace lmdp::testing;

namespace {

CandidateGenerator fixture_candidates() {
    auto planned = planner_candidates({1, 2, 3, 4});
    return [planned](const Lmdp& M) {
        auto out = planned(M);
        out.push_back(brute_force_optimal(M).policy);
        return out;
    };
}

OmleConfig fixture_config(int K, std::uint64_t seed) {
    OmleConfig cfg;
    cfg.K = K;
    cfg.W = 3;
    cfg.epsilon_s = 0.4;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST(Learner, ExploreTransformSingleStep) {
    auto pi = Policy::open_loop({0}), ex = Policy::open_loop({1});
    auto mix = explore_transform(pi, ex, 1, 2, 2, 1);
    const auto& m = *mix->get<Mixture>();
    ASSERT_EQ(m.parts.size(), 2u);
    EXPECT_DOUBLE_EQ(m.weights[0], 0.5);
    EXPECT_DOUBLE_EQ(m.weights[1], 0.5);
    // Part 0 follows π_exp from step 1, part 1 is uniform at step 1.
    EXPECT_NEAR(policy_prob(*mix, 2, Trajectory{{0}, {1}}), 0.75, 1e-15);
}

TEST(Learner, ExploreTransformMatchesHandMixture) {
    const int H = 3, W = 2;
    auto pi = Policy::open_loop({0, 0, 0}), ex = Policy::open_loop({1, 1, 1});
    auto mix = explore_transform(pi, ex, W, 1, 2, H);
    for (int code = 0; code < 8; ++code) {
        std::vector<int> a{code & 1, (code >> 1) & 1, (code >> 2) & 1};
        // Main part: π before W, π_exp from W.
        double want = 0.5 * (a == std::vector<int>{0, 1, 1});
        // Part h: π on steps ≤ h, uniform at h+1, π_exp afterwards.
        for (int h = 0; h < H; ++h) {
            double p = 1.0;
            for (int i = 0; i < H; ++i) {
                if (i < h) p *= a[i] == 0;
                else if (i == h) p *= 0.5;
                else p *= a[i] == 1;
            }
            want += p / (2.0 * H);
        }
        EXPECT_NEAR(policy_prob(*mix, 2, Trajectory{{0, 0, 0}, a}), want, 1e-15) << code;
    }
}

TEST(Learner, BranchFrequenciesFollowMixtureWeights) {
    auto models = omle_fixture_models();
    auto pi = Policy::uniform(2, 2, 4);
    auto mix = explore_transform(pi, pi, 2, 2, 2, 4);
    SimulatedEnvironment env(models[0], 5);
    std::vector<int> count(5, 0);
    const int n = 16000;
    for (int i = 0; i < n; ++i) ++count[env.run_episode(mix).branch];
    EXPECT_NEAR(count[0] / double(n), 0.5, 0.02);
    for (int h = 1; h <= 4; ++h) EXPECT_NEAR(count[h] / double(n), 0.125, 0.015);
}

TEST(Learner, LogLikelihoodHandComputed) {
    auto models = omle_fixture_models();
    // Truth: ν uniform; from state 0 with action 1, component 0 lands in 1 w.p. 0.9, component 1 w.p. 0.1.
    Trajectory t{{0, 1}, {1, 0}};
    EXPECT_NEAR(trajectory_log_likelihood(models[0], t), std::log(0.5 * 0.5 * 0.9 + 0.5 * 0.5 * 0.1), 1e-15);
    std::vector<Sample> data{{nullptr, t}, {nullptr, t}};
    EXPECT_NEAR(log_likelihood(models[0], data), 2.0 * std::log(0.25), 1e-14);
    // An impossible episode gives −∞.
    std::vector<Component> c{{Dist({1.0, 0.0}), {1, 0, 1, 0, 0, 1, 0, 1}}};
    Lmdp det(2, 2, 2, Dist({1.0}), c, std::vector<double>(8, 0.0));
    EXPECT_EQ(trajectory_log_likelihood(det, Trajectory{{0, 1}, {0, 0}}), -kInf);
}

TEST(Learner, DefaultBeta) {
    EXPECT_NEAR(default_beta(2, 0.01), 2 * std::log(2.0) + 2 * std::log(100.0) + 2, 1e-14);
}

TEST(Learner, ModelClassRejectsMismatchedModels) {
    auto models = omle_fixture_models();
    models.push_back(small_random(0, 2, 2, 4, 2));
    EXPECT_THROW(ModelClass{models}, PreconditionError);
}

TEST(Learner, OmleRunIsReproducibleAndKeepsTruth) {
    auto models = omle_fixture_models();
    ModelClass cls(models);
    auto cand = fixture_candidates();
    SimulatedEnvironment env1(models[0], 11), env2(models[0], 11);
    auto r1 = omle_run(cls, env1, fixture_config(60, 11), cand);
    auto r2 = omle_run(cls, env2, fixture_config(60, 11), cand);
    EXPECT_EQ(r1.trace_jsonl(), r2.trace_jsonl());
    ASSERT_EQ(r1.trace.size(), 60u);
    int total = 0;
    for (int c : r1.counts) total += c;
    EXPECT_EQ(total, 60);
    double wsum = 0.0;
    for (double w : r1.output->get<Mixture>()->weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    for (const auto& it : r1.trace) {
        EXPECT_NE(std::find(it.confidence_set.begin(), it.confidence_set.end(), 0), it.confidence_set.end());
        EXPECT_LE(it.decoding_error, 0.4);
    }
    // The decoy is optimistic at first and eliminated once evidence accumulates.
    EXPECT_EQ(r1.trace.front().theta, 1);
    EXPECT_EQ(r1.trace.back().confidence_set, std::vector<int>{0});
    double opt = brute_force_optimal(models[0]).value;
    EXPECT_LT(opt - value(models[0], *r1.output), 0.3);

    std::istringstream lines(r1.trace_jsonl());
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["k"], ++n);
        EXPECT_TRUE(j.contains("loglik"));
    }
    EXPECT_EQ(n, 60);
}

TEST(Learner, InfeasibleDecodingConstraintIsReported) {
    auto models = omle_fixture_models();
    ModelClass cls(models);
    SimulatedEnvironment env(models[0], 1);
    auto cfg = fixture_config(5, 1);
    cfg.epsilon_s = 0.01;
    EXPECT_THROW(omle_run(cls, env, cfg, fixture_candidates()), NumericalError);
}
