#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace lmdp;
using namespace lmdp::testing;

namespace {

Lmdp two_coin() {
    // One state, two actions; step 2 pays the same for both actions.
    std::vector<Component> c{{Dist({1.0}), {1.0, 1.0}}, {Dist({1.0}), {1.0, 1.0}}};
    std::vector<double> R{0.5, 0.25, 0.5, 0.5};
    return Lmdp(1, 2, 2, Dist({0.5, 0.5}), c, R);
}

} // namespace

TEST(Model, RejectsMalformedTables) {
    std::vector<Component> bad{{Dist({1.0, 0.0}), {0.5, 0.6, 1.0, 0.0}}};
    EXPECT_THROW(Lmdp(2, 1, 1, Dist({1.0}), bad, {0.0, 0.0}), PreconditionError);
    std::vector<Component> ok{{Dist({1.0, 0.0}), {0.5, 0.5, 1.0, 0.0}}};
    EXPECT_NO_THROW(Lmdp(2, 1, 1, Dist({1.0}), ok, {0.0, 1.0}));
    // Σ_h max R_h must not exceed 1.
    EXPECT_THROW(Lmdp(2, 1, 2, Dist({1.0}), ok, {0.6, 0.0, 0.6, 0.0}), PreconditionError);
    EXPECT_THROW(Lmdp(2, 1, 1, Dist({0.5, 0.5}), ok, {0.0, 1.0}), PreconditionError);
}

TEST(Model, HistoryIndexRoundTrip) {
    HistoryIndex idx{3, 2};
    EXPECT_EQ(idx.layer_size(1), 3u);
    EXPECT_EQ(idx.layer_size(3), 3u * 36u);
    for (std::uint64_t c = 0; c < idx.layer_size(3); ++c) {
        auto t = idx.decode(c, 3);
        EXPECT_EQ(idx.encode(t, 3), c);
        EXPECT_EQ(prefix_code(t, 3, 2), static_cast<long>(c));
        EXPECT_EQ(idx.ancestor(c, 3, 2), idx.encode(t, 2));
    }
}

TEST(Core, TrajProbMatchesDirectEnumeration) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto M = small_random(seed, 3, 2, 3, 2);
        std::mt19937_64 rng(seed + 100);
        auto pi = random_history_policy(3, 2, 3, rng);
        auto fn = tree_fn(*pi->get<HistoryTree>());
        double total = 0.0;
        enumerate_all(M, fn, 3, [&](const Trajectory& t, double p) {
            EXPECT_NEAR(traj_prob(M, *pi, t), p, 1e-15);
            total += p;
        });
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Core, TrajDistSumsToOneAndMatchesEnumeration) {
    auto M = small_random(7, 3, 2, 4, 3);
    std::mt19937_64 rng(1);
    auto pi = random_markov_policy(3, 2, 4, rng);
    for (int upto = 1; upto <= 4; ++upto) {
        auto d = traj_dist(M, *pi, upto);
        double s = 0.0;
        for (double p : d.probs) s += p;
        EXPECT_NEAR(s, 1.0, 1e-12);
        std::map<std::pair<std::vector<int>, std::vector<int>>, double> lookup;
        for (std::size_t i = 0; i < d.probs.size(); ++i)
            lookup[{d.trajectories[i].states, d.trajectories[i].actions}] = d.probs[i];
        enumerate_all(M, markov_fn(*pi->get<Markov>()), upto, [&](const Trajectory& t, double p) {
            auto it = lookup.find({t.states, t.actions});
            double got = it == lookup.end() ? 0.0 : it->second;
            EXPECT_NEAR(got, p, 1e-15);
        });
    }
}

TEST(Core, ValueMatchesDirectEnumeration) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto M = small_random(seed, 2 + seed % 2, 2, 3, 1 + seed % 3);
        std::mt19937_64 rng(seed);
        auto h = random_history_policy(M.S(), 2, 3, rng);
        auto mk = random_markov_policy(M.S(), 2, 3, rng);
        EXPECT_NEAR(value(M, *h), oracle_value(M, tree_fn(*h->get<HistoryTree>())), 1e-13);
        EXPECT_NEAR(value(M, *mk), oracle_value(M, markov_fn(*mk->get<Markov>())), 1e-13);
    }
}

TEST(Core, MixtureAndConcatSemantics) {
    auto M = small_random(21, 2, 2, 3, 2);
    std::mt19937_64 rng(4);
    auto h1 = random_history_policy(2, 2, 3, rng), h2 = random_history_policy(2, 2, 3, rng);
    auto mk = random_markov_policy(2, 2, 3, rng);
    auto mix = Policy::mixture({0.3, 0.7}, {h1, h2});
    auto f1 = tree_fn(*h1->get<HistoryTree>()), f2 = tree_fn(*h2->get<HistoryTree>());
    // A mixture randomises once per episode: P(τ) = Σ_i w_i P_{π_i}(τ).
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> want;
    enumerate_all(M, f1, 3, [&](const Trajectory& t, double p) { want[{t.states, t.actions}] += 0.3 * p; });
    enumerate_all(M, f2, 3, [&](const Trajectory& t, double p) { want[{t.states, t.actions}] += 0.7 * p; });
    for (const auto& [k, p] : want) {
        Trajectory t{k.first, k.second};
        EXPECT_NEAR(traj_prob(M, *mix, t), p, 1e-15);
    }
    EXPECT_NEAR(value(M, *mix), 0.3 * value(M, *h1) + 0.7 * value(M, *h2), 1e-14);

    // Concat: Markov head for steps 1, tree tail restarted at step 2 on the suffix history.
    auto cat = Policy::concat(mk, 2, h1);
    const auto& mt = *mk->get<Markov>();
    const auto& tt = *h1->get<HistoryTree>();
    PolicyFn fc = [&](const Trajectory& p, int a) {
        if (p.length() < 2) return mt.prob(p.length(), p.states.back(), a);
        Trajectory suffix;
        suffix.states.assign(p.states.begin() + 1, p.states.end());
        suffix.actions.assign(p.actions.begin() + 1, p.actions.end());
        return tt.layers[suffix.length() - 1][prefix_code(suffix, 2, 2) * 2 + a];
    };
    EXPECT_NEAR(value(M, *cat), oracle_value(M, fc), 1e-14);
}

TEST(Core, SingleComponentReducesToMdpValueIteration) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto M = small_random(seed, 3, 2, 4, 1);
        auto vi = mdp_value_iteration(M, 0);
        double v = 0.0;
        for (int s = 0; s < 3; ++s) v += M.nu(0)[s] * vi.v(1, s);
        EXPECT_NEAR(brute_force_optimal(M).value, v, 1e-13);
        std::vector<std::vector<int>> table(vi.act.begin(), vi.act.end());
        EXPECT_NEAR(value(M, *Policy::markov_deterministic(3, 2, table)), v, 1e-13);
    }
}

TEST(Core, BruteForceMatchesPolicyEnumeration) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        auto M = small_random(seed, 2, 2, 2, 2);
        auto opt = brute_force_optimal(M);
        EXPECT_NEAR(opt.value, oracle_optimal_by_policy_enumeration(M), 1e-14);
        EXPECT_NEAR(value(M, *opt.policy), opt.value, 1e-14);
    }
}

TEST(Core, BeliefDpAgreesWithHistoryTree) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto M = small_random(seed, 2 + seed % 2, 2, 1 + seed % 5, 1 + seed % 3, 0.5);
        EXPECT_NEAR(optimal_value_belief_dp(M), brute_force_optimal(M).value, 1e-10);
    }
}

TEST(Core, OptimalDominatesRandomPolicies) {
    auto M = small_random(3, 3, 2, 4, 3);
    double opt = brute_force_optimal(M).value;
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) EXPECT_LE(value(M, *random_history_policy(3, 2, 4, rng)), opt + 1e-12);
}

TEST(Core, TiesBreakTowardLowestAction) {
    auto M = two_coin();
    auto opt = brute_force_optimal(M);
    EXPECT_DOUBLE_EQ(opt.value, 1.0);
    // Step 2 rewards 0.5 for both actions; the chosen action must be 0.
    const auto& tree = *opt.policy->get<HistoryTree>();
    EXPECT_EQ(tree.layers[1][0], 1.0);
    EXPECT_EQ(tree.layers[1][2], 1.0);
}

TEST(Core, BudgetExceededIsExplicit) {
    auto M = small_random(1, 3, 2, 6, 2);
    Budget tiny{1000};
    EXPECT_THROW(brute_force_optimal(M, tiny), BudgetExceeded);
    EXPECT_THROW(value(M, *Policy::uniform(3, 2, 6), tiny), BudgetExceeded);
    EXPECT_THROW(traj_dist(M, *Policy::uniform(3, 2, 6), 6, tiny), BudgetExceeded);
}

TEST(Core, SimulateIsDeterministicPerSeed) {
    auto M = small_random(2, 3, 2, 5, 3);
    auto pi = Policy::uniform(3, 2, 5);
    auto a = simulate(M, pi, 42), b = simulate(M, pi, 42);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.latent, b.latent);
    EXPECT_EQ(a.length(), 5);
}

TEST(Core, SimulatedFrequenciesMatchExactDistribution) {
    auto M = small_random(5, 2, 2, 3, 2);
    std::mt19937_64 prng(8);
    auto h1 = random_history_policy(2, 2, 3, prng), h2 = random_history_policy(2, 2, 3, prng);
    auto pi = Policy::mixture({0.4, 0.6}, {h1, h2});
    auto d = traj_dist(M, *pi, 3);
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> count;
    const int n = 40000;
    std::mt19937_64 rng(123);
    for (int i = 0; i < n; ++i) {
        auto t = simulate(M, pi, rng);
        ++count[{t.states, t.actions}];
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < d.probs.size(); ++i) {
        double e = n * d.probs[i];
        double o = count[{d.trajectories[i].states, d.trajectories[i].actions}];
        chi2 += (o - e) * (o - e) / e;
    }
    const double df = static_cast<double>(d.probs.size()) - 1.0;
    EXPECT_LT(chi2, df + 5.0 * std::sqrt(2.0 * df));
}
