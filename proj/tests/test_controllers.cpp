#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gesmr/analysis.hpp"
#include "gesmr/controllers.hpp"
#include "gesmr/engine.hpp"

using namespace gesmr;

TEST(GesmrAssign, CeilGroupMapping) {
    EXPECT_EQ(gesmr_group_of(1, 8, 4), 1u);
    EXPECT_EQ(gesmr_group_of(2, 8, 4), 1u);
    EXPECT_EQ(gesmr_group_of(3, 8, 4), 2u);
    EXPECT_EQ(gesmr_group_of(8, 8, 4), 4u);
    for (std::size_t i = 1; i <= 8; ++i) EXPECT_EQ(gesmr_group_of(i, 8, 1), 1u);
    EXPECT_THROW(gesmr_group_of(0, 8, 4), std::out_of_range);
}

TEST(GesmrAssign, GroupsAreEqualSized) {
    for (std::size_t n : {12u, 64u, 100u}) {
        for (auto k : divisors(n)) {
            std::vector<std::size_t> size(k + 1, 0);
            for (std::size_t i = 1; i <= n; ++i) size[gesmr_group_of(i, n, k)]++;
            EXPECT_EQ(size[0], 0u);
            for (std::size_t g = 1; g <= k; ++g) EXPECT_EQ(size[g], n / k);
        }
    }
}

TEST(GesmrAssign, ReturnsGroupRate) {
    const MutationRatePool pool{{0.1, 0.2, 0.3, 0.4}, 2};
    EXPECT_EQ(gesmr_assign(pool, 1), 0.1);
    EXPECT_EQ(gesmr_assign(pool, 3), 0.2);
    EXPECT_EQ(gesmr_assign(pool, 8), 0.4);
}

TEST(GesmrGroupDeltas, MinAndMean) {
    const Vector d = {-1, 3};
    EXPECT_EQ(gesmr_group_deltas(d, 1, Aggregation::min), (Vector{-1}));
    EXPECT_EQ(gesmr_group_deltas(d, 1, Aggregation::mean), (Vector{1}));
    const Vector c(6, 2.5);
    EXPECT_EQ(gesmr_group_deltas(c, 3, Aggregation::min), (Vector{2.5, 2.5, 2.5}));
    EXPECT_EQ(gesmr_group_deltas(c, 3, Aggregation::mean), (Vector{2.5, 2.5, 2.5}));
    const Vector s = {4, -2, 7};
    EXPECT_EQ(gesmr_group_deltas(s, 3, Aggregation::min), gesmr_group_deltas(s, 3, Aggregation::mean));
    EXPECT_THROW(gesmr_group_deltas(s, 2), InternalError);
}

TEST(GesmrInit, LogGrid) {
    GesmrParams p;
    p.groups = 5;
    const auto pool = gesmr_init(p, 10);
    const Vector want = {1e-2, 1e-1, 1, 1e1, 1e2};
    ASSERT_EQ(pool.rates.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(pool.rates[k], want[k], 1e-12 * want[k]);
    EXPECT_EQ(pool.group_size, 2u);

    p.groups = 2;
    p.init_lo = 0.3;
    p.init_hi = 7.0;
    EXPECT_EQ(gesmr_init(p, 4).rates, (Vector{0.3, 7.0}));

    p.groups = 1;
    p.init_lo = 1e-2;
    p.init_hi = 1e2;
    EXPECT_NEAR(gesmr_init(p, 4).rates[0], 1.0, 1e-15);

    p.init_lo = 0.0;
    EXPECT_THROW(gesmr_init(p, 4), std::invalid_argument);
    p.init_lo = 1e-2;
    p.groups = 3;
    EXPECT_THROW(gesmr_init(p, 4), ConfigError);
}

TEST(GesmrEvolveRates, UnitTauLeavesRatesAlone) {
    GesmrParams p;
    p.meta_mr = 1.0;
    p.groups = 6;
    const MutationRatePool pool{{0.5, 1.0, 2.0, 4.0, 8.0, 16.0}, 1};
    std::mt19937_64 rng(4);
    const Vector deltas = {3, -1, 2, 0, 5, 1};
    const auto next = gesmr_evolve_rates(pool, deltas, p, rng);
    EXPECT_EQ(next.rates[0], 1.0);  // best delta
    // every non-elite rate is a copy of one of the top l = 3 parents
    for (std::size_t k = 1; k < 6; ++k)
        EXPECT_TRUE(next.rates[k] == 1.0 || next.rates[k] == 4.0 || next.rates[k] == 16.0) << next.rates[k];
}

TEST(GesmrEvolveRates, BoundsAndEliteProperty) {
    // property: pool size kept, elite equals the best-delta rate, every child within [parent/tau, parent*tau]
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> logu(-3, 3);
    std::normal_distribution<double> nd(0, 1);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t k = 1 + rep % 12;
        GesmrParams p;
        p.groups = k;
        p.meta_mr = 1.0 + 3.0 * std::abs(nd(gen));
        MutationRatePool pool{Vector(k), 1};
        Vector deltas(k);
        for (std::size_t j = 0; j < k; ++j) {
            pool.rates[j] = std::pow(10.0, logu(gen));
            deltas[j] = nd(gen);
        }
        std::mt19937_64 rng(static_cast<std::uint64_t>(rep));
        const auto next = gesmr_evolve_rates(pool, deltas, p, rng);
        ASSERT_EQ(next.rates.size(), k);
        EXPECT_EQ(next.rates[0], pool.rates[argmin_first(deltas)]);
        const std::size_t l = mr_parent_pool_size(k, p.mr_selection_rate);
        Vector order = deltas;
        std::sort(order.begin(), order.end());
        for (std::size_t j = 1; j < k; ++j) {
            bool within = false;
            for (std::size_t a = 0; a < k; ++a) {
                if (deltas[a] > order[l - 1]) continue;  // not among the top l
                const double lo = pool.rates[a] / p.meta_mr * (1 - 1e-12);
                const double hi = pool.rates[a] * p.meta_mr * (1 + 1e-12);
                within = within || (next.rates[j] >= lo && next.rates[j] <= hi);
            }
            EXPECT_TRUE(within);
            EXPECT_GT(next.rates[j], 0.0);
        }
    }
}

TEST(GesmrEvolveRates, FrozenPoolUnchanged) {
    GesmrParams p;
    p.frozen = true;
    const MutationRatePool pool{{0.5, 1.0, 2.0}, 4};
    std::mt19937_64 rng(1);
    EXPECT_EQ(gesmr_evolve_rates(pool, Vector{1, 0, -1}, p, rng), pool);
}

namespace {

template <class C>
std::vector<Vector> rate_history(const Objective& obj, EvolutionParams p, C& c) {
    const RngStream rng(p.seed);
    auto pop = initial_population(obj, p, rng);
    std::vector<Vector> hist{c.rates()};
    for (std::size_t g = 0; g < p.generations; ++g) {
        ga_step(pop, p, c, obj, rng);
        hist.push_back(c.rates());
    }
    return hist;
}

} // namespace

TEST(GesmrController, SingleGroupIsConstant) {
    const Objective obj(ObjectiveKind::ackley, 10);
    EvolutionParams p;
    p.population_size = 16;
    p.generations = 60;
    GesmrParams gp;
    gp.groups = 1;
    GesmrController c(gp, 16);
    for (const auto& r : rate_history(obj, p, c)) EXPECT_EQ(r, (Vector{1.0}));
}

TEST(GesmrController, FixVariantKeepsInitialPool) {
    const Objective obj(ObjectiveKind::sphere, 10);
    EvolutionParams p;
    p.population_size = 16;
    p.generations = 60;
    GesmrParams gp;
    gp.groups = 4;
    gp.frozen = true;
    GesmrController c(gp, 16);
    for (const auto& r : rate_history(obj, p, c)) EXPECT_EQ(r, c.initial_pool().rates);
}

TEST(GesmrController, GroupSizeOneMakesMinAndMeanIdentical) {
    const Objective obj(ObjectiveKind::rastrigin, 10);
    EvolutionParams p;
    p.population_size = 16;
    p.generations = 80;
    p.seed = 21;
    GesmrParams gp;
    gp.groups = 16;
    GesmrController a(gp, 16);
    gp.aggregation = Aggregation::mean;
    GesmrController b(gp, 16);
    EXPECT_EQ(evolve(obj, p, a), evolve(obj, p, b));
}

TEST(GesmrController, LinearObjectiveEscalatesRate) {
    const Objective obj(ObjectiveKind::linear, 10);
    EvolutionParams p;
    p.population_size = 32;
    p.generations = 100;
    GesmrParams gp;
    gp.groups = 8;
    GesmrController c(gp, 32);
    const auto tr = evolve(obj, p, c);
    EXPECT_GT(tr.back().mean_log10_mr, tr.front().mean_log10_mr + 5.0);
    EXPECT_EQ(tr.back().group_deltas.size(), 8u);
}

// ---------------------------------------------------------------------------
// SAMR

TEST(Samr, UnitTauKeepsEveryRate) {
    const Objective obj(ObjectiveKind::rastrigin, 5);
    EvolutionParams p;
    p.population_size = 10;
    p.generations = 50;
    SamrController c(10, 1.0);
    const auto initial = c.rates();
    for (const auto& r : rate_history(obj, p, c)) {
        auto a = r, b = initial;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        // selection only copies rates; the set of distinct values can only shrink
        for (double v : a) EXPECT_TRUE(std::binary_search(b.begin(), b.end(), v));
    }
}

TEST(Samr, RatesTravelWithTheirSolutions) {
    const Objective obj(ObjectiveKind::sphere, 3);
    EvolutionParams p;
    p.population_size = 6;
    p.seed = 2;
    const RngStream rng(p.seed);
    auto pop = initial_population(obj, p, rng);
    SamrController c(6, 2.0);
    for (int g = 0; g < 30; ++g) {
        const std::size_t elite = fitness_order(pop)[0];
        const double elite_rate = c.rates()[elite];
        ga_step(pop, p, c, obj, rng);
        EXPECT_EQ(c.rates()[0], elite_rate);  // elite pair unaltered
    }
}

TEST(Samr, EliteRateStableWhileEliteHolds) {
    const Objective obj(ObjectiveKind::rastrigin, 30);
    EvolutionParams p;
    p.population_size = 20;
    p.seed = 4;
    const RngStream rng(p.seed);
    auto pop = initial_population(obj, p, rng);
    SamrController c(20, 2.0);
    ga_step(pop, p, c, obj, rng);
    for (int g = 0; g < 100; ++g) {
        const auto before = pop.members[0];
        const double rate = c.rates()[0];
        const bool elite_kept = fitness_order(pop)[0] == 0;
        ga_step(pop, p, c, obj, rng);
        if (elite_kept) {
            EXPECT_EQ(pop.members[0], before);
            EXPECT_EQ(c.rates()[0], rate);
        }
    }
}

// ---------------------------------------------------------------------------
// One-fifth rule

TEST(FifteenRule, DoubleOrHalve) {
    EXPECT_DOUBLE_EQ(fifteen_mr_update(0.4, 0.3), 0.8);
    EXPECT_DOUBLE_EQ(fifteen_mr_update(0.4, 0.1), 0.2);
    EXPECT_DOUBLE_EQ(fifteen_mr_update(0.4, 0.2), 0.2);  // "above" is strict
    EXPECT_THROW(fifteen_mr_update(0.4, 1.5), std::invalid_argument);
}

TEST(FifteenRule, ControllerCountsStrictImprovements) {
    FifteenRuleController c(1.0);
    const RngStream rng(0);
    const std::vector<std::size_t> lineage(11, 0);
    const SelectionInfo info{0, 10, lineage, &rng};
    c.observe(info, Vector{-1, -1, 0, 0, 1, 1, 1, 1, 1, 1});  // 2/10: halve
    EXPECT_EQ(c.sigma(), 0.5);
    c.observe(info, Vector{-1, -1, -1, 0, 1, 1, 1, 1, 1, 1});  // 3/10: double
    EXPECT_EQ(c.sigma(), 1.0);
}

// ---------------------------------------------------------------------------
// UCB

TEST(Ucb, WarmUpInOrder) {
    auto s = make_bandit({0.1, 1.0, 10.0, 100.0});
    for (std::size_t g = 0; g < 4; ++g) {
        EXPECT_EQ(ucb_step(s), g);
        ucb_observe_reward(s, g, 0.0);
    }
    EXPECT_EQ(s.total_pulls, 4u);
}

TEST(Ucb, DominantArmHasLargestScore) {
    auto s = make_bandit({0.1, 1.0, 10.0});
    for (std::size_t a = 0; a < 3; ++a)
        for (int i = 0; i < 1000; ++i) ucb_observe_reward(s, a, a == 1 ? 1.0 : 0.0);
    EXPECT_GT(ucb_score(s, 1), ucb_score(s, 0));
    EXPECT_GT(ucb_score(s, 1), ucb_score(s, 2));
    EXPECT_EQ(ucb_step(s), 1u);
}

TEST(Ucb, TwoArmRecurrenceMatchesIndependentSimulation) {
    // independent Python simulation of the same recurrence: pulls {6, 94}
    auto s = make_bandit({1.0, 2.0}, 1.0);
    for (int t = 0; t < 100; ++t) {
        const auto arm = ucb_step(s);
        ucb_observe_reward(s, arm, arm == 1 ? 1.0 : 0.0);
    }
    EXPECT_EQ(s.arms[0].pulls, 6u);
    EXPECT_EQ(s.arms[1].pulls, 94u);
}

TEST(Ucb, RewardIsNormalizedBestImprovement) {
    auto s = make_bandit({1.0, 2.0});
    ucb_observe(s, 0, Vector{3.0, -2.0, 1.0});
    EXPECT_DOUBLE_EQ(s.arms[0].reward_sum, 1.0);
    ucb_observe(s, 1, Vector{-1.0, 5.0});
    EXPECT_DOUBLE_EQ(s.arms[1].reward_sum, 0.5);
    ucb_observe(s, 1, Vector{1.0, 5.0});
    EXPECT_DOUBLE_EQ(s.arms[1].reward_sum, 0.5);
}

TEST(Ucb, PullsSumToGenerations) {
    const Objective obj(ObjectiveKind::ackley, 5);
    EvolutionParams p;
    p.population_size = 8;
    p.generations = 37;
    UcbController c(log_spaced(1e-4, 1e2, 9));
    evolve(obj, p, c);
    std::size_t total = 0;
    for (const auto& a : c.state().arms) {
        total += a.pulls;
        EXPECT_GE(a.pulls, 1u);
    }
    EXPECT_EQ(total, 37u);
}

// ---------------------------------------------------------------------------
// Fixed

TEST(Fixed, Rates) {
    EXPECT_EQ(fmr().sigma(), 0.01);
    EXPECT_EQ(one_over_d(100).sigma(), 0.01);
    EXPECT_EQ(one_over_d(1).sigma(), 1.0);
    EXPECT_THROW(one_over_d(0), std::invalid_argument);
}

TEST(Rates, LogSpaced) {
    const auto g = log_spaced(1e-4, 1e2, 9);
    ASSERT_EQ(g.size(), 9u);
    EXPECT_EQ(g.front(), 1e-4);
    EXPECT_EQ(g.back(), 1e2);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(std::log10(g[i] / g[i - 1]), 0.75, 1e-12);
}
