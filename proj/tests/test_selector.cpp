#include <gtest/gtest.h>

#include <cmath>

#include "solsel/error.hpp"
#include "solsel/selector.hpp"

using namespace solsel;

namespace {

std::shared_ptr<const SolverSpace> two_group_space() {
    const auto p = DecisionNode::numeric({"L", 0.0, 1.0, 5, false});
    return std::make_shared<const SolverSpace>(
        DecisionNode::categorical("s", {{"a", {p}}, {"b", {p}}}));
}

// Cost grows with distance from 0.25 in group 0; group 1 is uniformly slow.
double cost(const SolverConfig& c) {
    if (c.group_id == 1) return 2.0;
    const double d = c.numeric_values[0] - 0.25;
    return 0.5 + 4.0 * d * d;
}

}  // namespace

TEST(CombinedExploreProb, Examples) {
    EXPECT_DOUBLE_EQ(combined_explore_prob(std::vector<double>{0.5, 0.5}), 0.75);
    EXPECT_DOUBLE_EQ(combined_explore_prob(std::vector<double>{0.1}), 0.1);
    EXPECT_DOUBLE_EQ(combined_explore_prob(std::vector<double>{}), 0.0);
    EXPECT_DOUBLE_EQ(combined_explore_prob(std::vector<double>{1.0, 0.3}), 1.0);
    EXPECT_NEAR(combined_explore_prob(std::vector<double>{0.2, 0.3, 0.4}), 1.0 - 0.8 * 0.7 * 0.6, 1e-15);
}

TEST(Policy, Validation) {
    SelectorPolicy p;
    p.epsilon0 = 1.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.gamma = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.ucb.alpha = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.kind = PolicyKind::Fixed;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.boosting.max_bins = 1;
    EXPECT_THROW(p.validate(), ConfigError);
    EXPECT_THROW(parse_policy("greedy"), ConfigError);
    EXPECT_EQ(parse_policy("gp"), PolicyKind::Gp);

    SelectorPolicy oracle;
    oracle.kind = PolicyKind::Oracle;
    EXPECT_THROW(Selector(two_group_space(), oracle, 0), ConfigError);
}

TEST(Selector, BootstrapGatesEveryGroup) {
    SelectorPolicy policy;
    policy.n_init = 3;
    Selector sel(two_group_space(), policy, 42);
    const std::vector<double> ctx;
    for (int step = 0; step < 6; ++step) {
        const auto d = sel.select(ctx);
        EXPECT_EQ(d.tag, DecisionTag::Bootstrap) << "step " << step;
        sel.observe(d.config, ctx, cost(d.config), true, step);
    }
    EXPECT_EQ(sel.state(0).n_obs, 3u);
    EXPECT_EQ(sel.state(1).n_obs, 3u);
    EXPECT_TRUE(sel.state(0).model.has_value());
    EXPECT_TRUE(sel.state(1).model.has_value());
    for (int step = 6; step < 40; ++step) {
        const auto d = sel.select(ctx);
        EXPECT_NE(d.tag, DecisionTag::Bootstrap);
        sel.observe(d.config, ctx, cost(d.config), true, step);
    }
}

TEST(Selector, NoModelBeforeThreshold) {
    SelectorPolicy policy;
    policy.n_init = 4;
    Selector sel(two_group_space(), policy, 1);
    const std::vector<double> ctx;
    const SolverConfig c{0, {0.5}};
    for (int i = 0; i < 3; ++i) {
        EXPECT_FALSE(sel.observe(c, ctx, 1.0, true, i).refit);
        EXPECT_FALSE(sel.state(0).model.has_value());
    }
    EXPECT_TRUE(sel.observe(c, ctx, 1.0, true, 3).refit);
    EXPECT_THROW(sel.predict_reward({1, {0.5}}, ctx), ConfigError);
}

TEST(Selector, GroupsAreIsolated) {
    SelectorPolicy policy;
    policy.n_init = 2;
    Selector sel(two_group_space(), policy, 3);
    const std::vector<double> ctx;
    sel.observe({1, {0.0}}, ctx, 2.0, true, 0);
    sel.observe({1, {1.0}}, ctx, 2.0, true, 1);
    const double before = sel.predict_reward({1, {0.5}}, ctx);
    for (int i = 0; i < 10; ++i) sel.observe({0, {0.25 * (i % 5)}}, ctx, 0.1 + i, true, 2 + i);
    EXPECT_EQ(sel.state(1).n_obs, 2u);
    EXPECT_EQ(sel.predict_reward({1, {0.5}}, ctx), before);
    EXPECT_EQ(sel.dataset().group_size(0), 10u);
}

TEST(Selector, FailurePenaltyLowersPrediction) {
    for (auto kind : {PolicyKind::Heuristic, PolicyKind::Gp}) {
        SelectorPolicy policy;
        policy.kind = kind;
        policy.n_init = 1;
        Selector sel(two_group_space(), policy, 5);
        const std::vector<double> ctx;
        for (int i = 0; i < 5; ++i) sel.observe({0, {0.25 * i}}, ctx, 1.0, true, i);
        const double before = sel.predict_reward({0, {0.75}}, ctx);
        const auto r = sel.observe({0, {0.75}}, ctx, std::nullopt, false, 5);
        EXPECT_NEAR(r.reward, -std::log(2.0), 1e-15);
        sel.observe({0, {0.75}}, ctx, std::nullopt, false, 6);
        EXPECT_LT(sel.predict_reward({0, {0.75}}, ctx), before) << policy_name(kind);
    }
}

TEST(Selector, EpsilonDecaysPerExploration) {
    SelectorPolicy policy;
    policy.epsilon0 = 0.6;
    policy.gamma = 0.8;
    Selector sel(two_group_space(), policy, 11);
    const std::vector<double> ctx;
    for (int step = 0; step < 200; ++step) {
        const double p = sel.combined_explore_prob();
        const auto d = sel.select(ctx);
        if (d.tag != DecisionTag::Bootstrap) EXPECT_DOUBLE_EQ(d.explore_probability, p);
        for (const auto& s : sel.states()) {
            EXPECT_DOUBLE_EQ(s.epsilon, 0.6 * std::pow(0.8, s.explore_count));
        }
        EXPECT_EQ(d.epsilon, sel.state(d.config.group_id).epsilon);
        sel.observe(d.config, ctx, cost(d.config), true, step);
    }
    EXPECT_GT(sel.state(0).explore_count + sel.state(1).explore_count, 0);
}

TEST(Selector, HeuristicFindsCheapGroup) {
    SelectorPolicy policy;
    Selector sel(two_group_space(), policy, 19);
    const std::vector<double> ctx;
    int exploit_good = 0;
    int exploits = 0;
    for (int step = 0; step < 150; ++step) {
        const auto d = sel.select(ctx);
        if (d.tag == DecisionTag::Exploit) {
            ++exploits;
            if (d.config == SolverConfig{0, {0.25}}) ++exploit_good;
        }
        sel.observe(d.config, ctx, cost(d.config), true, step);
    }
    ASSERT_GT(exploits, 50);
    EXPECT_GT(exploit_good, exploits * 9 / 10);
}

TEST(Selector, FixedAndRandomPolicies) {
    SelectorPolicy fixed;
    fixed.kind = PolicyKind::Fixed;
    fixed.fixed = SolverConfig{1, {0.75}};
    Selector f(two_group_space(), fixed, 0);
    const std::vector<double> ctx;
    const auto d = f.select(ctx);
    EXPECT_EQ(d.tag, DecisionTag::Fixed);
    EXPECT_EQ(d.candidate_index, 3u);
    f.observe(d.config, ctx, 1.0, true, 0);
    EXPECT_FALSE(f.state(1).model.has_value());

    SelectorPolicy bad = fixed;
    bad.fixed = SolverConfig{1, {0.3}};
    EXPECT_THROW(Selector(two_group_space(), bad, 0), ConfigError);

    SelectorPolicy random;
    random.kind = PolicyKind::Random;
    Selector r(two_group_space(), random, 0);
    int group1 = 0;
    for (int i = 0; i < 400; ++i) {
        const auto x = r.select(ctx);
        EXPECT_EQ(x.tag, DecisionTag::Random);
        group1 += x.config.group_id;
        r.observe(x.config, ctx, 1.0, true, i);
    }
    EXPECT_GT(group1, 150);
    EXPECT_LT(group1, 250);
    EXPECT_FALSE(r.state(0).model.has_value());
}

TEST(Selector, WarmStartFitsImmediately) {
    Dataset warm;
    for (int i = 0; i < 4; ++i) {
        PerformanceRecord rec;
        rec.group_id = 0;
        rec.numeric_values = {0.25 * i};
        rec.t_sol = 3.0 + i;
        rec.reward = -std::log(3.0 + i);
        rec.step_index = i;
        warm.append(rec);
    }
    SelectorPolicy policy;
    Selector sel(two_group_space(), policy, 0, warm);
    EXPECT_TRUE(sel.state(0).model.has_value());
    EXPECT_FALSE(sel.state(1).model.has_value());
    EXPECT_EQ(sel.running_max().value(), 6.0);
    EXPECT_EQ(sel.dataset()[0].source, RecordSource::Imported);

    Dataset off_grid;
    PerformanceRecord bad;
    bad.group_id = 0;
    bad.numeric_values = {0.3};
    bad.t_sol = 1.0;
    off_grid.append(bad);
    EXPECT_THROW(Selector(two_group_space(), policy, 0, off_grid), ConfigError);
}

TEST(Selector, SameSeedSameDecisions) {
    for (auto kind : {PolicyKind::Heuristic, PolicyKind::Gp, PolicyKind::Random}) {
        SelectorPolicy policy;
        policy.kind = kind;
        Selector a(two_group_space(), policy, 99);
        Selector b(two_group_space(), policy, 99);
        const std::vector<double> ctx;
        for (int step = 0; step < 40; ++step) {
            const auto da = a.select(ctx);
            const auto db = b.select(ctx);
            ASSERT_EQ(da.config, db.config);
            ASSERT_EQ(da.tag, db.tag);
            a.observe(da.config, ctx, cost(da.config), true, step);
            b.observe(db.config, ctx, cost(db.config), true, step);
        }
    }
}
