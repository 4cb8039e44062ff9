#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "solsel/error.hpp"
#include "solsel/harness.hpp"

using namespace solsel;

TEST(Convex, MinimumAtGridIndexEleven) {
    const ConvexParams p;
    const auto grid = discretize(p.param);
    int best = -1;
    int best_iters = 1 << 30;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const int it = convex_iterations(p, grid[i]);
        // Independent evaluation of the iteration law.
        EXPECT_EQ(it, static_cast<int>(std::lround(30.0 + 170.0 * (grid[i] - 0.6) * (grid[i] - 0.6))));
        if (it < best_iters) {
            best_iters = it;
            best = static_cast<int>(i);
        }
    }
    EXPECT_EQ(best, 11);
    EXPECT_EQ(best_iters, 30);
    EXPECT_EQ(convex_iterations(p, 0.0), 91);
    EXPECT_EQ(convex_iterations(p, 1.0), 57);
}

TEST(Regime, CrossoverEqualizesCosts) {
    const RegimeParams p;
    const double pe = crossover_peclet(p);
    EXPECT_NEAR(pe, std::sqrt(40.0), 1e-14);
    EXPECT_NEAR(cpr_cost(p, pe), schur_cost(p, pe), 1e-15);
    EXPECT_LT(cpr_cost(p, 2.0 * pe), schur_cost(p, 2.0 * pe));
    EXPECT_GT(cpr_cost(p, 0.5 * pe), schur_cost(p, 0.5 * pe));
    EXPECT_NEAR(cpr_cost(p, 1.0), 0.05 * 3.0, 1e-15);
    EXPECT_NEAR(schur_cost(p, 20.0), 0.05 * 2.0, 1e-15);
}

TEST(DtController, Examples) {
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 4, 1.0, 1e6), 100.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 2, 1.0, 1e6), 200.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 1, 1.0, 1e6), 200.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 8, 1.0, 1e6), 50.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 20, 1.0, 1e6), 50.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 5, 1.0, 1e6), 80.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 1, 1.0, 150.0), 150.0);
    EXPECT_DOUBLE_EQ(dt_controller(100.0, 10, 60.0, 1e6), 60.0);
    EXPECT_THROW(dt_controller(100.0, 0, 1.0, 1e6), DomainError);
    EXPECT_THROW(dt_controller(0.0, 4, 1.0, 1e6), DomainError);
}

TEST(Scenario, JsonRoundTripAndHash) {
    for (const auto& s : {ScenarioSpec::convex_default(), ScenarioSpec::regime_default(),
                          ScenarioSpec::regime_default(true)}) {
        const auto back = ScenarioSpec::from_json(s.to_json());
        EXPECT_EQ(back.to_json(), s.to_json());
        EXPECT_EQ(back.hash(), s.hash());
        EXPECT_EQ(s.hash().size(), 16u);
    }
    EXPECT_NE(ScenarioSpec::convex_default().hash(), ScenarioSpec::regime_default().hash());
    EXPECT_EQ(ScenarioSpec::load(SOLSEL_CONFIG_DIR "/scenario_a.json").hash(),
              ScenarioSpec::convex_default().hash());
}

TEST(Scenario, Validation) {
    EXPECT_THROW(ScenarioSpec::from_json(R"({"kind":"weird"})"), ConfigError);
    EXPECT_THROW(ScenarioSpec::from_json(R"({"kind":"convex_param","n_steps":0})"), ConfigError);
    EXPECT_THROW(ScenarioSpec::from_json(R"({"kind":"regime_switch","regime":{"p_fail":2}})"), ConfigError);
    EXPECT_THROW(ScenarioSpec::from_json("nope"), ConfigError);
    EXPECT_THROW(ScenarioSpec::load(SOLSEL_CONFIG_DIR "/fig2_space.json"), ConfigError);
}

TEST(Scenario, Spaces) {
    EXPECT_EQ(ScenarioSpec::convex_default().make_space()->total_candidates(), 20u);
    const auto b = ScenarioSpec::regime_default();
    ASSERT_EQ(b.make_space()->num_groups(), 2u);
    EXPECT_EQ(b.variants()[0].family, CostFamily::Cpr);
    const auto ext = ScenarioSpec::regime_default(true);
    EXPECT_EQ(ext.make_space()->num_groups(), 19u);
    std::set<CostFamily> families;
    for (const auto& v : ext.variants()) {
        families.insert(v.family);
        EXPECT_GE(v.offset, 0.9);
        EXPECT_LE(v.offset, 1.5);
    }
    EXPECT_EQ(families.size(), 2u);
}

TEST(Environment, RegimeContextAndSchedule) {
    const auto spec = ScenarioSpec::regime_default();
    auto env = make_environment(spec, 1);
    const auto space = spec.make_space();
    const SolverConfig schur{1, {}};
    int cpr_cheaper = 0;
    int failures = 0;
    for (int k = 0; k < spec.n_steps; ++k) {
        const auto ctx = build_context(spec.schema, env->raw_context());
        ASSERT_EQ(ctx.size(), 6u);
        const bool active = ctx[5] == 1.0;
        const bool in_window = k % 100 < 20;
        EXPECT_EQ(active, in_window) << "step " << k;
        if (env->expected_cost({0, {}}) < env->expected_cost(schur)) ++cpr_cheaper;
        const auto out = env->solve(schur);
        EXPECT_TRUE(out.success);
        EXPECT_GT(out.t_sol, 0.0);
        EXPECT_GE(env->dt(), spec.regime.dt_min);
        EXPECT_LE(env->dt(), spec.regime.dt_max);
        failures += out.success ? 0 : 1;
    }
    EXPECT_EQ(failures, 0);
    // The cheaper family changes with the regime.
    EXPECT_GT(cpr_cheaper, 0);
    EXPECT_LT(cpr_cheaper, spec.n_steps);
}

TEST(Episode, OracleTracksNoiseFreeMinimum) {
    SelectorPolicy oracle;
    oracle.kind = PolicyKind::Oracle;
    const auto t = run_episode(ScenarioSpec::convex_default(), oracle, 4);
    ASSERT_EQ(t.steps.size(), 100u);
    for (const auto& s : t.steps) {
        EXPECT_EQ(s.decision.tag, DecisionTag::Oracle);
        EXPECT_EQ(s.decision.candidate_index, 11u);
        EXPECT_NEAR(s.oracle_cost, 0.30, 1e-12);
        EXPECT_EQ(s.expected_cost, s.oracle_cost);
    }
}

TEST(Episode, CumulativeTimeAndDatasetAgree) {
    SelectorPolicy policy;
    const auto t = run_episode(ScenarioSpec::regime_default(), policy, 2);
    ASSERT_EQ(t.steps.size(), 300u);
    ASSERT_EQ(t.dataset.size(), 300u);
    double sum = 0.0;
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
        sum += t.steps[k].outcome.t_sol;
        EXPECT_DOUBLE_EQ(t.steps[k].cumulative_time, sum);
        EXPECT_EQ(t.dataset[k].reward, t.steps[k].reward);
        EXPECT_EQ(t.dataset[k].context, t.steps[k].context);
        EXPECT_LE(t.steps[k].oracle_cost, t.steps[k].expected_cost + 1e-15);
    }
    EXPECT_EQ(t.count(DecisionTag::Bootstrap) + t.count(DecisionTag::Explore) +
                  t.count(DecisionTag::Exploit),
              300);
}

TEST(Episode, DeterministicPerSeed) {
    for (auto kind : {PolicyKind::Heuristic, PolicyKind::Random}) {
        SelectorPolicy policy;
        policy.kind = kind;
        const auto a = run_episode(ScenarioSpec::regime_default(), policy, 7);
        const auto b = run_episode(ScenarioSpec::regime_default(), policy, 7);
        const auto c = run_episode(ScenarioSpec::regime_default(), policy, 8);
        ASSERT_EQ(a.steps.size(), b.steps.size());
        for (std::size_t k = 0; k < a.steps.size(); ++k) {
            EXPECT_EQ(a.steps[k].decision.config, b.steps[k].decision.config);
            EXPECT_EQ(a.steps[k].outcome.t_sol, b.steps[k].outcome.t_sol);
        }
        EXPECT_NE(a.total_time(), c.total_time());
    }
}

TEST(Episode, PoliciesShareNoise) {
    // Same seed, same fixed choice: identical outcomes regardless of the policy object.
    SelectorPolicy fixed;
    fixed.kind = PolicyKind::Fixed;
    fixed.fixed = SolverConfig{1, {}};
    const auto a = run_episode(ScenarioSpec::regime_default(), fixed, 3);
    const auto b = run_episode(ScenarioSpec::regime_default(), fixed, 3);
    EXPECT_EQ(a.total_time(), b.total_time());
    // The oracle sees the same per-step noise draws as the fixed policy.
    SelectorPolicy oracle;
    oracle.kind = PolicyKind::Oracle;
    const auto o = run_episode(ScenarioSpec::regime_default(), oracle, 3);
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
        EXPECT_EQ(o.steps[k].oracle_cost, o.steps[k].expected_cost);
    }
    EXPECT_LT(o.total_time(), a.total_time());
}
