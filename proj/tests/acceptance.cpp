// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "solsel/boosting.hpp"
#include "solsel/experiment.hpp"
#include "solsel/gp.hpp"
#include "solsel/harness.hpp"
#include "solsel/selector.hpp"

using namespace solsel;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double mean_time(const std::vector<EpisodeTrace>& traces) {
    double s = 0.0;
    for (const auto& t : traces) s += t.total_time();
    return s / static_cast<double>(traces.size());
}

ScenarioSpec config(const char* name) {
    return ScenarioSpec::load(std::string(SOLSEL_CONFIG_DIR) + "/" + name);
}

SelectorPolicy policy_of(PolicyKind k) {
    SelectorPolicy p;
    p.kind = k;
    return p;
}

// 1: GP posterior against a direct-inverse reference.
Outcome c1() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const int dim = 1 + static_cast<int>(rng() % 4);
        Eigen::MatrixXd X(n, dim);
        Eigen::VectorXd y(n);
        oracle::Matrix Xo;
        std::vector<double> yo;
        for (int i = 0; i < n; ++i) {
            std::vector<double> row;
            for (int k = 0; k < dim; ++k) {
                X(i, k) = u(rng);
                row.push_back(X(i, k));
            }
            y(i) = std::cos(row[0]) + 0.5 * u(rng);
            Xo.push_back(row);
            yo.push_back(y(i));
        }
        const auto m = GPModel::fit(X, y);
        for (int q = 0; q < 5; ++q) {
            std::vector<double> x(static_cast<std::size_t>(dim));
            for (auto& v : x) v = u(rng);
            const auto p = m.predict(x);
            const auto o = oracle::gp_posterior(Xo, yo, m.length_scale(), m.noise(), kGpJitter, x);
            worst = std::max({worst, std::fabs(p.mean - o.mean), std::fabs(p.variance - o.variance)});
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-8 && secs < 5.0, fmt("max deviation %.2e, %.2f s", worst, secs)};
}

// 2: UCB reduces to the mean at alpha = 0 and grows with alpha.
Outcome c2() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd X(15, 2);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) {
        X(i, 0) = u(rng);
        X(i, 1) = u(rng);
        y(i) = X(i, 0) * X(i, 1);
    }
    const auto m = GPModel::fit(X, y);
    double worst = 0.0;
    bool monotone = true;
    for (int q = 0; q < 100; ++q) {
        const std::vector<double> x{2.0 * u(rng), 2.0 * u(rng)};
        const auto p = m.predict(x);
        worst = std::max(worst, std::fabs(ucb(m, x, {0.0, false}) - p.mean));
        for (bool use_std : {false, true}) {
            double prev = -INFINITY;
            for (double a : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
                const double v = ucb(m, x, {a, use_std});
                if (v < prev) monotone = false;
                prev = v;
            }
        }
    }
    return {worst <= 1e-12 && monotone,
            fmt("max |ucb(0) - mean| %.1e", worst) + ", monotone in alpha: " + (monotone ? "yes" : "no")};
}

// 3: boosting training error, step data, determinism.
Outcome c3() {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01(0.0, 1.0);
    bool monotone = true;
    bool deterministic = true;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 20 + trial * 5;
        Eigen::MatrixXd X(n, 3);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < 3; ++k) X(i, k) = n01(rng);
            y(i) = std::sin(X(i, 0)) + X(i, 1) * X(i, 2) + 0.1 * n01(rng);
        }
        const auto a = BoostingModel::fit(X, y);
        const auto b = BoostingModel::fit(X, y);
        const auto& mse = a.training_mse();
        for (std::size_t k = 1; k < mse.size(); ++k) {
            if (mse[k] > mse[k - 1] + 1e-12) monotone = false;
        }
        for (int i = 0; i < n; ++i) {
            const std::vector<double> x{X(i, 0), X(i, 1), X(i, 2)};
            if (a.predict(x) != b.predict(x)) deterministic = false;
        }
    }
    Eigen::MatrixXd X(4, 1);
    X << 0.0, 0.1, 0.9, 1.0;
    Eigen::VectorXd y(4);
    y << 0.0, 0.0, 1.0, 1.0;
    BoostingParams p;
    p.max_depth = 1;
    p.n_rounds = 200;
    const auto m = BoostingModel::fit(X, y, p);
    double step_err = 0.0;
    for (int i = 0; i < 4; ++i) {
        step_err = std::max(step_err, std::fabs(m.predict(std::vector<double>{X(i, 0)}) - y(i)));
    }
    const double expected = oracle::step_residual(0.0, 1.0, p.learning_rate, p.n_rounds);
    const bool ok = monotone && deterministic && step_err <= 1e-6 && std::fabs(step_err - expected) < 1e-12;
    return {ok, fmt("step-data error %.2e (expected %.2e)", step_err, expected) +
                    ", monotone: " + (monotone ? "yes" : "no") +
                    ", deterministic: " + (deterministic ? "yes" : "no")};
}

// 4: reward and failure penalty recomputed from the traces.
Outcome c4() {
    double worst = 0.0;
    bool below = true;
    int failures = 0;
    for (auto kind : {PolicyKind::Random, PolicyKind::Heuristic}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto t = run_episode(ScenarioSpec::regime_default(), policy_of(kind), seed);
            std::vector<double> successes;
            std::vector<double> success_rewards;
            for (const auto& s : t.steps) {
                if (s.outcome.success) {
                    successes.push_back(s.outcome.t_sol);
                    worst = std::max(worst, std::fabs(s.reward + std::log(s.outcome.t_sol)));
                    success_rewards.push_back(s.reward);
                } else {
                    ++failures;
                    worst = std::max(worst, std::fabs(s.reward - oracle::penalty(successes, 1.0)));
                    for (double r : success_rewards) below = below && s.reward < r;
                }
            }
        }
    }
    return {worst <= 1e-12 && below && failures > 0,
            fmt("max deviation %.1e over %.0f failures", worst, failures) +
                ", penalty below prior rewards: " + (below ? "yes" : "no")};
}

// 5: heuristic exploration frequency and epsilon decay.
Outcome c5() {
    auto space = std::make_shared<const SolverSpace>(
        DecisionNode::categorical("s", {{"a", {}}, {"b", {}}}));
    const SelectorPolicy policy;
    const std::vector<double> ctx;
    double explores = 0.0;
    double prob_sum = 0.0;
    double eps_dev = 0.0;
    int steps = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Selector sel(space, policy, seed);
        int post = 0;
        long k = 0;
        while (post < 200) {
            const auto d = sel.select(ctx);
            sel.observe(d.config, ctx, 1.0, true, k++);
            if (d.tag == DecisionTag::Bootstrap) continue;
            ++post;
            ++steps;
            prob_sum += d.explore_probability;
            if (d.tag == DecisionTag::Explore) explores += 1.0;
            for (const auto& s : sel.states()) {
                double expected = policy.epsilon0;
                for (int e = 0; e < s.explore_count; ++e) expected *= policy.gamma;
                eps_dev = std::max(eps_dev, std::fabs(s.epsilon - expected));
            }
        }
    }
    const double freq = explores / steps;
    const double mean_p = prob_sum / steps;
    return {std::fabs(freq - mean_p) <= 0.1 && eps_dev <= 1e-12,
            fmt("explore frequency %.4f vs mean probability %.4f, epsilon deviation %.1e", freq,
                mean_p, eps_dev)};
}

// 6: scenario A heuristic converges near the optimum and beats random.
Outcome c6() {
    const auto spec = config("scenario_a.json");
    const auto t0 = Clock::now();
    const auto heur = run_episodes(spec, policy_of(PolicyKind::Heuristic), 0, 20);
    const double secs = seconds_since(t0);
    const auto rand = run_episodes(spec, policy_of(PolicyKind::Random), 0, 20);
    double frac = 0.0;
    for (const auto& t : heur) {
        int near = 0;
        for (std::size_t k = t.steps.size() - 30; k < t.steps.size(); ++k) {
            const auto c = t.steps[k].decision.candidate_index;
            if (c >= 9 && c <= 13) ++near;
        }
        frac += near / 30.0;
    }
    frac /= static_cast<double>(heur.size());
    const double mh = mean_time(heur);
    const double mr = mean_time(rand);
    return {frac >= 0.6 && mh <= 0.9 * mr && secs < 30.0,
            fmt("final-30 share in [9,13] %.3f, heuristic/random %.3f, %.1f s", frac, mh / mr, secs)};
}

// 7: scenario B GP against oracle and random.
Outcome c7() {
    const auto spec = config("scenario_b.json");
    const auto t0 = Clock::now();
    const auto gp = run_episodes(spec, policy_of(PolicyKind::Gp), 0, 20);
    const double secs = seconds_since(t0);
    const auto orc = run_episodes(spec, policy_of(PolicyKind::Oracle), 0, 20);
    const auto rnd = run_episodes(spec, policy_of(PolicyKind::Random), 0, 20);
    int agree = 0;
    int total = 0;
    for (const auto& t : gp) {
        for (std::size_t k = t.steps.size() - 100; k < t.steps.size(); ++k) {
            ++total;
            if (t.steps[k].decision.config == t.steps[k].oracle_config) ++agree;
        }
    }
    const double mg = mean_time(gp);
    const double mo = mean_time(orc);
    const double mr = mean_time(rnd);
    const double agreement = static_cast<double>(agree) / total;
    return {mg <= 1.2 * mo && mg <= 0.8 * mr && agreement >= 0.7 && secs < 300.0,
            fmt("gp/oracle %.3f, gp/random %.3f, ", mg / mo, mg / mr) +
                fmt("last-100 agreement %.3f, %.1f s", agreement, secs)};
}

// 8: warm start from a base-scenario run helps on a shifted variant.
Outcome c8() {
    const auto base = run_episode(config("scenario_b.json"), policy_of(PolicyKind::Heuristic), 0);
    const auto shifted = config("scenario_b_shifted.json");
    const auto policy = policy_of(PolicyKind::Heuristic);
    const double warm = mean_time(run_episodes(shifted, policy, 0, 20, base.dataset));
    const double cold = mean_time(run_episodes(shifted, policy, 0, 20));
    return {warm <= cold, fmt("warm %.3f, cold %.3f", warm, cold)};
}

// 9: refit cost growth from n = 50 to n = 400.
Outcome c9() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.0, 1.0);
    auto data = [&](int n) {
        Eigen::MatrixXd X(n, 6);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < 6; ++k) X(i, k) = n01(rng);
            y(i) = std::sin(X(i, 0)) + 0.1 * n01(rng);
        }
        return std::make_pair(X, y);
    };
    auto median_time = [](const std::function<void()>& f) {
        std::vector<double> t;
        for (int r = 0; r < 5; ++r) {
            const auto t0 = Clock::now();
            f();
            t.push_back(seconds_since(t0));
        }
        std::sort(t.begin(), t.end());
        return t[2];
    };
    const auto [Xs, ys] = data(50);
    const auto [Xl, yl] = data(400);
    const double gp_small = median_time([&] { GPModel::fit(Xs, ys); });
    const double gp_large = median_time([&] { GPModel::fit(Xl, yl); });
    const double b_small = median_time([&] { BoostingModel::fit(Xs, ys); });
    const double b_large = median_time([&] { BoostingModel::fit(Xl, yl); });
    const double gp_ratio = gp_large / gp_small;
    const double b_ratio = b_large / b_small;
    return {gp_ratio > b_ratio && b_ratio <= 5.0,
            fmt("gp ratio %.1f, boosting ratio %.2f", gp_ratio, b_ratio)};
}

// 10: byte-identical outputs for the same seed.
Outcome c10() {
    const fs::path root = fs::temp_directory_path() / "solsel_acceptance_c10";
    fs::remove_all(root);
    bool same = true;
    int files = 0;
    auto run_twice = [&](const char* scenario, PolicyKind kind, int repeats, const std::string& tag) {
        ExperimentConfig c;
        c.scenario = config(scenario);
        c.policy = policy_of(kind);
        c.repeats = repeats;
        c.seed = 3;
        c.out_dir = (root / (tag + "_1")).string();
        run_experiment(c);
        c.out_dir = (root / (tag + "_2")).string();
        c.jobs = 2;
        run_experiment(c);
        for (const auto& entry : fs::directory_iterator(root / (tag + "_1"))) {
            const auto name = entry.path().filename().string();
            if (name == "overhead.csv") continue;  // wall-clock timings
            std::ifstream a(entry.path(), std::ios::binary);
            std::ifstream b(root / (tag + "_2") / name, std::ios::binary);
            std::stringstream sa;
            std::stringstream sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            if (!b || sa.str() != sb.str()) same = false;
            ++files;
        }
    };
    run_twice("scenario_a.json", PolicyKind::Heuristic, 3, "a_heuristic");
    run_twice("scenario_b.json", PolicyKind::Heuristic, 2, "b_heuristic");
    run_twice("scenario_a.json", PolicyKind::Gp, 2, "a_gp");
    fs::remove_all(root);
    return {same && files > 0, fmt("%.0f files compared", files) + (same ? ", identical" : ", differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"GP posterior matches reference", c1},
        {"UCB limit and monotonicity", c2},
        {"boosting fit properties", c3},
        {"reward and failure penalty", c4},
        {"exploration frequency and decay", c5},
        {"scenario A convergence", c6},
        {"scenario B GP performance", c7},
        {"warm start on shifted scenario", c8},
        {"refit cost scaling", c9},
        {"reproducible outputs", c10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
