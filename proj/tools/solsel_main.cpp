// solsel: run seeded solver-selection experiments on the surrogate scenarios
// and compare their summaries.
//
//   solsel run --scenario configs/scenario_a.json --policy heuristic --out runs/a_heur
//   solsel compare runs/a_heur/summary.csv runs/a_rand/summary.csv

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "solsel/error.hpp"
#include "solsel/experiment.hpp"

namespace {

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online solver selection: surrogate experiment runner"};
    app.require_subcommand(1);

    solsel::ExperimentConfig config;
    std::string scenario_path;
    std::string policy = "heuristic";
    std::string warm_start;
    int fixed_group = -1;
    std::string fixed_values;

    auto* run = app.add_subcommand("run", "Run repeated seeded episodes of one policy");
    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--policy", policy, "heuristic | gp | random | fixed | oracle")
        ->check(CLI::IsMember({"heuristic", "gp", "random", "fixed", "oracle"}));
    run->add_option("--epsilon0", config.policy.epsilon0, "Initial exploration probability per group");
    run->add_option("--gamma", config.policy.gamma, "Exploration decay factor");
    run->add_option("--alpha", config.policy.ucb.alpha, "UCB weight on the posterior variance");
    run->add_flag("--ucb-std", config.policy.ucb.use_std, "Weight the standard deviation instead of the variance");
    run->add_option("--n-init", config.policy.n_init, "Random observations per group before modelling");
    run->add_option("--boost-rounds", config.policy.boosting.n_rounds, "Boosting rounds");
    run->add_option("--boost-lr", config.policy.boosting.learning_rate, "Boosting learning rate");
    run->add_option("--boost-depth", config.policy.boosting.max_depth, "Boosting tree depth");
    run->add_option("--fixed-group", fixed_group, "Group id for --policy fixed");
    run->add_option("--fixed-values", fixed_values, "Comma-separated numeric values for --policy fixed");
    run->add_option("--repeats", config.repeats, "Number of seeded repetitions");
    run->add_option("--seed", config.seed, "Seed of the first repetition");
    run->add_option("--warm-start", warm_start, "Performance data file to preload")->check(CLI::ExistingFile);
    run->add_option("--out", config.out_dir, "Output directory")->required();
    run->add_option("--jobs", config.jobs, "Episodes run concurrently");
    run->add_option("--label", config.label, "Column name used by compare");

    std::vector<std::string> summaries;
    std::string compare_csv;
    auto* cmp = app.add_subcommand("compare", "Compare summary.csv files of one scenario");
    cmp->add_option("summaries", summaries, "summary.csv files")->required()->expected(2, -1);
    cmp->add_option("--csv", compare_csv, "Also write the comparison as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            config.scenario = solsel::ScenarioSpec::load(scenario_path);
            config.policy.kind = solsel::parse_policy(policy);
            if (config.policy.kind == solsel::PolicyKind::Fixed) {
                if (fixed_group < 0) throw solsel::ConfigError("--policy fixed needs --fixed-group");
                config.policy.fixed = solsel::SolverConfig{fixed_group, parse_values(fixed_values)};
            }
            if (!warm_start.empty()) config.warm_start = warm_start;
            const auto result = solsel::run_experiment(config);
            const auto& s = result.summary;
            std::cout << "scenario " << s.scenario_hash << "  policy " << s.policy << "  repeats "
                      << s.episodes.size() << '\n'
                      << "cumulative solve time  worst " << s.worst() << "  mean " << s.mean()
                      << "  best " << s.best() << '\n'
                      << "wrote " << config.out_dir << '\n';
        } else if (*cmp) {
            std::vector<solsel::Summary> loaded;
            for (const auto& path : summaries) loaded.push_back(solsel::load_summary(path));
            const auto c = solsel::compare(std::move(loaded));
            std::cout << c.to_text();
            if (!compare_csv.empty()) {
                std::ofstream out(compare_csv);
                if (!out) throw solsel::ConfigError("cannot write '" + compare_csv + "'");
                out << c.to_csv();
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "solsel: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
