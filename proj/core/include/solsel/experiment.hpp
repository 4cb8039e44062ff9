#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solsel/harness.hpp"
#include "solsel/selector.hpp"

namespace solsel {

struct ExperimentConfig {
    ScenarioSpec scenario;
    SelectorPolicy policy;
    // Column name used by compare; defaults to the policy name.
    std::string label;
    int repeats = 20;
    std::uint64_t seed = 0;
    std::optional<std::string> warm_start;
    // Empty: run without writing files.
    std::string out_dir;
    int jobs = 1;

    void validate() const;
};

struct EpisodeSummary {
    std::uint64_t seed = 0;
    double cumulative_time = 0.0;
    int bootstrap = 0;
    int explore = 0;
    int exploit = 0;
    int failures = 0;
};

struct Summary {
    std::string scenario_hash;
    std::string label;
    std::string policy;
    std::uint64_t seed_base = 0;
    std::vector<EpisodeSummary> episodes;

    double worst() const;
    double mean() const;
    double best() const;
    double mean_explore() const;
    double mean_failures() const;
};

struct ExperimentResult {
    Summary summary;
    std::vector<EpisodeTrace> traces;
};

/// Runs `repeats` episodes with seeds seed..seed+repeats-1 on up to `jobs`
/// threads. With out_dir set, writes (all from a single thread, in seed order):
///   trace_seed<N>.csv   per-step decision trace (deterministic)
///   summary.csv         worst/mean/best cumulative solve time and counts
///   episodes.csv        one row per seed
///   overhead.csv        per-step model-refit wall time (not deterministic)
///   dataset_seed<N>.jsonl, dataset.jsonl   performance data for warm starts
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Runs the episodes without touching the filesystem.
std::vector<EpisodeTrace> run_episodes(const ScenarioSpec& scenario, const SelectorPolicy& policy,
                                       std::uint64_t seed_base, int repeats,
                                       const Dataset& warm_start = {}, int jobs = 1);

Summary summarize(const std::string& scenario_hash, const std::string& label,
                  const std::string& policy, std::uint64_t seed_base,
                  const std::vector<EpisodeTrace>& traces);

std::string format_double(double v);

std::string trace_csv(const EpisodeTrace& trace, const SolverSpace& space);
std::string summary_csv(const Summary& summary);
std::string episodes_csv(const Summary& summary);

/// Reads summary.csv plus the sibling episodes.csv. Throws ParseError.
Summary load_summary(const std::string& summary_path);

struct Comparison {
    // Summaries ordered by ascending mean cumulative time.
    std::vector<Summary> ordered;
    // diff[i][j] = mean(ordered[i]) - mean(ordered[j]).
    std::vector<std::vector<double>> mean_diff;

    std::string to_text() const;
    std::string to_csv() const;
};

/// Throws ComparisonError for fewer than two summaries or mismatched scenarios.
Comparison compare(std::vector<Summary> summaries);

}  // namespace solsel
