#include "solsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "solsel/error.hpp"

namespace solsel {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ConfigError("error while writing '" + path.string() + "'");
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += format_double(values[i]);
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("expected a number, got '" + s + "'", line);
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("expected an integer, got '" + s + "'", line);
    }
    return v;
}

constexpr const char* kSummaryHeader =
    "scenario_hash,label,policy,repeats,seed_base,worst,mean,best,mean_explore,mean_failures";
constexpr const char* kEpisodesHeader = "seed,cumulative_time,bootstrap,explore,exploit,failures";

}  // namespace

void ExperimentConfig::validate() const {
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    scenario.validate();
    if (policy.kind != PolicyKind::Oracle) policy.validate();
    if (warm_start && !fs::exists(*warm_start)) {
        throw ConfigError("warm-start file '" + *warm_start + "' does not exist");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

double Summary::worst() const {
    double w = episodes.front().cumulative_time;
    for (const auto& e : episodes) w = std::max(w, e.cumulative_time);
    return w;
}

double Summary::best() const {
    double b = episodes.front().cumulative_time;
    for (const auto& e : episodes) b = std::min(b, e.cumulative_time);
    return b;
}

double Summary::mean() const {
    double s = 0.0;
    for (const auto& e : episodes) s += e.cumulative_time;
    return s / static_cast<double>(episodes.size());
}

double Summary::mean_explore() const {
    double s = 0.0;
    for (const auto& e : episodes) s += e.explore;
    return s / static_cast<double>(episodes.size());
}

double Summary::mean_failures() const {
    double s = 0.0;
    for (const auto& e : episodes) s += e.failures;
    return s / static_cast<double>(episodes.size());
}

std::vector<EpisodeTrace> run_episodes(const ScenarioSpec& scenario, const SelectorPolicy& policy,
                                       std::uint64_t seed_base, int repeats,
                                       const Dataset& warm_start, int jobs) {
    std::vector<EpisodeTrace> traces(static_cast<std::size_t>(repeats));
    const int workers = std::max(1, std::min(jobs, repeats));
    if (workers == 1) {
        for (int i = 0; i < repeats; ++i) {
            traces[static_cast<std::size_t>(i)] =
                run_episode(scenario, policy, seed_base + static_cast<std::uint64_t>(i), warm_start);
        }
        return traces;
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < repeats; i = next++) {
                try {
                    traces[static_cast<std::size_t>(i)] = run_episode(
                        scenario, policy, seed_base + static_cast<std::uint64_t>(i), warm_start);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return traces;
}

Summary summarize(const std::string& scenario_hash, const std::string& label,
                  const std::string& policy, std::uint64_t seed_base,
                  const std::vector<EpisodeTrace>& traces) {
    Summary s;
    s.scenario_hash = scenario_hash;
    s.label = label;
    s.policy = policy;
    s.seed_base = seed_base;
    for (const auto& t : traces) {
        s.episodes.push_back(EpisodeSummary{t.seed, t.total_time(), t.count(DecisionTag::Bootstrap),
                                            t.count(DecisionTag::Explore),
                                            t.count(DecisionTag::Exploit), t.failures()});
    }
    return s;
}

std::string trace_csv(const EpisodeTrace& trace, const SolverSpace& space) {
    std::ostringstream out;
    out << "step,group_id,group_label,numeric_values,candidate_index,tag,explore_probability,"
           "epsilon,success,t_sol,newton_iters,dt,reward,cumulative_time,context,expected_cost,"
           "oracle_group_id,oracle_candidate_index,oracle_cost,gp_length_scale,gp_noise,gp_lml\n";
    for (const auto& s : trace.steps) {
        const auto& d = s.decision;
        out << s.step << ',' << d.config.group_id << ',' << space.group(d.config.group_id).label()
            << ',' << join(d.config.numeric_values) << ',' << d.candidate_index << ','
            << tag_name(d.tag) << ',' << format_double(d.explore_probability) << ','
            << format_double(d.epsilon) << ',' << (s.outcome.success ? 1 : 0) << ','
            << format_double(s.outcome.t_sol) << ',' << s.outcome.newton_iters << ','
            << format_double(s.dt) << ',' << format_double(s.reward) << ','
            << format_double(s.cumulative_time) << ',' << join(s.context) << ','
            << format_double(s.expected_cost) << ',' << s.oracle_config.group_id << ','
            << s.oracle_index << ',' << format_double(s.oracle_cost) << ',';
        if (s.gp) {
            out << format_double(s.gp->length_scale) << ',' << format_double(s.gp->noise) << ','
                << format_double(s.gp->log_likelihood);
        } else {
            out << ",,";
        }
        out << '\n';
    }
    return out.str();
}

std::string summary_csv(const Summary& s) {
    std::ostringstream out;
    out << kSummaryHeader << '\n'
        << s.scenario_hash << ',' << s.label << ',' << s.policy << ',' << s.episodes.size() << ','
        << s.seed_base << ',' << format_double(s.worst()) << ',' << format_double(s.mean()) << ','
        << format_double(s.best()) << ',' << format_double(s.mean_explore()) << ','
        << format_double(s.mean_failures()) << '\n';
    return out.str();
}

std::string episodes_csv(const Summary& s) {
    std::ostringstream out;
    out << kEpisodesHeader << '\n';
    for (const auto& e : s.episodes) {
        out << e.seed << ',' << format_double(e.cumulative_time) << ',' << e.bootstrap << ','
            << e.explore << ',' << e.exploit << ',' << e.failures << '\n';
    }
    return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    Dataset warm;
    if (config.warm_start) warm = Dataset::load(*config.warm_start);

    ExperimentResult result;
    result.traces = run_episodes(config.scenario, config.policy, config.seed, config.repeats, warm,
                                 config.jobs);
    const std::string policy = policy_name(config.policy.kind);
    result.summary = summarize(config.scenario.hash(), config.label.empty() ? policy : config.label,
                               policy, config.seed, result.traces);

    if (config.out_dir.empty()) return result;

    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const auto space = config.scenario.make_space();
    std::size_t max_steps = 0;
    for (const auto& t : result.traces) {
        const std::string seed = std::to_string(t.seed);
        write_file(dir / ("trace_seed" + seed + ".csv"), trace_csv(t, *space));
        t.dataset.save((dir / ("dataset_seed" + seed + ".jsonl")).string());
        max_steps = std::max(max_steps, t.steps.size());
    }
    result.traces.front().dataset.save((dir / "dataset.jsonl").string());
    write_file(dir / "summary.csv", summary_csv(result.summary));
    write_file(dir / "episodes.csv", episodes_csv(result.summary));

    std::ostringstream overhead;
    overhead << "step,mean_refit_seconds,max_refit_seconds\n" << std::setprecision(6);
    for (std::size_t k = 0; k < max_steps; ++k) {
        double sum = 0.0;
        double mx = 0.0;
        int n = 0;
        for (const auto& t : result.traces) {
            if (k >= t.steps.size()) continue;
            sum += t.steps[k].refit_seconds;
            mx = std::max(mx, t.steps[k].refit_seconds);
            ++n;
        }
        overhead << k << ',' << (n ? sum / n : 0.0) << ',' << mx << '\n';
    }
    write_file(dir / "overhead.csv", overhead.str());
    write_file(dir / "scenario.json", config.scenario.to_json() + "\n");
    return result;
}

Summary load_summary(const std::string& summary_path) {
    std::ifstream in(summary_path);
    if (!in) throw ConfigError("cannot open summary file '" + summary_path + "'");
    std::string header;
    std::string row;
    std::getline(in, header);
    if (header != kSummaryHeader) throw ParseError("unexpected summary header", 1);
    if (!std::getline(in, row)) throw ParseError("summary has no data row", 2);
    const auto cells = split_csv_line(row);
    if (cells.size() != 10) throw ParseError("summary row needs 10 columns", 2);

    Summary s;
    s.scenario_hash = cells[0];
    s.label = cells[1];
    s.policy = cells[2];
    const auto repeats = parse_u64(cells[3], 2);
    s.seed_base = parse_u64(cells[4], 2);

    const fs::path episodes_path = fs::path(summary_path).parent_path() / "episodes.csv";
    std::ifstream ein(episodes_path);
    if (!ein) throw ConfigError("cannot open '" + episodes_path.string() + "'");
    std::string line;
    std::getline(ein, line);
    if (line != kEpisodesHeader) throw ParseError("unexpected episodes header", 1);
    std::size_t lineno = 1;
    while (std::getline(ein, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 6) throw ParseError("episodes row needs 6 columns", lineno);
        s.episodes.push_back(EpisodeSummary{parse_u64(c[0], lineno), parse_double(c[1], lineno),
                                            static_cast<int>(parse_u64(c[2], lineno)),
                                            static_cast<int>(parse_u64(c[3], lineno)),
                                            static_cast<int>(parse_u64(c[4], lineno)),
                                            static_cast<int>(parse_u64(c[5], lineno))});
    }
    if (s.episodes.size() != repeats) {
        throw ParseError("episodes.csv has " + std::to_string(s.episodes.size()) +
                             " rows, summary says " + std::to_string(repeats), lineno);
    }
    if (format_double(s.mean()) != cells[6] || format_double(s.worst()) != cells[5] ||
        format_double(s.best()) != cells[7]) {
        throw ParseError("summary statistics disagree with episodes.csv", 2);
    }
    return s;
}

Comparison compare(std::vector<Summary> summaries) {
    if (summaries.size() < 2) throw ComparisonError("compare needs at least two summaries");
    for (const auto& s : summaries) {
        if (s.episodes.empty()) throw ComparisonError("summary '" + s.label + "' has no episodes");
        if (s.scenario_hash != summaries.front().scenario_hash) {
            throw ComparisonError("summaries come from different scenarios (" +
                                  summaries.front().scenario_hash + " vs " + s.scenario_hash + ")");
        }
    }
    std::stable_sort(summaries.begin(), summaries.end(),
                     [](const Summary& a, const Summary& b) { return a.mean() < b.mean(); });
    Comparison c;
    c.ordered = std::move(summaries);
    const std::size_t n = c.ordered.size();
    c.mean_diff.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) c.mean_diff[i][j] = c.ordered[i].mean() - c.ordered[j].mean();
    }
    return c;
}

std::string Comparison::to_text() const {
    std::ostringstream out;
    std::size_t width = 8;
    for (const auto& s : ordered) width = std::max(width, s.label.size() + 2);
    out << std::left << std::setw(8) << "" << std::right;
    for (const auto& s : ordered) out << std::setw(static_cast<int>(width)) << s.label;
    out << '\n' << std::fixed << std::setprecision(4);
    auto row = [&](const char* name, auto&& value) {
        out << std::left << std::setw(8) << name << std::right;
        for (const auto& s : ordered) out << std::setw(static_cast<int>(width)) << value(s);
        out << '\n';
    };
    row("worst", [](const Summary& s) { return s.worst(); });
    row("mean", [](const Summary& s) { return s.mean(); });
    row("best", [](const Summary& s) { return s.best(); });
    out << "\nmean difference (row - column)\n" << std::left << std::setw(static_cast<int>(width)) << "" << std::right;
    for (const auto& s : ordered) out << std::setw(static_cast<int>(width)) << s.label;
    out << '\n';
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(width)) << ordered[i].label << std::right;
        for (std::size_t j = 0; j < ordered.size(); ++j) {
            out << std::setw(static_cast<int>(width)) << mean_diff[i][j];
        }
        out << '\n';
    }
    return out.str();
}

std::string Comparison::to_csv() const {
    std::ostringstream out;
    out << "label,policy,repeats,worst,mean,best";
    for (const auto& s : ordered) out << ",diff_vs_" << s.label;
    out << '\n';
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto& s = ordered[i];
        out << s.label << ',' << s.policy << ',' << s.episodes.size() << ','
            << format_double(s.worst()) << ',' << format_double(s.mean()) << ','
            << format_double(s.best());
        for (std::size_t j = 0; j < ordered.size(); ++j) out << ',' << format_double(mean_diff[i][j]);
        out << '\n';
    }
    return out.str();
}

}  // namespace solsel
