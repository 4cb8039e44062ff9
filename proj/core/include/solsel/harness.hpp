#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "solsel/context.hpp"
#include "solsel/perf_data.hpp"
#include "solsel/selector.hpp"
#include "solsel/solver_space.hpp"

namespace solsel {

enum class ScenarioKind { ConvexParam, RegimeSwitch };

/// Scenario A: a single numeric parameter L with a convex iteration profile.
/// iterations(L) = round(i_min + curvature * (L - optimum)^2), t = tau * iterations.
struct ConvexParams {
    double i_min = 30.0;
    double curvature = 170.0;
    double optimum = 0.6;
    double tau = 0.01;
    NumericParam param{"L", 0.0, 1.0, 20, false};
};

/// Scenario B: two preconditioner families whose costs cross over in a
/// Peclet-number proxy driven by a cyclic injection schedule.
struct RegimeParams {
    double base = 0.05;
    double beta_cpr = 2.0;
    double beta_schur = 0.05;
    double p_fail = 0.5;
    double fail_cost_factor = 3.0;
    int max_newton = 10;

    std::vector<int> injection_starts{0, 100, 200};
    int injection_length = 20;
    int high_rate_steps = 10;
    int switch_steps = 2;
    double rate_high = 1.0;
    double rate_low = 0.05;
    double rate_floor = 1e-6;

    double pe_rest = 0.5;
    double pe_per_rate = 60.0;
    double relax = 0.6;

    double dt0 = 86400.0;
    double dt_min = 3600.0;
    double dt_max = 3.0e7;

    // Multiplicative shifts applied to every cpr-like / schur-like group.
    double cpr_offset = 1.0;
    double schur_offset = 1.0;

    // 19 perturbed groups instead of the two base solvers.
    bool extended = false;
    std::uint64_t offset_seed = 7;
    double offset_lo = 0.9;
    double offset_hi = 1.5;
};

enum class CostFamily { Cpr, Schur };

struct SolverVariant {
    std::string label;
    CostFamily family = CostFamily::Schur;
    double offset = 1.0;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::ConvexParam;
    int n_steps = 100;
    double noise_rel = 0.05;
    ConvexParams convex;
    RegimeParams regime;
    ContextSchema schema;

    static ScenarioSpec convex_default();
    static ScenarioSpec regime_default(bool extended = false);
    static ScenarioSpec from_json(const std::string& text);
    static ScenarioSpec load(const std::string& path);
    std::string to_json() const;

    /// FNV-1a of the canonical JSON form, as 16 hex digits.
    std::string hash() const;

    /// Throws ConfigError on invalid constants.
    void validate() const;

    std::shared_ptr<const SolverSpace> make_space() const;
    /// Regime scenario only: one entry per group, in group order.
    std::vector<SolverVariant> variants() const;
};

/// Context schema of the regime scenario: log dt, log max/mean Peclet,
/// log injection and production rates, well-activity indicator.
ContextSchema regime_context_schema();

struct SolveOutcome {
    double t_sol = 0.0;  // seconds consumed, including failed attempts
    bool success = true;
    int newton_iters = 0;
    RawContext context_raw;
};

int convex_iterations(const ConvexParams& params, double L);

/// Peclet value at which both cost families are equal: sqrt(beta_cpr / beta_schur).
double crossover_peclet(const RegimeParams& params);
double cpr_cost(const RegimeParams& params, double peclet);
double schur_cost(const RegimeParams& params, double peclet);

/// next = prev * clamp(4 / newton_iters, 0.5, 2), then clamped to [dt_min, dt_max].
/// Throws DomainError for newton_iters <= 0 or prev_dt <= 0.
double dt_controller(double prev_dt, int newton_iters, double dt_min, double dt_max);

/// One surrogate simulation. raw_context() describes the upcoming step;
/// solve() runs it with the given configuration and advances to the next.
/// Every step consumes the same number of random draws whatever the
/// configuration, so policies run on the same seed see the same noise.
class Environment {
public:
    virtual ~Environment() = default;
    virtual RawContext raw_context() const = 0;
    virtual SolveOutcome solve(const SolverConfig& config) = 0;
    /// Noise-free expected cost of the upcoming step, failures included.
    virtual double expected_cost(const SolverConfig& config) const = 0;
    virtual long step() const = 0;
    virtual double dt() const = 0;
};

std::unique_ptr<Environment> make_environment(const ScenarioSpec& spec, std::uint64_t seed);

struct StepRecord {
    long step = 0;
    Decision decision;
    std::vector<double> context;
    SolveOutcome outcome;
    double dt = 0.0;
    double reward = 0.0;
    double cumulative_time = 0.0;
    double refit_seconds = 0.0;
    std::optional<GpHyperparameters> gp;
    // Noise-free expected cost of the chosen candidate, and the per-step
    // minimizer of that cost over the whole space.
    double expected_cost = 0.0;
    SolverConfig oracle_config;
    std::size_t oracle_index = 0;
    double oracle_cost = 0.0;
};

struct EpisodeTrace {
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    Dataset dataset;

    double total_time() const noexcept {
        return steps.empty() ? 0.0 : steps.back().cumulative_time;
    }
    int count(DecisionTag tag) const noexcept;
    int failures() const noexcept;
};

/// Drives build context -> select -> solve -> reward -> observe for
/// spec.n_steps steps. Deterministic per seed (refit timings aside). An
/// Oracle policy picks the noise-free cheapest candidate every step.
EpisodeTrace run_episode(const ScenarioSpec& spec, const SelectorPolicy& policy,
                         std::uint64_t seed, const Dataset& warm_start = {});

}  // namespace solsel
