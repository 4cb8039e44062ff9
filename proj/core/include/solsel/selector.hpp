#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "solsel/boosting.hpp"
#include "solsel/gp.hpp"
#include "solsel/perf_data.hpp"
#include "solsel/random.hpp"
#include "solsel/solver_space.hpp"

namespace solsel {

// Oracle is evaluated by the harness (it needs the environment's noise-free
// costs); a Selector rejects it.
enum class PolicyKind { Heuristic, Gp, Random, Fixed, Oracle };

enum class DecisionTag { Bootstrap, Explore, Exploit, Ucb, Random, Fixed, Oracle };

const char* policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);
const char* tag_name(DecisionTag tag);

struct SelectorPolicy {
    PolicyKind kind = PolicyKind::Heuristic;
    // Heuristic: per-group exploration probability, decayed by gamma per exploration.
    double epsilon0 = 0.5;
    double gamma = 0.9;
    UcbParams ucb;
    // Random observations collected per group before its model is used.
    int n_init = 3;
    std::optional<SolverConfig> fixed;
    BoostingParams boosting;
    GpFitOptions gp;
    double running_max_floor = 1.0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// A fitted per-group model together with the scaling it was trained under.
struct GroupModel {
    Standardizer scaler;
    std::variant<BoostingModel, GPModel> regressor;
};

struct GroupState {
    int group_id = 0;
    double epsilon = 0.0;
    int explore_count = 0;
    std::size_t n_obs = 0;
    std::optional<GroupModel> model;
};

struct Decision {
    SolverConfig config;
    DecisionTag tag = DecisionTag::Random;
    std::size_t candidate_index = 0;
    // 1 - prod(1 - eps_i) at the moment of the decision (heuristic only).
    double explore_probability = 0.0;
    // Selected group's epsilon after any decay.
    double epsilon = 0.0;
};

struct GpHyperparameters {
    double length_scale = 0.0;
    double noise = 0.0;
    double log_likelihood = 0.0;
};

struct ObserveResult {
    double reward = 0.0;
    bool refit = false;
    double refit_seconds = 0.0;
    std::optional<GpHyperparameters> gp;
};

/// 1 - prod(1 - eps_i).
double combined_explore_prob(std::span<const double> epsilons);

/// Online solver selection over one solver space. Owns the performance data
/// set, the running maximum used for failure penalties, one model per
/// configuration group, and its own random stream. Single-threaded; distinct
/// instances are independent.
class Selector {
public:
    /// warm_start records are appended before any selection and fitted
    /// immediately; they also seed the running maximum. Throws ConfigError if
    /// a record does not fit the space.
    Selector(std::shared_ptr<const SolverSpace> space, SelectorPolicy policy, std::uint64_t seed,
             const Dataset& warm_start = {});

    Decision select(std::span<const double> context);

    /// Computes the reward, appends the record, and refits the owning group's
    /// model once it has max(1, n_init) observations.
    ObserveResult observe(const SolverConfig& config, std::span<const double> context,
                          std::optional<double> t_sol, bool success, long step_index);

    /// Model estimate of the reward (GP: posterior mean) in reward units.
    /// Throws ConfigError if the group has no fitted model.
    double predict_reward(const SolverConfig& config, std::span<const double> context) const;

    double combined_explore_prob() const;

    const SolverSpace& space() const noexcept { return *space_; }
    const SelectorPolicy& policy() const noexcept { return policy_; }
    const Dataset& dataset() const noexcept { return dataset_; }
    const RunningMax& running_max() const noexcept { return running_max_; }
    const std::vector<GroupState>& states() const noexcept { return states_; }
    const GroupState& state(int group_id) const;

private:
    std::size_t bootstrap_threshold() const;
    double score(const GroupModel& model, std::span<const double> x) const;
    Decision argmax(std::span<const double> context, DecisionTag tag) const;
    Decision uniform_in_group(int group_id, DecisionTag tag);
    ObserveResult refit(GroupState& state);

    std::shared_ptr<const SolverSpace> space_;
    SelectorPolicy policy_;
    Rng rng_;
    Dataset dataset_;
    RunningMax running_max_;
    std::vector<GroupState> states_;
};

}  // namespace solsel
