#include "solsel/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "solsel/error.hpp"

namespace solsel {

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Heuristic: return "heuristic";
        case PolicyKind::Gp: return "gp";
        case PolicyKind::Random: return "random";
        case PolicyKind::Fixed: return "fixed";
        case PolicyKind::Oracle: return "oracle";
    }
    return "heuristic";
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "heuristic") return PolicyKind::Heuristic;
    if (name == "gp") return PolicyKind::Gp;
    if (name == "random") return PolicyKind::Random;
    if (name == "fixed") return PolicyKind::Fixed;
    if (name == "oracle") return PolicyKind::Oracle;
    throw ConfigError("unknown policy '" + name + "'");
}

const char* tag_name(DecisionTag tag) {
    switch (tag) {
        case DecisionTag::Bootstrap: return "bootstrap";
        case DecisionTag::Explore: return "explore";
        case DecisionTag::Exploit: return "exploit";
        case DecisionTag::Ucb: return "ucb";
        case DecisionTag::Random: return "random";
        case DecisionTag::Fixed: return "fixed";
        case DecisionTag::Oracle: return "oracle";
    }
    return "random";
}

void SelectorPolicy::validate() const {
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw ConfigError("epsilon0 must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (!(ucb.alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
    if (n_init < 0) throw ConfigError("n_init must be non-negative");
    if (!(running_max_floor > 0.0)) throw ConfigError("running-max floor must be positive");
    if (kind == PolicyKind::Fixed && !fixed) throw ConfigError("fixed policy needs a configuration");
    if (boosting.n_rounds < 0 || boosting.max_depth < 0 || boosting.min_samples_leaf < 1 ||
        !(boosting.learning_rate > 0.0) || boosting.max_bins < 0 || boosting.max_bins == 1) {
        throw ConfigError("invalid boosting parameters");
    }
}

double combined_explore_prob(std::span<const double> epsilons) {
    double stay = 1.0;
    for (double e : epsilons) stay *= 1.0 - e;
    return 1.0 - stay;
}

Selector::Selector(std::shared_ptr<const SolverSpace> space, SelectorPolicy policy,
                   std::uint64_t seed, const Dataset& warm_start)
    : space_(std::move(space)), policy_(std::move(policy)), rng_(seed),
      running_max_(policy_.running_max_floor) {
    if (!space_ || space_->num_groups() == 0) throw ConfigError("selector needs a non-empty space");
    policy_.validate();
    if (policy_.kind == PolicyKind::Oracle) {
        throw ConfigError("the oracle policy is evaluated by the harness, not a selector");
    }
    for (const auto& g : space_->groups()) {
        if (space_->candidates(g.group_id).empty()) {
            throw ConfigError("group '" + g.label() + "' has no candidates");
        }
        GroupState s;
        s.group_id = g.group_id;
        s.epsilon = policy_.epsilon0;
        states_.push_back(std::move(s));
    }
    if (policy_.fixed) space_->validate(*policy_.fixed);

    std::optional<std::size_t> context_dim;
    for (const auto& r : warm_start.records()) {
        space_->validate(SolverConfig{r.group_id, r.numeric_values});
        if (context_dim && *context_dim != r.context.size()) {
            throw ConfigError("warm-start records disagree on context dimension");
        }
        context_dim = r.context.size();
        if (r.success && r.t_sol) running_max_.update(*r.t_sol);
        PerformanceRecord imported = r;
        imported.source = RecordSource::Imported;
        dataset_.append(std::move(imported));
        ++states_[static_cast<std::size_t>(r.group_id)].n_obs;
    }
    for (auto& s : states_) {
        if (s.n_obs >= bootstrap_threshold()) refit(s);
    }
}

const GroupState& Selector::state(int group_id) const {
    space_->group(group_id);
    return states_[static_cast<std::size_t>(group_id)];
}

std::size_t Selector::bootstrap_threshold() const {
    return static_cast<std::size_t>(std::max(1, policy_.n_init));
}

double Selector::combined_explore_prob() const {
    std::vector<double> eps;
    eps.reserve(states_.size());
    for (const auto& s : states_) eps.push_back(s.epsilon);
    return solsel::combined_explore_prob(eps);
}

double Selector::score(const GroupModel& model, std::span<const double> x) const {
    const Eigen::VectorXd z = model.scaler.transform_point(x);
    const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
    if (const auto* boost = std::get_if<BoostingModel>(&model.regressor)) {
        return model.scaler.inverse_target(boost->predict(zs));
    }
    // UCB stays in the group's standardized units, so a group whose context is
    // far from its data scores near alpha regardless of its reward scale.
    return ucb(std::get<GPModel>(model.regressor), zs, policy_.ucb);
}

double Selector::predict_reward(const SolverConfig& config, std::span<const double> context) const {
    const auto& s = state(config.group_id);
    if (!s.model) throw ConfigError("group " + std::to_string(config.group_id) + " has no model yet");
    const auto x = encode(config, context);
    const Eigen::VectorXd z = s.model->scaler.transform_point(x);
    const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
    if (const auto* boost = std::get_if<BoostingModel>(&s.model->regressor)) {
        return s.model->scaler.inverse_target(boost->predict(zs));
    }
    return s.model->scaler.inverse_target(std::get<GPModel>(s.model->regressor).predict(zs).mean);
}

Decision Selector::argmax(std::span<const double> context, DecisionTag tag) const {
    Decision best;
    best.tag = tag;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (const auto& s : states_) {
        if (!s.model) continue;
        const auto& candidates = space_->candidates(s.group_id);
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const double v = score(*s.model, encode(candidates[c], context));
            if (!found || v > best_score) {
                best_score = v;
                best.config = candidates[c];
                best.candidate_index = c;
                found = true;
            }
        }
    }
    if (!found) throw ConfigError("no fitted group model to maximize over");
    return best;
}

Decision Selector::uniform_in_group(int group_id, DecisionTag tag) {
    const auto& candidates = space_->candidates(group_id);
    Decision d;
    d.tag = tag;
    d.candidate_index = uniform_index(rng_, candidates.size());
    d.config = candidates[d.candidate_index];
    return d;
}

Decision Selector::select(std::span<const double> context) {
    const double explore_p = policy_.kind == PolicyKind::Heuristic ? combined_explore_prob() : 0.0;
    auto finish = [&](Decision d) {
        d.explore_probability = explore_p;
        d.epsilon = states_[static_cast<std::size_t>(d.config.group_id)].epsilon;
        return d;
    };

    if (policy_.kind == PolicyKind::Fixed) {
        Decision d;
        d.tag = DecisionTag::Fixed;
        d.config = *policy_.fixed;
        const auto& cands = space_->candidates(d.config.group_id);
        d.candidate_index = static_cast<std::size_t>(
            std::find(cands.begin(), cands.end(), d.config) - cands.begin());
        return finish(std::move(d));
    }
    if (policy_.kind == PolicyKind::Random) {
        std::size_t k = uniform_index(rng_, space_->total_candidates());
        for (const auto& g : space_->groups()) {
            const auto& cands = space_->candidates(g.group_id);
            if (k < cands.size()) {
                Decision d;
                d.tag = DecisionTag::Random;
                d.config = cands[k];
                d.candidate_index = k;
                return finish(std::move(d));
            }
            k -= cands.size();
        }
    }

    std::vector<int> pending;
    for (const auto& s : states_) {
        if (s.n_obs < bootstrap_threshold()) pending.push_back(s.group_id);
    }
    if (!pending.empty()) {
        const int g = pending[uniform_index(rng_, pending.size())];
        return finish(uniform_in_group(g, DecisionTag::Bootstrap));
    }

    if (policy_.kind == PolicyKind::Gp) return finish(argmax(context, DecisionTag::Ucb));

    // Heuristic: every group draws independently; any explorer wins outright.
    std::vector<int> explorers;
    for (const auto& s : states_) {
        if (uniform01(rng_) < s.epsilon) explorers.push_back(s.group_id);
    }
    if (explorers.empty()) return finish(argmax(context, DecisionTag::Exploit));

    const int g = explorers[uniform_index(rng_, explorers.size())];
    Decision d = uniform_in_group(g, DecisionTag::Explore);
    auto& s = states_[static_cast<std::size_t>(g)];
    ++s.explore_count;
    s.epsilon = policy_.epsilon0 * std::pow(policy_.gamma, s.explore_count);
    return finish(std::move(d));
}

ObserveResult Selector::observe(const SolverConfig& config, std::span<const double> context,
                                std::optional<double> t_sol, bool success, long step_index) {
    space_->validate(config);
    PerformanceRecord r;
    r.group_id = config.group_id;
    r.numeric_values = config.numeric_values;
    r.context.assign(context.begin(), context.end());
    r.success = success;
    if (success) r.t_sol = t_sol;
    r.reward = compute_reward(r.t_sol, success, running_max_);
    r.step_index = step_index;
    r.source = RecordSource::Online;
    const double reward = r.reward;
    dataset_.append(std::move(r));

    auto& s = states_[static_cast<std::size_t>(config.group_id)];
    ++s.n_obs;
    ObserveResult result;
    if (policy_.kind == PolicyKind::Heuristic || policy_.kind == PolicyKind::Gp) {
        if (s.n_obs >= bootstrap_threshold()) result = refit(s);
    }
    result.reward = reward;
    return result;
}

ObserveResult Selector::refit(GroupState& state) {
    ObserveResult result;
    if (policy_.kind != PolicyKind::Heuristic && policy_.kind != PolicyKind::Gp) return result;

    const auto start = std::chrono::steady_clock::now();
    const auto& idx = dataset_.group_indices(state.group_id);
    const auto& first = dataset_[idx.front()];
    const auto dim = static_cast<Eigen::Index>(first.numeric_values.size() + first.context.size());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), dim);
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t row = 0; row < idx.size(); ++row) {
        const auto& rec = dataset_[idx[row]];
        const auto x = encode(SolverConfig{rec.group_id, rec.numeric_values}, rec.context);
        if (static_cast<Eigen::Index>(x.size()) != dim) {
            throw ShapeError("records of group " + std::to_string(state.group_id) +
                             " differ in feature dimension");
        }
        const auto r = static_cast<Eigen::Index>(row);
        for (Eigen::Index c = 0; c < dim; ++c) X(r, c) = x[static_cast<std::size_t>(c)];
        y(r) = rec.reward;
    }

    GroupModel model{Standardizer::fit(X, y), BoostingModel{}};
    const Eigen::MatrixXd Xs = model.scaler.transform(X);
    const Eigen::VectorXd ys = model.scaler.transform_targets(y);
    if (policy_.kind == PolicyKind::Gp) {
        GPModel gp = GPModel::fit(Xs, ys, policy_.gp);
        result.gp = GpHyperparameters{gp.length_scale(), gp.noise(), gp.log_likelihood()};
        model.regressor = std::move(gp);
    } else {
        model.regressor = BoostingModel::fit(Xs, ys, policy_.boosting);
    }
    state.model = std::move(model);
    result.refit = true;
    result.refit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace solsel
