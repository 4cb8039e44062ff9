#include "solsel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "solsel/error.hpp"
#include "solsel/random.hpp"

namespace solsel {

using nlohmann::json;

namespace {

// Structure of the 19-configuration space: outer solver, preconditioner,
// factorization, thermal and flow sub-solvers.
struct ExtendedEntry {
    const char* label;
    CostFamily family;
};

constexpr ExtendedEntry kExtendedSpace[] = {
    {"gmres/schur/lower/amg/amg", CostFamily::Schur},
    {"gmres/schur/upper/amg/amg", CostFamily::Schur},
    {"gmres/schur/full/amg/amg", CostFamily::Schur},
    {"gmres/cpr/amg", CostFamily::Cpr},
    {"fgmres/schur/lower/gmres+amg/gmres+amg", CostFamily::Schur},
    {"fgmres/schur/lower/amg/gmres+amg", CostFamily::Schur},
    {"fgmres/schur/lower/gmres+amg/amg", CostFamily::Schur},
    {"fgmres/schur/lower/amg/amg", CostFamily::Schur},
    {"fgmres/schur/upper/gmres+amg/gmres+amg", CostFamily::Schur},
    {"fgmres/schur/upper/amg/gmres+amg", CostFamily::Schur},
    {"fgmres/schur/upper/gmres+amg/amg", CostFamily::Schur},
    {"fgmres/schur/upper/amg/amg", CostFamily::Schur},
    {"fgmres/schur/full/gmres+amg/gmres+amg", CostFamily::Schur},
    {"fgmres/schur/full/amg/gmres+amg", CostFamily::Schur},
    {"fgmres/schur/full/gmres+amg/amg", CostFamily::Schur},
    {"fgmres/schur/full/amg/amg", CostFamily::Schur},
    {"fgmres/cpr/amg", CostFamily::Cpr},
    {"fgmres/cpr/gmres+amg", CostFamily::Cpr},
    {"direct", CostFamily::Schur},
};

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double noisy(double expected, double noise_rel, double g) {
    return expected * std::max(0.05, 1.0 + noise_rel * g);
}

class ConvexEnvironment final : public Environment {
public:
    ConvexEnvironment(const ScenarioSpec& spec, std::uint64_t seed)
        : params_(spec.convex), noise_rel_(spec.noise_rel), rng_(seed) {}

    RawContext raw_context() const override { return {}; }

    double expected_cost(const SolverConfig& config) const override {
        return params_.tau * convex_iterations(params_, value_of(config));
    }

    SolveOutcome solve(const SolverConfig& config) override {
        const double g = standard_normal(rng_);
        SolveOutcome out;
        out.t_sol = noisy(expected_cost(config), noise_rel_, g);
        out.success = true;
        out.newton_iters = 4;
        ++step_;
        return out;
    }

    long step() const override { return step_; }
    double dt() const override { return 10.0; }

private:
    double value_of(const SolverConfig& config) const {
        if (config.numeric_values.size() != 1) {
            throw ConfigError("convex scenario expects exactly one numeric value");
        }
        return resolved_value(params_.param, config.numeric_values[0]);
    }

    ConvexParams params_;
    double noise_rel_;
    Rng rng_;
    long step_ = 0;
};

class RegimeEnvironment final : public Environment {
public:
    RegimeEnvironment(const ScenarioSpec& spec, std::uint64_t seed)
        : params_(spec.regime), noise_rel_(spec.noise_rel), variants_(spec.variants()),
          rng_(seed), pe_(spec.regime.pe_rest), dt_(spec.regime.dt0) {
        advance_state();
    }

    RawContext raw_context() const override {
        const Schedule s = schedule(step_);
        RawContext raw;
        raw["dt"] = dt_;
        raw["peclet"] = std::vector<double>{0.5 * pe_, pe_, 1.5 * pe_};
        raw["injection_rate"] = std::max(s.rate, params_.rate_floor);
        raw["production_rate"] = std::max(production_, params_.rate_floor);
        raw["well_active"] = s.active ? 1.0 : 0.0;
        return raw;
    }

    double expected_cost(const SolverConfig& config) const override {
        const SolverVariant& v = variant(config);
        double t = base_cost(v);
        if (v.family == CostFamily::Cpr && schedule(step_).switching) {
            t *= (1.0 - params_.p_fail) + params_.p_fail * params_.fail_cost_factor;
        }
        return t;
    }

    SolveOutcome solve(const SolverConfig& config) override {
        const double g = standard_normal(rng_);
        const double u_fail = uniform01(rng_);
        const double u_jitter = uniform01(rng_);

        const SolverVariant& v = variant(config);
        SolveOutcome out;
        out.context_raw = raw_context();
        out.t_sol = noisy(base_cost(v), noise_rel_, g);
        const bool fails = v.family == CostFamily::Cpr && schedule(step_).switching &&
                           u_fail < params_.p_fail;
        if (fails) {
            out.success = false;
            out.t_sol *= params_.fail_cost_factor;
            out.newton_iters = params_.max_newton;
        } else {
            const double shift = std::tanh(std::log(pe_) - std::log(crossover_peclet(params_)));
            const int jitter = static_cast<int>(std::floor(u_jitter * 3.0)) - 1;
            out.newton_iters =
                std::max(1, static_cast<int>(std::lround(4.0 * (1.0 + 0.5 * shift))) + jitter);
        }
        dt_ = dt_controller(dt_, out.newton_iters, params_.dt_min, params_.dt_max);
        ++step_;
        advance_state();
        return out;
    }

    long step() const override { return step_; }
    double dt() const override { return dt_; }

private:
    struct Schedule {
        bool active = false;
        bool switching = false;
        double rate = 0.0;
    };

    Schedule schedule(long k) const {
        Schedule s;
        for (int start : params_.injection_starts) {
            const long into = k - start;
            if (into < 0 || into >= params_.injection_length) continue;
            s.active = true;
            s.rate = into < params_.high_rate_steps ? params_.rate_high : params_.rate_low;
            s.switching = into >= params_.high_rate_steps &&
                          into < params_.high_rate_steps + params_.switch_steps;
        }
        return s;
    }

    // Relax the Peclet proxy and the production rate toward the current injection.
    void advance_state() {
        const double rate = schedule(step_).rate;
        const double target = params_.pe_rest + params_.pe_per_rate * rate;
        pe_ = target + (pe_ - target) * params_.relax;
        production_ = production_ * params_.relax + rate * (1.0 - params_.relax);
    }

    const SolverVariant& variant(const SolverConfig& config) const {
        if (config.group_id < 0 || static_cast<std::size_t>(config.group_id) >= variants_.size()) {
            throw ConfigError("unknown group id " + std::to_string(config.group_id));
        }
        return variants_[static_cast<std::size_t>(config.group_id)];
    }

    double base_cost(const SolverVariant& v) const {
        const double t = v.family == CostFamily::Cpr ? cpr_cost(params_, pe_) : schur_cost(params_, pe_);
        return t * v.offset;
    }

    RegimeParams params_;
    double noise_rel_;
    std::vector<SolverVariant> variants_;
    Rng rng_;
    long step_ = 0;
    double pe_;
    double production_ = 0.0;
    double dt_;
};

json convex_to_json(const ConvexParams& p) {
    return json{{"i_min", p.i_min},
                {"curvature", p.curvature},
                {"optimum", p.optimum},
                {"tau", p.tau},
                {"param",
                 {{"name", p.param.name},
                  {"lower", p.param.lower},
                  {"upper", p.param.upper},
                  {"grid_points", p.param.grid_points},
                  {"integer", p.param.integer}}}};
}

ConvexParams convex_from_json(const json& j) {
    ConvexParams p;
    p.i_min = j.value("i_min", p.i_min);
    p.curvature = j.value("curvature", p.curvature);
    p.optimum = j.value("optimum", p.optimum);
    p.tau = j.value("tau", p.tau);
    if (j.contains("param")) {
        const auto& q = j.at("param");
        p.param.name = q.value("name", p.param.name);
        p.param.lower = q.value("lower", p.param.lower);
        p.param.upper = q.value("upper", p.param.upper);
        p.param.grid_points = q.value("grid_points", p.param.grid_points);
        p.param.integer = q.value("integer", p.param.integer);
    }
    return p;
}

json regime_to_json(const RegimeParams& p) {
    return json{{"base", p.base},
                {"beta_cpr", p.beta_cpr},
                {"beta_schur", p.beta_schur},
                {"p_fail", p.p_fail},
                {"fail_cost_factor", p.fail_cost_factor},
                {"max_newton", p.max_newton},
                {"injection_starts", p.injection_starts},
                {"injection_length", p.injection_length},
                {"high_rate_steps", p.high_rate_steps},
                {"switch_steps", p.switch_steps},
                {"rate_high", p.rate_high},
                {"rate_low", p.rate_low},
                {"rate_floor", p.rate_floor},
                {"pe_rest", p.pe_rest},
                {"pe_per_rate", p.pe_per_rate},
                {"relax", p.relax},
                {"dt0", p.dt0},
                {"dt_min", p.dt_min},
                {"dt_max", p.dt_max},
                {"cpr_offset", p.cpr_offset},
                {"schur_offset", p.schur_offset},
                {"extended", p.extended},
                {"offset_seed", p.offset_seed},
                {"offset_lo", p.offset_lo},
                {"offset_hi", p.offset_hi}};
}

RegimeParams regime_from_json(const json& j) {
    RegimeParams p;
#define SOLSEL_READ(field) p.field = j.value(#field, p.field)
    SOLSEL_READ(base);
    SOLSEL_READ(beta_cpr);
    SOLSEL_READ(beta_schur);
    SOLSEL_READ(p_fail);
    SOLSEL_READ(fail_cost_factor);
    SOLSEL_READ(max_newton);
    SOLSEL_READ(injection_starts);
    SOLSEL_READ(injection_length);
    SOLSEL_READ(high_rate_steps);
    SOLSEL_READ(switch_steps);
    SOLSEL_READ(rate_high);
    SOLSEL_READ(rate_low);
    SOLSEL_READ(rate_floor);
    SOLSEL_READ(pe_rest);
    SOLSEL_READ(pe_per_rate);
    SOLSEL_READ(relax);
    SOLSEL_READ(dt0);
    SOLSEL_READ(dt_min);
    SOLSEL_READ(dt_max);
    SOLSEL_READ(cpr_offset);
    SOLSEL_READ(schur_offset);
    SOLSEL_READ(extended);
    SOLSEL_READ(offset_seed);
    SOLSEL_READ(offset_lo);
    SOLSEL_READ(offset_hi);
#undef SOLSEL_READ
    return p;
}

}  // namespace

ContextSchema regime_context_schema() {
    return ContextSchema({
        {"dt", Transform::Log, Arity::Scalar, ""},
        {"peclet_max", Transform::LogMax, Arity::Array, "peclet"},
        {"peclet_mean", Transform::LogMean, Arity::Array, "peclet"},
        {"injection_rate", Transform::Log, Arity::Scalar, ""},
        {"production_rate", Transform::Log, Arity::Scalar, ""},
        {"well_active", Transform::Identity, Arity::Scalar, ""},
    });
}

ScenarioSpec ScenarioSpec::convex_default() {
    ScenarioSpec s;
    s.kind = ScenarioKind::ConvexParam;
    s.n_steps = 100;
    return s;
}

ScenarioSpec ScenarioSpec::regime_default(bool extended) {
    ScenarioSpec s;
    s.kind = ScenarioKind::RegimeSwitch;
    s.n_steps = 300;
    s.regime.extended = extended;
    s.schema = regime_context_schema();
    return s;
}

void ScenarioSpec::validate() const {
    if (n_steps < 1) throw ConfigError("n_steps must be at least 1");
    if (!(noise_rel >= 0.0)) throw ConfigError("noise_rel must be non-negative");
    if (kind == ScenarioKind::ConvexParam) {
        convex.param.validate();
        if (!(convex.tau > 0.0)) throw ConfigError("tau must be positive");
        if (schema.dimension() != 0) throw ConfigError("convex scenario has a void context");
        return;
    }
    const auto& r = regime;
    if (!(r.base > 0.0 && r.beta_cpr > 0.0 && r.beta_schur > 0.0)) {
        throw ConfigError("regime cost constants must be positive");
    }
    if (!(r.p_fail >= 0.0 && r.p_fail <= 1.0)) throw ConfigError("p_fail must lie in [0, 1]");
    if (!(r.pe_rest > 0.0) || r.pe_per_rate < 0.0) throw ConfigError("Peclet proxy must stay positive");
    if (!(r.relax >= 0.0 && r.relax < 1.0)) throw ConfigError("relax must lie in [0, 1)");
    if (!(r.dt_min > 0.0 && r.dt_min <= r.dt0 && r.dt0 <= r.dt_max)) {
        throw ConfigError("need 0 < dt_min <= dt0 <= dt_max");
    }
    if (!(r.rate_floor > 0.0)) throw ConfigError("rate_floor must be positive");
    if (!(r.cpr_offset > 0.0 && r.schur_offset > 0.0)) throw ConfigError("offsets must be positive");
    if (r.max_newton < 1) throw ConfigError("max_newton must be positive");
}

ScenarioSpec ScenarioSpec::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    try {
        ScenarioSpec s;
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "convex_param") {
            s = convex_default();
            if (doc.contains("convex")) s.convex = convex_from_json(doc.at("convex"));
        } else if (kind == "regime_switch") {
            s = regime_default();
            if (doc.contains("regime")) s.regime = regime_from_json(doc.at("regime"));
        } else {
            throw ConfigError("unknown scenario kind '" + kind + "'");
        }
        s.n_steps = doc.value("n_steps", s.n_steps);
        s.noise_rel = doc.value("noise_rel", s.noise_rel);
        if (doc.contains("context")) s.schema = ContextSchema::from_json(doc.at("context").dump());
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    }
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string ScenarioSpec::to_json() const {
    json doc{{"kind", kind == ScenarioKind::ConvexParam ? "convex_param" : "regime_switch"},
             {"n_steps", n_steps},
             {"noise_rel", noise_rel},
             {"context", json::parse(schema.to_json())}};
    if (kind == ScenarioKind::ConvexParam) {
        doc["convex"] = convex_to_json(convex);
    } else {
        doc["regime"] = regime_to_json(regime);
    }
    return doc.dump(2);
}

std::string ScenarioSpec::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(json::parse(to_json()).dump())));
    return buf;
}

std::vector<SolverVariant> ScenarioSpec::variants() const {
    if (kind != ScenarioKind::RegimeSwitch) return {};
    const auto& r = regime;
    auto family_offset = [&](CostFamily f) { return f == CostFamily::Cpr ? r.cpr_offset : r.schur_offset; };
    std::vector<SolverVariant> out;
    if (!r.extended) {
        out.push_back({"cpr", CostFamily::Cpr, r.cpr_offset});
        out.push_back({"schur", CostFamily::Schur, r.schur_offset});
        return out;
    }
    Rng rng(r.offset_seed);
    for (const auto& e : kExtendedSpace) {
        const double perturb = r.offset_lo + (r.offset_hi - r.offset_lo) * uniform01(rng);
        out.push_back({e.label, e.family, family_offset(e.family) * perturb});
    }
    return out;
}

std::shared_ptr<const SolverSpace> ScenarioSpec::make_space() const {
    if (kind == ScenarioKind::ConvexParam) {
        return std::make_shared<const SolverSpace>(DecisionNode::numeric(convex.param));
    }
    std::vector<Branch> branches;
    for (const auto& v : variants()) branches.push_back(Branch{v.label, {}});
    return std::make_shared<const SolverSpace>(DecisionNode::categorical("solver", std::move(branches)));
}

int convex_iterations(const ConvexParams& params, double L) {
    const double d = L - params.optimum;
    return static_cast<int>(std::lround(params.i_min + params.curvature * d * d));
}

double crossover_peclet(const RegimeParams& params) {
    return std::sqrt(params.beta_cpr / params.beta_schur);
}

double cpr_cost(const RegimeParams& params, double peclet) {
    return params.base * (1.0 + params.beta_cpr / peclet);
}

double schur_cost(const RegimeParams& params, double peclet) {
    return params.base * (1.0 + params.beta_schur * peclet);
}

double dt_controller(double prev_dt, int newton_iters, double dt_min, double dt_max) {
    if (newton_iters <= 0) throw DomainError("Newton iteration count must be positive");
    if (!(prev_dt > 0.0)) throw DomainError("time step must be positive");
    const double factor = std::clamp(4.0 / newton_iters, 0.5, 2.0);
    return std::clamp(prev_dt * factor, dt_min, dt_max);
}

std::unique_ptr<Environment> make_environment(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (spec.kind == ScenarioKind::ConvexParam) return std::make_unique<ConvexEnvironment>(spec, seed);
    return std::make_unique<RegimeEnvironment>(spec, seed);
}

int EpisodeTrace::count(DecisionTag tag) const noexcept {
    return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                          [&](const StepRecord& s) { return s.decision.tag == tag; }));
}

int EpisodeTrace::failures() const noexcept {
    return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                          [](const StepRecord& s) { return !s.outcome.success; }));
}

EpisodeTrace run_episode(const ScenarioSpec& spec, const SelectorPolicy& policy,
                         std::uint64_t seed, const Dataset& warm_start) {
    auto space = spec.make_space();
    auto env = make_environment(spec, derive_seed(seed, 1));

    std::optional<Selector> selector;
    RunningMax oracle_max(policy.running_max_floor);
    if (policy.kind != PolicyKind::Oracle) {
        selector.emplace(space, policy, derive_seed(seed, 0), warm_start);
    }

    EpisodeTrace trace;
    trace.policy = policy_name(policy.kind);
    trace.seed = seed;
    trace.steps.reserve(static_cast<std::size_t>(spec.n_steps));
    double cumulative = 0.0;

    for (long k = 0; k < spec.n_steps; ++k) {
        StepRecord rec;
        rec.step = k;
        rec.dt = env->dt();
        rec.context = build_context(spec.schema, env->raw_context());

        // Noise-free cheapest candidate for this step, recorded for every policy.
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : space->groups()) {
            const auto& cands = space->candidates(g.group_id);
            for (std::size_t c = 0; c < cands.size(); ++c) {
                const double cost = env->expected_cost(cands[c]);
                if (cost < best) {
                    best = cost;
                    rec.oracle_config = cands[c];
                    rec.oracle_index = c;
                }
            }
        }
        rec.oracle_cost = best;

        if (selector) {
            rec.decision = selector->select(rec.context);
        } else {
            rec.decision.config = rec.oracle_config;
            rec.decision.candidate_index = rec.oracle_index;
            rec.decision.tag = DecisionTag::Oracle;
        }
        rec.expected_cost = env->expected_cost(rec.decision.config);

        rec.outcome = env->solve(rec.decision.config);
        const std::optional<double> t_sol =
            rec.outcome.success ? std::optional<double>(rec.outcome.t_sol) : std::nullopt;
        if (selector) {
            const ObserveResult r =
                selector->observe(rec.decision.config, rec.context, t_sol, rec.outcome.success, k);
            rec.reward = r.reward;
            rec.refit_seconds = r.refit_seconds;
            rec.gp = r.gp;
        } else {
            rec.reward = compute_reward(t_sol, rec.outcome.success, oracle_max);
            trace.dataset.append(PerformanceRecord{rec.decision.config.group_id,
                                                   rec.decision.config.numeric_values, rec.context,
                                                   t_sol, rec.outcome.success, rec.reward, k,
                                                   RecordSource::Online});
        }
        cumulative += rec.outcome.t_sol;
        rec.cumulative_time = cumulative;
        trace.steps.push_back(std::move(rec));
    }
    if (selector) trace.dataset = selector->dataset();
    return trace;
}

}  // namespace solsel
