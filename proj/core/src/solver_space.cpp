#include "solsel/solver_space.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "solsel/error.hpp"

namespace solsel {

using nlohmann::json;

namespace {

constexpr int kMaxDepth = 256;

struct PartialGroup {
    std::vector<std::pair<std::string, std::string>> cat_path;
    std::vector<NumericParam> params;
};

std::vector<PartialGroup> expand_node(const DecisionNode& node, int depth);

std::vector<PartialGroup> expand_sequence(const std::vector<DecisionNode>& nodes, int depth) {
    std::vector<PartialGroup> acc(1);
    for (const auto& node : nodes) {
        auto sub = expand_node(node, depth + 1);
        std::vector<PartialGroup> next;
        next.reserve(acc.size() * sub.size());
        for (const auto& head : acc) {
            for (const auto& tail : sub) {
                PartialGroup g = head;
                g.cat_path.insert(g.cat_path.end(), tail.cat_path.begin(), tail.cat_path.end());
                g.params.insert(g.params.end(), tail.params.begin(), tail.params.end());
                next.push_back(std::move(g));
            }
        }
        acc = std::move(next);
    }
    return acc;
}

std::vector<PartialGroup> expand_node(const DecisionNode& node, int depth) {
    if (depth > kMaxDepth) {
        throw StructuralError("decision tree nesting exceeds " + std::to_string(kMaxDepth) +
                              " levels (cyclic definition?)");
    }
    switch (node.kind) {
        case DecisionNode::Kind::Leaf:
            return {PartialGroup{}};
        case DecisionNode::Kind::Numeric:
            node.param.validate();
            return {PartialGroup{{}, {node.param}}};
        case DecisionNode::Kind::Categorical: {
            if (node.branches.empty()) {
                throw StructuralError("categorical decision '" + node.name + "' has no branches");
            }
            std::set<std::string> labels;
            std::vector<PartialGroup> out;
            for (const auto& branch : node.branches) {
                if (!labels.insert(branch.label).second) {
                    throw StructuralError("categorical decision '" + node.name +
                                          "' repeats label '" + branch.label + "'");
                }
                for (auto& g : expand_sequence(branch.nodes, depth)) {
                    g.cat_path.insert(g.cat_path.begin(), {node.name, branch.label});
                    out.push_back(std::move(g));
                }
            }
            return out;
        }
    }
    throw StructuralError("unknown decision node kind");
}

const char* kind_name(DecisionNode::Kind kind) {
    switch (kind) {
        case DecisionNode::Kind::Leaf: return "leaf";
        case DecisionNode::Kind::Categorical: return "categorical";
        case DecisionNode::Kind::Numeric: return "numeric";
    }
    return "leaf";
}

json param_to_json(const NumericParam& p) {
    json j{{"lower", p.lower}, {"upper", p.upper}, {"grid_points", p.grid_points}};
    if (p.integer) j["integer"] = true;
    return j;
}

json node_to_json(const DecisionNode& node) {
    json j{{"kind", kind_name(node.kind)}};
    if (!node.name.empty()) j["name"] = node.name;
    if (node.kind == DecisionNode::Kind::Categorical) {
        json children = json::array();
        for (const auto& b : node.branches) {
            json nodes = json::array();
            for (const auto& n : b.nodes) nodes.push_back(node_to_json(n));
            children.push_back({{"label", b.label}, {"nodes", std::move(nodes)}});
        }
        j["children"] = std::move(children);
    } else if (node.kind == DecisionNode::Kind::Numeric) {
        j["param"] = param_to_json(node.param);
    }
    return j;
}

DecisionNode node_from_json(const json& j, int depth) {
    if (depth > kMaxDepth) throw StructuralError("decision tree nesting too deep");
    if (!j.is_object() || !j.contains("kind")) {
        throw StructuralError("decision node must be an object with a 'kind'");
    }
    const auto kind = j.at("kind").get<std::string>();
    const std::string name = j.value("name", std::string{});
    if (kind == "leaf") return DecisionNode::leaf(name);
    if (kind == "numeric") {
        const auto& p = j.at("param");
        NumericParam param;
        param.name = name;
        param.lower = p.at("lower").get<double>();
        param.upper = p.at("upper").get<double>();
        param.grid_points = p.value("grid_points", 20);
        param.integer = p.value("integer", false);
        param.validate();
        return DecisionNode::numeric(std::move(param));
    }
    if (kind == "categorical") {
        std::vector<Branch> branches;
        for (const auto& c : j.at("children")) {
            Branch b;
            b.label = c.at("label").get<std::string>();
            if (c.contains("nodes")) {
                for (const auto& n : c.at("nodes")) b.nodes.push_back(node_from_json(n, depth + 1));
            }
            branches.push_back(std::move(b));
        }
        return DecisionNode::categorical(name, std::move(branches));
    }
    throw StructuralError("unknown decision node kind '" + kind + "'");
}

}  // namespace

void NumericParam::validate() const {
    if (!(lower < upper)) {
        throw StructuralError("parameter '" + name + "' needs lower < upper");
    }
    if (grid_points < 2) {
        throw StructuralError("parameter '" + name + "' needs at least 2 grid points");
    }
}

std::vector<double> discretize(const NumericParam& param) {
    param.validate();
    const int n = param.grid_points;
    const double step = (param.upper - param.lower) / (n - 1);
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = param.lower + i * step;
    grid.back() = param.upper;
    return grid;
}

double resolved_value(const NumericParam& param, double grid_value) {
    return param.integer ? std::round(grid_value) : grid_value;
}

DecisionNode DecisionNode::leaf(std::string name) {
    DecisionNode n;
    n.name = std::move(name);
    return n;
}

DecisionNode DecisionNode::categorical(std::string name, std::vector<Branch> branches) {
    DecisionNode n;
    n.name = std::move(name);
    n.kind = Kind::Categorical;
    n.branches = std::move(branches);
    return n;
}

DecisionNode DecisionNode::numeric(NumericParam param) {
    DecisionNode n;
    n.name = param.name;
    n.kind = Kind::Numeric;
    n.param = std::move(param);
    return n;
}

std::string ConfigGroup::label() const {
    if (cat_path.empty()) return "<root>";
    std::string out;
    for (const auto& [decision, choice] : cat_path) {
        if (!out.empty()) out += '/';
        out += decision + '=' + choice;
    }
    return out;
}

std::vector<ConfigGroup> enumerate_groups(const DecisionNode& root) {
    auto partials = expand_node(root, 0);
    std::vector<ConfigGroup> groups;
    groups.reserve(partials.size());
    std::set<std::string> seen;
    for (auto& p : partials) {
        ConfigGroup g;
        g.group_id = static_cast<int>(groups.size());
        g.cat_path = std::move(p.cat_path);
        g.numeric_params = std::move(p.params);
        if (!seen.insert(g.label()).second) {
            throw StructuralError("categorical path '" + g.label() + "' is not unique");
        }
        std::set<std::string> names;
        for (const auto& param : g.numeric_params) {
            if (!names.insert(param.name).second) {
                throw StructuralError("group '" + g.label() + "' repeats parameter '" +
                                      param.name + "'");
            }
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

std::vector<SolverConfig> enumerate_candidates(const ConfigGroup& group, std::size_t cap) {
    std::vector<std::vector<double>> grids;
    std::size_t total = 1;
    for (const auto& p : group.numeric_params) {
        grids.push_back(discretize(p));
        total *= grids.back().size();
        if (total > cap) {
            throw CapacityError("group '" + group.label() + "' has more than " +
                                std::to_string(cap) + " candidate configurations");
        }
    }
    std::vector<SolverConfig> out;
    out.reserve(total);
    std::vector<std::size_t> idx(grids.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        SolverConfig c{group.group_id, {}};
        c.numeric_values.reserve(grids.size());
        for (std::size_t d = 0; d < grids.size(); ++d) c.numeric_values.push_back(grids[d][idx[d]]);
        out.push_back(std::move(c));
        for (std::size_t d = grids.size(); d-- > 0;) {
            if (++idx[d] < grids[d].size()) break;
            idx[d] = 0;
        }
    }
    return out;
}

std::vector<double> encode(const SolverConfig& config, std::span<const double> context) {
    std::vector<double> x;
    x.reserve(config.numeric_values.size() + context.size());
    x.insert(x.end(), config.numeric_values.begin(), config.numeric_values.end());
    x.insert(x.end(), context.begin(), context.end());
    return x;
}

SolverSpace::SolverSpace(DecisionNode root, std::size_t candidate_cap)
    : root_(std::move(root)), groups_(enumerate_groups(root_)) {
    candidates_.reserve(groups_.size());
    for (const auto& g : groups_) candidates_.push_back(enumerate_candidates(g, candidate_cap));
}

SolverSpace SolverSpace::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw StructuralError(std::string("solver space is not valid JSON: ") + e.what());
    }
    try {
        const json& node = doc.contains("space") ? doc.at("space") : doc;
        return SolverSpace(node_from_json(node, 0));
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed solver space: ") + e.what());
    }
}

SolverSpace SolverSpace::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open solver space file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string SolverSpace::to_json() const {
    return json{{"space", node_to_json(root_)}}.dump(2);
}

const ConfigGroup& SolverSpace::group(int group_id) const {
    if (group_id < 0 || static_cast<std::size_t>(group_id) >= groups_.size()) {
        throw ConfigError("unknown group id " + std::to_string(group_id));
    }
    return groups_[static_cast<std::size_t>(group_id)];
}

const std::vector<SolverConfig>& SolverSpace::candidates(int group_id) const {
    group(group_id);
    return candidates_[static_cast<std::size_t>(group_id)];
}

std::size_t SolverSpace::total_candidates() const noexcept {
    std::size_t n = 0;
    for (const auto& c : candidates_) n += c.size();
    return n;
}

void SolverSpace::validate(const SolverConfig& config) const {
    const auto& g = group(config.group_id);
    if (config.numeric_values.size() != g.numeric_params.size()) {
        throw ConfigError("configuration for group '" + g.label() + "' has " +
                          std::to_string(config.numeric_values.size()) + " values, expected " +
                          std::to_string(g.numeric_params.size()));
    }
    for (std::size_t i = 0; i < g.numeric_params.size(); ++i) {
        const auto& p = g.numeric_params[i];
        const double tol = 1e-12 * (p.upper - p.lower);
        bool on_grid = false;
        for (double v : discretize(p)) {
            if (std::abs(v - config.numeric_values[i]) <= tol) {
                on_grid = true;
                break;
            }
        }
        if (!on_grid) {
            throw ConfigError("value " + std::to_string(config.numeric_values[i]) +
                              " is not on the grid of parameter '" + p.name + "'");
        }
    }
}

}  // namespace solsel
