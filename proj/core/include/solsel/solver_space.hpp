#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace solsel {

/// A numeric solver parameter, searched over an evenly spaced grid that
/// includes both interval endpoints.
struct NumericParam {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    int grid_points = 20;
    bool integer = false;  // grid stays real; values are rounded at use

    void validate() const;

    friend bool operator==(const NumericParam&, const NumericParam&) = default;
};

/// Evenly spaced grid over [lower, upper] with grid_points values.
std::vector<double> discretize(const NumericParam& param);

/// Value handed to a solver: rounded for integer parameters, unchanged otherwise.
double resolved_value(const NumericParam& param, double grid_value);

struct DecisionNode;

/// One labelled choice of a categorical decision, followed by the decisions
/// it triggers.
struct Branch {
    std::string label;
    std::vector<DecisionNode> nodes;

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// Node of the solver decision tree.
struct DecisionNode {
    enum class Kind { Leaf, Categorical, Numeric };

    std::string name;
    Kind kind = Kind::Leaf;
    std::vector<Branch> branches;  // Categorical only
    NumericParam param;            // Numeric only

    static DecisionNode leaf(std::string name = {});
    static DecisionNode categorical(std::string name, std::vector<Branch> branches);
    static DecisionNode numeric(NumericParam param);

    friend bool operator==(const DecisionNode&, const DecisionNode&) = default;
};

/// One combination of categorical choices (a_cat) with the numeric
/// parameters reachable along it.
struct ConfigGroup {
    int group_id = 0;
    std::vector<std::pair<std::string, std::string>> cat_path;
    std::vector<NumericParam> numeric_params;

    /// "solver=GMRES/precond=ILU", or "<root>" for the empty path.
    std::string label() const;
};

/// A concrete solver configuration: its group plus one grid value per
/// numeric parameter of that group.
struct SolverConfig {
    int group_id = 0;
    std::vector<double> numeric_values;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

inline constexpr std::size_t kDefaultCandidateCap = 1'000'000;

/// Depth-first, branch-declaration order. Throws StructuralError on empty
/// categorical nodes, duplicate labels, or duplicate parameter names in a group.
std::vector<ConfigGroup> enumerate_groups(const DecisionNode& root);

/// Cartesian product of the group's parameter grids, last parameter varying
/// fastest. Throws CapacityError if the product exceeds cap.
std::vector<SolverConfig> enumerate_candidates(const ConfigGroup& group,
                                               std::size_t cap = kDefaultCandidateCap);

/// Model input x = [numeric_values, context]. The categorical identity is not
/// encoded; every group owns its own model.
std::vector<double> encode(const SolverConfig& config, std::span<const double> context);

/// Immutable, shareable view of a decision tree with its groups and candidate
/// lists materialized.
class SolverSpace {
public:
    explicit SolverSpace(DecisionNode root, std::size_t candidate_cap = kDefaultCandidateCap);

    static SolverSpace from_json(const std::string& text);
    static SolverSpace load(const std::string& path);
    std::string to_json() const;

    const DecisionNode& root() const noexcept { return root_; }
    const std::vector<ConfigGroup>& groups() const noexcept { return groups_; }
    const ConfigGroup& group(int group_id) const;
    const std::vector<SolverConfig>& candidates(int group_id) const;
    std::size_t num_groups() const noexcept { return groups_.size(); }
    std::size_t total_candidates() const noexcept;

    /// Throws ConfigError unless config names a group and lies on its grids.
    void validate(const SolverConfig& config) const;

private:
    DecisionNode root_;
    std::vector<ConfigGroup> groups_;
    std::vector<std::vector<SolverConfig>> candidates_;
};

}  // namespace solsel
