#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace solsel {

struct BoostingParams {
    int n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_leaf = 1;
    // Split candidates per feature; 0 keeps every distinct-value boundary.
    int max_bins = 64;
};

/// Depth-limited least-squares regression tree. Samples with
/// x[feature] <= threshold go left.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    /// Greedy variance-reduction fit. Candidate thresholds are midpoints of
    /// adjacent distinct training values of a feature; when there are more
    /// than max_bins - 1 of them (max_bins > 0), only those at equal-count
    /// quantiles are kept. Ties go to the lowest feature index, then the
    /// lowest threshold.
    static RegressionTree fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& target,
                              int max_depth, int min_samples_leaf, int max_bins = 0);

    double predict(std::span<const double> x) const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    int num_leaves() const noexcept;
    int depth() const noexcept;

private:
    friend class BoostingModel;
    explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    std::vector<Node> nodes_;
};

/// Gradient-boosted regression trees under squared loss, refit from scratch
/// on every call to fit(). Deterministic: no row or feature subsampling.
class BoostingModel {
public:
    /// Throws DataError on empty input.
    static BoostingModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const BoostingParams& params = {});

    /// init_value + learning_rate * sum of tree outputs. Throws ShapeError on
    /// a dimension mismatch.
    double predict(std::span<const double> x) const;

    double init_value() const noexcept { return init_value_; }
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    const BoostingParams& params() const noexcept { return params_; }
    Eigen::Index dimension() const noexcept { return dimension_; }

    /// Training MSE after 0, 1, ..., n_rounds rounds (size n_rounds + 1).
    const std::vector<double>& training_mse() const noexcept { return training_mse_; }

private:
    double init_value_ = 0.0;
    std::vector<RegressionTree> trees_;
    BoostingParams params_;
    Eigen::Index dimension_ = 0;
    std::vector<double> training_mse_;
};

}  // namespace solsel
