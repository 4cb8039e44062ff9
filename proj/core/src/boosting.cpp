#include "solsel/boosting.hpp"

#include <algorithm>
#include <numeric>

#include "solsel/error.hpp"

namespace solsel {

namespace {

using IndexList = std::vector<int>;

// Each feature is reduced to bin codes once per fit. Bin boundaries are
// midpoints between adjacent distinct values; with more distinct values than
// max_bins only the boundaries at equal-count quantiles are kept. A sample
// with code c satisfies x <= thresholds[c] and x > thresholds[c - 1].
struct Binned {
    Eigen::Index rows = 0;
    std::vector<std::vector<double>> thresholds;  // per feature, ascending
    std::vector<std::vector<int>> codes;          // per feature, per row

    int bins(std::size_t f) const { return static_cast<int>(thresholds[f].size()) + 1; }
};

double midpoint(double a, double b) {
    const double mid = 0.5 * (a + b);
    return mid < b ? mid : a;
}

Binned bin_features(const Eigen::MatrixXd& X, int max_bins) {
    Binned out;
    out.rows = X.rows();
    const auto n = static_cast<std::size_t>(X.rows());
    out.thresholds.resize(static_cast<std::size_t>(X.cols()));
    out.codes.resize(static_cast<std::size_t>(X.cols()));
    std::vector<double> sorted(n);
    for (Eigen::Index f = 0; f < X.cols(); ++f) {
        const auto fu = static_cast<std::size_t>(f);
        for (std::size_t i = 0; i < n; ++i) sorted[i] = X(static_cast<Eigen::Index>(i), f);
        std::sort(sorted.begin(), sorted.end());

        std::vector<double>& th = out.thresholds[fu];
        for (std::size_t i = 1; i < n; ++i) {
            if (sorted[i - 1] < sorted[i]) th.push_back(midpoint(sorted[i - 1], sorted[i]));
        }
        if (max_bins > 0 && static_cast<int>(th.size()) + 1 > max_bins) {
            std::vector<double> kept;
            for (int b = 1; b < max_bins; ++b) {
                const std::size_t q = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(max_bins);
                if (q == 0 || q >= n) continue;
                // Boundary at or after the quantile position.
                std::size_t k = q;
                while (k < n && !(sorted[k - 1] < sorted[k])) ++k;
                if (k >= n) continue;
                const double t = midpoint(sorted[k - 1], sorted[k]);
                if (kept.empty() || kept.back() < t) kept.push_back(t);
            }
            th = std::move(kept);
        }

        std::vector<int>& codes = out.codes[fu];
        codes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = X(static_cast<Eigen::Index>(i), f);
            codes[i] = static_cast<int>(std::lower_bound(th.begin(), th.end(), v) - th.begin());
        }
    }
    return out;
}

class TreeBuilder {
public:
    TreeBuilder(const Binned& binned, const Eigen::VectorXd& target, int max_depth,
                int min_samples_leaf, std::vector<RegressionTree::Node>& nodes)
        : binned_(binned), target_(target), max_depth_(max_depth),
          min_leaf_(std::max(1, min_samples_leaf)), nodes_(nodes) {}

    int build(const IndexList& samples, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        double sum = 0.0;
        double sum_sq = 0.0;
        for (int i : samples) {
            sum += target_(i);
            sum_sq += target_(i) * target_(i);
        }
        const auto n = static_cast<double>(samples.size());
        nodes_[static_cast<std::size_t>(id)].value = sum / n;

        const int count = static_cast<int>(samples.size());
        if (depth >= max_depth_ || count < 2 * min_leaf_) return id;

        const double parent_score = sum * sum / n;
        const double min_gain = 1e-12 * sum_sq;
        double best_gain = 0.0;
        int best_feature = -1;
        int best_bin = -1;

        for (std::size_t f = 0; f < binned_.thresholds.size(); ++f) {
            const int nb = binned_.bins(f);
            if (nb < 2) continue;
            hist_sum_.assign(static_cast<std::size_t>(nb), 0.0);
            hist_count_.assign(static_cast<std::size_t>(nb), 0);
            const auto& codes = binned_.codes[f];
            for (int i : samples) {
                const auto c = static_cast<std::size_t>(codes[static_cast<std::size_t>(i)]);
                hist_sum_[c] += target_(i);
                ++hist_count_[c];
            }
            double left_sum = 0.0;
            int n_left = 0;
            for (int b = 0; b + 1 < nb; ++b) {
                const auto bu = static_cast<std::size_t>(b);
                if (hist_count_[bu] == 0) continue;
                left_sum += hist_sum_[bu];
                n_left += hist_count_[bu];
                const int n_right = count - n_left;
                if (n_left < min_leaf_) continue;
                if (n_right < min_leaf_) break;
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right -
                                    parent_score;
                if (gain > best_gain && gain > min_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_bin = b;
                }
            }
        }
        if (best_feature < 0) return id;

        const auto bf = static_cast<std::size_t>(best_feature);
        const auto& codes = binned_.codes[bf];
        IndexList left_samples;
        IndexList right_samples;
        for (int i : samples) {
            (codes[static_cast<std::size_t>(i)] <= best_bin ? left_samples : right_samples).push_back(i);
        }
        const double threshold = binned_.thresholds[bf][static_cast<std::size_t>(best_bin)];

        const int left = build(left_samples, depth + 1);
        const int right = build(right_samples, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = threshold;
        node.left = left;
        node.right = right;
        return id;
    }

private:
    const Binned& binned_;
    const Eigen::VectorXd& target_;
    int max_depth_;
    int min_leaf_;
    std::vector<RegressionTree::Node>& nodes_;
    std::vector<double> hist_sum_;
    std::vector<int> hist_count_;
};

std::vector<RegressionTree::Node> build_nodes(const Binned& binned, const Eigen::VectorXd& target,
                                              int max_depth, int min_samples_leaf) {
    std::vector<RegressionTree::Node> nodes;
    IndexList samples(static_cast<std::size_t>(binned.rows));
    std::iota(samples.begin(), samples.end(), 0);
    TreeBuilder(binned, target, max_depth, min_samples_leaf, nodes).build(samples, 0);
    return nodes;
}

}  // namespace

RegressionTree RegressionTree::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& target,
                                   int max_depth, int min_samples_leaf, int max_bins) {
    if (X.rows() == 0) throw DataError("regression tree needs at least one sample");
    if (X.rows() != target.size()) throw ShapeError("sample and target counts differ");
    return RegressionTree(
        build_nodes(bin_features(X, max_bins), target, max_depth, min_samples_leaf));
}

double RegressionTree::predict(std::span<const double> x) const {
    int id = 0;
    for (;;) {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.feature < 0) return node.value;
        id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
}

int RegressionTree::num_leaves() const noexcept {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                          [](const Node& n) { return n.feature < 0; }));
}

int RegressionTree::depth() const noexcept {
    std::vector<int> depth(nodes_.size(), 0);
    int deepest = 0;
    // Children are always appended after their parent.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.feature < 0) continue;
        depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
        depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
        deepest = std::max(deepest, depth[i] + 1);
    }
    return deepest;
}

BoostingModel BoostingModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const BoostingParams& params) {
    if (X.rows() == 0) throw DataError("boosting needs at least one sample");
    if (X.rows() != y.size()) throw ShapeError("sample and target counts differ");

    BoostingModel model;
    model.params_ = params;
    model.dimension_ = X.cols();
    model.init_value_ = y.mean();

    const Binned binned = bin_features(X, params.max_bins);
    Eigen::VectorXd prediction = Eigen::VectorXd::Constant(y.size(), model.init_value_);
    Eigen::VectorXd residual = y - prediction;
    model.training_mse_.push_back(residual.squaredNorm() / static_cast<double>(y.size()));
    model.trees_.reserve(static_cast<std::size_t>(std::max(0, params.n_rounds)));

    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (int round = 0; round < params.n_rounds; ++round) {
        RegressionTree tree(
            build_nodes(binned, residual, params.max_depth, params.min_samples_leaf));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index f = 0; f < X.cols(); ++f) row[static_cast<std::size_t>(f)] = X(i, f);
            prediction(i) += params.learning_rate * tree.predict(row);
        }
        residual = y - prediction;
        model.training_mse_.push_back(residual.squaredNorm() / static_cast<double>(y.size()));
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

double BoostingModel::predict(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != dimension_) {
        throw ShapeError("boosting query dimension differs from training data");
    }
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(x);
    return init_value_ + params_.learning_rate * sum;
}

}  // namespace solsel
