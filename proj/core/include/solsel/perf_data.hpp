#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace solsel {

enum class RecordSource { Online, Imported };

/// One observation (x_i, r_i) with the raw quantities it was derived from.
struct PerformanceRecord {
    int group_id = 0;
    std::vector<double> numeric_values;
    std::vector<double> context;
    std::optional<double> t_sol;  // seconds; absent on failure
    bool success = true;
    double reward = 0.0;
    long step_index = 0;
    RecordSource source = RecordSource::Online;

    friend bool operator==(const PerformanceRecord&, const PerformanceRecord&) = default;
};

/// Largest successful solve time seen so far in a run, floored so that a
/// failure before any success still has a finite penalty.
class RunningMax {
public:
    explicit RunningMax(double floor_seconds = 1.0) : max_t_sol_(floor_seconds) {}

    double value() const noexcept { return max_t_sol_; }
    void update(double t_sol) noexcept {
        if (t_sol > max_t_sol_) max_t_sol_ = t_sol;
    }
    /// Reward assigned to a failed solve: -ln(2 * max T_sol).
    double penalty() const { return -std::log(2.0 * max_t_sol_); }

private:
    double max_t_sol_;
};

/// -ln(t_sol) on success (and folds t_sol into the running max); the current
/// penalty on failure. Throws DomainError if a success carries t_sol <= 0.
double compute_reward(std::optional<double> t_sol, bool success, RunningMax& running_max);

/// The performance data set D, partitioned by configuration group. Imported
/// and online records are treated identically by the models.
class Dataset {
public:
    void append(PerformanceRecord record);

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::vector<PerformanceRecord>& records() const noexcept { return records_; }
    const PerformanceRecord& operator[](std::size_t i) const { return records_[i]; }

    /// Indices into records() belonging to group_id, in insertion order.
    const std::vector<std::size_t>& group_indices(int group_id) const;
    std::size_t group_size(int group_id) const { return group_indices(group_id).size(); }
    const std::map<int, std::vector<std::size_t>>& partitions() const noexcept { return by_group_; }

    /// Writes the versioned JSON-lines format: a {"schema": 1} header, then
    /// one record object per line.
    void save(const std::string& path) const;
    void write(std::ostream& out) const;

    /// Reads a file written by save(). An empty file is an empty data set.
    /// Every loaded record is tagged RecordSource::Imported. Throws
    /// ParseError carrying the offending line number.
    static Dataset load(const std::string& path);
    static Dataset read(std::istream& in);

private:
    std::vector<PerformanceRecord> records_;
    std::map<int, std::vector<std::size_t>> by_group_;
};

/// Zero-mean/unit-variance scaling of features and targets. Uses the
/// population standard deviation; dimensions with std < 1e-12 get std = 1.
class Standardizer {
public:
    static constexpr double kMinStd = 1e-12;

    /// points: one row per observation. Throws DataError when empty.
    static Standardizer fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& targets);

    Eigen::MatrixXd transform(const Eigen::MatrixXd& points) const;
    Eigen::VectorXd transform_point(std::span<const double> x) const;
    Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& points) const;
    Eigen::VectorXd transform_targets(const Eigen::VectorXd& y) const;
    double inverse_target(double z) const noexcept { return target_mean_ + target_std_ * z; }
    Eigen::VectorXd inverse_targets(const Eigen::VectorXd& z) const;

    const Eigen::VectorXd& means() const noexcept { return means_; }
    const Eigen::VectorXd& stds() const noexcept { return stds_; }
    double target_mean() const noexcept { return target_mean_; }
    double target_std() const noexcept { return target_std_; }

private:
    Eigen::VectorXd means_;
    Eigen::VectorXd stds_;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
};

}  // namespace solsel
