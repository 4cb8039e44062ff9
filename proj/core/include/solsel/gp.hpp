#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace solsel {

/// Added to the diagonal of every kernel system before factorization.
inline constexpr double kGpJitter = 1e-8;

/// RBF kernel exp(-|xi - xj|^2 / (2 l^2)). Throws ShapeError on a dimension
/// mismatch and DomainError for l <= 0.
double rbf_kernel(std::span<const double> xi, std::span<const double> xj, double length_scale);

/// n values spaced evenly in log between lo and hi, endpoints included.
std::vector<double> log_spaced(double lo, double hi, int n);

/// -1/2 y^T A^-1 y - 1/2 log det A - n/2 log 2pi with A = K + (noise + jitter) I.
/// Rows of X are observations. Throws NumericError if A is not positive definite.
double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               double length_scale, double noise);

struct GpFitOptions {
    std::vector<double> length_scales = log_spaced(1e-2, 1e2, 25);
    std::vector<double> noises = log_spaced(1e-6, 1.0, 7);
    int golden_iterations = 30;
};

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

struct UcbParams {
    double alpha = 2.0;
    // Score with alpha * stddev instead of alpha * variance.
    bool use_std = false;
};

/// Exact GP regression with an isotropic RBF kernel, zero prior mean and unit
/// prior variance. Intended for standardized inputs and targets; predictions
/// are returned in the same (standardized) units. Immutable once fitted.
class GPModel {
public:
    /// Maximizes the log marginal likelihood over the length-scale x noise grid
    /// (ties go to the smallest grid index), then refines the length scale by
    /// golden-section search between the neighbours of the best grid point.
    /// Throws DataError on empty input and FitError if every candidate fails.
    static GPModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const GpFitOptions& options = {});

    /// Factorizes at fixed hyperparameters. Throws NumericError when the
    /// system is not positive definite.
    static GPModel with_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        double length_scale, double noise);

    GpPrediction predict(std::span<const double> x) const;

    double length_scale() const noexcept { return length_scale_; }
    double noise() const noexcept { return noise_; }
    double log_likelihood() const noexcept { return lml_; }
    Eigen::Index num_points() const noexcept { return train_x_.rows(); }
    Eigen::Index dimension() const noexcept { return train_x_.cols(); }

private:
    Eigen::MatrixXd train_x_;
    Eigen::VectorXd train_y_;
    double length_scale_ = 1.0;
    double noise_ = 0.0;
    double lml_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> factor_;
    Eigen::VectorXd alpha_;
};

/// mean + alpha * variance (or alpha * sqrt(variance) with use_std).
double ucb_score(const GpPrediction& p, const UcbParams& params);

/// UCB acquisition of a fitted model at x, in the model's units.
double ucb(const GPModel& model, std::span<const double> x, const UcbParams& params);

}  // namespace solsel
