#include "solsel/gp.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>

#include "solsel/error.hpp"

namespace solsel {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = (X.row(i) - X.row(j)).squaredNorm();
            d2(i, j) = v;
            d2(j, i) = v;
        }
    }
    return d2;
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& d2, double length_scale) {
    const double scale = -0.5 / (length_scale * length_scale);
    return (d2.array() * scale).exp().matrix();
}

// Lower triangle of the kernel only; the factorization never reads the rest.
void lower_kernel(const Eigen::MatrixXd& d2, double length_scale, Eigen::MatrixXd& K) {
    const Eigen::Index n = d2.rows();
    const double scale = -0.5 / (length_scale * length_scale);
    K.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        K.col(j).tail(n - j) = (d2.col(j).tail(n - j).array() * scale).exp().matrix();
    }
}

// Reusable buffers for repeated likelihood evaluations on one data set.
struct LmlWorkspace {
    Eigen::MatrixXd K;
    Eigen::MatrixXd A;
    Eigen::VectorXd a;
};

// LML of a unit-diagonal kernel matrix (lower triangle read); nullopt when
// the jittered system does not factorize.
std::optional<double> lml_from_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                      double noise, LmlWorkspace& ws) {
    const Eigen::Index n = K.rows();
    ws.A.resize(n, n);
    ws.A.triangularView<Eigen::Lower>() = K.triangularView<Eigen::Lower>();
    ws.A.diagonal().array() += noise + kGpJitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(ws.A);
    if (llt.info() != Eigen::Success) return std::nullopt;
    ws.a = y;
    llt.solveInPlace(ws.a);
    const double log_det = 2.0 * ws.A.diagonal().array().log().sum();
    const double v = -0.5 * y.dot(ws.a) - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

// LML of K + (noise + jitter) I for several noise levels from one Householder
// tridiagonalization K = Q T Q^T: the shifted system stays tridiagonal in the
// same basis, so each noise costs O(n). Entries are nullopt where the shifted
// system is not positive definite.
std::vector<std::optional<double>> lml_over_noises(const Eigen::MatrixXd& K,
                                                   const Eigen::VectorXd& y,
                                                   const std::vector<double>& noises) {
    const Eigen::Index n = K.rows();
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(K);
    const Eigen::VectorXd z = tri.matrixQ().adjoint() * y;
    const Eigen::VectorXd diag = tri.diagonal();
    const Eigen::VectorXd sub = tri.subDiagonal();

    std::vector<std::optional<double>> out(noises.size());
    for (std::size_t j = 0; j < noises.size(); ++j) {
        const double shift = noises[j] + kGpJitter;
        // LDL^T of the shifted tridiagonal matrix; u = L^-1 z.
        double d = diag(0) + shift;
        double u = z(0);
        bool ok = d > 0.0;
        double log_det = ok ? std::log(d) : 0.0;
        double quad = ok ? u * u / d : 0.0;
        for (Eigen::Index i = 1; ok && i < n; ++i) {
            const double l = sub(i - 1) / d;
            d = diag(i) + shift - l * sub(i - 1);
            u = z(i) - l * u;
            if (!(d > 0.0)) {
                ok = false;
                break;
            }
            log_det += std::log(d);
            quad += u * u / d;
        }
        if (!ok) continue;
        const double v = -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
        if (std::isfinite(v)) out[j] = v;
    }
    return out;
}

void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() == 0) throw DataError("GP needs at least one training point");
    if (X.rows() != y.size()) throw ShapeError("GP training points and targets differ in count");
}

}  // namespace

double rbf_kernel(std::span<const double> xi, std::span<const double> xj, double length_scale) {
    if (xi.size() != xj.size()) throw ShapeError("kernel arguments differ in dimension");
    if (!(length_scale > 0.0)) throw DomainError("kernel length scale must be positive");
    double d2 = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double diff = xi[k] - xj[k];
        d2 += diff * diff;
    }
    return std::exp(-d2 / (2.0 * length_scale * length_scale));
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               double length_scale, double noise) {
    check_training_data(X, y);
    if (!(length_scale > 0.0)) throw DomainError("kernel length scale must be positive");
    LmlWorkspace ws;
    auto v = lml_from_kernel(kernel_from_distances(squared_distances(X), length_scale), y, noise, ws);
    if (!v) throw NumericError("kernel system is not positive definite");
    return *v;
}

GPModel GPModel::with_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      double length_scale, double noise) {
    check_training_data(X, y);
    GPModel m;
    m.train_x_ = X;
    m.train_y_ = y;
    m.length_scale_ = length_scale;
    m.noise_ = noise;
    Eigen::MatrixXd A = kernel_from_distances(squared_distances(X), length_scale);
    A.diagonal().array() += noise + kGpJitter;
    m.factor_.compute(A);
    if (m.factor_.info() != Eigen::Success) {
        throw NumericError("kernel system is not positive definite");
    }
    m.alpha_ = m.factor_.solve(y);
    const double log_det = 2.0 * m.factor_.matrixLLT().diagonal().array().log().sum();
    m.lml_ = -0.5 * y.dot(m.alpha_) - 0.5 * log_det - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
    return m;
}

GPModel GPModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const GpFitOptions& options) {
    check_training_data(X, y);
    if (options.length_scales.empty() || options.noises.empty()) {
        throw FitError("GP hyperparameter grids must be non-empty");
    }
    const Eigen::MatrixXd d2 = squared_distances(X);

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_l = 0;
    std::size_t best_noise = 0;
    bool found = false;
    LmlWorkspace ws;
    for (std::size_t i = 0; i < options.length_scales.size(); ++i) {
        lower_kernel(d2, options.length_scales[i], ws.K);
        const auto values = lml_over_noises(ws.K, y, options.noises);
        for (std::size_t j = 0; j < options.noises.size(); ++j) {
            const auto& v = values[j];
            if (v && (!found || *v > best)) {
                best = *v;
                best_l = i;
                best_noise = j;
                found = true;
            }
        }
    }
    if (!found) throw FitError("GP fit failed for every hyperparameter candidate");

    const double noise = options.noises[best_noise];
    double length_scale = options.length_scales[best_l];

    // Golden-section refinement of log(l) between the neighbouring grid points.
    if (options.length_scales.size() > 1 && options.golden_iterations > 0) {
        const auto& grid = options.length_scales;
        double lo = std::log(grid[best_l == 0 ? 0 : best_l - 1]);
        double hi = std::log(grid[std::min(best_l + 1, grid.size() - 1)]);
        auto objective = [&](double t) {
            lower_kernel(d2, std::exp(t), ws.K);
            auto v = lml_from_kernel(ws.K, y, noise, ws);
            return v ? *v : -std::numeric_limits<double>::infinity();
        };
        auto consider = [&](double t, double f) {
            if (f > best) {
                best = f;
                length_scale = std::exp(t);
            }
        };
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - ratio * (hi - lo);
        double d = lo + ratio * (hi - lo);
        double fc = objective(c);
        double fd = objective(d);
        consider(c, fc);
        consider(d, fd);
        for (int it = 0; it < options.golden_iterations; ++it) {
            if (fc >= fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - ratio * (hi - lo);
                fc = objective(c);
                consider(c, fc);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + ratio * (hi - lo);
                fd = objective(d);
                consider(d, fd);
            }
        }
    }

    return with_hyperparameters(X, y, length_scale, noise);
}

GpPrediction GPModel::predict(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != train_x_.cols()) {
        throw ShapeError("GP query dimension differs from training data");
    }
    const Eigen::Index n = train_x_.rows();
    const Eigen::Map<const Eigen::RowVectorXd> q(x.data(), static_cast<Eigen::Index>(x.size()));
    const double scale = -0.5 / (length_scale_ * length_scale_);
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = std::exp((train_x_.row(i) - q).squaredNorm() * scale);
    GpPrediction p;
    p.mean = k.dot(alpha_);
    const Eigen::VectorXd v = factor_.matrixL().solve(k);
    p.variance = std::max(0.0, 1.0 - v.squaredNorm());
    return p;
}

double ucb_score(const GpPrediction& p, const UcbParams& params) {
    const double spread = params.use_std ? std::sqrt(p.variance) : p.variance;
    return p.mean + params.alpha * spread;
}

double ucb(const GPModel& model, std::span<const double> x, const UcbParams& params) {
    return ucb_score(model.predict(x), params);
}

}  // namespace solsel
