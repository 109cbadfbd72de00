#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <mcv/dataset.hpp>
#include <mcv/error.hpp>

namespace mcv {

enum class PenaltyKind { Lasso, ElasticNet };

/**
 * Penalized least-squares objective
 *
 *     (1/2n)||y - X b||^2 + alpha * lambda * ||b||^2 + (1 - alpha) * lambda * ||b||_1
 *
 * For Lasso alpha is ignored (treated as 0). Note that alpha weights the
 * squared-l2 term here; it is not glmnet's l1 mixing weight.
 */
struct PenaltySpec
{
    PenaltyKind kind = PenaltyKind::Lasso;
    double alpha = 0.0;

    static PenaltySpec lasso() { return {}; }
    static PenaltySpec elastic_net(double alpha)
    {
        if (!(alpha >= 0.0 && alpha < 1.0)) {
            throw Error(ErrorCode::InvalidMethod, "elastic net alpha must lie in [0, 1)");
        }
        return {PenaltyKind::ElasticNet, alpha};
    }

    double l1_weight() const { return kind == PenaltyKind::Lasso ? 1.0 : 1.0 - alpha; }
    double l2_weight() const { return kind == PenaltyKind::Lasso ? 0.0 : alpha; }

    bool operator==(const PenaltySpec&) const = default;
};

struct LambdaGrid
{
    std::vector<double> values;
    double lambda_max = 0.0;
    double ratio = 0.0;

    Index size() const { return static_cast<Index>(values.size()); }
};

struct PathPoint
{
    double lambda = 0.0;
    IndexSet support;
    std::vector<double> coefficients;
    std::vector<int> signs;
    long iterations = 0;
    bool converged = false;

    Index model_size() const { return static_cast<Index>(support.size()); }

    Eigen::VectorXd dense(Index p) const
    {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        for (std::size_t k = 0; k < support.size(); ++k) b[support[k]] = coefficients[k];
        return b;
    }

    Eigen::VectorXd sign_vector() const
    {
        Eigen::VectorXd s(static_cast<Index>(signs.size()));
        for (std::size_t k = 0; k < signs.size(); ++k) s[static_cast<Index>(k)] = signs[k];
        return s;
    }
};

struct SolutionPath
{
    LambdaGrid grid;
    std::vector<PathPoint> points;
};

struct SolverOptions
{
    double tol = 1e-7;
    long max_iter = 100000;
};

/// Default path length and lambda_min/lambda_max ratio.
inline constexpr Index kDefaultPathLength = 100;
inline double default_ratio(Index n, Index p) { return p > n ? 0.01 : 1e-4; }

inline double soft_threshold(double z, double t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/// Log-equispaced decreasing grid from the smallest lambda giving an all-zero fit.
inline LambdaGrid lambda_grid(const Dataset& data, Index L, double ratio,
                              const PenaltySpec& penalty = PenaltySpec::lasso())
{
    if (!data.standardized) throw Error(ErrorCode::NotStandardized, "lambda_grid needs standardized data");
    if (L < 2) throw Error(ErrorCode::BadSizes, "grid needs L >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::BadSizes, "grid ratio must lie in (0, 1)");

    const double n = static_cast<double>(data.n());
    // Same per-column products as the first coordinate update, so the top of
    // the grid thresholds every coordinate to exactly zero.
    double max_abs_corr = 0.0;
    for (Index j = 0; j < data.p(); ++j) max_abs_corr = std::max(max_abs_corr, std::abs(data.X.col(j).dot(data.y) / n));
    const double y_rms = std::sqrt(data.y.squaredNorm() / n);
    if (!(max_abs_corr > 1e-12 * y_rms) || max_abs_corr == 0.0) {
        throw Error(ErrorCode::DegenerateGrid, "response is orthogonal to every column");
    }

    LambdaGrid grid;
    grid.lambda_max = max_abs_corr / penalty.l1_weight();
    grid.ratio = ratio;
    grid.values.resize(static_cast<std::size_t>(L));
    const double log_ratio = std::log(ratio);
    for (Index k = 0; k < L; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(L - 1);
        grid.values[static_cast<std::size_t>(k)] = grid.lambda_max * std::exp(t * log_ratio);
    }
    grid.values.front() = grid.lambda_max;
    grid.values.back() = ratio * grid.lambda_max;
    return grid;
}

/**
 * Cyclic coordinate descent state for one dataset and penalty.
 *
 * Keeps the dense coefficient vector and the residual y - X b up to date.
 * Columns need not be standardized; the curvature of coordinate j is
 * x_j'x_j / n, and a column that is identically zero stays at 0.
 */
class CoordinateDescent
{
public:
    CoordinateDescent(const Dataset& data, PenaltySpec penalty)
        : X_(data.X)
        , y_(data.y)
        , penalty_(penalty)
        , n_(static_cast<double>(data.n()))
        , curvature_(data.X.colwise().squaredNorm().transpose() / static_cast<double>(data.n()))
        , beta_(Eigen::VectorXd::Zero(data.p()))
        , residual_(data.y)
    {}

    const Eigen::VectorXd& beta() const { return beta_; }
    const Eigen::VectorXd& residual() const { return residual_; }

    void set_beta(const Eigen::VectorXd& b)
    {
        beta_ = b;
        residual_ = y_ - X_ * beta_;
    }

    double objective(double lambda) const
    {
        return residual_.squaredNorm() / (2.0 * n_) + penalty_.l2_weight() * lambda * beta_.squaredNorm() +
               penalty_.l1_weight() * lambda * beta_.lpNorm<1>();
    }

    /// Exact minimization along coordinate j; returns |change|.
    double update(Index j, double lambda)
    {
        const double c = curvature_[j];
        if (c == 0.0) return 0.0;
        const double old = beta_[j];
        const double z = X_.col(j).dot(residual_) / n_ + c * old;
        const double updated =
            soft_threshold(z, penalty_.l1_weight() * lambda) / (c + 2.0 * penalty_.l2_weight() * lambda);
        const double delta = updated - old;
        if (delta != 0.0) {
            residual_.noalias() -= delta * X_.col(j);
            beta_[j] = updated;
        }
        return std::abs(delta);
    }

    /// One pass over every coordinate; returns the largest |change|.
    double sweep(double lambda)
    {
        double largest = 0.0;
        for (Index j = 0; j < beta_.size(); ++j) largest = std::max(largest, update(j, lambda));
        return largest;
    }

    /// One pass over the currently nonzero coordinates.
    double active_sweep(double lambda)
    {
        active_.clear();
        for (Index j = 0; j < beta_.size(); ++j) {
            if (beta_[j] != 0.0) active_.push_back(j);
        }
        double largest = 0.0;
        for (Index j : active_) largest = std::max(largest, update(j, lambda));
        return largest;
    }

    /**
     * Minimize at `lambda` from the current state. Converged means a full
     * sweep moved no coefficient by more than tol; between full sweeps the
     * active coordinates are iterated to convergence.
     */
    PathPoint solve(double lambda, const SolverOptions& opts)
    {
        PathPoint point;
        point.lambda = lambda;
        long iterations = 0;
        bool converged = false;
        while (iterations < opts.max_iter) {
            ++iterations;
            if (sweep(lambda) <= opts.tol) {
                converged = true;
                break;
            }
            while (iterations < opts.max_iter) {
                ++iterations;
                if (active_sweep(lambda) <= opts.tol) break;
            }
        }
        point.iterations = iterations;
        point.converged = converged;
        for (Index j = 0; j < beta_.size(); ++j) {
            if (beta_[j] != 0.0) {
                point.support.push_back(j);
                point.coefficients.push_back(beta_[j]);
                point.signs.push_back(beta_[j] > 0.0 ? 1 : -1);
            }
        }
        return point;
    }

private:
    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    PenaltySpec penalty_;
    double n_;
    Eigen::VectorXd curvature_;
    Eigen::VectorXd beta_;
    Eigen::VectorXd residual_;
    IndexSet active_;
};

/// Warm-started path over the grid, largest lambda first.
inline SolutionPath fit_path(const Dataset& data, const LambdaGrid& grid, const PenaltySpec& penalty,
                             const SolverOptions& opts = {})
{
    SolutionPath path;
    path.grid = grid;
    path.points.reserve(grid.values.size());
    CoordinateDescent cd(data, penalty);
    for (double lambda : grid.values) path.points.push_back(cd.solve(lambda, opts));
    return path;
}

/// Single point from a zero (or supplied) start; used to check warm-start independence.
inline PathPoint fit_point(const Dataset& data, double lambda, const PenaltySpec& penalty,
                           const SolverOptions& opts = {},
                           const std::optional<Eigen::VectorXd>& start = std::nullopt)
{
    CoordinateDescent cd(data, penalty);
    if (start) cd.set_beta(*start);
    return cd.solve(lambda, opts);
}

struct ViolationReport
{
    double max_violation = 0.0;
    Eigen::VectorXd violations;
    IndexSet offending;

    bool ok() const { return offending.empty(); }
};

/// Stationarity residuals of the penalized objective at `point`.
inline ViolationReport kkt_check(const Dataset& data, double lambda, const PathPoint& point, double tol,
                                 const PenaltySpec& penalty = PenaltySpec::lasso())
{
    const Index p = data.p();
    for (Index j : point.support) {
        if (j < 0 || j >= p) throw Error(ErrorCode::InvalidSupport, "support index out of range");
    }
    const Eigen::VectorXd beta = point.dense(p);
    const Eigen::VectorXd residual = data.y - data.X * beta;
    const Eigen::VectorXd grad = data.X.transpose() * residual / static_cast<double>(data.n());

    const double l1 = penalty.l1_weight() * lambda;
    const double l2 = 2.0 * penalty.l2_weight() * lambda;

    ViolationReport report;
    report.violations.resize(p);
    for (Index j = 0; j < p; ++j) {
        double v;
        if (beta[j] != 0.0) {
            const double s = beta[j] > 0.0 ? 1.0 : -1.0;
            v = std::abs(grad[j] - l2 * beta[j] - l1 * s);
        } else {
            v = std::max(std::abs(grad[j]) - l1, 0.0);
        }
        report.violations[j] = v;
        if (v > tol) report.offending.push_back(j);
    }
    report.max_violation = p > 0 ? report.violations.maxCoeff() : 0.0;
    return report;
}

} // namespace mcv
