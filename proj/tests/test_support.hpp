#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <mcv/dataset.hpp>
#include <mcv/simgen.hpp>
#include <mcv/solver.hpp>

namespace mcv::fixtures {

inline Eigen::MatrixXd gaussian_matrix(Index n, Index p, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) m(i, j) = normal(rng);
    }
    return m;
}

/// Standardized design with X'X/n = I exactly (up to rounding) and centered y.
inline Dataset orthonormal_dataset(Index n, Index p, std::uint64_t seed, const Eigen::VectorXd& beta, double noise)
{
    Eigen::MatrixXd Z = gaussian_matrix(n, p, seed);
    Z.rowwise() -= Z.colwise().mean();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    Eigen::MatrixXd X = Q * std::sqrt(static_cast<double>(n));
    Eigen::VectorXd e = gaussian_matrix(n, 1, seed + 1).col(0);
    Eigen::VectorXd y = X * beta + noise * e;
    y.array() -= y.mean();
    Dataset d = Dataset::raw(X, y);
    d.standardized = true;
    return d;
}

/// Standardized Gaussian regression with a few leading signals.
inline Dataset random_problem(Index n, Index p, double rho, std::uint64_t seed, Index signals = 3)
{
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (Index j = 0; j < std::min(signals, p); ++j) beta[j] = (j % 2 == 0 ? 1.0 : -1.0) * (1.5 - 0.3 * j);
    const TrueModel truth = TrueModel::from_beta(beta);
    const CovSpec spec = rho > 0.0 ? CovSpec::exp_decay(rho) : CovSpec::independent();
    return standardize(sample_dataset(n, truth, spec, seed));
}

inline double lasso_objective(const Dataset& d, const Eigen::VectorXd& b, double lambda)
{
    return (d.y - d.X * b).squaredNorm() / (2.0 * static_cast<double>(d.n())) + lambda * b.lpNorm<1>();
}

} // namespace mcv::fixtures

namespace mcv::fixtures {

/**
 * Exhaustive search of the p = 2 Lasso objective over a square grid of the
 * given resolution. The box half-width is ||b_ols||_1, which bounds the l1
 * norm of every minimizer.
 */
inline Eigen::Vector2d brute_force_lasso2(const Dataset& d, double lambda, double step = 1e-3)
{
    const double n = static_cast<double>(d.n());
    const Eigen::Matrix2d G = d.X.transpose() * d.X / n;
    const Eigen::Vector2d c = d.X.transpose() * d.y / n;
    const Eigen::Vector2d ols = G.ldlt().solve(c);
    const long half = static_cast<long>(std::ceil(ols.lpNorm<1>() / step)) + 1;
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d arg = Eigen::Vector2d::Zero();
    for (long i = -half; i <= half; ++i) {
        const double b0 = static_cast<double>(i) * step;
        const double a0 = 0.5 * G(0, 0) * b0 * b0 - c[0] * b0 + lambda * std::abs(b0);
        for (long k = -half; k <= half; ++k) {
            const double b1 = static_cast<double>(k) * step;
            const double v = a0 + G(0, 1) * b0 * b1 + 0.5 * G(1, 1) * b1 * b1 - c[1] * b1 + lambda * std::abs(b1);
            if (v < best) {
                best = v;
                arg = {b0, b1};
            }
        }
    }
    return arg;
}

} // namespace mcv::fixtures
