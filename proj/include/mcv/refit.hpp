#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include <mcv/dataset.hpp>
#include <mcv/error.hpp>

namespace mcv {

/// Reciprocal condition threshold on the support Gram matrix.
inline constexpr double kGramRcondThreshold = 1e-12;

struct OlsFit
{
    IndexSet support;
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    bool gram_condition_ok = true;
    Index p = 0;

    Eigen::VectorXd dense() const
    {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        for (std::size_t k = 0; k < support.size(); ++k) b[support[k]] = coefficients[static_cast<Index>(k)];
        return b;
    }
};

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const IndexSet& columns)
{
    Eigen::MatrixXd out(X.rows(), static_cast<Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) out.col(static_cast<Index>(k)) = X.col(columns[k]);
    return out;
}

/**
 * Column-pivoted QR of X restricted to a support. Solves least squares on the
 * support and applies the inverse Gram (X_S'X_S)^{-1}.
 *
 * The Gram reciprocal condition number is estimated as (|R_dd| / |R_11|)^2
 * from the pivoted R factor.
 */
class SupportFactor
{
public:
    SupportFactor(const Eigen::MatrixXd& X, const IndexSet& support)
        : support_(support)
    {
        const Index d = static_cast<Index>(support.size());
        for (Index j : support) {
            if (j < 0 || j >= X.cols()) throw Error(ErrorCode::InvalidSupport, "support index out of range");
        }
        if (d >= X.rows()) {
            throw Error(ErrorCode::SupportTooLarge,
                        "support size " + std::to_string(d) + " >= rows " + std::to_string(X.rows()));
        }
        if (d == 0) return;
        XS_ = select_columns(X, support);
        qr_.compute(XS_);
        const auto diag = qr_.matrixR().diagonal().cwiseAbs();
        const double r_max = diag.maxCoeff();
        const double r_min = diag.minCoeff();
        rcond_ = r_max > 0.0 ? (r_min / r_max) * (r_min / r_max) : 0.0;
    }

    Index size() const { return static_cast<Index>(support_.size()); }
    double gram_rcond() const { return rcond_; }
    bool well_conditioned() const { return rcond_ >= kGramRcondThreshold; }
    const Eigen::MatrixXd& columns() const { return XS_; }

    Eigen::VectorXd least_squares(const Eigen::VectorXd& y) const
    {
        if (size() == 0) return {};
        return qr_.solve(y);
    }

    /// (X_S'X_S)^{-1} v via R^{-1} R^{-T} under the column permutation.
    Eigen::VectorXd solve_gram(const Eigen::VectorXd& v) const
    {
        if (size() == 0) return {};
        const Index d = size();
        const auto R = qr_.matrixR().topLeftCorner(d, d).template triangularView<Eigen::Upper>();
        Eigen::VectorXd w = qr_.colsPermutation().transpose() * v;
        R.transpose().solveInPlace(w);
        R.solveInPlace(w);
        return qr_.colsPermutation() * w;
    }

private:
    IndexSet support_;
    Eigen::MatrixXd XS_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    double rcond_ = 1.0;
};

/// Least squares on the support columns of `data`.
inline OlsFit ols_refit(const Dataset& data, const IndexSet& support)
{
    SupportFactor factor(data.X, support);
    OlsFit fit;
    fit.support = support;
    fit.p = data.p();
    if (support.empty()) {
        fit.rss = data.y.squaredNorm();
        return fit;
    }
    if (!factor.well_conditioned()) {
        throw Error(ErrorCode::SingularGram,
                    "support Gram reciprocal condition " + std::to_string(factor.gram_rcond()));
    }
    fit.coefficients = factor.least_squares(data.y);
    fit.rss = (data.y - factor.columns() * fit.coefficients).squaredNorm();
    return fit;
}

/// X_rows restricted to the fit's support times its coefficients (centered scale).
inline Eigen::VectorXd predict(const Eigen::MatrixXd& X_rows, const OlsFit& fit)
{
    if (X_rows.cols() != fit.p) {
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(fit.p) + " columns, got " + std::to_string(X_rows.cols()));
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X_rows.rows());
    for (std::size_t k = 0; k < fit.support.size(); ++k) {
        out.noalias() += fit.coefficients[static_cast<Index>(k)] * X_rows.col(fit.support[k]);
    }
    return out;
}

/// Prediction on the raw scale for a fit made on standardized `train`.
inline Eigen::VectorXd predict_raw(const Dataset& train, const Eigen::MatrixXd& X_raw, const OlsFit& fit)
{
    return to_raw_scale(train, fit.dense()).predict(X_raw);
}

} // namespace mcv
