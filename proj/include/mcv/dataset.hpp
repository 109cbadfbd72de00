#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include <mcv/error.hpp>

namespace mcv {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/**
 * Design matrix and response, plus the affine map back to the raw scale.
 *
 * When `standardized` is set, every column of X has mean 0 and mean-square 1
 * and y is centered; `column_means`, `column_scales` and `y_mean` then record
 * the transformation so that coefficients and predictions can be reported on
 * the original scale. A raw dataset carries zero means and unit scales.
 *
 * Row subsets of a standardized dataset (construction/validation sets) keep
 * the parent's metadata but are flagged as not standardized.
 */
struct Dataset
{
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    bool standardized = false;
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_scales;
    double y_mean = 0.0;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }

    static Dataset raw(Eigen::MatrixXd X, Eigen::VectorXd y)
    {
        if (X.rows() != y.size()) {
            throw Error(ErrorCode::BadShape,
                        "X has " + std::to_string(X.rows()) + " rows but y has " +
                            std::to_string(y.size()) + " entries");
        }
        if (X.rows() < 2 || X.cols() < 1) {
            throw Error(ErrorCode::BadShape, "need n >= 2 and p >= 1");
        }
        if (!X.allFinite() || !y.allFinite()) {
            throw Error(ErrorCode::NonFiniteInput, "X or y contains NaN/Inf");
        }
        Dataset d;
        d.column_means = Eigen::VectorXd::Zero(X.cols());
        d.column_scales = Eigen::VectorXd::Ones(X.cols());
        d.X = std::move(X);
        d.y = std::move(y);
        return d;
    }
};

/// Center and scale columns to mean 0 / mean-square 1, center y.
/// A dataset that is already standardized is returned unchanged.
inline Dataset standardize(const Dataset& raw)
{
    if (raw.standardized) return raw;
    const Index n = raw.n();
    const Index p = raw.p();
    if (n < 2) throw Error(ErrorCode::BadShape, "need n >= 2");
    if (!raw.X.allFinite() || !raw.y.allFinite()) {
        throw Error(ErrorCode::NonFiniteInput, "X or y contains NaN/Inf");
    }

    Dataset out;
    out.X.resize(n, p);
    out.column_means.resize(p);
    out.column_scales.resize(p);
    for (Index j = 0; j < p; ++j) {
        const double mean = raw.X.col(j).mean();
        auto centered = raw.X.col(j).array() - mean;
        const double scale = std::sqrt(centered.square().sum() / static_cast<double>(n));
        if (!(scale > 1e-14 * (1.0 + std::abs(mean)))) {
            throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(j + 1) + " has zero variance");
        }
        out.X.col(j) = centered / scale;
        out.column_means[j] = mean;
        out.column_scales[j] = scale;
    }
    out.y_mean = raw.y.mean();
    out.y = raw.y.array() - out.y_mean;
    out.standardized = true;
    return out;
}

/// Rows `rows` of `data`, keeping the parent's scale metadata.
inline Dataset subset_rows(const Dataset& data, const IndexSet& rows)
{
    const Index m = static_cast<Index>(rows.size());
    Dataset out;
    out.X.resize(m, data.p());
    out.y.resize(m);
    for (Index i = 0; i < m; ++i) {
        out.X.row(i) = data.X.row(rows[i]);
        out.y[i] = data.y[rows[i]];
    }
    out.standardized = false;
    out.column_means = data.column_means;
    out.column_scales = data.column_scales;
    out.y_mean = data.y_mean;
    return out;
}

/// Linear predictor on the raw scale: y = intercept + x' * coefficients.
struct RawScaleModel
{
    double intercept = 0.0;
    Eigen::VectorXd coefficients;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X_raw) const
    {
        if (X_raw.cols() != coefficients.size()) {
            throw Error(ErrorCode::DimensionMismatch,
                        "expected " + std::to_string(coefficients.size()) + " columns, got " +
                            std::to_string(X_raw.cols()));
        }
        return (X_raw * coefficients).array() + intercept;
    }
};

/// Map dense standardized-scale coefficients back through the dataset's affine map.
inline RawScaleModel to_raw_scale(const Dataset& data, const Eigen::VectorXd& beta_std)
{
    if (beta_std.size() != data.p()) {
        throw Error(ErrorCode::DimensionMismatch, "coefficient length does not match p");
    }
    RawScaleModel m;
    m.coefficients = beta_std.cwiseQuotient(data.column_scales);
    m.intercept = data.y_mean - data.column_means.dot(m.coefficients);
    return m;
}

} // namespace mcv
