#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <mcv/dataset.hpp>
#include <mcv/error.hpp>
#include <mcv/refit.hpp>
#include <mcv/selector.hpp>

namespace mcv {

struct TrueModel
{
    Eigen::VectorXd beta;
    IndexSet oracle;
    Index d0 = 0;
    double sigma = 1.0;

    static TrueModel from_beta(Eigen::VectorXd beta, double sigma = 1.0)
    {
        TrueModel t;
        for (Index j = 0; j < beta.size(); ++j) {
            if (beta[j] != 0.0) t.oracle.push_back(j);
        }
        t.d0 = static_cast<Index>(t.oracle.size());
        t.beta = std::move(beta);
        t.sigma = sigma;
        return t;
    }
};

enum class CovKind { Independent, ExpDecay, EqualCorr };

struct CovSpec
{
    CovKind kind = CovKind::Independent;
    double rho = 0.0;

    static CovSpec independent() { return {}; }
    static CovSpec exp_decay(double rho) { return {CovKind::ExpDecay, rho}; }
    static CovSpec equal_corr(double rho) { return {CovKind::EqualCorr, rho}; }

    bool operator==(const CovSpec&) const = default;
};

inline Eigen::MatrixXd covariance_matrix(Index p, const CovSpec& spec)
{
    if (p < 1) throw Error(ErrorCode::BadSizes, "covariance needs p >= 1");
    if (spec.kind != CovKind::Independent && !(spec.rho >= 0.0 && spec.rho < 1.0)) {
        throw Error(ErrorCode::NotPositiveDefinite, "rho must lie in [0, 1)");
    }
    Eigen::MatrixXd S(p, p);
    for (Index j = 0; j < p; ++j) {
        for (Index k = 0; k < p; ++k) {
            switch (spec.kind) {
                case CovKind::Independent: S(j, k) = j == k ? 1.0 : 0.0; break;
                case CovKind::ExpDecay: S(j, k) = std::pow(spec.rho, static_cast<double>(std::abs(j - k))); break;
                case CovKind::EqualCorr: S(j, k) = j == k ? 1.0 : spec.rho; break;
            }
        }
    }
    return S;
}

/// Lower-triangular F with F F' = Sigma.
inline Eigen::MatrixXd make_covariance(Index p, const CovSpec& spec)
{
    if (spec.kind == CovKind::Independent) {
        if (p < 1) throw Error(ErrorCode::BadSizes, "covariance needs p >= 1");
        return Eigen::MatrixXd::Identity(p, p);
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(covariance_matrix(p, spec));
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky failed");
    return llt.matrixL();
}

/// n rows x_i = F z_i with z standard normal, y = X beta + sigma * eps.
inline Dataset sample_dataset(Index n, const TrueModel& truth, const Eigen::MatrixXd& factor, const CovSpec& spec,
                              std::uint64_t seed)
{
    const Index p = truth.beta.size();
    if (n < 2) throw Error(ErrorCode::BadSizes, "sample_dataset needs n >= 2");
    if (factor.rows() != p || factor.cols() != p) throw Error(ErrorCode::DimensionMismatch, "factor is not p x p");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd Z(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
    }
    Eigen::VectorXd eps(n);
    for (Index i = 0; i < n; ++i) eps[i] = normal(rng);

    Eigen::MatrixXd X;
    if (spec.kind == CovKind::Independent) {
        X = std::move(Z);
    } else {
        X = Z * factor.triangularView<Eigen::Lower>().transpose();
    }
    Eigen::VectorXd y = X * truth.beta + truth.sigma * eps;
    return Dataset::raw(std::move(X), std::move(y));
}

inline Dataset sample_dataset(Index n, const TrueModel& truth, const CovSpec& spec, std::uint64_t seed)
{
    return sample_dataset(n, truth, make_covariance(truth.beta.size(), spec), spec, seed);
}

enum class SignalExample { Ex1, Ex2 };

/**
 * Ex1: leading coordinates (4, 3, 2, 0, 0, -4, 3, -2).
 * Ex2: three signals (1.2, 0.8, 0.4).
 * With random_position the nonzero values are placed at distinct positions
 * drawn uniformly from all p coordinates (in the listed order).
 */
inline TrueModel standard_betas(SignalExample example, Index p, bool random_position, std::uint64_t seed)
{
    if (p < 8) throw Error(ErrorCode::BadSizes, "standard designs need p >= 8");
    const std::vector<double> ex1{4, 3, 2, 0, 0, -4, 3, -2};
    const std::vector<double> ex2{1.2, 0.8, 0.4};
    const auto& lead = example == SignalExample::Ex1 ? ex1 : ex2;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (!random_position) {
        for (std::size_t k = 0; k < lead.size(); ++k) beta[static_cast<Index>(k)] = lead[k];
    } else {
        std::vector<double> values;
        for (double v : lead) {
            if (v != 0.0) values.push_back(v);
        }
        IndexSet pool(static_cast<std::size_t>(p));
        std::iota(pool.begin(), pool.end(), Index{0});
        std::mt19937_64 rng(seed);
        for (std::size_t k = 0; k < values.size(); ++k) {
            std::uniform_int_distribution<Index> pick(static_cast<Index>(k), p - 1);
            std::swap(pool[k], pool[static_cast<std::size_t>(pick(rng))]);
            beta[pool[k]] = values[k];
        }
    }
    return TrueModel::from_beta(std::move(beta), 1.0);
}

struct Metrics
{
    Index fn = 0;
    Index fp = 0;
    double pe = 0.0;
    Index model_size = 0;
};

inline Metrics support_metrics(const IndexSet& selected, const TrueModel& truth)
{
    Metrics m;
    Index hits = 0;
    for (Index j : selected) {
        if (std::binary_search(truth.oracle.begin(), truth.oracle.end(), j)) ++hits;
    }
    m.model_size = static_cast<Index>(selected.size());
    m.fn = truth.d0 - hits;
    m.fp = m.model_size - hits;
    return m;
}

/// FN/FP against the oracle and mean squared prediction error on raw-scale `test`.
inline Metrics evaluate(const SelectionResult& result, const TrueModel& truth, const Dataset& train,
                        const Dataset& test)
{
    Metrics m = support_metrics(result.support_hat, truth);
    const RawScaleModel model = to_raw_scale(train, result.dense_coefficients(train.p()));
    m.pe = (test.y - model.predict(test.X)).squaredNorm() / static_cast<double>(test.n());
    return m;
}

} // namespace mcv
