#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <mcv/dataset.hpp>
#include <mcv/error.hpp>
#include <mcv/refit.hpp>
#include <mcv/solver.hpp>

namespace mcv {

enum class CriterionKind { Gamma0, Gamma1, Gamma2, Gamma3 };

inline std::string criterion_name(CriterionKind kind)
{
    switch (kind) {
        case CriterionKind::Gamma0: return "Gamma0";
        case CriterionKind::Gamma1: return "Gamma1";
        case CriterionKind::Gamma2: return "Gamma2";
        case CriterionKind::Gamma3: return "Gamma3";
    }
    return "?";
}

/// Criteria that need the least-squares refit on the construction support.
inline bool needs_lse(CriterionKind kind) { return kind == CriterionKind::Gamma1 || kind == CriterionKind::Gamma3; }

/**
 * Everything measured for one (split, lambda) cell.
 *
 * `mse` is the validation error of the construction-set Lasso fit,
 * `correction_exact` the shrinkage-bias term (lambda^2 n_c^2 / n_v) M'M,
 * `lse_mse` the validation error of the construction-set least-squares refit,
 * and `lse_gap` = ||y_hat - y_tilde||^2 / n_v computed directly from the two
 * predictions. `valid` covers every criterion; `lse_valid` additionally
 * requires a well-conditioned construction Gram.
 */
struct SplitEvaluation
{
    double lambda = 0.0;
    double mse = 0.0;
    Index d = 0;
    double correction_exact = 0.0;
    double lse_mse = 0.0;
    double lse_gap = 0.0;
    bool valid = false;
    bool lse_valid = false;
};

inline double gamma0(const Eigen::VectorXd& y_s, const Eigen::VectorXd& y_hat)
{
    if (y_s.size() != y_hat.size()) throw Error(ErrorCode::LengthMismatch, "gamma0: length mismatch");
    if (y_s.size() == 0) throw Error(ErrorCode::LengthMismatch, "gamma0: empty validation set");
    return (y_s - y_hat).squaredNorm() / static_cast<double>(y_s.size());
}

inline double gamma2(double mse, double lambda, Index d) { return mse - lambda * lambda * static_cast<double>(d); }

inline double gamma3(const Eigen::VectorXd& y_s, const Eigen::VectorXd& y_tilde) { return gamma0(y_s, y_tilde); }

inline Eigen::VectorXd lasso_predict(const Eigen::MatrixXd& X_rows, const PathPoint& point)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X_rows.rows());
    for (std::size_t k = 0; k < point.support.size(); ++k) {
        out.noalias() += point.coefficients[k] * X_rows.col(point.support[k]);
    }
    return out;
}

/// M = X_{s,S} (X_{c,S}'X_{c,S})^{-1} sgn for a factored construction support.
inline Eigen::VectorXd emcc_direction(const SupportFactor& construction_factor, const Eigen::MatrixXd& X_validation,
                                      const PathPoint& point)
{
    const Eigen::VectorXd g = construction_factor.solve_gram(point.sign_vector());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(X_validation.rows());
    for (std::size_t k = 0; k < point.support.size(); ++k) {
        m.noalias() += g[static_cast<Index>(k)] * X_validation.col(point.support[k]);
    }
    return m;
}

inline double emcc_correction(double lambda, Index n_c, Index n_v, const Eigen::VectorXd& M)
{
    const double nc = static_cast<double>(n_c);
    return lambda * lambda * nc * nc / static_cast<double>(n_v) * M.squaredNorm();
}

/**
 * Exactly modified criterion for one cell: Gamma0 minus the shrinkage-bias
 * correction. Throws SingularGram / SupportTooLarge when the construction
 * Gram on the support cannot be inverted.
 */
inline double gamma1(const Dataset& construction, const Dataset& validation, const PathPoint& point, double lambda,
                     Index n_c, Index n_v)
{
    const double g0 = gamma0(validation.y, lasso_predict(validation.X, point));
    if (point.support.empty()) return g0;
    SupportFactor factor(construction.X, point.support);
    if (!factor.well_conditioned()) throw Error(ErrorCode::SingularGram, "construction Gram is singular");
    return g0 - emcc_correction(lambda, n_c, n_v, emcc_direction(factor, validation.X, point));
}

/**
 * Evaluate every lambda of a construction-set path on its validation rows.
 * When `with_lse` is false the refit quantities are skipped and lse_valid is
 * left false. Factorizations are reused while the support does not change.
 */
inline std::vector<SplitEvaluation> evaluate_split(const Dataset& construction, const Dataset& validation,
                                                   const SolutionPath& path, bool with_lse)
{
    const Index n_c = construction.n();
    const Index n_v = validation.n();
    std::vector<SplitEvaluation> out;
    out.reserve(path.points.size());

    std::optional<SupportFactor> factor;
    IndexSet factored_support;
    Eigen::VectorXd y_tilde;
    bool factor_ok = false;

    for (const auto& point : path.points) {
        SplitEvaluation e;
        e.lambda = point.lambda;
        e.d = point.model_size();
        const Eigen::VectorXd y_hat = lasso_predict(validation.X, point);
        e.mse = gamma0(validation.y, y_hat);
        e.valid = point.converged && e.d < n_c;

        if (with_lse && e.valid) {
            if (e.d == 0) {
                e.lse_mse = validation.y.squaredNorm() / static_cast<double>(n_v);
                e.lse_gap = 0.0;  // both predictors are zero
                e.correction_exact = 0.0;
                e.lse_valid = true;
            } else {
                if (!factor || factored_support != point.support) {
                    factor.emplace(construction.X, point.support);
                    factored_support = point.support;
                    factor_ok = factor->well_conditioned();
                    if (factor_ok) {
                        const Eigen::VectorXd beta_tilde = factor->least_squares(construction.y);
                        y_tilde = Eigen::VectorXd::Zero(n_v);
                        for (std::size_t k = 0; k < point.support.size(); ++k) {
                            y_tilde.noalias() += beta_tilde[static_cast<Index>(k)] * validation.X.col(point.support[k]);
                        }
                    }
                }
                if (factor_ok) {
                    e.lse_mse = gamma3(validation.y, y_tilde);
                    e.lse_gap = (y_hat - y_tilde).squaredNorm() / static_cast<double>(n_v);
                    e.correction_exact = emcc_correction(point.lambda, n_c, n_v,
                                                         emcc_direction(*factor, validation.X, point));
                    e.lse_valid = true;
                }
            }
        }
        out.push_back(e);
    }
    return out;
}

inline bool cell_valid(const SplitEvaluation& e, CriterionKind kind)
{
    return needs_lse(kind) ? (e.valid && e.lse_valid) : e.valid;
}

inline double cell_value(const SplitEvaluation& e, CriterionKind kind)
{
    switch (kind) {
        case CriterionKind::Gamma0: return e.mse;
        case CriterionKind::Gamma1: return e.mse - e.correction_exact;
        case CriterionKind::Gamma2: return gamma2(e.mse, e.lambda, e.d);
        case CriterionKind::Gamma3: return e.lse_mse;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct CriterionSurface
{
    CriterionKind kind = CriterionKind::Gamma0;
    Eigen::MatrixXd values;  // b x L, NaN where invalid
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
    Eigen::VectorXd averaged;  // NaN where disqualified
    std::vector<bool> disqualified;

    Index splits() const { return values.rows(); }
    Index columns() const { return values.cols(); }
};

/// Average each lambda column over its valid cells; a column with fewer than
/// ceil(b/2) valid cells is disqualified.
inline CriterionSurface build_surface(CriterionKind kind, const std::vector<std::vector<SplitEvaluation>>& cells)
{
    CriterionSurface s;
    s.kind = kind;
    const Index b = static_cast<Index>(cells.size());
    const Index L = b > 0 ? static_cast<Index>(cells.front().size()) : 0;
    s.values = Eigen::MatrixXd::Constant(b, L, std::numeric_limits<double>::quiet_NaN());
    s.valid = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(b, L, false);
    s.averaged = Eigen::VectorXd::Constant(L, std::numeric_limits<double>::quiet_NaN());
    s.disqualified.assign(static_cast<std::size_t>(L), true);
    const Index needed = (b + 1) / 2;

    for (Index r = 0; r < b; ++r) {
        if (static_cast<Index>(cells[static_cast<std::size_t>(r)].size()) != L) {
            throw Error(ErrorCode::LengthMismatch, "split evaluations have different lengths");
        }
        for (Index l = 0; l < L; ++l) {
            const auto& e = cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)];
            if (cell_valid(e, kind)) {
                s.valid(r, l) = true;
                s.values(r, l) = cell_value(e, kind);
            }
        }
    }
    for (Index l = 0; l < L; ++l) {
        Index count = 0;
        double sum = 0.0;
        for (Index r = 0; r < b; ++r) {
            if (s.valid(r, l)) {
                ++count;
                sum += s.values(r, l);
            }
        }
        if (count >= needed && count > 0) {
            s.averaged[l] = sum / static_cast<double>(count);
            s.disqualified[static_cast<std::size_t>(l)] = false;
        }
    }
    return s;
}

/// CSV: one row per split, one column per lambda, blank where invalid.
inline void write_surface_csv(std::ostream& os, const CriterionSurface& s, const LambdaGrid& grid)
{
    os.precision(17);
    os << "split";
    for (double lambda : grid.values) os << ',' << lambda;
    os << '\n';
    for (Index r = 0; r < s.splits(); ++r) {
        os << r;
        for (Index l = 0; l < s.columns(); ++l) {
            os << ',';
            if (s.valid(r, l)) os << s.values(r, l);
        }
        os << '\n';
    }
}

enum class InfoKind { AIC, BIC, EBIC };

struct InfoCriterionResult
{
    Eigen::VectorXd values;
    std::vector<bool> degenerate;  // RSS == 0, value is -inf
};

/// Profile Gaussian criterion for one model; RSS = 0 maps to -inf.
inline double info_criterion_value(Index n, Index p, double rss, Index d, InfoKind kind, double ebic_gamma = 1.0)
{
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    double penalty = 0.0;
    switch (kind) {
        case InfoKind::AIC: penalty = 2.0 * dd; break;
        case InfoKind::BIC: penalty = dd * std::log(nn); break;
        case InfoKind::EBIC: penalty = dd * std::log(nn) + 2.0 * ebic_gamma * dd * std::log(static_cast<double>(p)); break;
    }
    if (rss <= 0.0) return -std::numeric_limits<double>::infinity();
    return nn * std::log(rss / nn) + penalty;
}

/**
 * n log(RSS/n) + penalty(d) along a full-data path, with RSS from the
 * penalized fit and d the support size:
 * AIC: 2d; BIC: d log n; EBIC: d log n + 2 gamma d log p.
 */
inline InfoCriterionResult info_criterion(const Dataset& data, const SolutionPath& path, InfoKind kind,
                                          double ebic_gamma = 1.0)
{
    InfoCriterionResult out;
    out.values.resize(static_cast<Index>(path.points.size()));
    out.degenerate.assign(path.points.size(), false);
    for (std::size_t l = 0; l < path.points.size(); ++l) {
        const auto& point = path.points[l];
        const double rss = (data.y - lasso_predict(data.X, point)).squaredNorm();
        out.values[static_cast<Index>(l)] =
            info_criterion_value(data.n(), data.p(), rss, point.model_size(), kind, ebic_gamma);
        out.degenerate[l] = rss <= 0.0;
    }
    return out;
}

} // namespace mcv
