#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <mcv/criteria.hpp>
#include <mcv/dataset.hpp>
#include <mcv/error.hpp>
#include <mcv/parallel.hpp>
#include <mcv/refit.hpp>
#include <mcv/solver.hpp>
#include <mcv/splits.hpp>

namespace mcv {

enum class SelectionCriterion { Gamma0, Gamma1, Gamma2, Gamma3, AIC, BIC, EBIC };

inline bool is_information_criterion(SelectionCriterion c)
{
    return c == SelectionCriterion::AIC || c == SelectionCriterion::BIC || c == SelectionCriterion::EBIC;
}

inline CriterionKind to_criterion_kind(SelectionCriterion c)
{
    switch (c) {
        case SelectionCriterion::Gamma0: return CriterionKind::Gamma0;
        case SelectionCriterion::Gamma1: return CriterionKind::Gamma1;
        case SelectionCriterion::Gamma2: return CriterionKind::Gamma2;
        case SelectionCriterion::Gamma3: return CriterionKind::Gamma3;
        default: throw Error(ErrorCode::InvalidMethod, "not a cross-validation criterion");
    }
}

inline InfoKind to_info_kind(SelectionCriterion c)
{
    switch (c) {
        case SelectionCriterion::AIC: return InfoKind::AIC;
        case SelectionCriterion::BIC: return InfoKind::BIC;
        case SelectionCriterion::EBIC: return InfoKind::EBIC;
        default: throw Error(ErrorCode::InvalidMethod, "not an information criterion");
    }
}

inline std::string selection_criterion_name(SelectionCriterion c)
{
    switch (c) {
        case SelectionCriterion::Gamma0: return "Gamma0";
        case SelectionCriterion::Gamma1: return "Gamma1";
        case SelectionCriterion::Gamma2: return "Gamma2";
        case SelectionCriterion::Gamma3: return "Gamma3";
        case SelectionCriterion::AIC: return "AIC";
        case SelectionCriterion::BIC: return "BIC";
        case SelectionCriterion::EBIC: return "EBIC";
    }
    return "?";
}

struct MethodSpec
{
    SelectionCriterion criterion = SelectionCriterion::Gamma1;
    double ebic_gamma = 1.0;
    SplitScheme scheme = SplitScheme::kfold(10);
    PenaltySpec penalty = PenaltySpec::lasso();
    bool refit_final = true;

    /// Modified criteria refit the selected model by least squares; baselines keep the penalized fit.
    static bool default_refit(SelectionCriterion c)
    {
        return c == SelectionCriterion::Gamma1 || c == SelectionCriterion::Gamma2 || c == SelectionCriterion::Gamma3;
    }

    static MethodSpec make(SelectionCriterion c, SplitScheme scheme, PenaltySpec penalty = PenaltySpec::lasso())
    {
        MethodSpec m;
        m.criterion = c;
        m.scheme = scheme;
        m.penalty = penalty;
        m.refit_final = default_refit(c);
        return m;
    }

    void validate() const
    {
        if (penalty.kind == PenaltyKind::ElasticNet &&
            (criterion == SelectionCriterion::Gamma1 || criterion == SelectionCriterion::Gamma2)) {
            throw Error(ErrorCode::InvalidMethod,
                        "the lambda^2 corrections hold for the Lasso only; use Gamma3 with elastic net");
        }
    }
};

struct GridParams
{
    Index L = kDefaultPathLength;
    std::optional<double> ratio;  // default_ratio(n, p) when unset
    SolverOptions solver;
};

struct SelectionResult
{
    SelectionCriterion criterion = SelectionCriterion::Gamma0;
    LambdaGrid grid;
    Index lambda_index = 0;
    double lambda_hat = 0.0;
    IndexSet support_hat;
    Eigen::VectorXd final_coefficients;  // aligned with support_hat, standardized scale
    bool refit_applied = false;
    Eigen::VectorXd criterion_curve;
    std::vector<IndexSet> per_split_supports;
    IndexSet disqualified_lambdas;

    Eigen::VectorXd dense_coefficients(Index p) const
    {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        for (std::size_t k = 0; k < support_hat.size(); ++k) {
            b[support_hat[k]] = final_coefficients[static_cast<Index>(k)];
        }
        return b;
    }
};

/// Per-split construction paths on the shared grid and their evaluated cells.
struct CvAnalysis
{
    SplitPlan plan;
    std::vector<std::vector<SplitEvaluation>> cells;  // [split][lambda]
    std::vector<std::vector<IndexSet>> supports;      // [split][lambda]
};

inline LambdaGrid make_grid(const Dataset& data, const GridParams& params, const PenaltySpec& penalty)
{
    return lambda_grid(data, params.L, params.ratio.value_or(default_ratio(data.n(), data.p())), penalty);
}

inline CvAnalysis analyze_splits(const Dataset& data, const LambdaGrid& grid, SplitPlan plan,
                                 const PenaltySpec& penalty, const SolverOptions& solver, bool with_lse,
                                 std::size_t jobs = 1)
{
    CvAnalysis out;
    const std::size_t b = plan.pairs.size();
    out.cells.resize(b);
    out.supports.resize(b);
    parallel_for(b, jobs, [&](std::size_t r) {
        const auto& pair = plan.pairs[r];
        const Dataset construction = subset_rows(data, pair.construction);
        const Dataset validation = subset_rows(data, pair.validation);
        const SolutionPath path = fit_path(construction, grid, penalty, solver);
        out.cells[r] = evaluate_split(construction, validation, path, with_lse);
        auto& supports = out.supports[r];
        supports.reserve(path.points.size());
        for (const auto& point : path.points) supports.push_back(point.support);
    });
    out.plan = std::move(plan);
    return out;
}

/// Smallest value over qualified columns; ties go to the larger lambda (lower index).
inline Index choose_lambda(const Eigen::VectorXd& curve, const std::vector<bool>& disqualified)
{
    Index best = -1;
    for (Index l = 0; l < curve.size(); ++l) {
        if (disqualified[static_cast<std::size_t>(l)]) continue;
        if (best < 0 || curve[l] < curve[best]) best = l;
    }
    if (best < 0) throw Error(ErrorCode::AllLambdasDisqualified, "no lambda column has enough valid cells");
    return best;
}

/// Final estimator at grid index `index` of the full-data path.
inline void finalize_selection(SelectionResult& result, const Dataset& data, const SolutionPath& full_path,
                               Index index, bool refit_final)
{
    const auto& point = full_path.points[static_cast<std::size_t>(index)];
    result.grid = full_path.grid;
    result.lambda_index = index;
    result.lambda_hat = point.lambda;
    result.support_hat = point.support;
    result.refit_applied = false;
    result.final_coefficients = Eigen::Map<const Eigen::VectorXd>(point.coefficients.data(),
                                                                  static_cast<Index>(point.coefficients.size()));
    if (refit_final) {
        try {
            result.final_coefficients = ols_refit(data, point.support).coefficients;
            result.refit_applied = true;
        } catch (const Error& e) {
            // Keep the penalized coefficients when the selected support cannot be refit.
            if (e.code() != ErrorCode::SingularGram && e.code() != ErrorCode::SupportTooLarge) throw;
        }
    }
}

/// Selection from a precomputed analysis; lets several criteria share one set of split fits.
inline SelectionResult select_from_analysis(const Dataset& data, const SolutionPath& full_path,
                                            const CvAnalysis& analysis, SelectionCriterion criterion,
                                            bool refit_final)
{
    const CriterionSurface surface = build_surface(to_criterion_kind(criterion), analysis.cells);
    SelectionResult result;
    result.criterion = criterion;
    result.criterion_curve = surface.averaged;
    for (std::size_t l = 0; l < surface.disqualified.size(); ++l) {
        if (surface.disqualified[l]) result.disqualified_lambdas.push_back(static_cast<Index>(l));
    }
    const Index index = choose_lambda(surface.averaged, surface.disqualified);
    for (const auto& split : analysis.supports) result.per_split_supports.push_back(split[static_cast<std::size_t>(index)]);
    finalize_selection(result, data, full_path, index, refit_final);
    return result;
}

inline SelectionResult select_by_information(const Dataset& data, const SolutionPath& full_path,
                                             SelectionCriterion criterion, double ebic_gamma, bool refit_final)
{
    const InfoCriterionResult ic = info_criterion(data, full_path, to_info_kind(criterion), ebic_gamma);
    SelectionResult result;
    result.criterion = criterion;
    result.criterion_curve = ic.values;
    for (std::size_t l = 0; l < ic.degenerate.size(); ++l) {
        if (ic.degenerate[l]) result.disqualified_lambdas.push_back(static_cast<Index>(l));
    }
    const Index index = choose_lambda(ic.values, ic.degenerate);
    finalize_selection(result, data, full_path, index, refit_final);
    return result;
}

/**
 * Full selection procedure: full-data path on the grid, construction-set
 * paths on the same grid for each split, validation criteria averaged per
 * lambda, argmin with ties to the larger lambda, then the final estimator
 * on the full-data support at the chosen lambda.
 */
inline SelectionResult run_selection(const Dataset& data, const MethodSpec& method, const GridParams& params,
                                     std::uint64_t seed, std::size_t jobs = 1)
{
    if (!data.standardized) throw Error(ErrorCode::NotStandardized, "run_selection needs standardized data");
    method.validate();
    const LambdaGrid grid = make_grid(data, params, method.penalty);
    const SolutionPath full_path = fit_path(data, grid, method.penalty, params.solver);
    if (is_information_criterion(method.criterion)) {
        return select_by_information(data, full_path, method.criterion, method.ebic_gamma, method.refit_final);
    }
    const CriterionKind kind = to_criterion_kind(method.criterion);
    CvAnalysis analysis = analyze_splits(data, grid, make_plan(data.n(), method.scheme, seed), method.penalty,
                                         params.solver, needs_lse(kind), jobs);
    return select_from_analysis(data, full_path, analysis, method.criterion, method.refit_final);
}

/// Fraction of splits whose selected support contains each variable.
inline Eigen::VectorXd selection_proportions(const std::vector<IndexSet>& supports, Index p)
{
    if (supports.empty()) throw Error(ErrorCode::BadSizes, "selection_proportions needs at least one split");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(p);
    for (const auto& s : supports) {
        for (Index j : s) {
            if (j < 0 || j >= p) throw Error(ErrorCode::InvalidSupport, "support index out of range");
            counts[j] += 1.0;
        }
    }
    return counts / static_cast<double>(supports.size());
}

} // namespace mcv
