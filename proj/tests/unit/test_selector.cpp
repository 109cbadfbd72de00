#include <gtest/gtest.h>

#include <mcv/methods.hpp>
#include <mcv/selector.hpp>
#include <mcv/simgen.hpp>

#include "test_support.hpp"

using namespace mcv;

TEST(ChooseLambda, TiesGoToTheLargerLambda)
{
    const Eigen::Vector4d curve(0.5, 0.2, 0.2, 0.3);
    EXPECT_EQ(choose_lambda(curve, {false, false, false, false}), 1);
    EXPECT_EQ(choose_lambda(curve, {false, true, false, false}), 2);
    try {
        choose_lambda(curve, {true, true, true, true});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllLambdasDisqualified);
    }
}

TEST(SelectionProportions, Examples)
{
    const std::vector<IndexSet> supports{{0, 1}, {0, 1}, {0, 2}, {0, 1}};
    const Eigen::VectorXd prop = selection_proportions(supports, 4);
    EXPECT_DOUBLE_EQ(prop[0], 1.0);
    EXPECT_DOUBLE_EQ(prop[1], 0.75);
    EXPECT_DOUBLE_EQ(prop[2], 0.25);
    EXPECT_DOUBLE_EQ(prop[3], 0.0);
    EXPECT_THROW(selection_proportions({}, 4), Error);
    EXPECT_THROW(selection_proportions({{5}}, 4), Error);
}

TEST(MethodSpec, ElasticNetRejectsLassoCorrections)
{
    for (auto c : {SelectionCriterion::Gamma1, SelectionCriterion::Gamma2}) {
        const MethodSpec m = MethodSpec::make(c, SplitScheme::kfold(5), PenaltySpec::elastic_net(0.5));
        try {
            m.validate();
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidMethod);
        }
    }
    EXPECT_NO_THROW(MethodSpec::make(SelectionCriterion::Gamma3, SplitScheme::kfold(5), PenaltySpec::elastic_net(0.5))
                        .validate());
}

TEST(RunSelection, RequiresStandardizedData)
{
    const Dataset raw = Dataset::raw(fixtures::gaussian_matrix(30, 5, 1), Eigen::VectorXd::LinSpaced(30, 0, 1));
    EXPECT_THROW(run_selection(raw, MethodSpec::make(SelectionCriterion::Gamma0, SplitScheme::kfold(5)), {}, 1),
                 Error);
}

TEST(RunSelection, DeterministicAndIndependentOfThreadCount)
{
    const Dataset d = fixtures::random_problem(120, 80, 0.3, 5, 4);
    const MethodSpec m = MethodSpec::make(SelectionCriterion::Gamma1, SplitScheme::monte_carlo(70, 12));
    GridParams g;
    g.L = 40;
    const SelectionResult a = run_selection(d, m, g, 77, 1);
    const SelectionResult b = run_selection(d, m, g, 77, 4);
    EXPECT_EQ(a.lambda_index, b.lambda_index);
    EXPECT_EQ(a.lambda_hat, b.lambda_hat);
    EXPECT_EQ(a.support_hat, b.support_hat);
    EXPECT_EQ(a.per_split_supports, b.per_split_supports);
    EXPECT_EQ(a.final_coefficients, b.final_coefficients);
    for (Index l = 0; l < a.criterion_curve.size(); ++l) {
        if (std::isnan(a.criterion_curve[l])) {
            EXPECT_TRUE(std::isnan(b.criterion_curve[l]));
        } else {
            EXPECT_EQ(a.criterion_curve[l], b.criterion_curve[l]);
        }
    }
}

TEST(RunSelection, ModifiedCurveLiesBelowGamma0)
{
    const Dataset d = fixtures::random_problem(100, 60, 0.0, 15, 4);
    const LambdaGrid grid = lambda_grid(d, 30, 0.01);
    const SolutionPath full = fit_path(d, grid, PenaltySpec::lasso());
    const CvAnalysis a = analyze_splits(d, grid, make_mccv(100, 60, 10, 3), PenaltySpec::lasso(), {}, true);
    const auto g0 = build_surface(CriterionKind::Gamma0, a.cells);
    const auto g2 = build_surface(CriterionKind::Gamma2, a.cells);
    for (Index l = 0; l < g0.averaged.size(); ++l) {
        if (g0.disqualified[static_cast<std::size_t>(l)]) continue;
        EXPECT_LE(g2.averaged[l], g0.averaged[l] + 1e-15);
    }
    const SelectionResult r = select_from_analysis(d, full, a, SelectionCriterion::Gamma2, true);
    EXPECT_EQ(r.per_split_supports.size(), 10u);
    EXPECT_EQ(r.support_hat, full.points[static_cast<std::size_t>(r.lambda_index)].support);
}

TEST(RunSelection, FinalRefitIsLeastSquaresOnSelectedSupport)
{
    const Dataset d = fixtures::random_problem(150, 40, 0.0, 9, 3);
    GridParams g;
    g.L = 40;
    const SelectionResult r = run_selection(d, MethodSpec::make(SelectionCriterion::Gamma2, SplitScheme::kfold(5)), g, 4);
    ASSERT_TRUE(r.refit_applied);
    ASSERT_FALSE(r.support_hat.empty());
    const Eigen::VectorXd resid = d.y - d.X * r.dense_coefficients(40);
    for (Index j : r.support_hat) EXPECT_NEAR(d.X.col(j).dot(resid), 0.0, 1e-9);

    const SelectionResult k = run_selection(d, MethodSpec::make(SelectionCriterion::Gamma0, SplitScheme::kfold(5)), g, 4);
    EXPECT_FALSE(k.refit_applied);
}

TEST(RunSelection, InformationCriteriaUseFullPath)
{
    const Dataset d = fixtures::random_problem(100, 200, 0.0, 2, 3);
    GridParams g;
    g.L = 50;
    MethodSpec ebic = MethodSpec::make(SelectionCriterion::EBIC, SplitScheme::kfold(10));
    MethodSpec aic = MethodSpec::make(SelectionCriterion::AIC, SplitScheme::kfold(10));
    const SelectionResult re = run_selection(d, ebic, g, 1);
    const SelectionResult ra = run_selection(d, aic, g, 1);
    EXPECT_TRUE(re.per_split_supports.empty());
    EXPECT_LE(re.support_hat.size(), ra.support_hat.size());
    const auto ic = info_criterion(d, fit_path(d, re.grid, PenaltySpec::lasso()), InfoKind::EBIC);
    Index argmin = 0;
    for (Index l = 1; l < ic.values.size(); ++l) {
        if (ic.values[l] < ic.values[argmin]) argmin = l;
    }
    EXPECT_EQ(re.lambda_index, argmin);
}

TEST(RunSelection, KFoldOverSelectsRelativeToExactCorrection)
{
    // One independent-design Ex1 replication: Gamma0 10-fold against Gamma1 Monte Carlo.
    const TrueModel truth = standard_betas(SignalExample::Ex1, 1000, false, 0);
    const Dataset d = standardize(sample_dataset(300, truth, CovSpec::independent(), 2024));
    const MethodParams params;
    const SelectionResult em = run_selection(d, build_method(find_method("em-MCCV"), 300, params), {}, 7, 0);
    const SelectionResult kf = run_selection(d, build_method(find_method("K-fold"), 300, params), {}, 7, 0);
    EXPECT_GT(kf.support_hat.size(), em.support_hat.size());
    EXPECT_EQ(support_metrics(em.support_hat, truth).fn, 0);
}

TEST(RunSelection, PureNoiseSelectsAlmostNothing)
{
    // With beta = 0 the exactly corrected Monte Carlo criterion should
    // return an empty or single-variable model in nearly every replication.
    const Index n = 300, p = 50;
    const TrueModel truth = TrueModel::from_beta(Eigen::VectorXd::Zero(p));
    const MethodSpec m = build_method(find_method("em-MCCV"), n, MethodParams{});
    const GridParams g;
    int small = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const Dataset d = standardize(sample_dataset(n, truth, CovSpec::independent(), 5000 + s));
        if (run_selection(d, m, g, static_cast<std::uint64_t>(s), 0).support_hat.size() <= 1) ++small;
    }
    EXPECT_GE(small, 95);
}
