#include <sgkron/pcg.hpp>
#include <sgkron/precond.hpp>
#include <sgkron/truncation.hpp>

#include <gtest/gtest.h>

using namespace sgkron;

namespace {

KroneckerSumOperator identity_operator(std::size_t ny, std::size_t nx)
{
    auto I = std::make_shared<const SparseSymMatrix>(
        SparseSymMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nx)).sparseView()));
    return {{{GramMatrix::identity(ny), I, "I"}}, ny, nx};
}

int iterations(const SgProblem& p, const Preconditioner& P) { return pcg_solve(p.A, P, p.f).report.iterations; }

} // namespace

TEST(Pcg, IdentityProblemTakesOneIteration)
{
    const auto A = identity_operator(3, 4);
    const auto P = build_mean_based(factor_spd(*A.terms()[0].K), 3);
    const Vector f = Vector::LinSpaced(12, -1.0, 2.0);
    const auto res = pcg_solve(A, *P, f);
    EXPECT_EQ(res.report.iterations, 1);
    EXPECT_TRUE(res.report.converged);
    EXPECT_LT((res.u - f).norm(), 1e-14);
    EXPECT_NEAR(estimate_condition(res.report), 1.0, 1e-12);
}

TEST(Pcg, ZeroRightHandSide)
{
    const auto A = identity_operator(2, 2);
    const auto P = build_mean_based(factor_spd(*A.terms()[0].K), 2);
    const auto res = pcg_solve(A, *P, Vector::Zero(4));
    EXPECT_EQ(res.report.iterations, 0);
    EXPECT_TRUE(res.report.converged);
    EXPECT_EQ(res.u, Vector::Zero(4));
    EXPECT_THROW((void)estimate_condition(res.report), Unavailable);
}

TEST(Pcg, IndefiniteOperatorBreaksDown)
{
    auto K = std::make_shared<const SparseSymMatrix>(
        SparseSymMatrix(Eigen::MatrixXd(Eigen::Vector2d(1.0, -1.0).asDiagonal()).sparseView()));
    const KroneckerSumOperator A({{GramMatrix::identity(1), K, "indefinite"}}, 1, 2);
    const auto P = build_mean_based(factor_spd(SparseSymMatrix(Eigen::MatrixXd::Identity(2, 2).sparseView())), 1);
    EXPECT_THROW((void)pcg_solve(A, *P, Vector::Ones(2)), Breakdown);
}

TEST(Pcg, ValidatesArguments)
{
    const auto A = identity_operator(2, 2);
    const auto P = build_mean_based(factor_spd(*A.terms()[0].K), 2);
    EXPECT_THROW((void)pcg_solve(A, *P, Vector::Ones(3)), InvalidArgument);
    SolverConfig bad;
    bad.tol = 0.0;
    EXPECT_THROW((void)pcg_solve(A, *P, Vector::Ones(4), bad), InvalidArgument);
}

TEST(Pcg, ResidualHistoryMatchesTrueResidual)
{
    const auto p = build_affine_system(build_mesh(3), 4, 3, 2.0);
    const auto P = build_mean_based(factor_spd(*p.K0), p.A.ny());
    const auto res = pcg_solve(p.A, *P, p.f);
    ASSERT_TRUE(res.report.converged);
    EXPECT_EQ(res.report.residual_history.size(), static_cast<std::size_t>(res.report.iterations) + 1);
    EXPECT_DOUBLE_EQ(res.report.residual_history.front(), 1.0);
    const double true_rel = (p.f - p.A.matvec(res.u)).norm() / p.f.norm();
    EXPECT_LE(true_rel, 1e-6 * 1.01);
    EXPECT_NEAR(true_rel, res.report.final_relres(), 1e-9);
    for (std::size_t i = 0; i + 1 < res.report.residual_history.size(); ++i)
        EXPECT_GT(res.report.residual_history[i], 0.0);
}

TEST(Pcg, PreconditionedStoppingNorm)
{
    const auto p = build_affine_system(build_mesh(3), 4, 2, 2.0);
    const auto P = build_mean_based(factor_spd(*p.K0), p.A.ny());
    SolverConfig cfg;
    cfg.norm = StoppingNorm::Preconditioned;
    const auto res = pcg_solve(p.A, *P, p.f, cfg);
    EXPECT_TRUE(res.report.converged);
    EXPECT_LE(res.report.final_relres(), 1e-6);
}

TEST(Pcg, MaxIterationsReportsNonConvergence)
{
    const auto p = build_affine_system(build_mesh(3), 4, 3, 2.0);
    const auto P = build_mean_based(factor_spd(*p.K0), p.A.ny());
    SolverConfig cfg;
    cfg.max_iter = 2;
    const auto res = pcg_solve(p.A, *P, p.f, cfg);
    EXPECT_FALSE(res.report.converged);
    EXPECT_EQ(res.report.iterations, 2);
}

TEST(ConditionEstimate, ExactPreconditionerGivesOne)
{
    const auto p = build_affine_system(build_mesh(3), 2, 2, 4.0);
    const auto P = build_truncation(p, 2, factor_spd(*p.K0), TruncationBackend::Dense);
    const auto res = pcg_solve(p.A, *P, p.f);
    EXPECT_NEAR(estimate_condition(res.report), 1.0, 1e-6);
}

TEST(ConditionEstimate, WithinTenPercentOfTheDenseValue)
{
    const auto p = build_affine_system(build_mesh(3), 3, 3, 2.0);
    const auto P = build_mean_based(factor_spd(*p.K0), p.A.ny());
    SolverConfig cfg;
    cfg.tol = 1e-12;
    const auto res = pcg_solve(p.A, *P, p.f, cfg);
    const Eigen::MatrixXd A = assemble_dense(p.A);
    const Eigen::MatrixXd P0 = assemble_dense(p.truncation(0));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, P0, Eigen::EigenvaluesOnly);
    const double kappa = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
    EXPECT_NEAR(estimate_condition(res.report), kappa, 0.1 * kappa);
}

// Single cells of the published iteration-count tables, at the published sizes.

TEST(PublishedCounts, TruncationOneFastDecayDegreeFour)
{
    const auto p = build_affine_system(build_mesh(4), 8, 4, 4.0);
    EXPECT_EQ(iterations(p, *build_truncation(p, 1, factor_spd(*p.K0))), 6);
}

TEST(PublishedCounts, MeanBasedSlowDecayDegreeFour)
{
    const auto p = build_affine_system(build_mesh(4), 8, 4, 2.0);
    EXPECT_EQ(iterations(p, *build_mean_based(factor_spd(*p.K0), p.A.ny())), 15);
}

TEST(PublishedCounts, SbgsTwoSlowDecayDegreeThree)
{
    const auto p = build_affine_system(build_mesh(4), 8, 3, 2.0);
    EXPECT_EQ(iterations(p, *build_sbgs(p, 2, factor_spd(*p.K0))), 7);
}

TEST(PublishedCounts, LognormalSbgsOneDegreeTwo)
{
    const auto p = build_lognormal_system(build_mesh(4), 6, 2, 20, 2.0, 0.547);
    EXPECT_EQ(iterations(p, *build_sbgs(p, 1, factor_spd(*p.K0))), 8);
}
