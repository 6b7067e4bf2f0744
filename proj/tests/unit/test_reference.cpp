#include "scenarios.hpp"

#include <gtest/gtest.h>

using namespace rodnet;
using namespace rodnet::testing;

TEST(Classical, Circle)
{
    const auto c = reference::classical_constants("circle", {1.0}, 0.0, 1.0);
    EXPECT_NEAR(c.torsion, pi / 2.0, 1e-15);
    EXPECT_NEAR(c.bending2, pi / 2.0, 1e-15);
    EXPECT_NEAR(c.bending3, pi / 2.0, 1e-15);
    EXPECT_EQ(c.young, 2.0);
}

TEST(Classical, SquareSeries)
{
    EXPECT_NEAR(reference::rectangle_torsion_constant(1.0, 1.0), 0.140577176998138910, 1e-6);
    EXPECT_NEAR(reference::classical_constants("rectangle", {1.0, 1.0}, 0.0, 1.0).torsion, 0.140577176998138910, 1e-6);
}

TEST(Classical, RectangleSymmetric)
{
    EXPECT_EQ(reference::rectangle_torsion_constant(2.0, 1.0), reference::rectangle_torsion_constant(1.0, 2.0));
    EXPECT_NEAR(reference::rectangle_torsion_constant(2.0, 1.0), 0.457363516282126724, 1e-6);
}

TEST(Classical, RejectsUnknown)
{
    EXPECT_THROW(reference::classical_constants("hexagon", {1.0}, 0.0, 1.0), ValidationError);
    EXPECT_THROW(reference::classical_constants("circle", {1.0}, 0.0, 0.0), ValidationError);
}

TEST(Linearized, ZeroLoadsGiveZero)
{
    const Network n = planar_star().with_scaled_loads(0.0);
    const auto sol = reference::solve_linearized(n, 16);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < sol.u[i].size(); ++k) {
            EXPECT_EQ(sol.u[i][k].norm(), 0.0);
            EXPECT_EQ(sol.omega[i][k].norm(), 0.0);
        }
}

TEST(Linearized, LinearInLoadScale)
{
    const Network n = planar_star();
    const auto a = reference::solve_linearized(n.with_scaled_loads(1e-2), 16);
    const auto b = reference::solve_linearized(n.with_scaled_loads(3e-2), 16);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < a.u[i].size(); ++k) {
            EXPECT_LT((b.u[i][k] - 3.0 * a.u[i][k]).norm(), 1e-15);
            EXPECT_LT((b.omega[i][k] - 3.0 * a.omega[i][k]).norm(), 1e-15);
        }
}

TEST(Linearized, SymmetricStarKeepsJunctionFixed)
{
    const auto sol = reference::solve_linearized(planar_star().with_scaled_loads(1e-2), 32);
    EXPECT_LT(sol.omega_junction.norm(), 1e-15);
}

TEST(Linearized, ClosesTheNonlinearProblem)
{
    const Network base = planar_star();
    double prev = 0.0;
    for (double eps : {1e-2, 5e-3}) {
        const Network n = base.with_scaled_loads(eps);
        solver::SolverOptions o;
        o.segments = {128};
        o.g_tol = 1e-14;
        o.max_iterations = 50;
        const auto y = post::recover_centerline(solver::solve(n, o).field, n);
        const auto yl = reference::solve_linearized(n, 128).centerline(n);
        double d = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < y[i].size(); ++k)
                d = std::max(d, (y[i][k] - yl[i][k]).norm());
        if (prev > 0.0) {
            EXPECT_GT(prev / d, 3.2);
            EXPECT_LT(prev / d, 4.8);
        }
        prev = d;
    }
}

TEST(Linearized, RequiresMomentBalance)
{
    EXPECT_THROW(reference::solve_linearized(asymmetric_star(), 16), ValidationError);
}

TEST(Integrate, ZeroStrainIsStraight)
{
    const Mat3 R0 = so3::exp_matrix(Vec3(0.2, -0.4, 0.1));
    const auto c = reference::integrate_single_rod(R0, [](double) { return Vec3::Zero(); }, 2.0, 20);
    for (std::size_t k = 0; k < c.R.size(); ++k) {
        EXPECT_TRUE(c.R[k].isApprox(R0, 1e-15));
        EXPECT_LT((c.y[k] - c.x[k] * R0.col(0)).norm(), 1e-14);
    }
}

TEST(Integrate, ConstantCurvatureArc)
{
    const double kappa = 2.0;
    const auto c = reference::integrate_single_rod(Mat3::Identity(), [&](double) { return Vec3(0, 0, kappa); }, 1.0, 200);
    const Vec3 end(std::sin(kappa) / kappa, (1.0 - std::cos(kappa)) / kappa, 0.0);
    EXPECT_LT((c.y.back() - end).norm(), 1e-10);
    EXPECT_TRUE(c.R.back().isApprox(so3::exp_matrix(Vec3(0, 0, kappa)), 1e-12));
}

TEST(Integrate, RecoveredStrainsConvergeQuadratically)
{
    Network n;
    n.rods.emplace_back();
    auto strain = [](double x) { return Vec3(0.5 + x, std::sin(2.0 * x), -0.3 * x * x); };
    auto error = [&](int N) {
        const auto c = reference::integrate_single_rod(Mat3::Identity(), strain, 1.0, N);
        solver::RotationField f(n, {N});
        for (int k = 1; k <= N; ++k)
            f.set_node(0, k, Quat(c.R[static_cast<std::size_t>(k)]));
        const auto s = solver::strains(f, n);
        double e = 0.0;
        for (int k = 0; k < N; ++k) {
            const double xm = (k + 0.5) / N;
            const Vec3 spatial = c.R[static_cast<std::size_t>(k)] * s[0][static_cast<std::size_t>(k)];
            e = std::max(e, (spatial - strain(xm)).norm());
        }
        return e;
    };
    const double r = error(32) / error(64);
    EXPECT_GT(r, 3.2);
    EXPECT_LT(r, 4.8);
}
