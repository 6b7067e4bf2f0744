#include "scenarios.hpp"

#include <gtest/gtest.h>

using namespace rodnet;
using namespace rodnet::solver;
using namespace rodnet::testing;

namespace {

Network single_rod(const Mat3 &H = Mat3::Identity(), double L = 1.0)
{
    Network n;
    RodSpec r;
    r.length = L;
    r.H = H;
    n.rods = {r};
    return n;
}

RotationField constant_rotation_rate(const Network &n, int N, const Vec3 &s)
{
    RotationField f(n, {N});
    const double h = n.rods[0].length / N;
    for (int k = 1; k <= N; ++k)
        f.set_node(0, k, so3::exp(s * (k * h)));
    return f;
}

post::EquilibriumReport converged_star(int N)
{
    const Network n = asymmetric_star();
    SolverOptions o;
    o.segments = {N};
    o.g_tol = 1e-12;
    const SolveResult r = solve(n, o);
    EXPECT_TRUE(r.converged()) << r.trace.message;
    return post::residuals(r.field, n);
}

} // namespace

TEST(Centerline, StraightRodAnchoredAtEnd)
{
    const Network n = single_rod();
    const auto y = post::recover_centerline(RotationField(n, {8}), n);
    for (int k = 0; k <= 8; ++k)
        EXPECT_LT((y[0][static_cast<std::size_t>(k)] - Vec3(k / 8.0 - 1.0, 0, 0)).norm(), 1e-15);
}

TEST(Centerline, ConstantCurvatureChord)
{
    const Network n = single_rod();
    const double kappa = 2.0;
    const auto y = post::recover_centerline(constant_rotation_rate(n, 16, Vec3(0, 0, kappa)), n);
    EXPECT_NEAR((y[0].back() - y[0].front()).norm(), 0.841470984807896507, 1e-10);
    for (const Vec3 &p : y[0])
        EXPECT_NEAR(p.z(), 0.0, 1e-15);
}

TEST(Centerline, SegmentsNeverStretch)
{
    const Network n = asymmetric_star();
    const RotationField f = random_field(n, 12, 17, 0.5);
    const auto y = post::recover_centerline(f, n);
    for (std::size_t i = 0; i < 3; ++i) {
        const double h = n.rods[i].length / 12;
        for (std::size_t k = 0; k + 1 < y[i].size(); ++k) {
            const double d = (y[i][k + 1] - y[i][k]).norm();
            EXPECT_LE(d, h * (1.0 + 1e-15));
            const double bend = so3::log(f.node(i, static_cast<int>(k)).conjugate() * f.node(i, static_cast<int>(k) + 1)).tail<2>().norm();
            if (bend > 1e-6)
                EXPECT_LT(d, h);
        }
    }
    EXPECT_LT(y[0].back().norm(), 1e-15);
}

TEST(Centerline, RodsShareJunctionPosition)
{
    const Network n = asymmetric_star();
    const auto y = post::recover_centerline(random_field(n, 9, 4, 0.3), n);
    EXPECT_LT((y[1][0] - y[0][0]).norm(), 1e-15);
    EXPECT_LT((y[2][0] - y[0][0]).norm(), 1e-15);
}

TEST(Contact, ZeroStrainZeroCouple)
{
    const Network n = asymmetric_star().with_scaled_loads(0.0);
    for (const auto &c : post::contact_fields(RotationField(n, {6, 6, 6}), n))
        for (const Vec3 &q : c.couple)
            EXPECT_EQ(q.norm(), 0.0);
}

TEST(Contact, UniformTwistCoupleNorm)
{
    const Network n = single_rod(Vec3(0.7, 1.3, 2.0).asDiagonal());
    const double t = 0.8;
    const auto c = post::contact_fields(constant_rotation_rate(n, 10, Vec3(t, 0, 0)), n);
    for (const Vec3 &q : c[0].couple)
        EXPECT_NEAR(q.norm(), 0.7 * t, 1e-12);
}

TEST(Contact, CoupleDotStrainIsEnergyDensity)
{
    const Network n = asymmetric_star();
    const RotationField f = random_field(n, 10, 8, 0.4);
    const auto c = post::contact_fields(f, n);
    const auto s = strains(f, n);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < s[i].size(); ++k) {
            const double density = s[i][k].dot(n.rods[i].H * s[i][k]);
            EXPECT_NEAR(c[i].couple_mid[k].dot(c[i].strain_mid[k]), density, 1e-12 * (1.0 + density));
            EXPECT_GE(density, 0.0);
        }
}

TEST(Residuals, UnloadedAreZero)
{
    const Network n = asymmetric_star().with_scaled_loads(0.0);
    SolverOptions o;
    o.segments = {16};
    const auto rep = post::residuals(solve(n, o).field, n);
    const auto &r = rep.residuals;
    EXPECT_LE(r.max_ode_couple(), 1e-10);
    EXPECT_LE(r.max_end_couple(), 1e-10);
    EXPECT_LE(r.junction_force, 1e-10);
    EXPECT_LE(r.junction_couple, 1e-10);
    EXPECT_LE(r.junction_rotation_spread, 1e-10);
    EXPECT_LE(r.junction_position_spread, 1e-10);
    EXPECT_LE(r.inextensibility, 1e-10);
}

TEST(Residuals, RefinementReducesOdeAndJunctionCouple)
{
    const auto a = converged_star(32).residuals;
    const auto b = converged_star(64).residuals;
    EXPECT_GE(a.max_ode_couple() / b.max_ode_couple(), 1.7);
    EXPECT_GE(a.junction_couple / b.junction_couple, 1.7);
    EXPECT_LT(b.max_end_couple(), 1e-10);
    EXPECT_LT(b.junction_force, 1e-14);
}

TEST(Residuals, PerturbedFieldIsNotEquilibrium)
{
    const Network n = asymmetric_star();
    const auto r = post::residuals(random_field(n, 32, 5, 0.05), n).residuals;
    EXPECT_GT(r.junction_couple, 1e-2);
    EXPECT_GT(r.max_ode_couple(), 1e-2);
}

TEST(Residuals, FromArraysMatchesFieldPath)
{
    const Network n = asymmetric_star();
    const auto rep = post::residuals(random_field(n, 8, 2, 0.2), n);
    const auto r = post::residuals_from_arrays(rep.rods, n);
    EXPECT_EQ(r.ode_couple, rep.residuals.ode_couple);
    EXPECT_EQ(r.junction_couple, rep.residuals.junction_couple);
    EXPECT_EQ(r.inextensibility, rep.residuals.inextensibility);
}

TEST(Residuals, ForceEqualsCumulativeLoad)
{
    const Network n = planar_star();
    const auto rep = post::residuals(RotationField(n, {4, 4, 4}), n);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < rep.rods[i].x.size(); ++k)
            EXPECT_EQ(rep.rods[i].force[k], cumulative_load(n.rods[i], rep.rods[i].x[k]));
}
