#include "rodnet/so3.hpp"
#include "rodnet/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <random>

using namespace rodnet;

namespace {

Vec3 random_vec(std::mt19937_64 &rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    return Vec3(u(rng), u(rng), u(rng));
}

} // namespace

TEST(So3, HatVeeRoundTrip)
{
    const Vec3 v(0.3, -1.2, 2.5);
    EXPECT_TRUE(so3::vee(so3::hat(v)).isApprox(v));
    const Vec3 w(-0.7, 0.1, 0.4);
    EXPECT_TRUE((so3::hat(v) * w).isApprox(v.cross(w)));
}

TEST(So3, ExpLogRoundTrip)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 phi = random_vec(rng, 1.7);
        EXPECT_LT((so3::log(so3::exp(phi)) - phi).norm(), 1e-13);
    }
    EXPECT_LT(so3::log(so3::exp(Vec3(1e-9, 0, 0))).norm() - 1e-9, 1e-22);
}

TEST(So3, ExpMatchesMatrixExponential)
{
    const Vec3 phi(0.4, -0.2, 0.9);
    EXPECT_TRUE(so3::exp(phi).toRotationMatrix().isApprox(so3::exp_matrix(phi), 1e-14));
}

TEST(So3, JacobiansAreInverse)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const Vec3 phi = random_vec(rng, 2.0);
        EXPECT_TRUE((so3::left_jacobian(phi) * so3::left_jacobian_inv(phi)).isIdentity(1e-12));
        EXPECT_TRUE((so3::right_jacobian(phi) * so3::right_jacobian_inv(phi)).isIdentity(1e-12));
        EXPECT_TRUE(so3::left_jacobian(phi).isApprox(so3::right_jacobian(-phi), 1e-14));
    }
}

TEST(So3, RightJacobianLinearizesExp)
{
    const Vec3 phi(0.5, 0.3, -0.8);
    const Vec3 d(1e-7, -2e-7, 0.5e-7);
    const Quat lhs = so3::exp(phi + d);
    const Quat rhs = so3::exp(phi) * so3::exp(so3::right_jacobian(phi) * d);
    EXPECT_LT(so3::geodesic_distance(lhs, rhs), 1e-13);
}

TEST(So3, GeodesicDistanceIgnoresSign)
{
    const Quat q = so3::exp(Vec3(0.2, 0.1, -0.3));
    const Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
    EXPECT_NEAR(so3::geodesic_distance(q, neg), 0.0, 1e-15);
    EXPECT_NEAR(so3::geodesic_distance(Quat::Identity(), so3::exp(Vec3(0, 0, 0.7))), 0.7, 1e-14);
}

TEST(So3, CanonicalNormalizesOnce)
{
    const Quat q(2.0, 0.0, 0.0, 2.0);
    const Quat c = so3::canonical(q);
    EXPECT_NEAR(c.norm(), 1.0, 1e-15);
    EXPECT_EQ(so3::canonical(c).coeffs(), c.coeffs());
    EXPECT_NEAR(so3::geodesic_distance(q.normalized(), c), 0.0, 1e-15);
}

TEST(So3, PolarProjectRecoversRotation)
{
    const Mat3 R = so3::exp_matrix(Vec3(0.3, -0.6, 0.2));
    Mat3 A = R;
    A(0, 1) += 1e-8;
    double drift = 0.0;
    const Mat3 P = so3::polar_project(A, &drift);
    EXPECT_TRUE((P.transpose() * P).isIdentity(1e-14));
    EXPECT_NEAR(P.determinant(), 1.0, 1e-14);
    EXPECT_GT(drift, 0.0);
    EXPECT_LT(drift, 1e-7);
}

TEST(Parallel, VisitsEveryIndexOnce)
{
    for (int threads : {1, 3, 8}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        for (auto &h : hits)
            EXPECT_EQ(h.load(), 1);
    }
}
