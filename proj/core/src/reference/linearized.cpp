#include "rodnet/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>

namespace rodnet::reference {

namespace {

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> gauss_x{0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                                        0.953089922969332};
constexpr std::array<double, 5> gauss_w{0.118463442528095, 0.239314335249683, 0.284444444444444,
                                        0.239314335249683, 0.118463442528095};

template <class F> auto integrate(double a, double b, const F &f)
{
    using R = std::decay_t<decltype(f(a))>;
    R acc = f(a + gauss_x[0] * (b - a)) * gauss_w[0];
    for (std::size_t j = 1; j < 5; ++j)
        acc += f(a + gauss_x[j] * (b - a)) * gauss_w[j];
    return R(acc * (b - a));
}

// Per-rod data for the linearized problem.
struct RodLinear {
    const RodSpec *spec = nullptr;
    int N = 0;
    double h = 0.0;
    Vec3 t;
    Mat3 compliance; // Q H^{-1} Q^T

    // int_z^L p(y) dy = int_z^L (y - z) f(y) dy + (L - z) F, composite over pieces.
    Vec3 load_moment_arm(double z) const
    {
        const double L = spec->length;
        Vec3 acc = (L - z) * spec->end_force;
        if (z >= L)
            return acc;
        const int pieces = std::max(1, static_cast<int>(std::ceil((L - z) / h)));
        const double w = (L - z) / pieces;
        for (int j = 0; j < pieces; ++j) {
            const double a = z + j * w;
            acc += integrate(a, a + w, [&](double y) -> Vec3 { return (y - z) * spec->distributed.value(y); });
        }
        return acc;
    }
    Vec3 curvature(double z) const { return compliance * t.cross(load_moment_arm(z)); }
};

} // namespace

std::vector<std::vector<Vec3>> LinearSolution::centerline(const Network &network) const
{
    std::vector<std::vector<Vec3>> y(u.size());
    const Vec3 anchor = network.rods[0].length * network.rods[0].tangent();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Vec3 t = network.rods[i].tangent();
        y[i].resize(u[i].size());
        for (std::size_t k = 0; k < u[i].size(); ++k)
            y[i][k] = x[i][k] * t - anchor + u[i][k];
    }
    return y;
}

LinearSolution solve_linearized(const Network &network, int N)
{
    network.validate();
    if (N < 1)
        throw ValidationError("solve_linearized: N must be positive");
    const std::size_t n = network.rods.size();

    std::vector<RodLinear> rods(n);
    for (std::size_t i = 0; i < n; ++i) {
        const RodSpec &s = network.rods[i];
        RodLinear &r = rods[i];
        r.spec = &s;
        r.N = N;
        r.h = s.length / N;
        const Mat3 Q = s.frame.toRotationMatrix();
        r.t = Q.col(0);
        r.compliance = Q * s.H.inverse() * Q.transpose();
    }

    // Elastic rotation (zero at the junction) and its first moment at nodes:
    //   w(x) = int_0^x k,   W(x) = int_0^x w = int_0^x (x - z) k(z) dz.
    LinearSolution sol;
    sol.x.resize(n);
    sol.u.resize(n);
    sol.omega.resize(n);
    std::vector<std::vector<Vec3>> w(n), W(n);
    Mat3 M = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const RodLinear &r = rods[i];
        const auto nodes = static_cast<std::size_t>(N) + 1;
        sol.x[i].resize(nodes);
        w[i].assign(nodes, Vec3::Zero());
        W[i].assign(nodes, Vec3::Zero());
        for (int k = 0; k < N; ++k) {
            const double a = k * r.h, b = (k + 1) * r.h;
            const auto kk = static_cast<std::size_t>(k);
            w[i][kk + 1] = w[i][kk] + integrate(a, b, [&](double z) { return r.curvature(z); });
            W[i][kk + 1] = W[i][kk] + r.h * w[i][kk] +
                           integrate(a, b, [&](double z) -> Vec3 { return (b - z) * r.curvature(z); });

            // Junction couple balance terms over this piece.
            const Vec3 wa = w[i][kk];
            rhs -= integrate(a, b, [&](double z) -> Vec3 {
                const Vec3 wz = wa + integrate(a, z, [&](double s) { return r.curvature(s); });
                const Vec3 p = r.spec->distributed.integral(z, r.spec->length) + r.spec->end_force;
                return wz.cross(r.t).cross(p);
            });
            M += integrate(a, b, [&](double z) -> Mat3 {
                const Vec3 p = r.spec->distributed.integral(z, r.spec->length) + r.spec->end_force;
                return r.t * p.transpose() - r.t.dot(p) * Mat3::Identity();
            });
        }
        for (std::size_t k = 0; k < nodes; ++k)
            sol.x[i][k] = k + 1 == nodes ? r.spec->length : static_cast<double>(k) * r.h;
    }

    // Zeroth order: the reference configuration must already be in equilibrium.
    Vec3 force = Vec3::Zero(), moment = Vec3::Zero();
    double scale = 0.0;
    for (const RodLinear &r : rods) {
        const Vec3 p0 = r.spec->distributed.integral(0.0, r.spec->length) + r.spec->end_force;
        force += p0;
        moment += r.t.cross(r.load_moment_arm(0.0));
        scale = std::max(scale, contact_force_sup(*r.spec));
    }
    const double lmax = network.max_length();
    if (force.norm() > 1e-9 * scale || moment.norm() > 1e-9 * scale * lmax)
        throw ValidationError("solve_linearized: loads must balance in force and in moment about the junction");

    const bool loaded = !network.unloaded();
    if (loaded) {
        Eigen::FullPivLU<Mat3> lu(M);
        if (lu.rank() < 3)
            throw NumericalError("solve_linearized: junction rotation is undetermined (singular load stiffness)");
        sol.omega_junction = lu.solve(rhs);
    }

    // u_i(x) = u_J + (x omega_J + W_i(x)) x t_i; anchor u_0(L_0) = 0.
    const RodLinear &r0 = rods[0];
    sol.u_junction = -(r0.spec->length * sol.omega_junction + W[0].back()).cross(r0.t);
    for (std::size_t i = 0; i < n; ++i) {
        const auto nodes = w[i].size();
        sol.u[i].resize(nodes);
        sol.omega[i].resize(nodes);
        for (std::size_t k = 0; k < nodes; ++k) {
            sol.omega[i][k] = sol.omega_junction + w[i][k];
            sol.u[i][k] = sol.u_junction + (sol.x[i][k] * sol.omega_junction + W[i][k]).cross(rods[i].t);
        }
    }
    return sol;
}

} // namespace rodnet::reference
