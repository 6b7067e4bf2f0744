#include "rodnet/post.hpp"
#include "rodnet/so3.hpp"

#include <algorithm>
#include <cmath>

namespace rodnet::post {

namespace {

std::vector<int> segments_of(const RotationField &field)
{
    std::vector<int> seg(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i)
        seg[i] = field.segments(i);
    return seg;
}

Quat geodesic_midpoint(const Quat &a, const Quat &b) { return a * so3::exp(0.5 * so3::log(a.conjugate() * b)); }

} // namespace

double Residuals::max_ode_couple() const
{
    double m = 0.0;
    for (double v : ode_couple)
        m = std::max(m, v);
    return m;
}

double Residuals::max_end_couple() const
{
    double m = 0.0;
    for (double v : end_couple)
        m = std::max(m, v);
    return m;
}

std::vector<std::vector<Vec3>> recover_centerline(const RotationField &field, const Network &network)
{
    field.check_shape(network);
    std::vector<std::vector<Vec3>> y(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i) {
        const int n = field.segments(i);
        const double h = network.rods[i].length / n;
        y[i].resize(static_cast<std::size_t>(n) + 1);
        y[i][0] = Vec3::Zero();
        Quat a = field.node(i, 0);
        for (int k = 0; k < n; ++k) {
            const Quat b = field.node(i, k + 1);
            // int_0^1 exp(u phi) du = J_l(phi)
            const Vec3 phi = so3::log(a.conjugate() * b);
            y[i][static_cast<std::size_t>(k) + 1] =
                y[i][static_cast<std::size_t>(k)] + h * (a.toRotationMatrix() * so3::left_jacobian(phi).col(0));
            a = b;
        }
    }
    const Vec3 shift = y[0].back();
    for (auto &rod : y)
        for (auto &p : rod)
            p -= shift;
    return y;
}

std::vector<ContactFields> contact_fields(const RotationField &field, const Network &network)
{
    field.check_shape(network);
    const solver::Problem problem(network, segments_of(field));
    const solver::Vector g = problem.gradient(field);

    std::vector<ContactFields> out(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i) {
        const RodSpec &rod = network.rods[i];
        const int n = field.segments(i);
        const double h = rod.length / n;
        ContactFields &c = out[i];
        c.strain_mid.resize(static_cast<std::size_t>(n));
        c.couple_mid.resize(static_cast<std::size_t>(n));
        std::vector<Vec3> tangent_mid(static_cast<std::size_t>(n));
        Quat a = field.node(i, 0);
        for (int k = 0; k < n; ++k) {
            const Quat b = field.node(i, k + 1);
            const Vec3 phi = so3::log(a.conjugate() * b);
            const Mat3 Rm = (a * so3::exp(0.5 * phi)).toRotationMatrix();
            const Vec3 s = phi / h;
            c.strain_mid[static_cast<std::size_t>(k)] = Rm * s;
            c.couple_mid[static_cast<std::size_t>(k)] = Rm * (rod.H * s);
            tangent_mid[static_cast<std::size_t>(k)] = Rm.col(0);
            a = b;
        }
        const auto N = static_cast<std::size_t>(n);
        c.strain.resize(N + 1);
        c.couple.resize(N + 1);
        c.force.resize(N + 1);
        for (std::size_t k = 0; k <= N; ++k)
            c.force[k] = cumulative_load(rod, k == N ? rod.length : static_cast<double>(k) * h);
        for (std::size_t k = 1; k < N; ++k) {
            c.strain[k] = 0.5 * (c.strain_mid[k - 1] + c.strain_mid[k]);
            c.couple[k] = 0.5 * (c.couple_mid[k - 1] + c.couple_mid[k]);
        }
        c.strain[0] = c.strain_mid[0];
        c.strain[N] = c.strain_mid[N - 1];
        c.couple[0] = c.couple_mid[0] + 0.5 * h * tangent_mid[0].cross(cumulative_load(rod, 0.5 * h));
        c.couple[N] = g.segment<3>(static_cast<Eigen::Index>(field.offset(i, n)));
    }
    return out;
}

Residuals residuals_from_arrays(const std::vector<RodReport> &rods, const Network &network)
{
    Residuals r;
    const std::size_t nr = rods.size();
    r.ode_couple.assign(nr, 0.0);
    r.end_couple.assign(nr, 0.0);
    Vec3 force_sum = Vec3::Zero();
    Vec3 couple_sum = Vec3::Zero();
    for (std::size_t i = 0; i < nr; ++i) {
        const RodReport &rep = rods[i];
        const RodSpec &spec = network.rods[i];
        const std::size_t N = rep.R.size() - 1;
        const double h = spec.length / static_cast<double>(N);
        // Forward differences of node couples across segments with both ends interior.
        for (std::size_t k = 1; k + 1 < N; ++k) {
            const Vec3 t = geodesic_midpoint(rep.R[k], rep.R[k + 1]).toRotationMatrix().col(0);
            const Vec3 p = cumulative_load(spec, (static_cast<double>(k) + 0.5) * h);
            r.ode_couple[i] = std::max(r.ode_couple[i], ((rep.couple[k + 1] - rep.couple[k]) / h + t.cross(p)).norm());
        }
        r.end_couple[i] = rep.couple[N].norm();
        force_sum += rep.force[0];
        couple_sum += rep.couple[0];
        for (std::size_t k = 0; k <= N; ++k)
            r.inextensibility = std::max(r.inextensibility, std::abs(rep.R[k].toRotationMatrix().col(0).norm() - 1.0));
        for (std::size_t k = 0; k < N; ++k)
            r.inextensibility = std::max(r.inextensibility, (rep.y[k + 1] - rep.y[k]).norm() - h);
    }
    r.junction_force = force_sum.norm();
    r.junction_couple = couple_sum.norm();
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = i + 1; j < nr; ++j) {
            const Quat ji = rods[i].R[0] * network.rods[i].frame.conjugate();
            const Quat jj = rods[j].R[0] * network.rods[j].frame.conjugate();
            r.junction_rotation_spread = std::max(r.junction_rotation_spread, so3::geodesic_distance(ji, jj));
            r.junction_position_spread = std::max(r.junction_position_spread, (rods[i].y[0] - rods[j].y[0]).norm());
        }
    return r;
}

EquilibriumReport residuals(const RotationField &field, const Network &network)
{
    field.check_shape(network);
    const auto y = recover_centerline(field, network);
    const auto cf = contact_fields(field, network);
    const solver::Problem problem(network, segments_of(field));
    const std::vector<double> energies = problem.rod_energies(field);

    EquilibriumReport rep;
    solver::Vector g;
    rep.energy = problem.energy_and_gradient(field, g);
    rep.gradient_norm = g.norm();
    rep.rods.resize(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i) {
        RodReport &r = rep.rods[i];
        const int n = field.segments(i);
        const double h = network.rods[i].length / n;
        r.x.resize(static_cast<std::size_t>(n) + 1);
        r.R.resize(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) {
            r.x[static_cast<std::size_t>(k)] = k == n ? network.rods[i].length : k * h;
            r.R[static_cast<std::size_t>(k)] = field.node(i, k);
        }
        r.y = y[i];
        r.strain = cf[i].strain;
        r.force = cf[i].force;
        r.couple = cf[i].couple;
        r.energy = energies[i];
    }
    rep.residuals = residuals_from_arrays(rep.rods, network);
    return rep;
}

} // namespace rodnet::post
