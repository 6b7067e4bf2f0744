#include "rodnet/solver.hpp"
#include "rodnet/parallel.hpp"
#include "rodnet/so3.hpp"

#include <array>
#include <cmath>

namespace rodnet::solver {

namespace {

struct SegmentTerms {
    double energy = 0.0;
    Vec3 ga = Vec3::Zero();
    Vec3 gb = Vec3::Zero();
};

// One segment between node rotations a and b:
//   e = h/2 s.Hs - h p.(R_m e1),  s = log(a^T b)/h,  R_m = a exp(log(a^T b)/2).
SegmentTerms segment(const Quat &a, const Quat &b, const Mat3 &H, const Vec3 &p, double h, bool with_gradient)
{
    SegmentTerms out;
    const Vec3 phi = so3::log(a.conjugate() * b);
    const Vec3 s = phi / h;
    const Vec3 Hs = H * s;
    const Quat rm = a * so3::exp(0.5 * phi);
    const Mat3 Rm = rm.toRotationMatrix();
    const Vec3 t = Rm.col(0);
    out.energy = 0.5 * h * s.dot(Hs) - h * p.dot(t);
    if (!with_gradient)
        return out;

    const Mat3 Rb = b.toRotationMatrix();
    const Vec3 m = Rb * (so3::left_jacobian_inv(phi) * Hs);
    const Mat3 B = 0.5 * Rm * so3::right_jacobian(0.5 * phi) * so3::right_jacobian_inv(phi) * Rb.transpose();
    const Vec3 c = t.cross(p);
    const Vec3 btc = B.transpose() * c;
    out.ga = -m - h * c + h * btc;
    out.gb = m - h * btc;
    return out;
}

} // namespace

Problem::Problem(const Network &network, const std::vector<int> &segments, int threads)
    : network_(network), segments_(segments), threads_(threads)
{
    if (segments.size() != network.rods.size())
        throw ValidationError("segment counts do not match the number of rods");
    h_.resize(segments.size());
    p_mid_.resize(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i] < 2)
            throw ValidationError("rods[" + std::to_string(i) + "]: at least 2 segments are required");
        const RodSpec &rod = network.rods[i];
        h_[i] = rod.length / segments[i];
        p_mid_[i].resize(static_cast<std::size_t>(segments[i]));
        for (int k = 0; k < segments[i]; ++k)
            p_mid_[i][static_cast<std::size_t>(k)] = cumulative_load(rod, (k + 0.5) * h_[i]);
    }
}

std::vector<double> Problem::rod_energies(const RotationField &field) const
{
    field.check_shape(network_);
    std::vector<double> e(field.rods(), 0.0);
    parallel_for(field.rods(), threads_, [&](std::size_t i) {
        const int n = segments_[i];
        if (field.segments(i) != n)
            throw ValidationError("field segment count differs for rods[" + std::to_string(i) + "]");
        const Mat3 &H = network_.rods[i].H;
        double acc = 0.0;
        Quat a = field.node(i, 0);
        for (int k = 0; k < n; ++k) {
            const Quat b = field.node(i, k + 1);
            acc += segment(a, b, H, p_mid_[i][static_cast<std::size_t>(k)], h_[i], false).energy;
            a = b;
        }
        e[i] = acc;
    });
    return e;
}

double Problem::energy_scale(const RotationField &field) const
{
    field.check_shape(network_);
    std::vector<double> e(field.rods(), 0.0);
    parallel_for(field.rods(), threads_, [&](std::size_t i) {
        const Mat3 &H = network_.rods[i].H;
        double acc = 0.0;
        Quat a = field.node(i, 0);
        for (int k = 0; k < segments_[i]; ++k) {
            const Quat b = field.node(i, k + 1);
            const Vec3 phi = so3::log(a.conjugate() * b);
            const Vec3 t = (a * so3::exp(0.5 * phi)).toRotationMatrix().col(0);
            acc += 0.5 * phi.dot(H * phi) / h_[i] + h_[i] * std::abs(p_mid_[i][static_cast<std::size_t>(k)].dot(t));
            a = b;
        }
        e[i] = acc;
    });
    double total = 0.0;
    for (double v : e)
        total += v;
    return total;
}

double Problem::energy(const RotationField &field) const
{
    double total = 0.0;
    for (double e : rod_energies(field))
        total += e;
    return total;
}

double Problem::energy_and_gradient(const RotationField &field, Vector &g) const
{
    field.check_shape(network_);
    g.setZero(static_cast<Eigen::Index>(field.dimension()));
    std::vector<double> e(field.rods(), 0.0);
    std::vector<Vec3> first(field.rods(), Vec3::Zero());
    parallel_for(field.rods(), threads_, [&](std::size_t i) {
        const int n = segments_[i];
        if (field.segments(i) != n)
            throw ValidationError("field segment count differs for rods[" + std::to_string(i) + "]");
        const Mat3 &H = network_.rods[i].H;
        double acc = 0.0;
        Quat a = field.node(i, 0);
        for (int k = 0; k < n; ++k) {
            const Quat b = field.node(i, k + 1);
            const SegmentTerms t = segment(a, b, H, p_mid_[i][static_cast<std::size_t>(k)], h_[i], true);
            acc += t.energy;
            if (k == 0)
                first[i] = t.ga;
            else
                g.segment<3>(static_cast<Eigen::Index>(field.offset(i, k))) += t.ga;
            g.segment<3>(static_cast<Eigen::Index>(field.offset(i, k + 1))) += t.gb;
            a = b;
        }
        e[i] = acc;
    });
    double total = 0.0;
    for (std::size_t i = 0; i < field.rods(); ++i) {
        total += e[i];
        g.segment<3>(0) += first[i];
    }
    return total;
}

Vector Problem::gradient(const RotationField &field) const
{
    Vector g;
    energy_and_gradient(field, g);
    return g;
}

Eigen::SparseMatrix<double> Problem::hessian(const RotationField &field) const
{
    field.check_shape(network_);
    constexpr double eps = 1e-5;
    using Triplet = Eigen::Triplet<double>;
    std::vector<std::vector<Triplet>> parts(field.rods());

    parallel_for(field.rods(), threads_, [&](std::size_t i) {
        const int n = segments_[i];
        const Mat3 &H = network_.rods[i].H;
        auto &trip = parts[i];
        trip.reserve(static_cast<std::size_t>(n) * 36);
        Quat a = field.node(i, 0);
        for (int k = 0; k < n; ++k) {
            const Quat b = field.node(i, k + 1);
            const Vec3 &p = p_mid_[i][static_cast<std::size_t>(k)];
            Eigen::Matrix<double, 6, 6> K;
            for (int j = 0; j < 6; ++j) {
                Vec3 d = Vec3::Zero();
                d(j % 3) = eps;
                const bool on_a = j < 3;
                const SegmentTerms plus = segment(on_a ? so3::perturb(a, d) : a, on_a ? b : so3::perturb(b, d), H, p,
                                                  h_[i], true);
                const SegmentTerms minus = segment(on_a ? so3::perturb(a, -d) : a, on_a ? b : so3::perturb(b, -d), H,
                                                   p, h_[i], true);
                K.col(j).head<3>() = (plus.ga - minus.ga) / (2.0 * eps);
                K.col(j).tail<3>() = (plus.gb - minus.gb) / (2.0 * eps);
            }
            const Eigen::Matrix<double, 6, 6> S = 0.5 * (K + K.transpose());
            const std::array<std::size_t, 2> idx{field.offset(i, k), field.offset(i, k + 1)};
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c)
                    trip.emplace_back(static_cast<int>(idx[static_cast<std::size_t>(r / 3)]) + r % 3,
                                      static_cast<int>(idx[static_cast<std::size_t>(c / 3)]) + c % 3, S(r, c));
            a = b;
        }
    });

    std::vector<Triplet> all;
    for (auto &p : parts)
        all.insert(all.end(), p.begin(), p.end());
    const auto dim = static_cast<Eigen::Index>(field.dimension());
    Eigen::SparseMatrix<double> M(dim, dim);
    M.setFromTriplets(all.begin(), all.end());
    return M;
}

Vector Problem::hessian_vector(const RotationField &field, const Vector &v, double step) const
{
    const double nv = v.norm();
    if (nv == 0.0)
        return Vector::Zero(v.size());
    const double eps = step / nv;
    const Vector gp = gradient(field.retracted(eps * v));
    const Vector gm = gradient(field.retracted(-eps * v));
    const Vector g0 = gradient(field);
    Vector out = (gp - gm) / (2.0 * eps);
    for (Eigen::Index b = 0; b < v.size() / 3; ++b) {
        const Vec3 gb = g0.segment<3>(3 * b);
        out.segment<3>(3 * b) += 0.5 * gb.cross(Vec3(v.segment<3>(3 * b)));
    }
    return out;
}

double energy(const RotationField &field, const Network &network)
{
    std::vector<int> seg(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i)
        seg[i] = field.segments(i);
    return Problem(network, seg).energy(field);
}

Vector gradient(const RotationField &field, const Network &network)
{
    std::vector<int> seg(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i)
        seg[i] = field.segments(i);
    return Problem(network, seg).gradient(field);
}

} // namespace rodnet::solver
