#include "rodnet/reference.hpp"

#include <cmath>

namespace rodnet::reference {

namespace {

Mat3 rotation(const Vec3 &v)
{
    const double a = v.norm();
    if (a == 0.0)
        return Mat3::Identity();
    return Eigen::AngleAxisd(a, v / a).toRotationMatrix();
}

} // namespace

FrameCurve integrate_single_rod(const Mat3 &R0, const std::function<Vec3(double)> &spatial_strain, double L, int N)
{
    if (N < 1 || !(L > 0.0))
        throw ValidationError("integrate_single_rod: need N >= 1 and L > 0");
    const int steps = 2 * N;
    const double dt = L / steps;
    const double c = std::sqrt(3.0) / 6.0;

    std::vector<Mat3> R(static_cast<std::size_t>(steps) + 1);
    R[0] = R0;
    for (int j = 0; j < steps; ++j) {
        const double x0 = j * dt;
        const Vec3 k1 = spatial_strain(x0 + (0.5 - c) * dt);
        const Vec3 k2 = spatial_strain(x0 + (0.5 + c) * dt);
        const Vec3 omega = 0.5 * dt * (k1 + k2) - std::sqrt(3.0) / 12.0 * dt * dt * k1.cross(k2);
        R[static_cast<std::size_t>(j) + 1] = rotation(omega) * R[static_cast<std::size_t>(j)];
    }

    FrameCurve out;
    out.x.resize(static_cast<std::size_t>(N) + 1);
    out.R.resize(static_cast<std::size_t>(N) + 1);
    out.y.resize(static_cast<std::size_t>(N) + 1);
    out.y[0] = Vec3::Zero();
    for (int k = 0; k <= N; ++k) {
        const auto j = static_cast<std::size_t>(2 * k);
        out.x[static_cast<std::size_t>(k)] = k == N ? L : 2 * k * dt;
        out.R[static_cast<std::size_t>(k)] = R[j];
        if (k > 0)
            out.y[static_cast<std::size_t>(k)] =
                out.y[static_cast<std::size_t>(k) - 1] +
                dt / 3.0 * (R[j - 2].col(0) + 4.0 * R[j - 1].col(0) + R[j].col(0));
    }
    return out;
}

} // namespace rodnet::reference
