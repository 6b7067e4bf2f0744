#include "rodnet/so3.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace rodnet::so3 {

namespace {

// Coefficients a = (1 - cos t)/t^2, b = (t - sin t)/t^3 with series near zero.
void jacobian_coefficients(double t, double &a, double &b)
{
    const double t2 = t * t;
    if (t < 1e-4) {
        a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
        b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    } else {
        a = (1.0 - std::cos(t)) / t2;
        b = (t - std::sin(t)) / (t2 * t);
    }
}

// c = 1/t^2 - (1 + cos t)/(2 t sin t)
double inverse_coefficient(double t)
{
    const double t2 = t * t;
    if (t < 1e-4)
        return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
    return 1.0 / t2 - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
}

} // namespace

Mat3 hat(const Vec3 &v)
{
    Mat3 A;
    A << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return A;
}

Vec3 vee(const Mat3 &A)
{
    return Vec3(0.5 * (A(2, 1) - A(1, 2)), 0.5 * (A(0, 2) - A(2, 0)), 0.5 * (A(1, 0) - A(0, 1)));
}

Quat exp(const Vec3 &phi)
{
    const double t = phi.norm();
    const double half = 0.5 * t;
    double k;
    if (t < 1e-6) {
        const double t2 = t * t;
        k = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0;
    } else {
        k = std::sin(half) / t;
    }
    Quat q(std::cos(half), k * phi.x(), k * phi.y(), k * phi.z());
    return q;
}

Vec3 log(const Quat &q_in)
{
    Quat q = q_in;
    if (q.w() < 0.0)
        q.coeffs() = -q.coeffs();
    const Vec3 v = q.vec();
    const double n = v.norm();
    if (n < 1e-8) {
        // atan2(n, w)/n series, with w ~ 1.
        const double w = q.w();
        const double r = n / w;
        return (2.0 / w) * (1.0 - r * r / 3.0) * v;
    }
    const double angle = 2.0 * std::atan2(n, q.w());
    return (angle / n) * v;
}

Mat3 exp_matrix(const Vec3 &phi) { return exp(phi).toRotationMatrix(); }

Mat3 right_jacobian(const Vec3 &phi)
{
    double a, b;
    jacobian_coefficients(phi.norm(), a, b);
    const Mat3 P = hat(phi);
    return Mat3::Identity() - a * P + b * P * P;
}

Mat3 left_jacobian(const Vec3 &phi)
{
    double a, b;
    jacobian_coefficients(phi.norm(), a, b);
    const Mat3 P = hat(phi);
    return Mat3::Identity() + a * P + b * P * P;
}

Mat3 right_jacobian_inv(const Vec3 &phi)
{
    const double c = inverse_coefficient(phi.norm());
    const Mat3 P = hat(phi);
    return Mat3::Identity() + 0.5 * P + c * P * P;
}

Mat3 left_jacobian_inv(const Vec3 &phi)
{
    const double c = inverse_coefficient(phi.norm());
    const Mat3 P = hat(phi);
    return Mat3::Identity() - 0.5 * P + c * P * P;
}

double geodesic_distance(const Quat &a, const Quat &b)
{
    return log(a.conjugate() * b).norm();
}

Quat perturb(const Quat &q, const Vec3 &v)
{
    Quat r = exp(v) * q;
    r.normalize();
    return r;
}

Quat canonical(const Quat &q)
{
    const double n2 = q.squaredNorm();
    if (std::abs(n2 - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon())
        return q;
    Quat r = q;
    r.normalize();
    return r;
}

Mat3 polar_project(const Mat3 &A, double *drift)
{
    Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 U = svd.matrixU();
    const Mat3 V = svd.matrixV();
    if ((U * V.transpose()).determinant() < 0.0)
        U.col(2) = -U.col(2);
    const Mat3 R = U * V.transpose();
    if (drift)
        *drift = (A - R).norm();
    return R;
}

} // namespace rodnet::so3
