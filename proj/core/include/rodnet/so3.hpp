#pragma once

// Rotation-group helpers. Rotations are stored as unit quaternions; tangent
// vectors are rotation vectors (axis * angle). Perturbations act on the left,
// R <- exp(hat(v)) R, so the spatial rotation vector v is the coordinate.

#include "rodnet/types.hpp"

namespace rodnet::so3 {

/// Skew matrix with hat(v) x = v.cross(x).
Mat3 hat(const Vec3 &v);
Vec3 vee(const Mat3 &A);

Quat exp(const Vec3 &phi);
/// Rotation vector of q with angle in [0, pi].
Vec3 log(const Quat &q);

Mat3 exp_matrix(const Vec3 &phi);

// Jacobians of the exponential map:
//   exp(phi + d) ~= exp(phi) exp(Jr(phi) d) ~= exp(Jl(phi) d) exp(phi)
Mat3 right_jacobian(const Vec3 &phi);
Mat3 right_jacobian_inv(const Vec3 &phi);
Mat3 left_jacobian(const Vec3 &phi);
Mat3 left_jacobian_inv(const Vec3 &phi);

/// Angle of a^{-1} b.
double geodesic_distance(const Quat &a, const Quat &b);

/// Left perturbation exp(v) q, renormalized.
Quat perturb(const Quat &q, const Vec3 &v);

/// Normalizes q only when its norm deviates from one by more than a few ulps,
/// so the operation is idempotent on already-normalized data.
Quat canonical(const Quat &q);

/// Nearest rotation in the Frobenius sense (polar factor). Returns the
/// distance ||A - polar(A)||_F through `drift` when non-null.
Mat3 polar_project(const Mat3 &A, double *drift = nullptr);

} // namespace rodnet::so3
