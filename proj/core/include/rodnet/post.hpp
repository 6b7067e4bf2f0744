#pragma once

// Recovery of centerlines and contact fields from a rotation field, and the
// residuals of the equilibrium system
//   p' + f = 0,  q' + R e1 x p = 0,  q(L) = 0,
//   sum p_i(0) = 0,  sum q_i(0) = 0,  common R_i(0) Q_i^T and y_i(0).

#include "rodnet/solver.hpp"

#include <vector>

namespace rodnet::post {

using solver::RotationField;

/// Node positions per rod, integrated exactly along each geodesic segment,
/// translated so that rod 0 ends at the origin.
std::vector<std::vector<Vec3>> recover_centerline(const RotationField &field, const Network &network);

struct ContactFields {
    std::vector<Vec3> strain_mid; ///< spatial strain R_m s at segment midpoints
    std::vector<Vec3> couple_mid; ///< R_m H s at segment midpoints
    std::vector<Vec3> strain;     ///< nodes
    std::vector<Vec3> couple;     ///< nodes
    std::vector<Vec3> force;      ///< p at nodes
};

/// Node values average the adjacent midpoints. At the junction end the couple
/// is advanced half a segment with q' = -t x p; at the free end it is the
/// discrete conjugate couple (the last node's energy gradient), whose
/// vanishing is the discrete natural boundary condition.
std::vector<ContactFields> contact_fields(const RotationField &field, const Network &network);

struct RodReport {
    std::vector<double> x;
    std::vector<Vec3> y;
    std::vector<Quat> R;
    std::vector<Vec3> strain;
    std::vector<Vec3> force;
    std::vector<Vec3> couple;
    double energy = 0.0;
};

struct Residuals {
    std::vector<double> ode_couple;  ///< per rod, max over interior segments
    std::vector<double> end_couple;  ///< per rod, |q_i(L_i)|
    double junction_force = 0.0;     ///< |sum p_i(0)|
    double junction_couple = 0.0;    ///< |sum q_i(0)|
    double junction_rotation_spread = 0.0;
    double junction_position_spread = 0.0;
    double inextensibility = 0.0;    ///< max of ||R e1| - 1| and of (|y_{k+1} - y_k| - h)+
    double max_ode_couple() const;
    double max_end_couple() const;
};

struct EquilibriumReport {
    std::vector<RodReport> rods;
    Residuals residuals;
    double energy = 0.0;
    double gradient_norm = 0.0;
};

/// Builds the full report; the residual block is computed from the report
/// arrays themselves.
EquilibriumReport residuals(const RotationField &field, const Network &network);

/// Residual block recomputed from already-populated report arrays (used when
/// verifying a stored solution).
Residuals residuals_from_arrays(const std::vector<RodReport> &rods, const Network &network);

} // namespace rodnet::post
