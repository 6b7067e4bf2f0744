#pragma once

// Independent oracles: linearization about the straight state, a
// fourth-order frame integrator and classical section constants. Nothing
// here calls the cross-section FEM or the optimizer.

#include "rodnet/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rodnet::reference {

/// Small-displacement solution about R_i = Q_i, y_i = x t_i.
struct LinearSolution {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<Vec3>> u;     ///< displacement of the centerline
    std::vector<std::vector<Vec3>> omega; ///< infinitesimal spatial rotation
    Vec3 omega_junction = Vec3::Zero();
    Vec3 u_junction = Vec3::Zero();

    /// Straight reference centerline plus u, anchored at y_0(L_0) = 0.
    std::vector<std::vector<Vec3>> centerline(const Network &network) const;
};

/// Couples m_i = t_i x int_x^L p_i, curvatures omega' = Q H^{-1} Q^T m,
/// displacements u' = omega x t. The common rigid rotation at the junction is
/// fixed by the first-order junction couple balance
///   sum_i int (omega_i x t_i) x p_i = 0.
/// Loads must balance in force and in moment about the junction. Integrals
/// use composite 5-point Gauss-Legendre rules on N pieces per rod.
LinearSolution solve_linearized(const Network &network, int N);

struct FrameCurve {
    std::vector<double> x;
    std::vector<Mat3> R;
    std::vector<Vec3> y;
};

/// Integrates R' = hat(k(x)) R, y' = R e1 with y(0) = 0 by a fourth-order
/// Magnus scheme on 2N half steps and Simpson's rule for y; returns N+1 nodes.
FrameCurve integrate_single_rod(const Mat3 &R0, const std::function<Vec3(double)> &spatial_strain, double L,
                                int N);

struct ClassicalConstants {
    double torsion = 0.0;   ///< mu K
    double bending2 = 0.0;  ///< E int x3^2
    double bending3 = 0.0;  ///< E int x2^2
    double young = 0.0;
};

/// "circle" with dimensions {r}, "rectangle" with {a, b} (a along x2).
/// Rectangle torsion uses the 10-term Saint-Venant series.
ClassicalConstants classical_constants(const std::string &section, const std::vector<double> &dimensions,
                                       double lambda, double mu);

/// Saint-Venant torsion constant K of an a x b rectangle (10 odd terms).
double rectangle_torsion_constant(double a, double b);

} // namespace rodnet::reference
