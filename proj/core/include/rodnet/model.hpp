#pragma once

// Network data model: n straight rods meeting at one junction, with dead
// loads given directly as line densities f and end forces F (global
// coordinates). The contact force carried by rod i at arclength x is
//   p(x) = integral_x^L f(z) dz + F.

#include "rodnet/types.hpp"
#include "rodnet/xsection.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rodnet {

/// Distributed load density along a rod (force per length).
class LoadProfile {
public:
    enum class Kind { constant, polynomial, samples };

    LoadProfile() = default; ///< zero load
    static LoadProfile constant(const Vec3 &value);
    /// f(x) = sum_k coefficients[k] x^k
    static LoadProfile polynomial(std::vector<Vec3> coefficients);
    /// Piecewise-linear interpolant; constant beyond the first/last abscissa.
    static LoadProfile sampled(std::vector<double> abscissae, std::vector<Vec3> values);

    Kind kind() const { return kind_; }
    const std::vector<Vec3> &coefficients() const { return coefficients_; }
    const std::vector<double> &abscissae() const { return abscissae_; }
    const std::vector<Vec3> &values() const { return values_; }

    Vec3 value(double x) const;
    /// Exact integral of the profile over [a, b].
    Vec3 integral(double a, double b) const;
    bool is_zero() const;

    /// Throws ValidationError if sample abscissae fall outside [0, length].
    void validate_support(double length) const;

    /// Same profile with every vector premultiplied by G.
    LoadProfile rotated(const Mat3 &G) const;
    LoadProfile scaled(double factor) const;

private:
    Kind kind_ = Kind::constant;
    std::vector<Vec3> coefficients_{Vec3::Zero()};
    std::vector<double> abscissae_;
    std::vector<Vec3> values_;
};

struct RodSpec {
    double length = 1.0;
    Quat frame = Quat::Identity(); ///< Q; tangent t = Q e1
    Mat3 H = Mat3::Identity();
    LoadProfile distributed;
    Vec3 end_force = Vec3::Zero();

    Mat3 frame_matrix() const { return frame.toRotationMatrix(); }
    Vec3 tangent() const { return frame_matrix().col(0); }
};

struct Network {
    std::vector<RodSpec> rods;
    std::vector<std::string> warnings;

    /// Checks the RodSpec invariants; throws ValidationError naming the rod.
    void validate() const;
    bool unloaded() const;
    double max_length() const;
    /// Largest sup-norm of the contact force over all rods.
    double load_scale() const;

    /// Copy with all loads premultiplied by G (frames unchanged).
    Network with_rotated_loads(const Mat3 &G) const;
    Network with_scaled_loads(double factor) const;
};

/// Contact force p(x1). Throws ValidationError unless 0 <= x1 <= L.
Vec3 cumulative_load(const RodSpec &rod, double x1);

/// Sup-norm of p over [0, L], from dense sampling plus the end points.
double contact_force_sup(const RodSpec &rod);

struct BalanceReport {
    Vec3 resultant = Vec3::Zero();      ///< sum_i p_i(0)
    std::vector<Vec3> junction_forces;  ///< p_i(0)
    double threshold = 0.0;
    bool passed = false;
};

/// Force balance at the junction: passes iff
/// |sum p_i(0)| <= tol * max_i(sup|p_i| + eps).
BalanceReport check_balance(const Network &network, double tol);

// Parsed network input, before stiffness resolution.

struct FrameInput {
    enum class Kind { quaternion, matrix, tangent_axis };
    Kind kind = Kind::quaternion;
    Quat quaternion = Quat::Identity(); ///< (w, x, y, z), unit within 1e-9
    Mat3 matrix = Mat3::Identity();     ///< columns: tangent, section axes
    Vec3 tangent = Vec3::UnitX();
    Vec3 axis = Vec3::UnitY();          ///< first section axis, orthogonalized
};

struct SectionInput {
    xsection::SectionGeometry geometry;
    xsection::Material material;
    double mesh_size = 0.05;
};

struct RodInput {
    double length = 1.0;
    FrameInput frame;
    std::variant<Mat3, SectionInput> stiffness = Mat3::Identity();
    LoadProfile distributed;
    Vec3 end_force = Vec3::Zero();
};

struct NetworkInput {
    std::vector<RodInput> rods;
};

/// Frame as a unit quaternion. Matrices drifting from SO(3) by less than
/// 1e-6 are polar-projected; larger drift or det < 0 is rejected.
Quat resolve_frame(const FrameInput &frame, const std::string &where);

struct BuiltNetwork {
    Network network;
    std::vector<std::optional<xsection::SectionStiffness>> sections; ///< per rod
};

/// Resolves frames and stiffnesses (computing H from sections when given).
BuiltNetwork build_network(const NetworkInput &input, int threads = 1);

} // namespace rodnet
