#pragma once

// Cross-section stiffness: the reduced quadratic form obtained by minimizing
// the linearized elastic energy density over in-section warping fields, for
// a prescribed material strain (twist, two curvatures). The form is
// represented by a 3x3 SPD matrix H with q2(s) = s . H s.

#include "rodnet/types.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace rodnet::xsection {

/// Isotropic linearized material, D^2 W(I)(G, G) = 2 mu |sym G|^2 + lambda (tr G)^2.
struct Material {
    double lambda = 0.0;
    double mu = 1.0;

    /// Throws ValidationError unless mu > 0 and lambda >= 0.
    void validate() const;
    double young_modulus() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
};

enum class SectionKind { circle, rectangle, polygon };

/// Planar section in the (x2, x3) plane. Circles keep their exact description
/// and are polygonized only when meshed.
struct SectionGeometry {
    SectionKind kind = SectionKind::polygon;
    std::vector<Vec2> vertices; ///< polygon boundary, counter-clockwise after validation
    Vec2 center = Vec2::Zero();  ///< circle only
    double radius = 0.0;        ///< circle only
    double width = 0.0;         ///< rectangle extent along x2
    double height = 0.0;        ///< rectangle extent along x3

    static SectionGeometry circle(double radius, Vec2 center = Vec2::Zero());
    static SectionGeometry rectangle(double width, double height);
    static SectionGeometry polygon(std::vector<Vec2> vertices);

    SectionGeometry scaled(double factor) const;
};

/// Boundary polygon of the section. Circles are approximated by an inscribed
/// regular polygon whose chords do not exceed `target_edge` (and with at least
/// 96 sides, so the area defect stays below 1e-3 relative).
std::vector<Vec2> boundary_polygon(const SectionGeometry &geometry, double target_edge);

/// Exact polygon moments from Green's theorem.
struct PolygonMoments {
    double area = 0.0;
    double first_x2 = 0.0;  ///< integral of x2
    double first_x3 = 0.0;  ///< integral of x3
    double second_x2 = 0.0; ///< integral of x2^2
    double second_x3 = 0.0; ///< integral of x3^2
    double product = 0.0;   ///< integral of x2 x3
};
PolygonMoments polygon_moments(const std::vector<Vec2> &vertices);

/// Rigid motion that was applied: x_new = Rot(-angle) (x - centroid).
struct Normalization {
    Vec2 centroid = Vec2::Zero();
    double rotation_angle = 0.0;
};

struct NormalizedSection {
    SectionGeometry geometry;
    Normalization transform;
};

/// Translates to the centroid and rotates onto principal axes, so the first
/// moments and the product moment vanish. Throws ValidationError on a
/// degenerate (zero-area or self-intersecting) polygon.
NormalizedSection normalize_section(const SectionGeometry &geometry);

struct TriMesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles; ///< counter-clockwise
    std::vector<double> areas;

    double total_area() const;
    double max_edge() const;
};

/// Meshing failure; `vertex_index` points into the input polygon.
class MeshingError : public ValidationError {
public:
    MeshingError(const std::string &what, std::size_t vertex_index);
    std::size_t vertex_index() const { return vertex_index_; }

private:
    std::size_t vertex_index_;
};

/// Conforming triangulation of the (normalized) section with every edge no
/// longer than target_edge. Boundary segments are split uniformly, the polygon
/// is ear-clipped, made constrained-Delaunay by edge flips, and refined by
/// splitting the longest edge until the size bound holds.
TriMesh triangulate(const SectionGeometry &geometry, double target_edge);

/// Splits every triangle into four through edge midpoints (nested refinement).
TriMesh refine_uniform(const TriMesh &mesh);

double q3_isotropic(const Mat3 &G, const Material &material);

struct WarpingField {
    std::vector<Vec3> values; ///< per node
    double minimum = 0.0;     ///< discrete q2(s)
};

/// P1 discretization of the warping problem on one mesh. The constrained
/// system (zero mean warping, zero mean in-plane rotation) is factorized once
/// and reused for every strain.
class WarpingProblem {
public:
    WarpingProblem(const TriMesh &mesh, const Material &material, int threads = 1);
    ~WarpingProblem();
    WarpingProblem(WarpingProblem &&) noexcept;
    WarpingProblem &operator=(WarpingProblem &&) noexcept;

    WarpingField solve(const Vec3 &strain) const;

    /// Integral of the warping field and of its in-plane rotation measure
    /// d2 a3 - d3 a2; both vanish for solutions.
    Vec3 mean(const WarpingField &field) const;
    double mean_rotation(const WarpingField &field) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

WarpingField solve_warping(const TriMesh &mesh, const Material &material, const Vec3 &strain);

struct StiffnessForm {
    Mat3 H = Mat3::Identity();

    /// Symmetrizes and checks positive definiteness with threshold
    /// 1e-10 * trace(H) / 3. Throws NumericalError otherwise.
    static StiffnessForm from_matrix(const Mat3 &H);
    double min_eigenvalue() const;
};

struct SectionStiffness {
    StiffnessForm stiffness;
    std::size_t mesh_nodes = 0;
    std::size_t mesh_triangles = 0;
    Normalization normalization;
};

/// H by polarization over the canonical strain basis:
/// H_jj = q2(e_j), H_jk = (q2(e_j + e_k) - q2(e_j) - q2(e_k)) / 2.
SectionStiffness compute_H(const SectionGeometry &geometry, const Material &material,
                           double target_edge, int threads = 1);

} // namespace rodnet::xsection
