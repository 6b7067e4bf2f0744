#pragma once

// Discrete rotation fields and the reduced energy
//   J(R) = sum_i [ 1/2 int H_i s_i . s_i - int p_i . R_i e1 ]
// with s_i the material strain (axial vector of R^T R'). Rod i is sampled at
// x_k = k L_i / N_i; its first node is R_J Q_i, built from the shared junction
// rotation, so the junction constraint holds by construction.
//
// Tangent vectors are flat Eigen vectors: the junction's 3 entries first,
// then nodes 1..N of rod 0, rod 1, ... Each 3-block is a spatial rotation
// vector acting by left multiplication, R <- exp(hat(v)) R.

#include "rodnet/model.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <vector>

namespace rodnet::solver {

using Vector = Eigen::VectorXd;

class RotationField {
public:
    RotationField() = default;
    /// Straight state: R_J = I, every node equal to Q_i.
    RotationField(const Network &network, const std::vector<int> &segments);

    std::size_t rods() const { return frames_.size(); }
    int segments(std::size_t rod) const { return static_cast<int>(free_[rod].size()); }
    std::size_t dimension() const;
    /// Offset of node k >= 1 of `rod` in a tangent vector.
    std::size_t offset(std::size_t rod, int k) const;

    const Quat &junction() const { return junction_; }
    void set_junction(const Quat &q);
    const Quat &frame(std::size_t rod) const { return frames_[rod]; }
    /// Node k of rod; k = 0 is computed as R_J Q_i.
    Quat node(std::size_t rod, int k) const;
    /// k must be >= 1.
    void set_node(std::size_t rod, int k, const Quat &q);

    /// exp(v) applied on the left at every node (and at the junction).
    RotationField retracted(const Vector &v) const;
    /// Global left rotation G R of every node; frames are unchanged.
    RotationField rotated(const Quat &G) const;

    /// Throws ValidationError when shapes or frames differ from the network.
    void check_shape(const Network &network) const;

private:
    Quat junction_ = Quat::Identity();
    std::vector<Quat> frames_;
    std::vector<std::vector<Quat>> free_; ///< nodes 1..N per rod
    std::vector<std::size_t> offsets_;
};

/// Material strains at segment midpoints: log(R_k^T R_{k+1}) / h.
std::vector<std::vector<Vec3>> strains(const RotationField &field, const Network &network);

enum class Optimizer { gradient_descent, lbfgs, newton };
enum class InitKind { straight, provided, perturbed };

struct SolverOptions {
    std::vector<int> segments;       ///< per rod; a single entry applies to all rods
    double g_tol = 1e-8;             ///< scaled by (1 + |energy|)
    int max_iterations = 500;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
    Optimizer optimizer = Optimizer::newton;
    int lbfgs_memory = 12;
    InitKind init = InitKind::straight;
    std::uint64_t seed = 0;
    double amplitude = 0.0;
    bool allow_unbalanced = false;
    double balance_tol = 1e-10;
    /// Removes the global-rotation component (equal rotation vector at every
    /// node) from gradients and steps.
    bool project_rigid_rotation = false;
    int threads = 1;

    /// Throws ValidationError on inconsistent settings.
    void validate(std::size_t rods) const;
    std::vector<int> segments_for(std::size_t rods) const;
};

Optimizer parse_optimizer(const std::string &name);
std::string to_string(Optimizer optimizer);

/// Straight or seeded perturbed initial field (InitKind::provided is treated
/// as straight here; callers pass their own field to solve()).
RotationField init_field(const Network &network, const SolverOptions &options);

/// Discretized problem: caches h and the contact force at segment midpoints.
class Problem {
public:
    Problem(const Network &network, const std::vector<int> &segments, int threads = 1);

    const Network &network() const { return network_; }
    const std::vector<int> &segments() const { return segments_; }
    double h(std::size_t rod) const { return h_[rod]; }
    const Vec3 &midpoint_load(std::size_t rod, int k) const { return p_mid_[rod][k]; }

    double energy(const RotationField &field) const;
    /// Per-rod energies (same summation order as energy()).
    std::vector<double> rod_energies(const RotationField &field) const;
    /// Sum of |segment energy|; sets the roundoff floor of energy comparisons.
    double energy_scale(const RotationField &field) const;
    Vector gradient(const RotationField &field) const;
    double energy_and_gradient(const RotationField &field, Vector &gradient) const;

    /// Symmetric Hessian in the left-trivialized coordinates, assembled from
    /// per-segment blocks obtained by differencing the analytic gradient.
    Eigen::SparseMatrix<double> hessian(const RotationField &field) const;

    /// Hessian-vector product by central differences of the gradient, with the
    /// correction that makes it the Hessian of the pulled-back energy.
    Vector hessian_vector(const RotationField &field, const Vector &v, double step = 1e-6) const;

    int threads() const { return threads_; }

private:
    Network network_;
    std::vector<int> segments_;
    std::vector<double> h_;
    std::vector<std::vector<Vec3>> p_mid_;
    int threads_ = 1;
};

double energy(const RotationField &field, const Network &network);
Vector gradient(const RotationField &field, const Network &network);

/// Removes the equal-per-node component from v in place.
void project_out_rigid(Vector &v);

struct TraceEntry {
    int iteration = 0;
    double energy = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
};

enum class Termination { converged, max_iterations, line_search_failure, non_finite };
std::string to_string(Termination t);

struct SolveTrace {
    std::vector<TraceEntry> entries;
    Termination termination = Termination::converged;
    std::string message;
    int iterations = 0;
    double tolerance = 0.0; ///< absolute gradient tolerance actually used
};

struct SolveResult {
    RotationField field;
    SolveTrace trace;
    BalanceReport balance;
    bool converged() const { return trace.termination == Termination::converged; }
};

/// Minimizes the discrete energy. Throws ValidationError for unbalanced
/// networks unless options.allow_unbalanced.
SolveResult solve(const Network &network, const SolverOptions &options);
SolveResult solve(const Network &network, const SolverOptions &options, const RotationField &initial);

enum class Deflation { automatic, always, never };

struct EigenEstimate {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string warning;
};

/// Smallest eigenvalue of the discrete Hessian by Lanczos iteration with full
/// reorthogonalization on finite-difference Hessian-vector products. With
/// deflation the global-rotation directions are removed; `automatic` deflates
/// only for unloaded networks.
EigenEstimate hessian_min_eig(const RotationField &field, const Network &network, int probes,
                              Deflation deflation = Deflation::automatic, int threads = 1);

} // namespace rodnet::solver
