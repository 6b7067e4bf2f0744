#include "rodnet/xsection.hpp"
#include "rodnet/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace rodnet::xsection {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat93 = Eigen::Matrix<double, 9, 3>;

double q3_isotropic(const Mat3 &G, const Material &material)
{
    const Mat3 S = 0.5 * (G + G.transpose());
    const double tr = G.trace();
    return 2.0 * material.mu * S.squaredNorm() + material.lambda * tr * tr;
}

namespace {

// Column-major flattening of G: entry (r, c) -> r + 3 c.
constexpr int flat(int r, int c) { return r + 3 * c; }

Mat9 energy_matrix(const Material &m)
{
    Mat9 C = Mat9::Zero();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            C(flat(r, c), flat(r, c)) += 0.5 * 2.0 * m.mu;
            C(flat(r, c), flat(c, r)) += 0.5 * 2.0 * m.mu;
        }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            C(flat(r, r), flat(c, c)) += m.lambda;
    return C;
}

// First column of G as a linear map of the strain: s x (0, x2, x3).
Mat93 strain_column(const Vec2 &x)
{
    Mat93 G = Mat93::Zero();
    G(0, 1) = x.y();
    G(0, 2) = -x.x();
    G(1, 0) = -x.y();
    G(2, 0) = x.x();
    return G;
}

struct ElementBlocks {
    std::array<int, 3> nodes;
    Mat9 K;        // stiffness on the 9 nodal warping values
    Mat93 B;       // coupling to the strain
    Mat3 C;        // strain-strain part
    std::array<Vec2, 3> grad; // shape function gradients
    double area;
};

} // namespace

struct WarpingProblem::Impl {
    std::size_t node_count = 0;
    std::vector<ElementBlocks> elements;
    Eigen::SparseMatrix<double> coupling; // n x 3
    Eigen::SparseMatrix<double> stiffness; // n x n
    Mat3 strain_energy = Mat3::Zero();
    // Reduced system with the energy nullspace pinned: all of node `anchor`
    // plus one component of node `lever`.
    std::vector<int> reduced_index; // full dof -> reduced dof or -1
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
    Eigen::Matrix<double, Eigen::Dynamic, 4> constraints;   // n x 4 functionals
    Eigen::Matrix<double, Eigen::Dynamic, 4> nullspace;     // n x 4 zero-energy fields
    Eigen::Matrix4d gauge_matrix;                           // constraints^T nullspace
};

WarpingProblem::WarpingProblem(const TriMesh &mesh, const Material &material, int threads)
    : impl_(std::make_unique<Impl>())
{
    material.validate();
    if (mesh.triangles.empty())
        throw ValidationError("warping problem needs a non-empty mesh");
    const Mat9 C = energy_matrix(material);
    const std::size_t ne = mesh.triangles.size();
    impl_->node_count = mesh.nodes.size();
    impl_->elements.resize(ne);

    parallel_for(ne, threads, [&](std::size_t e) {
        ElementBlocks &blk = impl_->elements[e];
        blk.nodes = mesh.triangles[e];
        const Vec2 &p0 = mesh.nodes[blk.nodes[0]];
        const Vec2 &p1 = mesh.nodes[blk.nodes[1]];
        const Vec2 &p2 = mesh.nodes[blk.nodes[2]];
        const std::array<const Vec2 *, 3> p{&p0, &p1, &p2};
        const double area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x()));
        if (!(area > 0.0))
            throw ValidationError("mesh element " + std::to_string(e) + " has non-positive area");
        blk.area = area;
        for (int k = 0; k < 3; ++k) {
            const Vec2 &a = *p[(k + 1) % 3];
            const Vec2 &b = *p[(k + 2) % 3];
            blk.grad[k] = Vec2(a.y() - b.y(), b.x() - a.x()) / (2.0 * area);
        }
        Mat9 D = Mat9::Zero(); // nodal values -> flattened [0 | d2 a | d3 a]
        for (int k = 0; k < 3; ++k)
            for (int r = 0; r < 3; ++r) {
                D(flat(r, 1), 3 * k + r) = blk.grad[k].x();
                D(flat(r, 2), 3 * k + r) = blk.grad[k].y();
            }
        blk.K = area * D.transpose() * C * D;
        const Vec2 centroid = (p0 + p1 + p2) / 3.0;
        blk.B = area * D.transpose() * C * strain_column(centroid);
        // Edge-midpoint rule, exact for the quadratic integrand.
        blk.C.setZero();
        for (int k = 0; k < 3; ++k) {
            const Mat93 G = strain_column(0.5 * (*p[k] + *p[(k + 1) % 3]));
            blk.C += (area / 3.0) * G.transpose() * C * G;
        }
    });

    const std::size_t n = 3 * impl_->node_count;
    std::vector<Eigen::Triplet<double>> kt, bt;
    kt.reserve(ne * 81);
    bt.reserve(ne * 27);
    for (const auto &blk : impl_->elements) {
        for (int i = 0; i < 9; ++i) {
            const int gi = 3 * blk.nodes[i / 3] + i % 3;
            for (int j = 0; j < 9; ++j) {
                const int gj = 3 * blk.nodes[j / 3] + j % 3;
                kt.emplace_back(gi, gj, blk.K(i, j));
            }
            for (int j = 0; j < 3; ++j)
                bt.emplace_back(gi, j, blk.B(i, j));
        }
        impl_->strain_energy += blk.C;
    }
    impl_->stiffness.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    impl_->stiffness.setFromTriplets(kt.begin(), kt.end());
    impl_->coupling.resize(static_cast<Eigen::Index>(n), 3);
    impl_->coupling.setFromTriplets(bt.begin(), bt.end());

    // Uniqueness functionals: integral of each warping component, and of the
    // in-plane rotation measure d2 a3 - d3 a2.
    auto &Cm = impl_->constraints;
    Cm.setZero(static_cast<Eigen::Index>(n), 4);
    for (const auto &blk : impl_->elements) {
        for (int k = 0; k < 3; ++k) {
            const int node = blk.nodes[k];
            for (int r = 0; r < 3; ++r)
                Cm(3 * node + r, r) += blk.area / 3.0;
            Cm(3 * node + 2, 3) += blk.area * blk.grad[k].x();
            Cm(3 * node + 1, 3) -= blk.area * blk.grad[k].y();
        }
    }
    // Zero-energy fields: translations and the in-plane rotation (0, -x3, x2).
    auto &N = impl_->nullspace;
    N.setZero(static_cast<Eigen::Index>(n), 4);
    for (std::size_t k = 0; k < impl_->node_count; ++k) {
        for (int r = 0; r < 3; ++r)
            N(static_cast<Eigen::Index>(3 * k + r), r) = 1.0;
        N(static_cast<Eigen::Index>(3 * k + 1), 3) = -mesh.nodes[k].y();
        N(static_cast<Eigen::Index>(3 * k + 2), 3) = mesh.nodes[k].x();
    }
    impl_->gauge_matrix = Cm.transpose() * N;

    // Pin the nullspace: node 0 entirely, and the rotation through the
    // component of the farthest node that the rotation moves most.
    const int anchor = 0;
    int lever = anchor;
    int lever_comp = 1;
    double best = -1.0;
    for (std::size_t k = 0; k < impl_->node_count; ++k) {
        const Vec2 d = mesh.nodes[k] - mesh.nodes[anchor];
        if (std::abs(d.y()) > best) {
            best = std::abs(d.y());
            lever = static_cast<int>(k);
            lever_comp = 1;
        }
        if (std::abs(d.x()) > best) {
            best = std::abs(d.x());
            lever = static_cast<int>(k);
            lever_comp = 2;
        }
    }
    impl_->reduced_index.assign(n, 0);
    for (int r = 0; r < 3; ++r)
        impl_->reduced_index[3 * anchor + r] = -1;
    impl_->reduced_index[3 * lever + lever_comp] = -1;
    int next = 0;
    for (auto &idx : impl_->reduced_index)
        if (idx == 0)
            idx = next++;

    std::vector<Eigen::Triplet<double>> rt;
    rt.reserve(kt.size());
    for (const auto &t : kt) {
        const int i = impl_->reduced_index[t.row()];
        const int j = impl_->reduced_index[t.col()];
        if (i >= 0 && j >= 0)
            rt.emplace_back(i, j, t.value());
    }
    Eigen::SparseMatrix<double> reduced(next, next);
    reduced.setFromTriplets(rt.begin(), rt.end());
    impl_->factor.compute(reduced);
    if (impl_->factor.info() != Eigen::Success)
        throw NumericalError("warping system is singular");
}

WarpingProblem::~WarpingProblem() = default;
WarpingProblem::WarpingProblem(WarpingProblem &&) noexcept = default;
WarpingProblem &WarpingProblem::operator=(WarpingProblem &&) noexcept = default;

WarpingField WarpingProblem::solve(const Vec3 &strain) const
{
    const auto n = static_cast<Eigen::Index>(3 * impl_->node_count);
    const Eigen::VectorXd b = impl_->coupling * strain;
    const auto &idx = impl_->reduced_index;
    Eigen::VectorXd rhs(impl_->factor.rows());
    for (Eigen::Index i = 0; i < n; ++i)
        if (idx[i] >= 0)
            rhs(idx[i]) = -b(i);
    const Eigen::VectorXd sol = impl_->factor.solve(rhs);
    if (impl_->factor.info() != Eigen::Success || !sol.allFinite())
        throw NumericalError("warping solve failed");
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (idx[i] >= 0)
            a(i) = sol(idx[i]);
    // Move along the zero-energy fields onto the constraint set.
    const Eigen::Vector4d gauge = impl_->gauge_matrix.fullPivLu().solve(-(impl_->constraints.transpose() * a));
    a += impl_->nullspace * gauge;

    WarpingField out;
    out.values.resize(impl_->node_count);
    for (std::size_t k = 0; k < impl_->node_count; ++k)
        out.values[k] = a.segment<3>(static_cast<Eigen::Index>(3 * k));
    const double quad = a.dot(impl_->stiffness * a);
    out.minimum = quad + 2.0 * b.dot(a) + strain.dot(impl_->strain_energy * strain);
    return out;
}

Vec3 WarpingProblem::mean(const WarpingField &field) const
{
    Vec3 m = Vec3::Zero();
    for (const auto &blk : impl_->elements)
        for (int k = 0; k < 3; ++k)
            m += (blk.area / 3.0) * field.values[blk.nodes[k]];
    return m;
}

double WarpingProblem::mean_rotation(const WarpingField &field) const
{
    double r = 0.0;
    for (const auto &blk : impl_->elements)
        for (int k = 0; k < 3; ++k) {
            const Vec3 &a = field.values[blk.nodes[k]];
            r += blk.area * (blk.grad[k].x() * a.z() - blk.grad[k].y() * a.y());
        }
    return r;
}

WarpingField solve_warping(const TriMesh &mesh, const Material &material, const Vec3 &strain)
{
    return WarpingProblem(mesh, material).solve(strain);
}

StiffnessForm StiffnessForm::from_matrix(const Mat3 &H)
{
    if (!H.allFinite())
        throw NumericalError("stiffness matrix is not finite");
    StiffnessForm f;
    f.H = 0.5 * (H + H.transpose());
    const double threshold = 1e-10 * f.H.trace() / 3.0;
    if (!(f.min_eigenvalue() > threshold) || !(threshold > 0.0))
        throw NumericalError("stiffness matrix is not positive definite");
    return f;
}

double StiffnessForm::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<Mat3> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

SectionStiffness compute_H(const SectionGeometry &geometry, const Material &material, double target_edge,
                           int threads)
{
    material.validate();
    const NormalizedSection ns = normalize_section(geometry);
    const TriMesh mesh = triangulate(ns.geometry, target_edge);
    const WarpingProblem problem(mesh, material, threads);

    std::array<double, 3> diag{};
    for (int j = 0; j < 3; ++j)
        diag[j] = problem.solve(Vec3::Unit(j)).minimum;
    Mat3 H;
    for (int j = 0; j < 3; ++j) {
        H(j, j) = diag[j];
        for (int k = j + 1; k < 3; ++k) {
            const double both = problem.solve(Vec3::Unit(j) + Vec3::Unit(k)).minimum;
            H(j, k) = H(k, j) = 0.5 * (both - diag[j] - diag[k]);
        }
    }

    SectionStiffness out;
    out.stiffness = StiffnessForm::from_matrix(H);
    out.mesh_nodes = mesh.nodes.size();
    out.mesh_triangles = mesh.triangles.size();
    out.normalization = ns.transform;
    return out;
}

} // namespace rodnet::xsection
