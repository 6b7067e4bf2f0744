#include "rodnet/model.hpp"
#include "rodnet/so3.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace rodnet {

namespace {

std::string rod_name(std::size_t i) { return "rods[" + std::to_string(i) + "]"; }

void check_stiffness(const Mat3 &H, const std::string &where)
{
    if (!H.allFinite())
        throw ValidationError(where + ".H is not finite");
    if ((H - H.transpose()).norm() > 1e-12 * std::max(1.0, H.norm()))
        throw ValidationError(where + ".H is not symmetric");
    const double tr = H.trace();
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat3>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (!(tr > 0.0) || !(lmin > 1e-10 * tr / 3.0))
        throw ValidationError(where + ".H is not positive definite");
}

} // namespace

void Network::validate() const
{
    if (rods.empty())
        throw ValidationError("network needs at least one rod");
    for (std::size_t i = 0; i < rods.size(); ++i) {
        const RodSpec &r = rods[i];
        const std::string where = rod_name(i);
        if (!(r.length > 0.0) || !std::isfinite(r.length))
            throw ValidationError(where + ".length must be positive");
        if (std::abs(r.frame.squaredNorm() - 1.0) > 2e-12)
            throw ValidationError(where + ".frame is not a unit quaternion");
        check_stiffness(r.H, where);
        if (!r.end_force.allFinite())
            throw ValidationError(where + ".end_force is not finite");
        try {
            r.distributed.validate_support(r.length);
        } catch (const ValidationError &e) {
            throw ValidationError(where + ".distributed: " + e.what());
        }
    }
}

bool Network::unloaded() const
{
    return std::all_of(rods.begin(), rods.end(),
                       [](const RodSpec &r) { return r.distributed.is_zero() && r.end_force.isZero(0.0); });
}

double Network::max_length() const
{
    double m = 0.0;
    for (const auto &r : rods)
        m = std::max(m, r.length);
    return m;
}

double Network::load_scale() const
{
    double m = 0.0;
    for (const auto &r : rods)
        m = std::max(m, contact_force_sup(r));
    return m;
}

Network Network::with_rotated_loads(const Mat3 &G) const
{
    Network out = *this;
    for (auto &r : out.rods) {
        r.distributed = r.distributed.rotated(G);
        r.end_force = G * r.end_force;
    }
    return out;
}

Network Network::with_scaled_loads(double factor) const
{
    Network out = *this;
    for (auto &r : out.rods) {
        r.distributed = r.distributed.scaled(factor);
        r.end_force *= factor;
    }
    return out;
}

Quat resolve_frame(const FrameInput &frame, const std::string &where)
{
    switch (frame.kind) {
    case FrameInput::Kind::quaternion: {
        const Quat &q = frame.quaternion;
        if (!q.coeffs().allFinite() || std::abs(q.norm() - 1.0) > 1e-9)
            throw ValidationError(where + ": quaternion must have unit norm (tolerance 1e-9)");
        return so3::canonical(q);
    }
    case FrameInput::Kind::matrix: {
        const Mat3 &A = frame.matrix;
        if (!A.allFinite())
            throw ValidationError(where + ": frame matrix is not finite");
        if (A.determinant() <= 0.0)
            throw ValidationError(where + ": frame matrix has non-positive determinant (reflection)");
        double drift = 0.0;
        const Mat3 R = so3::polar_project(A, &drift);
        if (drift >= 1e-6)
            throw ValidationError(where + ": frame matrix is not a rotation (distance " + std::to_string(drift) +
                                  " from SO(3))");
        return so3::canonical(Quat(R));
    }
    case FrameInput::Kind::tangent_axis: {
        const Vec3 &t = frame.tangent;
        if (!t.allFinite() || !frame.axis.allFinite() || t.norm() == 0.0)
            throw ValidationError(where + ": tangent must be a nonzero finite vector");
        const Vec3 e1 = t.normalized();
        const Vec3 a = frame.axis - frame.axis.dot(e1) * e1;
        if (a.norm() <= 1e-9 * frame.axis.norm() || a.norm() == 0.0)
            throw ValidationError(where + ": section axis is parallel to the tangent");
        Mat3 R;
        R.col(0) = e1;
        R.col(1) = a.normalized();
        R.col(2) = R.col(0).cross(R.col(1));
        return so3::canonical(Quat(R));
    }
    }
    throw ValidationError(where + ": unknown frame kind");
}

BuiltNetwork build_network(const NetworkInput &input, int threads)
{
    BuiltNetwork out;
    if (input.rods.empty())
        throw ValidationError("rods: at least one rod is required");
    for (std::size_t i = 0; i < input.rods.size(); ++i) {
        const RodInput &in = input.rods[i];
        const std::string where = rod_name(i);
        RodSpec rod;
        if (!(in.length > 0.0) || !std::isfinite(in.length))
            throw ValidationError(where + ".length must be positive");
        rod.length = in.length;
        rod.frame = resolve_frame(in.frame, where + ".frame");
        if (const auto *H = std::get_if<Mat3>(&in.stiffness)) {
            check_stiffness(*H, where + ".stiffness");
            rod.H = 0.5 * (*H + H->transpose());
            out.sections.emplace_back();
        } else {
            const auto &sec = std::get<SectionInput>(in.stiffness);
            try {
                sec.material.validate();
                if (!(sec.mesh_size > 0.0))
                    throw ValidationError("mesh_size must be positive");
                auto st = xsection::compute_H(sec.geometry, sec.material, sec.mesh_size, threads);
                rod.H = st.stiffness.H;
                out.sections.emplace_back(std::move(st));
            } catch (const xsection::MeshingError &e) {
                throw ValidationError(where + ".stiffness.section: " + e.what() + " (vertex " +
                                      std::to_string(e.vertex_index()) + ")");
            } catch (const std::exception &e) {
                throw ValidationError(where + ".stiffness: " + e.what());
            }
        }
        rod.distributed = in.distributed;
        rod.end_force = in.end_force;
        out.network.rods.push_back(std::move(rod));
    }
    out.network.validate();

    const auto &rods = out.network.rods;
    for (std::size_t i = 0; i < rods.size(); ++i)
        for (std::size_t j = i + 1; j < rods.size(); ++j)
            if ((rods[i].tangent() - rods[j].tangent()).norm() < 1e-12)
                out.network.warnings.push_back(rod_name(i) + " and " + rod_name(j) +
                                               " share a tangent (geometrically coincident rods)");
    return out;
}

} // namespace rodnet
