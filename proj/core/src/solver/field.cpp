#include "rodnet/solver.hpp"
#include "rodnet/so3.hpp"

#include <random>

namespace rodnet::solver {

RotationField::RotationField(const Network &network, const std::vector<int> &segments)
{
    if (segments.size() != network.rods.size())
        throw ValidationError("segment counts do not match the number of rods");
    frames_.reserve(network.rods.size());
    free_.resize(network.rods.size());
    offsets_.resize(network.rods.size());
    std::size_t off = 3;
    for (std::size_t i = 0; i < network.rods.size(); ++i) {
        if (segments[i] < 2)
            throw ValidationError("rods[" + std::to_string(i) + "]: at least 2 segments are required");
        frames_.push_back(network.rods[i].frame);
        free_[i].assign(static_cast<std::size_t>(segments[i]), network.rods[i].frame);
        offsets_[i] = off;
        off += 3 * static_cast<std::size_t>(segments[i]);
    }
}

std::size_t RotationField::dimension() const
{
    std::size_t d = 3;
    for (const auto &f : free_)
        d += 3 * f.size();
    return d;
}

std::size_t RotationField::offset(std::size_t rod, int k) const
{
    if (k == 0)
        return 0;
    return offsets_[rod] + 3 * static_cast<std::size_t>(k - 1);
}

void RotationField::set_junction(const Quat &q) { junction_ = so3::canonical(q); }

Quat RotationField::node(std::size_t rod, int k) const
{
    if (k == 0)
        return so3::canonical(junction_ * frames_[rod]);
    return free_[rod][static_cast<std::size_t>(k - 1)];
}

void RotationField::set_node(std::size_t rod, int k, const Quat &q)
{
    if (k < 1)
        throw std::out_of_range("first node is determined by the junction rotation");
    free_[rod][static_cast<std::size_t>(k - 1)] = so3::canonical(q);
}

RotationField RotationField::retracted(const Vector &v) const
{
    RotationField out = *this;
    out.junction_ = so3::perturb(junction_, v.segment<3>(0));
    for (std::size_t i = 0; i < free_.size(); ++i)
        for (std::size_t k = 0; k < free_[i].size(); ++k)
            out.free_[i][k] = so3::perturb(free_[i][k], v.segment<3>(offsets_[i] + 3 * k));
    return out;
}

RotationField RotationField::rotated(const Quat &G) const
{
    RotationField out = *this;
    out.junction_ = (G * junction_).normalized();
    for (auto &rod : out.free_)
        for (auto &q : rod)
            q = (G * q).normalized();
    return out;
}

void RotationField::check_shape(const Network &network) const
{
    if (network.rods.size() != frames_.size())
        throw ValidationError("field has " + std::to_string(frames_.size()) + " rods, network has " +
                              std::to_string(network.rods.size()));
    for (std::size_t i = 0; i < frames_.size(); ++i)
        if (so3::geodesic_distance(frames_[i], network.rods[i].frame) > 1e-12)
            throw ValidationError("rods[" + std::to_string(i) + "]: field frame differs from the network frame");
}

std::vector<std::vector<Vec3>> strains(const RotationField &field, const Network &network)
{
    field.check_shape(network);
    std::vector<std::vector<Vec3>> out(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i) {
        const int n = field.segments(i);
        const double h = network.rods[i].length / n;
        out[i].resize(static_cast<std::size_t>(n));
        Quat a = field.node(i, 0);
        for (int k = 0; k < n; ++k) {
            const Quat b = field.node(i, k + 1);
            out[i][static_cast<std::size_t>(k)] = so3::log(a.conjugate() * b) / h;
            a = b;
        }
    }
    return out;
}

void SolverOptions::validate(std::size_t rods) const
{
    if (!segments.empty() && segments.size() != 1 && segments.size() != rods)
        throw ValidationError("solver.segments must have one entry or one per rod");
    for (int n : segments)
        if (n < 2)
            throw ValidationError("solver.segments must be at least 2");
    if (!(g_tol > 0.0))
        throw ValidationError("solver.g_tol must be positive");
    if (max_iterations < 0)
        throw ValidationError("solver.max_iterations must be nonnegative");
    if (!(armijo_c1 > 0.0 && armijo_c1 < 0.5))
        throw ValidationError("solver.armijo_c1 must lie in (0, 1/2)");
    if (!(backtrack > 0.0 && backtrack < 1.0))
        throw ValidationError("solver.backtrack must lie in (0, 1)");
    if (lbfgs_memory < 1)
        throw ValidationError("solver.lbfgs_memory must be positive");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ValidationError("solver.amplitude must be nonnegative");
    if (!(balance_tol > 0.0))
        throw ValidationError("solver.balance_tol must be positive");
    if (threads < 1)
        throw ValidationError("threads must be at least 1");
}

std::vector<int> SolverOptions::segments_for(std::size_t rods) const
{
    if (segments.empty())
        return std::vector<int>(rods, 32);
    if (segments.size() == 1)
        return std::vector<int>(rods, segments[0]);
    return segments;
}

Optimizer parse_optimizer(const std::string &name)
{
    if (name == "gradient-descent" || name == "gd")
        return Optimizer::gradient_descent;
    if (name == "lbfgs" || name == "quasi-newton")
        return Optimizer::lbfgs;
    if (name == "newton")
        return Optimizer::newton;
    throw ValidationError("unknown optimizer '" + name + "' (expected gradient-descent, lbfgs or newton)");
}

std::string to_string(Optimizer optimizer)
{
    switch (optimizer) {
    case Optimizer::gradient_descent: return "gradient-descent";
    case Optimizer::lbfgs: return "lbfgs";
    case Optimizer::newton: return "newton";
    }
    return "?";
}

RotationField init_field(const Network &network, const SolverOptions &options)
{
    options.validate(network.rods.size());
    RotationField field(network, options.segments_for(network.rods.size()));
    if (options.init != InitKind::perturbed || options.amplitude == 0.0)
        return field;

    // Raw 64-bit draws mapped to [-1, 1) with 53 bits, independent of the
    // standard library's distribution implementations.
    std::mt19937_64 rng(options.seed);
    auto uniform = [&rng]() { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };

    const std::size_t dim = field.dimension();
    Vector v(dim);
    for (std::size_t j = 0; j < dim; ++j)
        v(j) = options.amplitude * uniform();

    // The draws are body-frame vectors, R <- R exp(xi); convert to spatial.
    Vector spatial(dim);
    spatial.segment<3>(0) = field.junction().toRotationMatrix() * v.segment<3>(0);
    for (std::size_t i = 0; i < field.rods(); ++i)
        for (int k = 1; k <= field.segments(i); ++k) {
            const std::size_t o = field.offset(i, k);
            spatial.segment<3>(o) = field.node(i, k).toRotationMatrix() * v.segment<3>(o);
        }
    if (options.project_rigid_rotation)
        project_out_rigid(spatial);
    return field.retracted(spatial);
}

void project_out_rigid(Vector &v)
{
    const Eigen::Index blocks = v.size() / 3;
    Vec3 mean = Vec3::Zero();
    for (Eigen::Index b = 0; b < blocks; ++b)
        mean += v.segment<3>(3 * b);
    mean /= static_cast<double>(blocks);
    for (Eigen::Index b = 0; b < blocks; ++b)
        v.segment<3>(3 * b) -= mean;
}

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::line_search_failure: return "line_search_failure";
    case Termination::non_finite: return "non_finite";
    }
    return "?";
}

} // namespace rodnet::solver
