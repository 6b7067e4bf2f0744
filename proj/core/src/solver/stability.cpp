#include "rodnet/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

namespace rodnet::solver {

EigenEstimate hessian_min_eig(const RotationField &field, const Network &network, int probes, Deflation deflation,
                              int threads)
{
    field.check_shape(network);
    if (probes < 1)
        throw ValidationError("probes must be positive");
    std::vector<int> seg(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i)
        seg[i] = field.segments(i);
    const Problem problem(network, seg, threads);

    const bool deflate = deflation == Deflation::always || (deflation == Deflation::automatic && network.unloaded());
    const auto n = static_cast<Eigen::Index>(field.dimension());
    const Eigen::Index reachable = deflate ? n - 3 : n;
    const Eigen::Index m_max = std::min<Eigen::Index>(probes, reachable);

    auto restrict = [&](Vector &v) {
        if (deflate)
            project_out_rigid(v);
    };
    auto apply = [&](const Vector &v) {
        Vector w = problem.hessian_vector(field, v);
        restrict(w);
        return w;
    };

    std::mt19937_64 rng(0x5eed);
    Vector v(n);
    for (Eigen::Index j = 0; j < n; ++j)
        v(j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    restrict(v);
    v.normalize();

    Eigen::MatrixXd V(n, m_max);
    std::vector<double> alpha, beta;
    double scale = 0.0;
    EigenEstimate out;
    Eigen::Index m = 0;
    for (; m < m_max; ++m) {
        V.col(m) = v;
        Vector w = apply(v);
        const double a = v.dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass) {
            w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
            restrict(w);
        }
        const double b = w.norm();
        scale = std::max(scale, std::abs(a) + b);
        beta.push_back(b);
        if (m + 1 == m_max || b <= 1e-12 * std::max(scale, 1e-300)) {
            ++m;
            break;
        }
        v = w / b;
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        T(j, j) = alpha[static_cast<std::size_t>(j)];
        if (j + 1 < m)
            T(j, j + 1) = T(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    out.value = es.eigenvalues()(0);
    out.residual = beta[static_cast<std::size_t>(m - 1)] * std::abs(es.eigenvectors()(m - 1, 0));
    out.iterations = static_cast<int>(m);
    out.converged = out.residual <= 1e-8 * std::max(scale, 1e-300) || m == reachable;
    if (!out.converged) {
        std::ostringstream msg;
        msg << "Lanczos not converged after " << m << " steps (residual " << out.residual << ")";
        out.warning = msg.str();
    }
    return out;
}

} // namespace rodnet::solver
