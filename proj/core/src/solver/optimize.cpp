#include "rodnet/solver.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <string>

namespace rodnet::solver {

namespace {

// Largest rotation (radians) any node may take in one trial step.
constexpr double max_node_rotation = 0.5;

double max_block_norm(const Vector &v)
{
    double m = 0.0;
    for (Eigen::Index b = 0; b < v.size() / 3; ++b)
        m = std::max(m, v.segment<3>(3 * b).norm());
    return m;
}

class NewtonDirection {
public:
    Vector operator()(const Eigen::SparseMatrix<double> &H, const Vector &g)
    {
        if (!analyzed_) {
            ldlt_.analyzePattern(H);
            analyzed_ = true;
        }
        const double dmax = H.diagonal().cwiseAbs().maxCoeff();
        Eigen::SparseMatrix<double> I(H.rows(), H.cols());
        I.setIdentity();
        double tau = 0.0;
        for (int attempt = 0; attempt < 40; ++attempt) {
            ldlt_.factorize(tau == 0.0 ? H : Eigen::SparseMatrix<double>(H + tau * I));
            if (ldlt_.info() == Eigen::Success && ldlt_.vectorD().minCoeff() > 1e-14 * dmax) {
                shift = tau;
                return -ldlt_.solve(g);
            }
            tau = tau == 0.0 ? 1e-8 * std::max(dmax, 1e-300) : 4.0 * tau;
        }
        shift = -1.0;
        return -g;
    }
    double shift = 0.0;

private:
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
};

class Lbfgs {
public:
    explicit Lbfgs(int memory) : memory_(static_cast<std::size_t>(memory)) {}

    void update(const Vector &s, const Vector &y)
    {
        const double sy = s.dot(y);
        if (!(sy > 1e-12 * s.norm() * y.norm()))
            return;
        s_.push_back(s);
        y_.push_back(y);
        rho_.push_back(1.0 / sy);
        if (s_.size() > memory_) {
            s_.pop_front();
            y_.pop_front();
            rho_.pop_front();
        }
    }
    void reset()
    {
        s_.clear();
        y_.clear();
        rho_.clear();
    }
    Vector direction(const Vector &g) const
    {
        Vector q = g;
        const std::size_t m = s_.size();
        std::vector<double> alpha(m);
        for (std::size_t j = m; j-- > 0;) {
            alpha[j] = rho_[j] * s_[j].dot(q);
            q -= alpha[j] * y_[j];
        }
        if (m > 0)
            q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
        for (std::size_t j = 0; j < m; ++j) {
            const double beta = rho_[j] * y_[j].dot(q);
            q += (alpha[j] - beta) * s_[j];
        }
        return -q;
    }

private:
    std::size_t memory_;
    std::deque<Vector> s_, y_;
    std::deque<double> rho_;
};

} // namespace

SolveResult solve(const Network &network, const SolverOptions &options)
{
    return solve(network, options, init_field(network, options));
}

SolveResult solve(const Network &network, const SolverOptions &options, const RotationField &initial)
{
    network.validate();
    options.validate(network.rods.size());
    initial.check_shape(network);
    if (!options.segments.empty()) {
        const std::vector<int> want = options.segments_for(network.rods.size());
        for (std::size_t i = 0; i < want.size(); ++i)
            if (initial.segments(i) != want[i])
                throw ValidationError("initial field of rod " + std::to_string(i) + " has " +
                                      std::to_string(initial.segments(i)) + " segments, options ask for " +
                                      std::to_string(want[i]));
    }

    SolveResult result;
    result.balance = check_balance(network, options.balance_tol);
    if (!result.balance.passed && !options.allow_unbalanced) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "loads violate junction force balance (sum of p_i(0) must vanish): |sum p_i(0)| = "
            << result.balance.resultant.norm() << " exceeds " << result.balance.threshold
            << "; use --allow-unbalanced to override";
        throw ValidationError(msg.str());
    }

    std::vector<int> seg(initial.rods());
    for (std::size_t i = 0; i < initial.rods(); ++i)
        seg[i] = initial.segments(i);
    const Problem problem(network, seg, options.threads);

    RotationField field = initial;
    Vector g;
    double E = problem.energy_and_gradient(field, g);
    if (options.project_rigid_rotation)
        project_out_rigid(g);

    SolveTrace &trace = result.trace;
    NewtonDirection newton;
    Lbfgs lbfgs(options.lbfgs_memory);
    double last_step = 0.0;
    double alpha_gd = 1.0;

    for (int it = 0;; ++it) {
        const double gnorm = g.norm();
        trace.entries.push_back({it, E, gnorm, last_step});
        trace.iterations = it;
        trace.tolerance = options.g_tol * (1.0 + std::abs(E));
        if (!std::isfinite(E) || !std::isfinite(gnorm)) {
            trace.termination = Termination::non_finite;
            trace.message = "non-finite energy or gradient";
            break;
        }
        if (gnorm <= trace.tolerance) {
            trace.termination = Termination::converged;
            break;
        }
        if (it >= options.max_iterations) {
            trace.termination = Termination::max_iterations;
            trace.message = "iteration limit reached";
            break;
        }

        // Both noise and the per-node cap are fixed for this iteration.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (problem.energy_scale(field) + std::abs(E));
        RotationField trial;
        Vector gt;
        double Et = 0.0;
        double alpha = 0.0;
        auto line_search = [&](const Vector &d, double slope, double alpha0) {
            alpha = alpha0;
            const double dmax = max_block_norm(d);
            if (alpha * dmax > max_node_rotation)
                alpha = max_node_rotation / dmax;
            for (int bt = 0; bt <= options.max_backtracks; ++bt) {
                trial = field.retracted(alpha * d);
                Et = problem.energy_and_gradient(trial, gt);
                if (options.project_rigid_rotation)
                    project_out_rigid(gt);
                if (std::isfinite(Et)) {
                    // Armijo is decided by rounding once the predicted decrease drops below the noise.
                    const bool resolved = -alpha * slope > noise;
                    if (resolved ? Et <= E + options.armijo_c1 * alpha * slope : Et <= E + noise && gt.norm() < gnorm)
                        return true;
                }
                alpha *= options.backtrack;
            }
            return false;
        };

        Vector d;
        switch (options.optimizer) {
        case Optimizer::gradient_descent: d = -g; break;
        case Optimizer::lbfgs: d = lbfgs.direction(g); break;
        case Optimizer::newton: d = newton(problem.hessian(field), g); break;
        }
        if (options.project_rigid_rotation)
            project_out_rigid(d);
        double slope = g.dot(d);
        bool steepest = options.optimizer == Optimizer::gradient_descent || !(slope < 0.0);
        if (!(slope < 0.0)) {
            lbfgs.reset();
            d = -g;
            slope = -g.squaredNorm();
        }

        bool accepted = line_search(d, slope, options.optimizer == Optimizer::gradient_descent ? alpha_gd : 1.0);
        if (!accepted && !steepest) {
            steepest = true;
            lbfgs.reset();
            d = -g;
            slope = -g.squaredNorm();
            accepted = line_search(d, slope, alpha_gd);
        }
        if (!accepted) {
            trace.termination = Termination::line_search_failure;
            std::ostringstream msg;
            msg << "line search failed at iteration " << it << " (step underflow, |g| = " << gnorm << ")";
            trace.message = msg.str();
            break;
        }

        if (options.optimizer == Optimizer::lbfgs)
            lbfgs.update(alpha * d, gt - g);
        if (steepest)
            alpha_gd = std::min(1e6, 2.0 * alpha);
        last_step = alpha;
        field = std::move(trial);
        E = Et;
        g = std::move(gt);
    }
    result.field = std::move(field);
    return result;
}

} // namespace rodnet::solver
