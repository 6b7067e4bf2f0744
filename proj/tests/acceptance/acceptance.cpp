// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include "scenarios.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace rodnet;
using namespace rodnet::solver;
using namespace rodnet::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

xsection::SectionGeometry unit_square() { return xsection::SectionGeometry::rectangle(1.0, 1.0); }

Outcome section_stiffness()
{
    Outcome o{true, ""};
    const xsection::Material m{0.0, 1.0};

    auto t0 = Clock::now();
    const Mat3 Hc = xsection::compute_H(xsection::SectionGeometry::circle(1.0), m, 0.05).stiffness.H;
    const double tc = seconds_since(t0);
    const auto cc = reference::classical_constants("circle", {1.0}, 0.0, 1.0);
    const double ec = std::max({rel(Hc(0, 0), cc.torsion), rel(Hc(1, 1), cc.bending2), rel(Hc(2, 2), cc.bending3)});

    t0 = Clock::now();
    const Mat3 Hs = xsection::compute_H(unit_square(), m, 0.05).stiffness.H;
    const double ts = seconds_since(t0);
    const double es = rel(Hs(0, 0), reference::rectangle_torsion_constant(1.0, 1.0));

    o.pass = ec <= 0.01 && es <= 0.01 && tc < 30.0 && ts < 30.0;
    o.detail = "circle max rel err " + fmt("%.2e", ec) + " (" + fmt("%.2f", tc) + " s), square torsion " +
               fmt("%.6f", Hs(0, 0)) + " rel err " + fmt("%.2e", es) + " (" + fmt("%.2f", ts) + " s)";
    return o;
}

Outcome section_scaling()
{
    const xsection::Material m{0.0, 1.0};
    const double h = 0.05;
    const Mat3 H1 = xsection::compute_H(unit_square(), m, h).stiffness.H;
    double worst = 0.0;
    for (double c : {0.5, 2.0}) {
        const Mat3 Hc = xsection::compute_H(unit_square().scaled(c), m, c * h).stiffness.H;
        const Mat3 expect = std::pow(c, 4) * H1;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                worst = std::max(worst, std::abs(Hc(i, j) - expect(i, j)) / expect.norm());
    }
    return {worst <= 0.005, "max entry deviation " + fmt("%.2e", worst) + " of |c^4 H|"};
}

Outcome gradient_check()
{
    const auto t0 = Clock::now();
    const Network n = asymmetric_star();
    const Problem p(n, {16, 16, 16});
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const RotationField f = random_field(n, 16, seed, 0.3);
        const Vector g = p.gradient(f);
        Vector fd(g.size());
        for (Eigen::Index j = 0; j < g.size(); ++j) {
            Vector e = Vector::Zero(g.size());
            e(j) = 1e-5;
            fd(j) = (p.energy(f.retracted(e)) - p.energy(f.retracted(-e))) / 2e-5;
        }
        worst = std::max(worst, (g - fd).norm() / fd.norm());
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-6 && t < 10.0, "max rel err " + fmt("%.2e", worst) + " over 20 fields (" + fmt("%.2f", t) + " s)"};
}

Outcome unloaded_equilibrium()
{
    std::vector<Network> nets = {asymmetric_star().with_scaled_loads(0.0), planar_star().with_scaled_loads(0.0),
                                 strut(0.0)};
    Network mixed = asymmetric_star().with_scaled_loads(0.0);
    mixed.rods[1].frame = so3::exp(Vec3(0.3, -1.1, 0.4)) * mixed.rods[1].frame;
    nets.push_back(mixed);
    bool ok = true;
    double worst = 0.0;
    int iters = 0;
    for (const Network &n : nets) {
        SolverOptions o;
        o.segments = {24};
        const SolveResult r = solve(n, o);
        const auto &res = post::residuals(r.field, n).residuals;
        worst = std::max({worst, res.max_ode_couple(), res.max_end_couple(), res.junction_force, res.junction_couple,
                          res.junction_rotation_spread, res.junction_position_spread, res.inextensibility});
        iters = std::max(iters, r.trace.iterations);
        ok = ok && r.converged() && r.trace.iterations == 0;
    }
    ok = ok && worst <= 1e-10;
    return {ok, std::to_string(nets.size()) + " networks, max iterations " + std::to_string(iters) +
                    ", max residual " + fmt("%.1e", worst)};
}

Outcome linearization()
{
    const auto t0 = Clock::now();
    const int N = 256;
    const Network base = planar_star();
    std::vector<double> disc;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
        const Network n = base.with_scaled_loads(eps);
        SolverOptions o;
        o.segments = {N};
        o.g_tol = 1e-14;
        o.max_iterations = 50;
        const SolveResult r = solve(n, o);
        const auto y = post::recover_centerline(r.field, n);
        const auto yl = reference::solve_linearized(n, N).centerline(n);
        double d = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            for (std::size_t k = 0; k < y[i].size(); ++k)
                d = std::max(d, (y[i][k] - yl[i][k]).norm());
        disc.push_back(d);
    }
    const double r1 = disc[0] / disc[1], r2 = disc[1] / disc[2];
    const double t = seconds_since(t0);
    const bool ok = r1 >= 3.2 && r1 <= 4.8 && r2 >= 3.2 && r2 <= 4.8 && t < 120.0;
    return {ok, "discrepancies " + fmt("%.3e", disc[0]) + ", " + fmt("%.3e", disc[1]) + ", " + fmt("%.3e", disc[2]) +
                    "; ratios " + fmt("%.3f", r1) + ", " + fmt("%.3f", r2) + " (" + fmt("%.1f", t) + " s)"};
}

Outcome euler_buckling()
{
    const auto t0 = Clock::now();
    const int N = 64;
    const double Pc = euler_load(strut(1.0));
    auto lowest = [&](double P) {
        const Network n = strut(P);
        return hessian_min_eig(RotationField(n, {N}), n, 1000, Deflation::always).value;
    };
    double lo = 0.5 * Pc, hi = 1.5 * Pc;
    bool bracket = lowest(lo) > 0.0 && lowest(hi) < 0.0;
    for (int i = 0; i < 30 && bracket; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lowest(mid) > 0.0 ? lo : hi) = mid;
    }
    const double ratio = 0.5 * (lo + hi) / Pc;

    const Network n = strut(1.5 * Pc);
    SolverOptions o;
    o.segments = {N};
    o.allow_unbalanced = true;
    o.project_rigid_rotation = true;
    o.init = InitKind::perturbed;
    o.amplitude = 1e-2;
    o.seed = 7;
    o.g_tol = 1e-11;
    const SolveResult r = solve(n, o);
    const double Eb = energy(r.field, n), Es = energy(RotationField(n, {N}), n);
    const double t = seconds_since(t0);
    const bool ok = bracket && std::abs(ratio - 1.0) <= 0.05 && r.converged() && Eb < Es && t < 180.0;
    return {ok, "sign change at P/Pc = " + fmt("%.5f", ratio) + "; at 1.5 Pc bent energy " + fmt("%.6f", Eb) +
                    " vs straight " + fmt("%.6f", Es) + " (" + std::to_string(r.trace.iterations) + " iterations, " +
                    fmt("%.1f", t) + " s)"};
}

Outcome differential_residuals()
{
    const Network n = asymmetric_star();
    double H_scale = 0.0;
    for (const RodSpec &r : n.rods)
        H_scale = std::max(H_scale, r.H.norm());
    std::vector<post::Residuals> res;
    bool ok = true;
    double spread = 0.0, end_ratio = 0.0;
    for (int N : {32, 64, 128}) {
        SolverOptions o;
        o.segments = {N};
        o.g_tol = 1e-12;
        const SolveResult r = solve(n, o);
        ok = ok && r.converged();
        const auto rep = post::residuals(r.field, n);
        double strain_scale = 0.0;
        for (const auto &rod : rep.rods)
            for (const Vec3 &s : rod.strain)
                strain_scale = std::max(strain_scale, s.norm());
        spread = std::max({spread, rep.residuals.junction_rotation_spread, rep.residuals.junction_position_spread});
        end_ratio = std::max(end_ratio, rep.residuals.max_end_couple() / (H_scale * strain_scale));
        res.push_back(rep.residuals);
    }
    const double o1 = res[0].max_ode_couple() / res[1].max_ode_couple();
    const double o2 = res[1].max_ode_couple() / res[2].max_ode_couple();
    const double j1 = res[0].junction_couple / res[1].junction_couple;
    const double j2 = res[1].junction_couple / res[2].junction_couple;
    ok = ok && o1 >= 1.7 && o2 >= 1.7 && j1 >= 1.7 && j2 >= 1.7 && spread <= 1e-14 && end_ratio <= 1e-6;
    return {ok, "ode ratios " + fmt("%.2f", o1) + ", " + fmt("%.2f", o2) + "; junction couple ratios " + fmt("%.2f", j1) +
                    ", " + fmt("%.2f", j2) + "; spreads " + fmt("%.1e", spread) + "; end couple / scale " +
                    fmt("%.1e", end_ratio)};
}

Outcome frame_indifference()
{
    const Network n = asymmetric_star();
    const int N = 32;
    SolverOptions o;
    o.segments = {N};
    o.g_tol = 1e-12;
    o.init = InitKind::perturbed;
    o.amplitude = 0.05;
    o.seed = 11;
    const RotationField init = init_field(n, o);
    const SolveResult a = solve(n, o, init);

    const Quat G = so3::exp(Vec3(0.7, -1.3, 0.4));
    const Network ng = n.with_rotated_loads(G.toRotationMatrix());
    const SolveResult b = solve(ng, o, init.rotated(G));

    double worst = 0.0;
    for (std::size_t i = 0; i < n.rods.size(); ++i)
        for (int k = 0; k <= N; ++k)
            worst = std::max(worst, so3::geodesic_distance(b.field.node(i, k), G * a.field.node(i, k)));
    const double dE = std::abs(energy(a.field, n) - energy(b.field, ng));
    const bool ok = a.converged() && b.converged() && worst <= 1e-8 && dE <= 1e-10;
    return {ok, "max geodesic distance " + fmt("%.1e", worst) + ", energy difference " + fmt("%.1e", dE)};
}

Outcome determinism()
{
    const auto dir = scratch_dir("acceptance_det");
    const std::string base = "solve --config \"" + data_path("star.json").string() +
                             "\" --seed 7 --init perturbed:1e-3 --emit-plot-data --out \"" + dir.string();
    int status = 0;
    status |= run_cli(base + "/a\" --threads 1");
    status |= run_cli(base + "/b\" --threads 1");
    status |= run_cli(base + "/c\" --threads 4");
    const bool same_ab = same_tree(dir / "a", dir / "b");
    const bool same_ac = same_tree(dir / "a", dir / "c");
    return {status == 0 && same_ab && same_ac, std::string("repeat ") + (same_ab ? "identical" : "DIFFERS") +
                                                   ", threads 1 vs 4 " + (same_ac ? "identical" : "DIFFERS")};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 cross-section stiffness", section_stiffness},
        {"2 section scaling law", section_scaling},
        {"3 gradient vs finite differences", gradient_check},
        {"4 unloaded equilibrium", unloaded_equilibrium},
        {"5 linearization consistency", linearization},
        {"6 Euler buckling", euler_buckling},
        {"7 differential residuals", differential_residuals},
        {"8 frame indifference", frame_indifference},
        {"9 determinism", determinism},
    };
    int failures = 0;
    for (const auto &[name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
