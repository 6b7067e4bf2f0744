#include "rodnet/post.hpp"
#include "rodnet/so3.hpp"
#include "rodnet/solver.hpp"
#include "rodnet/xsection.hpp"

#include <Eigen/Geometry>
#include <benchmark/benchmark.h>

#include <numbers>

using namespace rodnet;

namespace {

Network star()
{
    Network n;
    const double angle[3] = {0.0, 110.0, 235.0};
    const double length[3] = {1.0, 0.8, 1.2};
    Vec3 sum = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        RodSpec r;
        r.length = length[i];
        r.frame = Quat(Eigen::AngleAxisd(angle[i] * std::numbers::pi / 180.0, Vec3::UnitZ()));
        r.H << 1.0, 0.1, 0.0, 0.1, 2.0, 0.2, 0.0, 0.2, 1.5;
        r.end_force = r.tangent() + 0.3 * Vec3(0.3 * i, 0.1, 1.0 - 0.5 * i);
        sum += r.end_force;
        n.rods.push_back(r);
    }
    n.rods[2].end_force -= sum;
    return n;
}

solver::RotationField perturbed(const Network &n, int N)
{
    solver::SolverOptions o;
    o.segments = {N};
    o.init = solver::InitKind::perturbed;
    o.amplitude = 0.2;
    o.seed = 1;
    return solver::init_field(n, o);
}

void BM_ComputeH(benchmark::State &state)
{
    const double h = 1.0 / static_cast<double>(state.range(0));
    const auto g = xsection::SectionGeometry::circle(1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(xsection::compute_H(g, {0.3, 1.0}, h, static_cast<int>(state.range(1))));
}
BENCHMARK(BM_ComputeH)->Args({10, 1})->Args({20, 1})->Args({40, 1})->Args({40, 4})->Unit(benchmark::kMillisecond);

void BM_EnergyGradient(benchmark::State &state)
{
    const Network n = star();
    const int N = static_cast<int>(state.range(0));
    const solver::Problem p(n, {N, N, N}, static_cast<int>(state.range(1)));
    const auto f = perturbed(n, N);
    solver::Vector g;
    for (auto _ : state)
        benchmark::DoNotOptimize(p.energy_and_gradient(f, g));
    state.SetComplexityN(N);
}
BENCHMARK(BM_EnergyGradient)->Args({64, 1})->Args({256, 1})->Args({1024, 1})->Args({1024, 4});

void BM_Hessian(benchmark::State &state)
{
    const Network n = star();
    const int N = static_cast<int>(state.range(0));
    const solver::Problem p(n, {N, N, N});
    const auto f = perturbed(n, N);
    for (auto _ : state)
        benchmark::DoNotOptimize(p.hessian(f));
}
BENCHMARK(BM_Hessian)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Solve(benchmark::State &state)
{
    const Network n = star();
    solver::SolverOptions o;
    o.segments = {static_cast<int>(state.range(0))};
    o.optimizer = static_cast<solver::Optimizer>(state.range(1));
    o.max_iterations = 5000;
    for (auto _ : state)
        benchmark::DoNotOptimize(solver::solve(n, o));
}
BENCHMARK(BM_Solve)
    ->Args({32, static_cast<int>(solver::Optimizer::newton)})
    ->Args({128, static_cast<int>(solver::Optimizer::newton)})
    ->Args({32, static_cast<int>(solver::Optimizer::lbfgs)})
    ->Unit(benchmark::kMillisecond);

void BM_Residuals(benchmark::State &state)
{
    const Network n = star();
    const int N = static_cast<int>(state.range(0));
    const auto f = perturbed(n, N);
    for (auto _ : state)
        benchmark::DoNotOptimize(post::residuals(f, n));
}
BENCHMARK(BM_Residuals)->Arg(128)->Unit(benchmark::kMicrosecond);

} // namespace
BENCHMARK_MAIN();
