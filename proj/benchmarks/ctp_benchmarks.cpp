// Microbenchmarks for the hot paths: field materialization and queries,
// collision detection, whole trajectories, kinetic paths, the chain and grid
// solvers, and the W1 distance used by the analysis layer.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "ctp/analysis.hpp"
#include "ctp/kinetic.hpp"
#include "ctp/marginal.hpp"
#include "ctp/obstacle_field.hpp"
#include "ctp/rng.hpp"
#include "ctp/sim.hpp"
#include "ctp/volume_dist.hpp"

namespace {

using namespace ctp;

void BM_MaterializeCell(benchmark::State& state) {
    FieldParams fp;
    fp.seed = 42;
    fp.cell_side = 2.0;
    fp.dist = VolumeDistribution::uniform(0.5, 1.5);
    int64_t i = 0;
    for (auto _ : state) {
        std::vector<Obstacle> cell = materialize_cell(fp, CellIndex{i++, 0, 0});
        benchmark::DoNotOptimize(cell);
    }
}
BENCHMARK(BM_MaterializeCell);

void BM_FieldQueryFreshCells(benchmark::State& state) {
    FieldParams fp;
    fp.seed = 7;
    fp.cell_side = 2.0;
    fp.dist = VolumeDistribution::uniform(0.5, 1.5);
    PoissonField field(fp);
    double x = 0.0;
    for (auto _ : state) {
        Capsule c{{x, 0.0, 0.0}, {x + 10.0, 0.0, 0.0}, 1.0};
        std::vector<Obstacle> hits = field.obstacles_in(c);
        benchmark::DoNotOptimize(hits);
        x += 10.0;
    }
}
BENCHMARK(BM_FieldQueryFreshCells);

void BM_NextCollision(benchmark::State& state) {
    SimParams p;
    p.phi = 1e-2;
    p.T = 1.0;
    p.seed = 3;
    const VolumeDistribution dist = VolumeDistribution::uniform(0.5, 1.5);
    FieldParams fp;
    fp.seed = p.seed;
    fp.cell_side = default_cell_side(p, dist);
    fp.dist = dist;
    PoissonField field(fp);
    Rng rng(99);
    for (auto _ : state) {
        FieldView view(&field);
        const Vec3 y{0.0, 50.0 * rng.uniform(), 50.0 * rng.uniform()};
        auto hit = next_collision(p, view, y, 1.0, 0.0);
        benchmark::DoNotOptimize(hit);
    }
}
BENCHMARK(BM_NextCollision);

void BM_ParticleTrajectory(benchmark::State& state) {
    SimParams p;
    p.phi = 1e-2;
    p.T = 1.0;
    const VolumeDistribution dist = VolumeDistribution::uniform(0.5, 1.5);
    uint64_t seed = 0;
    for (auto _ : state) {
        p.seed = seed++;
        TrajectoryResult res = run_trajectory(p, dist);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_ParticleTrajectory);

void BM_KineticPath(benchmark::State& state) {
    const JumpKernel kernel(VolumeDistribution::uniform(0.5, 1.5));
    JumpParams p;
    p.T = 1.0;
    uint64_t seed = 0;
    for (auto _ : state) {
        p.seed = seed++;
        JumpPathResult res = simulate_path(kernel, p);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_KineticPath);

void BM_DiracChainSolve(benchmark::State& state) {
    DiracChainParams p;
    p.V0 = 1.0;
    p.dt_factor = 0.1;
    for (auto _ : state) {
        DiracChainResult res = solve_dirac_chain(p, {1.0});
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_DiracChainSolve);

void BM_MarginalAssembly(benchmark::State& state) {
    const MarginalGrid grid = MarginalGrid::uniform(0.0, 64.0, 257);
    const VolumeDistribution dist = VolumeDistribution::uniform(0.5, 1.5);
    for (auto _ : state) {
        MarginalOperator op(grid.nodes, grid.weights, dist, 1.0);
        benchmark::DoNotOptimize(op);
    }
}
BENCHMARK(BM_MarginalAssembly);

void BM_MarginalSolve(benchmark::State& state) {
    MarginalGrid grid0 = MarginalGrid::uniform(0.0, 64.0, 257);
    grid0.place_spike(1.0);
    const VolumeDistribution dist = VolumeDistribution::uniform(0.5, 1.5);
    const MarginalOperator op(grid0.nodes, grid0.weights, dist, 1.0);
    MarginalSolveOptions opt;
    opt.T = 1.0;
    for (auto _ : state) {
        MarginalGrid grid = grid0;
        MarginalSolveResult res = solve_marginal(op, grid, opt);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_MarginalSolve);

void BM_Wasserstein1(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    Rng rng(123);
    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) a[i] = rng.exponential();
    for (size_t i = 0; i < n; ++i) b[i] = 1.0 + rng.exponential();
    for (auto _ : state) {
        double d = wasserstein1_scalar(a, b);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_Wasserstein1)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
