// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "linwalk/exact_oracle.hpp"
#include "linwalk/harmonic.hpp"
#include "linwalk/path.hpp"
#include "linwalk/target_measure.hpp"

using namespace linwalk;

namespace {

Ensemble two_atom(int dim)
{
    EnsembleSpec spec;
    spec.dim = dim;
    spec.kind = EnsembleKind::Discrete;
    Matrix a = Matrix::Identity(dim, dim);
    a(0, 0) = 2;
    if (dim > 1) {
        a(0, 1) = 1;
        a(1, 0) = 1;
    }
    Matrix b = Matrix::Identity(dim, dim);
    b(dim - 1, dim - 1) = 0.5;
    if (dim > 1) {
        b(dim - 1, 0) = 1;
    }
    spec.atoms = {a, b};
    spec.weights = {0.5, 0.5};
    return Ensemble::build(spec);
}

void BM_PhiloxU64(benchmark::State& state)
{
    Philox rng(1, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.next_u64());
    }
}
BENCHMARK(BM_PhiloxU64);

void BM_DiscreteDraw(benchmark::State& state)
{
    const Ensemble e = two_atom(static_cast<int>(state.range(0)));
    RngStream rng(7, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(e.draw(rng).mat()(0, 0));
    }
}
BENCHMARK(BM_DiscreteDraw)->Arg(1)->Arg(2)->Arg(5);

void BM_SimulatePath(benchmark::State& state)
{
    const int dim = static_cast<int>(state.range(0));
    const Ensemble e = two_atom(dim);
    const ProjPoint x = ProjPoint::axis(dim, 0);
    RngStream rng(7, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_path(e, x, 256, false, rng).partial_sums.back());
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SimulatePath)->Arg(1)->Arg(2)->Arg(5);

void BM_ReversedWalk(benchmark::State& state)
{
    const Ensemble e = two_atom(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    RngStream rng(7, 2);
    const PathRecord path = simulate_path(e, x, static_cast<std::int64_t>(state.range(0)), true, rng);
    Vector yv(2);
    yv << 0.7, 0.3;
    const DualProjPoint y(yv);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reversed_walk_values(path, y).threshold);
    }
}
BENCHMARK(BM_ReversedWalk)->Arg(16)->Arg(128);

void BM_RhoAction(benchmark::State& state)
{
    const Ensemble e = two_atom(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h{PhiFunction::one(), PiecewiseLinear::tent(0.0, 2.0)};
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            estimate_rho_action(e, x, 32, 2000, h, Direction::Plus, seed++).value);
    }
}
BENCHMARK(BM_RhoAction);

void BM_ExactDuality(benchmark::State& state)
{
    const Ensemble e = two_atom(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h{PhiFunction::one(), PiecewiseLinear::tent(0.0, 2.0)};
    Vector yv(2);
    yv << 0.7, 0.3;
    const DualProjPoint y(yv);
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_duality_sides(e, x, y, 8, h).first);
    }
}
BENCHMARK(BM_ExactDuality);

} // namespace

BENCHMARK_MAIN();
