// Serial reference kernels against their OpenMP counterparts. The two paths
// produce bitwise-identical tensors (each output entry is reduced in a fixed
// order by one thread); this target measures what the parallel split buys.

#include <benchmark/benchmark.h>

#include "movingns/assembly.hpp"

using namespace movingns;

namespace {

struct Fixture {
    QuadratureRule quad = QuadratureRule::gauss_legendre(24);
    MovingDomainMap map = make_bend_map(0.3, 1.0);
    VectorFieldSampler zero{[](const Vec2&, double) { return Vec2{0.0, 0.0}; },
                            Frame::reference};

    StreamTable table;
    BasisSnapshot snap;

    explicit Fixture(int m) : table(raw_stream_basis(m, StreamFamily::mixed), quad) {
        TimeGrid grid{1.0, 4};
        OrthoSeries series = orthonormalize_series(table, map, grid, quad, ExecPolicy::serial);
        basis_time_derivative(series);
        snap = materialize_snapshot(series, 2, table, map, quad);
    }
};

void bench_assemble(benchmark::State& state, ExecPolicy policy) {
    Fixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        GalerkinTensors t =
            assemble_tensors(fx.snap, fx.table, fx.map, fx.zero, fx.zero, fx.quad, policy);
        benchmark::DoNotOptimize(t.a_tri.data());
    }
}

void bench_orthonormalize(benchmark::State& state, ExecPolicy policy) {
    const int m = static_cast<int>(state.range(0));
    const QuadratureRule quad = QuadratureRule::gauss_legendre(24);
    const StreamTable table(raw_stream_basis(m), quad);
    const MovingDomainMap map = make_dilation_map("1+t", 1.0);
    const TimeGrid grid{1.0, 32};
    for (auto _ : state) {
        OrthoSeries series = orthonormalize_series(table, map, grid, quad, policy);
        benchmark::DoNotOptimize(series.R.data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(bench_assemble, serial, ExecPolicy::serial)->Arg(8)->Arg(16)->Arg(32)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bench_assemble, openmp, ExecPolicy::openmp)->Arg(8)->Arg(16)->Arg(32)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bench_orthonormalize, serial, ExecPolicy::serial)->Arg(8)->Arg(16)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bench_orthonormalize, openmp, ExecPolicy::openmp)->Arg(8)->Arg(16)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
