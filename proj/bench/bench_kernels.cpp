// Serial reference vs OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.
#include <benchmark/benchmark.h>

#include "annuli/dressing.hpp"
#include "annuli/riemann_family.hpp"
#include "annuli/surface_io.hpp"

using namespace annuli;

namespace {

ExecPolicy policy(const benchmark::State& st) { return st.range(0) ? ExecPolicy::parallel : ExecPolicy::serial; }

const MatrixLaurent& genus2() {
    static const MatrixLaurent xi = preset(2, {0.3, 0.4}).potential;
    return xi;
}

const std::vector<cplx> kLambdas{1.0, I, std::polar(1.0, 0.7), cplx(0.5, 0.2)};

void BM_integrate(benchmark::State& st) {
    const GridSpec gs{0, 2, 1e-2, 0, 1, 1e-2};
    for (auto _ : st) benchmark::DoNotOptimize(integrate(genus2(), gs, kLambdas, {policy(st), 1}));
}

void BM_assemble(benchmark::State& st) {
    const FrameGrid fg = integrate(genus2(), {0, 2, 1e-2, 0, 1, 1e-2}, {1.0});
    for (auto _ : st) benchmark::DoNotOptimize(assemble(fg, 1.0, policy(st)));
}

void BM_terng_uhlenbeck(benchmark::State& st) {
    const cplx a0(0.5, 0.3);
    const MatrixLaurent red = gauge(flat_potential(), -std::conj(a0) / std::abs(a0));
    const GridSpec gs{0, 1, 2e-2, 0, 0.5, 2e-2};
    for (auto _ : st)
        benchmark::DoNotOptimize(
            terng_uhlenbeck_frame(red, Vec2(1.0, cplx(0.4, -0.2)), a0, gs, {1.0, I}, {policy(st), 1}, false));
}

}  // namespace

BENCHMARK(BM_integrate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_terng_uhlenbeck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
