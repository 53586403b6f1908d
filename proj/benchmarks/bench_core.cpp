#include <benchmark/benchmark.h>

#include <vector>

#include "hjblab/cole_hopf.hpp"
#include "hjblab/deterministic.hpp"
#include "hjblab/grid.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/storage.hpp"

using namespace hjb;

namespace {

const EigenSpectrum& power2() {
    static const EigenSpectrum s = make_spectrum(PowerLawSpec{2.0}).value();
    return s;
}

void BM_CofT(benchmark::State& state) {
    const auto sol = make_quadratic_solution(power2(), QuadraticData{ConstantRule{1.0}}).value();
    for (auto _ : state) benchmark::DoNotOptimize(c_of_t(sol, 1.0, 1e-10));
}
BENCHMARK(BM_CofT);

void BM_LaxOleinikCoupled(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    GenericConvex g;
    g.value = [](std::span<const double> y) {
        double v = 0.0, s = 0.0;
        for (double c : y) {
            v += 0.5 * c * c;
            s += c;
        }
        return v + 0.5 * s * s / static_cast<double>(y.size());
    };
    g.gradient = [](std::span<const double> y, std::span<double> out) {
        double s = 0.0;
        for (double c : y) s += c;
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + s / static_cast<double>(y.size());
    };
    g.lipschitz_gradient = 2.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 / (1.0 + static_cast<double>(i));
    const InitialCondition ic{g};
    for (auto _ : state) benchmark::DoNotOptimize(lax_oleinik_solve(ic, power2(), 0.5, TruncatedPoint(x)));
}
BENCHMARK(BM_LaxOleinikCoupled)->Arg(16)->Arg(64)->Arg(256);

void BM_ColeHopfPoint(benchmark::State& state) {
    const auto p = Profile1D::smooth_abs(0.2);
    for (auto _ : state) benchmark::DoNotOptimize(cole_hopf_point(p, 4.0, 0.3, 0.7));
}
BENCHMARK(BM_ColeHopfPoint);

void BM_SolveFd1D(benchmark::State& state) {
    const auto spec = make_grid_spec({6.0}, 0.01, 1.0, {}, state.range(0) ? FdScheme::Eno2 : FdScheme::Upwind1);
    const InitialCondition ic = Separable{{Profile1D::smooth_abs(0.2)}};
    for (auto _ : state) benchmark::DoNotOptimize(solve_fd(ic, power2(), 1, spec));
}
BENCHMARK(BM_SolveFd1D)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PhiloxNormals(benchmark::State& state) {
    std::vector<double> z(4);
    std::uint64_t step = 0;
    for (auto _ : state) {
        philox_normals(1, 0, step++, z);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(BM_PhiloxNormals);

void BM_SimulatePaths(benchmark::State& state) {
    MarketConfig cfg;
    cfg.paths = 200;
    const auto market = circle_value_field(cfg).value();
    const std::vector<double> k0{1.0, -0.5, 0.25, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_paths(market, k0));
}
BENCHMARK(BM_SimulatePaths)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
