#include <benchmark/benchmark.h>

#include <cmath>

#include "odebound/linalg.hpp"
#include "odebound/ode.hpp"
#include "odebound/regions.hpp"
#include "odebound/scalar_bounds.hpp"
#include "odebound/transition.hpp"

using namespace odebound;

namespace {

model::MatrixFunction spring_matrix() {
    model::MatrixFunction A(2);
    A(0, 1) = model::TrigAffineScalar(1.0);
    A(1, 0) = model::TrigAffineScalar(-4.0, {{-0.5, M_PI, 0.0}, {-0.5, 7.0, 0.0}});
    A(1, 1) = model::TrigAffineScalar(-0.2);
    return A;
}

bounds::AuxCoefficients cubic_coeffs(double span, double step) {
    bounds::AuxCoefficients coeffs;
    for (double t = 0.0; t <= span + 0.5 * step; t += step) {
        coeffs.grid.push_back(t);
        coeffs.p.push_back(-0.1 + 0.05 * std::sin(t));
        coeffs.k.push_back(2.0);
        coeffs.forcing_norm.push_back(0.0);
    }
    model::LipschitzEnvelope::Term term;
    term.degree = 3;
    term.coefficients = {model::TrigAffineScalar(0.05)};
    coeffs.envelope.terms.push_back(term);
    return coeffs;
}

void bm_jacobi_svd(benchmark::State& state) {
    lin::Mat m(static_cast<int>(state.range(0)));
    double v = 0.3;
    for (auto& e : m.a) {
        v = std::fmod(v * 997.0 + 0.71, 2.0) - 1.0;
        e = v;
    }
    for (auto _ : state) benchmark::DoNotOptimize(lin::jacobi_svd(m));
}

void bm_integrate_oscillator(benchmark::State& state) {
    const ode::Rhs rhs = [](double, const lin::Vec& x) {
        return lin::Vec{x[1], -4.0 * x[0] - 0.2 * x[1]};
    };
    for (auto _ : state)
        benchmark::DoNotOptimize(ode::integrate(rhs, 0.0, 50.0, {0.1, 0.1}));
}

void bm_fundamental_path(benchmark::State& state) {
    const auto A = spring_matrix();
    const double horizon = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(transition::compute_fundamental(
            A, 0.0, horizon, transition::NormalizationMode::SpectralW0));
}

void bm_solve_nonlinear(benchmark::State& state) {
    const auto coeffs = cubic_coeffs(50.0, 0.01);
    for (auto _ : state)
        benchmark::DoNotOptimize(bounds::solve_nonlinear(coeffs, 0.5));
}

void bm_find_fixed_points(benchmark::State& state) {
    regions::AutonomousReduction red;
    red.p_hat = -0.1;
    red.k_hat = 1.0;
    red.f_hat = 0.01;
    red.coefficients = {{3, 0.05}};
    for (auto _ : state)
        benchmark::DoNotOptimize(regions::find_fixed_points(red));
}

}  // namespace

BENCHMARK(bm_jacobi_svd)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_integrate_oscillator)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_fundamental_path)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_solve_nonlinear)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_find_fixed_points)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
