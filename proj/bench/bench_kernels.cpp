// Serial vs OpenMP kernels. Run with --benchmark_filter=... to pick one.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "gainqe/kernels.hpp"
#include "gainqe/liouvillian.hpp"

using namespace gainqe;

namespace {

std::vector<double> grid(std::size_t n, double half_width) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = -half_width + 2 * half_width * double(i) / double(n - 1);
    return v;
}

kernels::ResolventProblem resolvent_problem() {
    RateSet r = RateSet::zeros(2, 1.56);
    r.gamma_down << 1.0, 0.9, 0.9, 1.0;
    r.delta_down << 0, 3.4, 3.4, 0;
    r.gamma_dephase.setConstant(0.001);
    r.gamma_pump.setConstant(0.05);
    const CMat L = liouvillian_matrix(make_model(r));
    kernels::ResolventProblem p;
    p.shifted = -L;
    p.shifted.diagonal().array() += 1e-3;  // keeps the stand-in matrix invertible at zero detuning
    p.sources = CMat::Random(L.rows(), 2);
    p.probes = CMat::Random(L.rows(), 2);
    return p;
}

// Damped oscillations sampled in three segments with doubling step.
std::vector<kernels::FilonSegment> filon_segments(std::size_t per_segment) {
    const cplx lambda(-0.05, 3.0);
    std::vector<kernels::FilonSegment> segs;
    double tau0 = 0.0, h = 0.01;
    for (int s = 0; s < 3; ++s) {
        kernels::FilonSegment seg;
        seg.tau0 = tau0;
        seg.h = h;
        const auto rows = static_cast<Eigen::Index>(per_segment + 1);
        seg.g.resize(rows, 4);
        seg.dg.resize(rows, 4);
        seg.d2g.resize(rows, 4);
        for (Eigen::Index k = 0; k < rows; ++k)
            for (Eigen::Index c = 0; c < 4; ++c) {
                const cplx l = lambda * double(c + 1) / 4.0;
                const cplx v = std::exp(l * (tau0 + h * double(k)));
                seg.g(k, c) = v;
                seg.dg(k, c) = l * v;
                seg.d2g(k, c) = l * l * v;
            }
        segs.push_back(std::move(seg));
        tau0 += h * double(per_segment);
        h *= 2;
    }
    return segs;
}

QnmModel cavity() {
    QnmModel m;
    m.omega_c = 1.2;
    m.gamma_c = 0.0525;
    m.mode_amp = {0.1, 0.1};
    m.gain_overlap = 0.62;
    m.alpha_g = 0.1;
    return m;
}

template <auto Kernel>
void BM_resolvent(benchmark::State& state) {
    const auto p = resolvent_problem();
    const auto d = grid(static_cast<std::size_t>(state.range(0)), 15.0);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(p, d));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_filon(benchmark::State& state) {
    const auto segs = filon_segments(2000);
    const auto d = grid(static_cast<std::size_t>(state.range(0)), 15.0);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(segs, d));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_rate_sweep(benchmark::State& state) {
    const auto m = cavity();
    std::vector<double> w(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 + 0.8 * double(i) / double(w.size() - 1);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(m, w));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_resolvent<kernels::resolvent_serial>)->Name("resolvent/serial")->Arg(2001);
BENCHMARK(BM_resolvent<kernels::resolvent_omp>)->Name("resolvent/omp")->Arg(2001);
BENCHMARK(BM_filon<kernels::filon_serial>)->Name("filon/serial")->Arg(401);
BENCHMARK(BM_filon<kernels::filon_omp>)->Name("filon/omp")->Arg(401);
BENCHMARK(BM_rate_sweep<kernels::rate_sweep_serial>)->Name("rate_sweep/serial")->Arg(801);
BENCHMARK(BM_rate_sweep<kernels::rate_sweep_omp>)->Name("rate_sweep/omp")->Arg(801);

BENCHMARK_MAIN();
