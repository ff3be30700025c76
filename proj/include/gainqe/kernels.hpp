#pragma once

#include <array>
#include <span>
#include <vector>

#include "gainqe/qnm_rates.hpp"
#include "gainqe/types.hpp"

// Hot loops of the spectrum and rate-sweep code. Each kernel has a serial reference
// and an OpenMP version parallel over the frequency axis; both perform the same
// arithmetic per point, so their results are bit-identical.
namespace gainqe::kernels {

// out[k](n, m) = probes.col(n)^T (i*deltas[k] + shifted)^-1 sources.col(m)
struct ResolventProblem {
    CMat shifted;  // -L + P, with P deflating the zero mode
    CMat sources;  // D x N
    CMat probes;   // D x N
};

std::vector<CMat> resolvent_serial(const ResolventProblem& p, std::span<const double> deltas);
std::vector<CMat> resolvent_omp(const ResolventProblem& p, std::span<const double> deltas);

// Samples of g, g' and g'' on the uniform grid tau_k = tau0 + k*h (rows), one column
// per series. Consecutive segments share their boundary sample.
struct FilonSegment {
    double tau0 = 0.0;
    double h = 0.0;
    CMat g, dg, d2g;
};

// Weights of the half-Fourier integral over [0, h] of the quintic Hermite interpolant
// against exp(-i*delta*s), ordered (g0, g0', g0'', g1, g1', g1'').
std::array<cplx, 6> filon_weights(double delta, double h);

// row k: integral over all segments of exp(-i*deltas[k]*tau) g(tau) dtau, per column
CMat filon_serial(std::span<const FilonSegment> segs, std::span<const double> deltas);
CMat filon_omp(std::span<const FilonSegment> segs, std::span<const double> deltas);

std::vector<RateSet> rate_sweep_serial(const QnmModel& model, std::span<const double> omegas);
std::vector<RateSet> rate_sweep_omp(const QnmModel& model, std::span<const double> omegas);

}  // namespace gainqe::kernels
