#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gainqe/liouvillian.hpp"
#include "gainqe/qnm_rates.hpp"

namespace gainqe {

// Partial transpose over the emitters in `subset` (swaps their bra and ket bits).
CMat partial_transpose(const CMat& rho, std::span<const std::size_t> subset);
// log2(N + 1), N = 2 * sum of |negative eigenvalues| of the partial transpose.
double log_negativity(const CMat& rho, std::span<const std::size_t> subset);
double log_negativity(const DensityMatrix& rho, std::span<const std::size_t> subset);

// g(tau) = Tr[sigma+_n exp(L tau)(sigma-_m rho_ss)] on an increasing grid starting at 0.
std::vector<cplx> correlation_ss(const LindbladModel& model, std::size_t n, std::size_t m,
                                 std::span<const double> tau);

struct Peak {
    double position = 0.0;
    double height = 0.0;
    double fwhm = std::numeric_limits<double>::quiet_NaN();  // NaN when a half-height crossing is missing
    double prominence = 0.0;
};

struct SpectrumSeries {
    std::vector<double> detuning;  // omega - omega0, in the rate unit
    std::vector<double> total;     // sum over all emitter pairs
    std::vector<double> self;      // n == m terms
    std::vector<double> cross;     // n != m terms
    std::vector<Peak> peaks;
};

enum class SpectrumMethod { Resolvent, TimeDomain };

struct SpectrumOptions {
    SpectrumMethod method = SpectrumMethod::Resolvent;
    bool parallel = true;
    double peak_threshold = 1e-3;   // relative prominence
    double tail_tol = 1e-12;        // time domain: stop once ||B(tau)|| falls below this fraction
    double step_factor = 0.1;       // time domain: h = step_factor / spectral radius of L
    std::size_t max_steps = 2000000;
};

// S0(n, m)(delta) = integral_0^inf exp(-i delta tau) <sigma+_n(tau) sigma-_m> dtau, incoherent part.
std::vector<CMat> spectrum_components(const LindbladModel& model, std::span<const double> grid,
                                      const SpectrumOptions& opts = {});

SpectrumSeries spectrum_ss(const LindbladModel& model, std::span<const double> grid, const SpectrumOptions& opts = {});
SpectrumSeries spectrum_ss(const RateSet& rates, std::span<const double> grid, bool include_cross_pump,
                           SpectrumMethod method);

using SpectralWeights = std::function<CMat(double delta)>;

// S = sum Re{w(n, m)(delta) S0(n, m)(delta)}.
SpectrumSeries weighted_spectrum(const LindbladModel& model, std::span<const double> grid,
                                 const SpectralWeights& weights, const SpectrumOptions& opts = {});
// Weights conj(G(r_n, r_D)) G(r_D, r_m) from the cavity mode; `energy_unit_eV` converts
// grid detunings to eV around rates.omega0.
SpectrumSeries optional_weighted_spectrum(const LindbladModel& model, std::span<const double> grid,
                                          const QnmModel& qnm, double energy_unit_eV,
                                          const SpectrumOptions& opts = {});

std::vector<Peak> detect_peaks(std::span<const double> x, std::span<const double> y, double rel_threshold = 1e-3);
std::vector<Peak> detect_peaks(const SpectrumSeries& s, double rel_threshold = 1e-3);

// 2001 points over [-4, 4] * max(|delta_down(0,1)|, gamma_down(0,0)).
std::vector<double> default_grid(const RateSet& rates, std::size_t points = 2001);

// Time average of a sampled series over [t0, t1] (trapezoid on the samples inside).
double window_mean(std::span<const double> t, std::span<const double> v, double t0, double t1);

}  // namespace gainqe
