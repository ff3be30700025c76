#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gainqe/kernels.hpp"
#include "gainqe/liouvillian.hpp"

using namespace gainqe;
using namespace gainqe::kernels;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * double(i) / double(n - 1);
    return x;
}

FilonSegment exponential_samples(cplx lambda, double h, std::size_t steps, double tau0 = 0.0) {
    FilonSegment s;
    s.h = h;
    s.tau0 = tau0;
    const auto n = static_cast<Eigen::Index>(steps + 1);
    s.g.resize(n, 1);
    s.dg.resize(n, 1);
    s.d2g.resize(n, 1);
    for (Eigen::Index k = 0; k < n; ++k) {
        const cplx v = std::exp(lambda * (tau0 + h * double(k)));
        s.g(k, 0) = v;
        s.dg(k, 0) = lambda * v;
        s.d2g(k, 0) = lambda * lambda * v;
    }
    return s;
}

}  // namespace

TEST_CASE("Filon weights integrate quintic polynomials exactly") {
    // p(s) = s^5 on [0, h]: data (0, 0, 0, h^5, 5h^4, 20h^3)
    for (double delta : {0.0, 0.3, 1.9, 2.1, 15.0, -40.0}) {
        const double h = 0.37;
        const auto w = filon_weights(delta, h);
        const cplx approx = w[3] * std::pow(h, 5) + w[4] * 5.0 * std::pow(h, 4) + w[5] * 20.0 * std::pow(h, 3);
        // exact integral by composite Simpson on a fine grid
        cplx exact = 0.0;
        const int m = 20000;
        for (int i = 0; i <= m; ++i) {
            const double s = h * i / m;
            const double c = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            exact += c * std::pow(s, 5) * std::polar(1.0, -delta * s);
        }
        exact *= h / (3.0 * m);
        CHECK(std::abs(approx - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("series and recursion branches of the moments agree at the switch") {
    const auto a = filon_weights(1.999999999, 1.0), b = filon_weights(2.000000001, 1.0);
    for (int m = 0; m < 6; ++m) CHECK(std::abs(a[m] - b[m]) < 1e-8);
}

TEST_CASE("Filon quadrature of a damped oscillation") {
    const cplx lambda(-0.7, 2.3);
    const double h = 0.02;
    const std::size_t steps = 3000;
    // three segments with doubling steps, as produced by the adaptive delay grid
    std::vector<FilonSegment> segs = {exponential_samples(lambda, h, steps / 2),
                                      exponential_samples(lambda, 2 * h, steps / 4, h * (steps / 2)),
                                      exponential_samples(lambda, 4 * h, steps / 8, h * steps)};
    const double T = h * steps + 4 * h * (steps / 8);
    auto deltas = linspace(-10, 10, 41);
    CMat f = filon_serial(segs, deltas);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const cplx z = lambda - cplx(0, deltas[k]);
        const cplx exact = (std::exp(z * T) - 1.0) / z;
        CHECK(std::abs(f(static_cast<Eigen::Index>(k), 0) - exact) < 1e-12 * std::abs(exact));
    }
}

TEST_CASE("OpenMP kernels reproduce the serial kernels bit for bit") {
    std::mt19937 rng(9);
    std::normal_distribution<double> n;
    const Eigen::Index D = 16;
    ResolventProblem p;
    p.shifted = CMat::Identity(D, D) * 2.0;
    for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = 0; j < D; ++j) p.shifted(i, j) += 0.1 * cplx(n(rng), n(rng));
    p.sources = CMat::Random(D, 2);
    p.probes = CMat::Random(D, 2);
    auto grid = linspace(-5, 5, 301);
    auto a = resolvent_serial(p, grid), b = resolvent_omp(p, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK((a[k] - b[k]).cwiseAbs().maxCoeff() == 0.0);

    std::vector<FilonSegment> segs = {exponential_samples(cplx(-0.4, 1.0), 0.05, 2000)};
    CMat fa = filon_serial(segs, grid), fb = filon_omp(segs, grid);
    CHECK((fa - fb).cwiseAbs().maxCoeff() == 0.0);

    QnmModel q;
    q.omega_c = 1.2;
    q.gamma_c = 0.05;
    q.mode_amp = {cplx(0.4, 0.1), cplx(0.3, -0.1)};
    q.dipole_scale = {1.0, 0.9};
    q.gain_overlap = 0.6;
    q.alpha_g = 0.1;
    auto omegas = linspace(0.8, 1.8, 257);
    auto ra = rate_sweep_serial(q, omegas), rb = rate_sweep_omp(q, omegas);
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        CHECK((ra[k].gamma_down - rb[k].gamma_down).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ra[k].delta_down - rb[k].delta_down).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ra[k].gamma_up - rb[k].gamma_up).cwiseAbs().maxCoeff() == 0.0);
    }
    std::vector<double> bad = {1.0, -1.0};
    CHECK_THROWS_AS(rate_sweep_omp(q, bad), ValidationError);
}
