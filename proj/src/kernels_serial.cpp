#include <cmath>

#include "gainqe/kernels.hpp"
#include "kernels_impl.hpp"

namespace gainqe::kernels {

namespace {

// Moments mu_j = integral_0^1 u^j exp(-i*theta*u) du, j = 0..5.
std::array<cplx, 6> moments(double theta) {
    std::array<cplx, 6> mu{};
    const cplx z(0.0, -theta);
    if (std::abs(theta) < 2.0) {
        // power series; the forward recursion loses digits for small theta
        for (int j = 0; j < 6; ++j) {
            cplx term = 1.0, sum = 0.0;
            for (int k = 0; k < 40; ++k) {
                sum += term / double(j + k + 1);
                term *= z / double(k + 1);
                if (std::abs(term) < 1e-18) break;
            }
            mu[j] = sum;
        }
        return mu;
    }
    const cplx e = std::exp(z);
    mu[0] = (e - 1.0) / z;
    for (int j = 1; j < 6; ++j) mu[j] = (e - double(j) * mu[j - 1]) / z;
    return mu;
}

constexpr double kHermite[6][6] = {
    {1, 0, 0, -10, 15, -6},
    {0, 1, 0, -6, 8, -3},
    {0, 0, 0.5, -1.5, 1.5, -0.5},
    {0, 0, 0, 10, -15, 6},
    {0, 0, 0, -4, 7, -3},
    {0, 0, 0, 0.5, -1, 0.5},
};

}  // namespace

std::array<cplx, 6> filon_weights(double delta, double h) {
    const auto mu = moments(delta * h);
    const double scale[6] = {h, h * h, h * h * h, h, h * h, h * h * h};
    std::array<cplx, 6> w{};
    for (int m = 0; m < 6; ++m) {
        cplx acc = 0.0;
        for (int j = 0; j < 6; ++j) acc += kHermite[m][j] * mu[j];
        w[m] = scale[m] * acc;
    }
    return w;
}

namespace detail {

void resolvent_point(const ResolventProblem& p, double delta, CMat& out) {
    CMat m = p.shifted;
    m.diagonal().array() += cplx(0.0, delta);
    Eigen::PartialPivLU<CMat> lu(m);
    const CMat y = lu.solve(p.sources);
    out = p.probes.transpose() * y;
}

Eigen::RowVectorXcd filon_point(std::span<const FilonSegment> segs, double delta) {
    const Eigen::Index cols = segs.empty() ? 0 : segs.front().g.cols();
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(cols);
    Eigen::RowVectorXcd phase;
    for (const auto& s : segs) {
        const Eigen::Index last = s.g.rows() - 1;
        if (last < 1) continue;
        const auto w = filon_weights(delta, s.h);
        // Interval k pairs sample k (weights w0..w2) with sample k+1 (w3..w5), both under the
        // phase of its left end. Summing every sample once under its own phase gives both parts.
        const cplx step = std::polar(1.0, -delta * s.h);
        phase.resize(last + 1);
        for (Eigen::Index k = 0; k <= last; ++k)
            phase(k) = k % 256 == 0 ? std::polar(1.0, -delta * (s.tau0 + s.h * double(k))) : phase(k - 1) * step;
        const Eigen::RowVectorXcd f0 = phase * s.g, f1 = phase * s.dg, f2 = phase * s.d2g;
        const cplx p0 = phase(0), pl = phase(last);
        const cplx back = std::conj(step);
        acc += w[0] * (f0 - pl * s.g.row(last)) + w[1] * (f1 - pl * s.dg.row(last)) +
               w[2] * (f2 - pl * s.d2g.row(last));
        acc += back * (w[3] * (f0 - p0 * s.g.row(0)) + w[4] * (f1 - p0 * s.dg.row(0)) +
                       w[5] * (f2 - p0 * s.d2g.row(0)));
    }
    return acc;
}

}  // namespace detail

std::vector<CMat> resolvent_serial(const ResolventProblem& p, std::span<const double> deltas) {
    std::vector<CMat> out(deltas.size());
    for (std::size_t k = 0; k < deltas.size(); ++k) detail::resolvent_point(p, deltas[k], out[k]);
    return out;
}

CMat filon_serial(std::span<const FilonSegment> segs, std::span<const double> deltas) {
    CMat out(static_cast<Eigen::Index>(deltas.size()), segs.empty() ? 0 : segs.front().g.cols());
    for (std::size_t k = 0; k < deltas.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = detail::filon_point(segs, deltas[k]);
    return out;
}

std::vector<RateSet> rate_sweep_serial(const QnmModel& model, std::span<const double> omegas) {
    std::vector<RateSet> out(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) out[k] = rates_at(omegas[k], model);
    return out;
}

}  // namespace gainqe::kernels
