#include "gainqe/observables.hpp"

#include <algorithm>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "gainqe/kernels.hpp"

namespace gainqe {

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw ValidationError("frequency grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw ValidationError("frequency grid has non-finite values");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("frequency grid must be strictly increasing");
    }
}

struct Regression {
    CMat L;
    CMat rho_ss;
    CMat sources;  // column m: sigma-_m rho_ss minus its coherent part
    CMat probes;   // column n: vec(sigma+_n^T), so Tr[sigma+_n X] = probes.col(n)^T vec(X)
};

Regression regression_setup(const LindbladModel& model) {
    Regression r;
    r.L = liouvillian_matrix(model);
    r.rho_ss = steady_state(r.L, model.dim()).matrix();
    const auto D = r.L.rows();
    const auto N = static_cast<Eigen::Index>(model.n);
    const CVec vss = vectorize(r.rho_ss);
    r.sources.resize(D, N);
    r.probes.resize(D, N);
    for (Eigen::Index m = 0; m < N; ++m) {
        const CMat lower = lowering_operator(model.n, static_cast<std::size_t>(m));
        const CMat b = lower * r.rho_ss;
        r.sources.col(m) = vectorize(b) - b.trace() * vss;
        r.probes.col(m) = vectorize(CMat(lower.adjoint().transpose()));
    }
    return r;
}

std::vector<CMat> resolvent_components(const Regression& r, std::span<const double> grid, bool parallel) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(r.L.rows()))));
    kernels::ResolventProblem p;
    p.shifted = -r.L + vectorize(r.rho_ss) * vectorize(CMat::Identity(d, d)).transpose();
    p.sources = r.sources;
    p.probes = r.probes;
    return parallel ? kernels::resolvent_omp(p, grid) : kernels::resolvent_serial(p, grid);
}

std::vector<CMat> time_domain_components(const Regression& r, std::span<const double> grid,
                                         const SpectrumOptions& opts) {
    const auto N = r.sources.cols();
    const auto pairs = N * N;
    std::vector<CMat> out(grid.size(), CMat::Zero(N, N));
    const double b0 = r.sources.norm();
    if (b0 == 0.0) return out;

    Eigen::ComplexEigenSolver<CMat> es(r.L, false);
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    double h = opts.step_factor / radius;
    CMat U = (r.L * h).exp();
    const CMat OL = r.probes.transpose() * r.L;
    const CMat OL2 = OL * r.L;
    auto sixth = [&](const CMat& x) {
        CMat y = x;
        for (int k = 0; k < 6; ++k) y = r.L * y;
        return y.norm();
    };
    // Interpolation error per unit delay scales like h^6 |g^(6)|. The step doubles whenever
    // the remaining signal allows it without exceeding the error level of the first step.
    const double budget = std::pow(h, 6) * sixth(r.sources);
    constexpr std::size_t check_every = 32;

    using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    std::vector<kernels::FilonSegment> segs;
    std::vector<cplx> g, dg, d2g;
    double tau = 0.0, tau0 = 0.0;
    auto record = [&](const CMat& B) {
        const CMat v0 = r.probes.transpose() * B, v1 = OL * B, v2 = OL2 * B;
        // pair index n*N + m, g(n, m) = Tr[sigma+_n B_m]
        for (Eigen::Index n = 0; n < N; ++n)
            for (Eigen::Index m = 0; m < N; ++m) {
                g.push_back(v0(n, m));
                dg.push_back(v1(n, m));
                d2g.push_back(v2(n, m));
            }
    };
    auto close_segment = [&]() {
        kernels::FilonSegment seg;
        seg.tau0 = tau0;
        seg.h = h;
        const auto rows = static_cast<Eigen::Index>(g.size()) / pairs;
        seg.g = Eigen::Map<RowMajor>(g.data(), rows, pairs);
        seg.dg = Eigen::Map<RowMajor>(dg.data(), rows, pairs);
        seg.d2g = Eigen::Map<RowMajor>(d2g.data(), rows, pairs);
        segs.push_back(std::move(seg));
        g.clear();
        dg.clear();
        d2g.clear();
    };

    CMat B = r.sources;
    record(B);
    std::size_t steps = 0, in_segment = 0;
    while (B.norm() > opts.tail_tol * b0) {
        if (++steps > opts.max_steps) {
            std::ostringstream os;
            os << "time-domain spectrum did not decay within " << opts.max_steps
               << " steps; the slowest mode is too slow for this method, use the resolvent";
            throw IntegrationError(os.str());
        }
        B = U * B;
        tau += h;
        record(B);
        if (++in_segment % check_every == 0 && std::pow(2.0 * h, 6) * sixth(B) <= budget) {
            close_segment();
            tau0 = tau;
            h *= 2.0;
            U = U * U;
            in_segment = 0;
            record(B);
        }
    }
    if (g.size() > static_cast<std::size_t>(pairs)) close_segment();

    const CMat f = opts.parallel ? kernels::filon_omp(segs, grid) : kernels::filon_serial(segs, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
        for (Eigen::Index n = 0; n < N; ++n)
            for (Eigen::Index m = 0; m < N; ++m) out[k](n, m) = f(static_cast<Eigen::Index>(k), n * N + m);
    return out;
}

SpectrumSeries assemble(std::span<const double> grid, const std::vector<CMat>& s0, const SpectralWeights* weights,
                        double threshold) {
    SpectrumSeries s;
    s.detuning.assign(grid.begin(), grid.end());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const CMat& c = s0[k];
        CMat w = weights ? (*weights)(grid[k]) : CMat::Ones(c.rows(), c.cols());
        if (w.rows() != c.rows() || w.cols() != c.cols()) throw ValidationError("spectral weight matrix has wrong shape");
        double self = 0, cross = 0;
        for (Eigen::Index n = 0; n < c.rows(); ++n)
            for (Eigen::Index m = 0; m < c.cols(); ++m) (n == m ? self : cross) += (w(n, m) * c(n, m)).real();
        s.self.push_back(self);
        s.cross.push_back(cross);
        s.total.push_back(self + cross);
    }
    s.peaks = detect_peaks(s.detuning, s.total, threshold);
    return s;
}

}  // namespace

CMat partial_transpose(const CMat& rho, std::span<const std::size_t> subset) {
    const auto d = static_cast<std::size_t>(rho.rows());
    std::size_t n = 0;
    while ((std::size_t{1} << n) < d) ++n;
    if ((std::size_t{1} << n) != d || rho.cols() != rho.rows()) throw ValidationError("partial transpose needs a 2^n square matrix");
    std::size_t mask = 0;
    for (auto k : subset) {
        if (k >= n) throw ValidationError("partition emitter index out of range");
        mask |= std::size_t{1} << (n - 1 - k);
    }
    CMat out(rho.rows(), rho.cols());
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t pi = (i & ~mask) | (j & mask), pj = (j & ~mask) | (i & mask);
            out(static_cast<Eigen::Index>(pi), static_cast<Eigen::Index>(pj)) =
                rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    return out;
}

double log_negativity(const CMat& rho, std::span<const std::size_t> subset) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(partial_transpose(rho, subset)), Eigen::EigenvaluesOnly);
    double neg = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) neg += std::max(0.0, -es.eigenvalues()(i));
    return std::log2(2.0 * neg + 1.0);
}

double log_negativity(const DensityMatrix& rho, std::span<const std::size_t> subset) {
    return log_negativity(rho.matrix(), subset);
}

std::vector<cplx> correlation_ss(const LindbladModel& model, std::size_t n, std::size_t m,
                                 std::span<const double> tau) {
    if (tau.empty() || tau.front() != 0.0) throw ValidationError("delay grid must start at 0");
    const CMat L = liouvillian_matrix(model);
    const CMat rho = steady_state(L, model.dim()).matrix();
    const CMat probe = raising_operator(model.n, n);
    CVec b = vectorize(CMat(lowering_operator(model.n, m) * rho));
    std::vector<cplx> out;
    double last_step = -1.0;
    CMat U;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        if (k > 0) {
            const double step = tau[k] - tau[k - 1];
            if (!(step > 0)) throw ValidationError("delay grid must be strictly increasing");
            if (step != last_step) {
                U = (L * step).exp();
                last_step = step;
            }
            b = U * b;
        }
        out.push_back((probe * unvectorize(b, model.dim())).trace());
    }
    return out;
}

std::vector<CMat> spectrum_components(const LindbladModel& model, std::span<const double> grid,
                                      const SpectrumOptions& opts) {
    check_grid(grid);
    const Regression r = regression_setup(model);
    return opts.method == SpectrumMethod::Resolvent ? resolvent_components(r, grid, opts.parallel)
                                                    : time_domain_components(r, grid, opts);
}

SpectrumSeries spectrum_ss(const LindbladModel& model, std::span<const double> grid, const SpectrumOptions& opts) {
    return assemble(grid, spectrum_components(model, grid, opts), nullptr, opts.peak_threshold);
}

SpectrumSeries spectrum_ss(const RateSet& rates, std::span<const double> grid, bool include_cross_pump,
                           SpectrumMethod method) {
    SpectrumOptions o;
    o.method = method;
    return spectrum_ss(make_model(rates, {include_cross_pump}), grid, o);
}

SpectrumSeries weighted_spectrum(const LindbladModel& model, std::span<const double> grid,
                                 const SpectralWeights& weights, const SpectrumOptions& opts) {
    return assemble(grid, spectrum_components(model, grid, opts), &weights, opts.peak_threshold);
}

SpectrumSeries optional_weighted_spectrum(const LindbladModel& model, std::span<const double> grid,
                                          const QnmModel& qnm, double energy_unit_eV, const SpectrumOptions& opts) {
    if (!qnm.detector_amp) throw ValidationError("qnm.detector_amp is required for a weighted spectrum");
    if (qnm.emitter_count() != model.n) throw ValidationError("qnm.mode_amp count differs from the emitter count");
    if (!(energy_unit_eV > 0)) throw ValidationError("energy unit for the weighted spectrum must be > 0");
    const cplx fd = *qnm.detector_amp;
    const double omega0 = model.rates.omega0;
    SpectralWeights w = [&](double delta) {
        const double omega = omega0 + delta * energy_unit_eV;
        const double a2 = std::norm(ac_coefficient(omega, qnm)) * std::norm(fd);
        const auto n = static_cast<Eigen::Index>(model.n);
        CMat out(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double di = qnm.dipole_scale.empty() ? 1.0 : qnm.dipole_scale[i];
                const double dj = qnm.dipole_scale.empty() ? 1.0 : qnm.dipole_scale[j];
                out(i, j) = a2 * di * dj * std::conj(qnm.mode_amp[i]) * qnm.mode_amp[j];
            }
        return out;
    };
    return weighted_spectrum(model, grid, w, opts);
}

std::vector<Peak> detect_peaks(std::span<const double> x, std::span<const double> y, double rel_threshold) {
    if (x.size() != y.size()) throw ValidationError("peak detection needs matching x and y");
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    if (n < 3) return peaks;
    const double top = *std::max_element(y.begin(), y.end());
    const double bottom = *std::min_element(y.begin(), y.end());
    if (!(top > 0) || top - bottom <= 1e-14 * std::abs(top)) return peaks;

    std::size_t i = 1;
    while (i + 1 < n) {
        // run of equal values [i, j]
        std::size_t j = i;
        while (j + 1 < n && y[j + 1] == y[i]) ++j;
        if (j + 1 >= n) break;
        if (y[i - 1] < y[i] && y[j + 1] < y[i]) {
            std::size_t best = i;
            for (std::size_t k = i; k <= j; ++k)
                if (std::abs(x[k]) < std::abs(x[best])) best = k;
            const double h = y[i];

            // prominence: lowest point before the signal rises above h on each side
            double left_min = h, right_min = h;
            std::size_t k = i;
            while (k > 0 && y[k - 1] <= h) left_min = std::min(left_min, y[--k]);
            k = j;
            while (k + 1 < n && y[k + 1] <= h) right_min = std::min(right_min, y[++k]);

            Peak p;
            p.position = x[best];
            p.height = h;
            p.prominence = h - std::max(left_min, right_min);

            const double half = 0.5 * h;
            double xl = std::numeric_limits<double>::quiet_NaN(), xr = xl;
            for (k = best; k > 0; --k)
                if (y[k - 1] < half) {
                    xl = x[k - 1] + (half - y[k - 1]) * (x[k] - x[k - 1]) / (y[k] - y[k - 1]);
                    break;
                }
            for (k = best; k + 1 < n; ++k)
                if (y[k + 1] < half) {
                    xr = x[k] + (y[k] - half) * (x[k + 1] - x[k]) / (y[k] - y[k + 1]);
                    break;
                }
            p.fwhm = xr - xl;
            if (p.prominence >= rel_threshold * top) peaks.push_back(p);
        }
        i = j + 1;
    }
    return peaks;
}

std::vector<Peak> detect_peaks(const SpectrumSeries& s, double rel_threshold) {
    return detect_peaks(s.detuning, s.total, rel_threshold);
}

std::vector<double> default_grid(const RateSet& rates, std::size_t points) {
    if (points < 2) throw ValidationError("grid needs at least two points");
    double span = std::abs(rates.gamma_down(0, 0));
    if (rates.emitter_count() >= 2) span = std::max(span, std::abs(rates.delta_down(0, 1)));
    if (span == 0.0) span = 1.0;
    span *= 4.0;
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = -span + 2.0 * span * double(i) / double(points - 1);
    return g;
}

double window_mean(std::span<const double> t, std::span<const double> v, double t0, double t1) {
    if (t.size() != v.size() || t.size() < 2) throw ValidationError("window mean needs matching series");
    if (!(t1 > t0)) throw ValidationError("window must have positive length");
    if (t0 < t.front() || t1 > t.back()) throw ValidationError("window lies outside the sampled interval");
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double a = std::max(t[i - 1], t0), b = std::min(t[i], t1);
        if (b <= a) continue;
        const double slope = (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
        const double va = v[i - 1] + slope * (a - t[i - 1]), vb = v[i - 1] + slope * (b - t[i - 1]);
        acc += 0.5 * (va + vb) * (b - a);
    }
    return acc / (t1 - t0);
}

}  // namespace gainqe
