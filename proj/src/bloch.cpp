#include "gainqe/bloch.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace gainqe {

namespace {

const cplx kI(0.0, 1.0);

struct PairRates {
    double la, lb, lab;  // decay
    double ga, gb, gab;  // gain plus heuristic pump
    double pa, pb;       // dephasing
    double j;            // exchange delta_down + delta_up
};

PairRates pair_rates(const RateSet& r, const ModelOptions& o) {
    if (r.emitter_count() != 2) throw ValidationError("Bloch equations need exactly two emitters");
    const RMat up = effective_up_rates(r, o);
    return {r.gamma_down(0, 0), r.gamma_down(1, 1), r.gamma_down(0, 1), up(0, 0), up(1, 1), up(0, 1),
            r.gamma_dephase(0), r.gamma_dephase(1), r.delta_down(0, 1) + r.delta_up(0, 1)};
}

struct SymRates {
    double l, x, g, y, p, j;
};

SymRates symmetric_rates(const RateSet& r, const ModelOptions& o) {
    const PairRates k = pair_rates(r, o);
    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); };
    if (!same(k.la, k.lb) || !same(k.ga, k.gb) || !same(k.pa, k.pb))
        throw ValidationError("dressed Bloch equations need equal rates on both emitters; use the master equation");
    return {k.la, k.lab, k.ga, k.gab, k.pa, k.j};
}

using Vec6 = std::array<double, 6>;

template <class Rhs>
std::vector<Vec6> integrate(Rhs rhs, Vec6 x, std::span<const double> t, const EvolveOptions& opts) {
    namespace ode = boost::numeric::odeint;
    if (t.empty() || t.front() != 0.0) throw ValidationError("time grid must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw ValidationError("time grid must be strictly increasing");
    std::vector<Vec6> out;
    out.reserve(t.size());
    if (t.size() == 1) return {x};
    auto obs = [&](const Vec6& s, double) { out.push_back(s); };
    try {
        auto stepper = ode::make_controlled(opts.atol, opts.rtol, ode::runge_kutta_dopri5<Vec6>());
        ode::integrate_times(stepper, rhs, x, t.begin(), t.end(), std::min(1e-3, t.back() * 1e-3), obs,
                             ode::max_step_checker(1000000));
    } catch (const std::exception& e) {
        throw IntegrationError(std::string("Bloch integration failed: ") + e.what());
    }
    return out;
}

Vec6 pack(const BareState& s) { return {s.rho11, s.rho22, s.rho33, s.rho44, s.rho23.real(), s.rho23.imag()}; }
BareState unpack_bare(const Vec6& v) { return {v[0], v[1], v[2], v[3], {v[4], v[5]}}; }
Vec6 pack(const DressedState& s) { return {s.rhoGG, s.rhoPP, s.rhoMM, s.rhoTT, s.rhoPM.real(), s.rhoPM.imag()}; }
DressedState unpack_dressed(const Vec6& v) { return {v[0], v[1], v[2], v[3], {v[4], v[5]}}; }

}  // namespace

BareState bare_rhs(const BareState& s, const RateSet& rates, const ModelOptions& options) {
    const PairRates k = pair_rates(rates, options);
    const double re = s.rho23.real(), im = s.rho23.imag();
    BareState d;
    d.rho22 = -(k.lb + k.ga) * s.rho22 + k.la * s.rho44 + k.gb * s.rho11 - (k.lab + k.gab) * re - 2 * k.j * im;
    d.rho33 = -(k.la + k.gb) * s.rho33 + k.lb * s.rho44 + k.ga * s.rho11 - (k.lab + k.gab) * re + 2 * k.j * im;
    d.rho44 = -(k.la + k.lb) * s.rho44 + k.ga * s.rho22 + k.gb * s.rho33 + 2 * k.gab * re;
    d.rho11 = -(d.rho22 + d.rho33 + d.rho44);
    d.rho23 = -0.5 * (k.la + k.lb + k.ga + k.gb + k.pa + k.pb) * s.rho23 +
              0.5 * k.lab * (2 * s.rho44 - s.rho22 - s.rho33) + 0.5 * k.gab * (2 * s.rho11 - s.rho22 - s.rho33) -
              kI * k.j * (s.rho33 - s.rho22);
    return d;
}

DressedState dressed_rhs(const DressedState& s, const RateSet& rates, const ModelOptions& options) {
    const SymRates r = symmetric_rates(rates, options);
    const double exch = 0.5 * r.p * (s.rhoPP - s.rhoMM);
    DressedState d;
    d.rhoPP = (r.l + r.x) * s.rhoTT + (r.g + r.y) * s.rhoGG - (r.l + r.x + r.g + r.y) * s.rhoPP - exch;
    d.rhoMM = (r.l - r.x) * s.rhoTT + (r.g - r.y) * s.rhoGG - (r.l - r.x + r.g - r.y) * s.rhoMM + exch;
    d.rhoTT = -2 * r.l * s.rhoTT + r.g * (s.rhoPP + s.rhoMM) + r.y * (s.rhoPP - s.rhoMM);
    d.rhoGG = -(d.rhoPP + d.rhoMM + d.rhoTT);
    d.rhoPM = -(r.l + r.g + 2.0 * kI * r.j) * s.rhoPM - 0.5 * r.p * (s.rhoPM - std::conj(s.rhoPM));
    return d;
}

DressedState dressed_steady(const RateSet& rates, const ModelOptions& options) {
    const SymRates r = symmetric_rates(rates, options);
    const double sp = r.g + r.y, sm = r.g - r.y;  // upward rates into |+>, |->
    const double lp = r.l + r.x, lm = r.l - r.x;  // decay of |+>, |->
    // unknowns (rho++, rho--, rhoTT) with rhoGG eliminated by the trace
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    a << -sp - (lp + sp) - r.p / 2, -sp + r.p / 2, lp - sp,
         -sm + r.p / 2, -sm - (lm + sm) - r.p / 2, lm - sm,
         sp, sm, -2 * r.l;
    b << -sp, -sm, 0.0;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
    lu.setThreshold(1e-12);
    if (lu.rank() < 3)
        throw RegimeError("dressed steady state is not unique (singular population system; needs dephasing or an "
                          "open subradiant channel)");
    const Eigen::Vector3d x = lu.solve(b);

    // (Re, Im) of rho+- solve a homogeneous system with determinant (l+g)(l+g+p) + 4 j^2
    Eigen::Matrix2d c;
    c << -(r.l + r.g), 2 * r.j, -2 * r.j, -(r.l + r.g + r.p);
    if (std::abs(c.determinant()) <= 1e-300) throw RegimeError("dressed coherence steady state is not unique");
    const Eigen::Vector2d pm = c.partialPivLu().solve(Eigen::Vector2d::Zero());

    return {1.0 - x.sum(), x(0), x(1), x(2), {pm(0), pm(1)}};
}

NoGainTrajectory nogain_analytic(const RateSet& rates, double c1, double c2, cplx c3, std::span<const double> t) {
    if (rates.gamma_up.cwiseAbs().maxCoeff() > 0 || rates.gamma_pump.cwiseAbs().maxCoeff() > 0)
        throw ValidationError("closed-form decay needs zero gain: with gain the |T> state does not decouple");
    if (rates.gamma_dephase.cwiseAbs().maxCoeff() > 0)
        throw ValidationError("closed-form decay needs zero dephasing");
    const SymRates r = symmetric_rates(rates, {});
    NoGainTrajectory out;
    out.t.assign(t.begin(), t.end());
    for (double ti : t) {
        out.rhoPP.push_back(c1 * std::exp(-(r.l + r.x) * ti));
        out.rhoMM.push_back(c2 * std::exp(-(r.l - r.x) * ti));
        out.rhoPM.push_back(c3 * std::exp(-(r.l + 2.0 * kI * r.j) * ti));
    }
    return out;
}

std::pair<double, double> populations(const BareState& s) { return {s.rho33 + s.rho44, s.rho22 + s.rho44}; }

DressedState bare_to_dressed(const BareState& s) {
    const double mean = 0.5 * (s.rho22 + s.rho33);
    return {s.rho11, mean + s.rho23.real(), mean - s.rho23.real(), s.rho44,
            {0.5 * (s.rho33 - s.rho22), s.rho23.imag()}};
}

BareState dressed_to_bare(const DressedState& s) {
    const double mean = 0.5 * (s.rhoPP + s.rhoMM);
    return {s.rhoGG, mean - s.rhoPM.real(), mean + s.rhoPM.real(), s.rhoTT,
            {0.5 * (s.rhoPP - s.rhoMM), s.rhoPM.imag()}};
}

CMat dressed_basis() {
    const double h = 1.0 / std::sqrt(2.0);
    CMat u = CMat::Zero(4, 4);
    u(0, 0) = 1.0;
    u(1, 1) = -h;
    u(2, 1) = h;
    u(1, 2) = h;
    u(2, 2) = h;
    u(3, 3) = 1.0;
    return u;
}

CMat to_dressed(const CMat& bare) {
    const CMat u = dressed_basis();
    return u.adjoint() * bare * u;
}

CMat to_bare(const CMat& dressed) {
    const CMat u = dressed_basis();
    return u * dressed * u.adjoint();
}

BareState bare_from_matrix(const CMat& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw ValidationError("two-emitter density matrix must be 4x4");
    return {rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real(), rho(3, 3).real(), rho(1, 2)};
}

DressedState dressed_from_matrix(const CMat& d) {
    if (d.rows() != 4 || d.cols() != 4) throw ValidationError("two-emitter density matrix must be 4x4");
    return {d(0, 0).real(), d(2, 2).real(), d(1, 1).real(), d(3, 3).real(), d(2, 1)};
}

CMat bare_to_matrix(const BareState& s) {
    CMat rho = CMat::Zero(4, 4);
    rho(0, 0) = s.rho11;
    rho(1, 1) = s.rho22;
    rho(2, 2) = s.rho33;
    rho(3, 3) = s.rho44;
    rho(1, 2) = s.rho23;
    rho(2, 1) = std::conj(s.rho23);
    return rho;
}

std::vector<BareState> evolve_bare(const RateSet& rates, const BareState& init, std::span<const double> t,
                                   const ModelOptions& options, const EvolveOptions& opts) {
    pair_rates(rates, options);
    auto rhs = [&](const Vec6& x, Vec6& dx, double) { dx = pack(bare_rhs(unpack_bare(x), rates, options)); };
    std::vector<BareState> out;
    for (const auto& v : integrate(rhs, pack(init), t, opts)) out.push_back(unpack_bare(v));
    return out;
}

std::vector<DressedState> evolve_dressed(const RateSet& rates, const DressedState& init, std::span<const double> t,
                                         const ModelOptions& options, const EvolveOptions& opts) {
    symmetric_rates(rates, options);
    auto rhs = [&](const Vec6& x, Vec6& dx, double) { dx = pack(dressed_rhs(unpack_dressed(x), rates, options)); };
    std::vector<DressedState> out;
    for (const auto& v : integrate(rhs, pack(init), t, opts)) out.push_back(unpack_dressed(v));
    return out;
}

}  // namespace gainqe
