// Acceptance checks 1-8. One PASS/FAIL line per criterion; exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "gainqe/bloch.hpp"
#include "gainqe/liouvillian.hpp"
#include "gainqe/observables.hpp"
#include "gainqe/qnm_rates.hpp"
#include "gainqe/runner.hpp"
#include "gainqe/scenario.hpp"

using namespace gainqe;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kAnchorRel = 1e-6;
constexpr double kSteadyOracle = 1e-10;
constexpr double kTrajectoryOracle = 1e-8;
constexpr double kClosedForm = 1e-6;
constexpr double kNoGainDecay = 1e-9;
constexpr double kPlateauLo = 0.24, kPlateauHi = 0.26;
constexpr double kPlateauT0 = 3.0, kPlateauT1 = 10.0;
constexpr double kBellNegativity = 1e-12;
constexpr double kLocalUnitary = 1e-10;
constexpr double kNegativityCeiling = 1e-3;
constexpr double kNegativityAfter = 2.0;
constexpr double kSpectrumRel = 1e-6;
constexpr double kSpectrumFloor = 1e-12;  // relative to the peak of the series
constexpr double kFaintProminence = 0.05, kVisibleProminence = 0.20;
constexpr std::size_t kRandomCases = 120;

const fs::path kPresets = GAINQE_PRESET_DIR;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

Scenario preset(const std::string& name) { return load_scenario(kPresets / (name + ".json")); }

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double diff(const BareState& a, const BareState& b) {
    return std::max({std::abs(a.rho11 - b.rho11), std::abs(a.rho22 - b.rho22), std::abs(a.rho33 - b.rho33),
                     std::abs(a.rho44 - b.rho44), std::abs(a.rho23 - b.rho23)});
}

double diff(const DressedState& a, const DressedState& b) {
    return std::max({std::abs(a.rhoGG - b.rhoGG), std::abs(a.rhoPP - b.rhoPP), std::abs(a.rhoMM - b.rhoMM),
                     std::abs(a.rhoTT - b.rhoTT), std::abs(a.rhoPM - b.rhoPM)});
}

LindbladModel entry_model(const Scenario& s, const Entry& e) { return make_model(entry_rates(s, e), {e.cross_pump}); }

std::vector<double> emitter_a_population(const Trajectory& tr) {
    std::vector<double> out;
    for (const auto& rho : tr.rho) out.push_back(populations(bare_from_matrix(rho)).first);
    return out;
}

// ---- 1

void anchors(Outcome& o) {
    const Scenario s = preset("fig4_near_resonant");
    QnmModel m = *s.qnm;
    m.alpha_g = 0.0;
    const double off = rates_at(1.56, m).gamma_down(0, 0);
    const double near = rates_at(1.21, m).gamma_down(0, 0);
    o.detail << "Gamma(1.56)=" << off << " rel " << rel(off, 32.1) << ", Gamma(1.21)=" << near << " rel "
             << rel(near, 2473.84);
    o.require(rel(off, 32.1) <= kAnchorRel, "1.56 eV anchor");
    o.require(rel(near, 2473.84) <= kAnchorRel, "1.21 eV anchor");
}

// ---- 2

CMat random_unitary(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    CMat x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<CMat> qr(x);
    return qr.householderQ();
}

BareState random_bare(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u;
    double p[4];
    double sum = 0;
    for (double& x : p) sum += (x = u(rng));
    BareState b{p[0] / sum, p[1] / sum, p[2] / sum, p[3] / sum, {0, 0}};
    b.rho23 = std::polar(u(rng) * std::sqrt(b.rho22 * b.rho33), 2 * M_PI * u(rng));
    return b;
}

void oracle_equivalence(Outcome& o) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto t = linspace(0.0, 10.0, 101);
    double worst_ss = 0, worst_bare = 0, worst_dressed = 0;
    for (std::size_t c = 0; c < kRandomCases; ++c) {
        const double l = 1.0, g = 1.6 * u(rng);
        RateSet r = RateSet::zeros(2, 1.3);
        const double lab = (2 * u(rng) - 1) * l, gab = (2 * u(rng) - 1) * g;
        r.gamma_down << l, lab, lab, l;
        r.gamma_up << g, gab, gab, g;
        const double d = 10 * u(rng) - 5, du = (u(rng) - 0.5) * g;
        r.delta_down << 0, d, d, 0;
        r.delta_up << 0, du, du, 0;
        r.gamma_dephase.setConstant(std::pow(10.0, -3.0 + 2.0 * u(rng)) * l);
        if (c % 2) r.gamma_pump.setConstant(0.1 * u(rng));
        const ModelOptions opt{c % 3 != 0};
        const auto model = make_model(r, opt);

        const auto ss = steady_state(model);
        worst_ss = std::max(worst_ss, diff(dressed_steady(r, opt), dressed_from_matrix(to_dressed(ss.matrix()))));

        BareState init;
        switch (c % 4) {
            case 0: init = {0, 0, 1, 0, {0, 0}}; break;
            case 1: init = {1, 0, 0, 0, {0, 0}}; break;
            case 2: init = {0, 0.5, 0.5, 0, {0.5, 0}}; break;
            default: init = random_bare(rng);
        }
        const auto master = evolve(model, DensityMatrix(bare_to_matrix(init)), t);
        const auto bare = evolve_bare(r, init, t, opt);
        const auto dressed = evolve_dressed(r, bare_to_dressed(init), t, opt);
        for (std::size_t i = 0; i < t.size(); ++i) {
            worst_bare = std::max(worst_bare, diff(bare[i], bare_from_matrix(master.rho[i])));
            worst_dressed = std::max(worst_dressed, diff(dressed[i], dressed_from_matrix(to_dressed(master.rho[i]))));
        }
    }
    o.detail << kRandomCases << " rate sets, steady " << worst_ss << ", bare " << worst_bare << ", dressed "
             << worst_dressed;
    o.require(worst_ss <= kSteadyOracle, "steady oracle");
    o.require(worst_bare <= kTrajectoryOracle, "bare trajectories");
    o.require(worst_dressed <= kTrajectoryOracle, "dressed trajectories");
}

// ---- 3

void closed_form(Outcome& o) {
    double worst = 0;
    for (double g : {0.01, 0.1, 0.5, 1.0, 1.6}) {
        for (double delta : {0.0, 0.1, 3.43}) {
            const double l = 1.0;
            RateSet r = RateSet::zeros(2, 1.3);
            r.gamma_down.setConstant(l);
            r.gamma_up.setConstant(g);
            r.delta_down << 0, delta, delta, 0;
            r.gamma_dephase.setConstant(1e-6 * l);
            const CMat rho = steady_state(make_model(r)).matrix();
            const auto d = dressed_from_matrix(to_dressed(rho));
            const double s = l + g;
            worst = std::max({worst, std::abs(populations(bare_from_matrix(rho)).first - g / s),
                              std::abs(d.rhoTT - g * g / (s * s)), std::abs(d.rhoPP - g * l / (s * s))});
        }
    }
    o.detail << "max deviation " << worst;
    o.require(worst <= kClosedForm, "closed-form laws");
}

// ---- 4

void no_gain(Outcome& o) {
    double worst = 0;
    for (const char* name : {"fig4_near_resonant", "fig5_off_resonant"}) {
        const Scenario s = preset(name);
        RateSet r = entry_rates(s, {0.0, 0.0, true});
        r.gamma_up.setZero();
        r.delta_up.setZero();
        r.gamma_dephase.setZero();
        const auto cr = collective_rates(r);
        const auto t = linspace(0.0, 10.0, 201);
        const auto tr = evolve(make_model(r), DensityMatrix::basis_state(2, 2), t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto d = dressed_from_matrix(to_dressed(tr.rho[i]));
            worst = std::max({worst, std::abs(d.rhoPP - 0.5 * std::exp(-cr.super * t[i])),
                              std::abs(d.rhoMM - 0.5 * std::exp(-cr.sub * t[i]))});
        }
    }
    o.detail << "decay laws max deviation " << worst;
    o.require(worst <= kNoGainDecay, "collective decay laws");

    // The plateau is a window observable: the mean of rho_aa over [3, 10].
    const Scenario s = preset("fig4_near_resonant");
    const auto e = entries(s).front();
    const auto t = s.run.t_grid.resolve();
    const auto aa = emitter_a_population(evolve(entry_model(s, e), initial_state(s), t));
    const double plateau = window_mean(t, aa, kPlateauT0, kPlateauT1);
    double lo = 1, hi = 0, settled = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < kPlateauT0 || t[i] > kPlateauT1) continue;
        lo = std::min(lo, aa[i]);
        hi = std::max(hi, aa[i]);
        if (aa[i] < kPlateauLo || aa[i] > kPlateauHi) settled = t[i];
    }
    o.detail << "; plateau mean " << plateau << " (pointwise range [" << lo << ", " << hi << "], last sample outside the band at t="
             << settled << ")";
    o.require(plateau >= kPlateauLo && plateau <= kPlateauHi, "plateau");
}

// ---- 5

void negativity(Outcome& o) {
    const std::size_t a[] = {0};
    CVec plus = CVec::Zero(4), minus = CVec::Zero(4);
    plus(1) = plus(2) = minus(2) = 1 / std::sqrt(2.0);
    minus(1) = -1 / std::sqrt(2.0);
    const double ep = log_negativity(DensityMatrix::pure(plus), a);
    const double em = log_negativity(DensityMatrix::pure(minus), a);
    o.require(std::abs(ep - 1) <= kBellNegativity && std::abs(em - 1) <= kBellNegativity, "Bell states");

    std::mt19937_64 rng(7);
    double product = 0, unitary = 0;
    for (int k = 0; k < 50; ++k) {
        const CMat ua = random_unitary(rng, 2), ub = random_unitary(rng, 2);
        CVec qa = ua.col(0), qb = ub.col(0);
        CVec psi(4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) psi(2 * i + j) = qa(i) * qb(j);
        product = std::max(product, log_negativity(DensityMatrix::pure(psi), a));

        const CMat w = random_unitary(rng, 4);
        CMat rho = 0.6 * plus * plus.adjoint() + 0.4 * (w.col(0) * w.col(0).adjoint());
        CMat u(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q) u(2 * i + p, 2 * j + q) = ua(i, j) * ub(p, q);
        unitary = std::max(unitary, std::abs(log_negativity(rho, a) - log_negativity(hermitize(u * rho * u.adjoint()), a)));
    }
    o.require(product <= kBellNegativity, "product states");
    o.require(unitary <= kLocalUnitary, "local-unitary invariance");

    Scenario s = preset("fig4_near_resonant");
    s.run.alpha_g = {0.22};
    const auto t = s.run.t_grid.resolve();
    const auto tr = evolve(entry_model(s, entries(s).front()), initial_state(s), t);
    double peak = 0, at = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= kNegativityAfter) continue;
        const double en = log_negativity(tr.rho[i], a);
        if (en > peak) peak = en, at = t[i];
    }
    o.detail << "E_N(+)=" << ep << ", E_N(-)=" << em << ", product " << product << ", local unitary " << unitary
             << "; near-resonance alpha_g=0.22 max E_N(t>2)=" << peak << " at t=" << at
             << ", E_N(t=" << t.back() << ")=" << log_negativity(tr.rho.back(), a);
    o.require(peak < kNegativityCeiling, "near-resonance negativity stays below 1e-3");
}

// ---- 6

const Peak* nearest(const std::vector<Peak>& peaks, double x) {
    const Peak* best = nullptr;
    for (const auto& p : peaks)
        if (!best || std::abs(p.position - x) < std::abs(best->position - x)) best = &p;
    return best;
}

void spectra(Outcome& o) {
    const Scenario s = preset("fig7_spectra_pump");
    const auto grid = spectrum_grid(s);
    const double step = grid[1] - grid[0];
    double worst = 0;
    bool positions = true;
    double faint = -1, visible = -1;
    for (const auto& e : entries(s)) {
        const auto model = entry_model(s, e);
        const double delta = model.rates.delta_down(0, 1);
        SpectrumOptions td;
        td.method = SpectrumMethod::TimeDomain;
        const auto a = spectrum_ss(model, grid, td);
        const auto b = spectrum_ss(model, grid);
        const double scale = *std::max_element(b.total.begin(), b.total.end());
        for (std::size_t i = 0; i < grid.size(); ++i)
            worst = std::max(worst, std::abs(a.total[i] - b.total[i]) / (std::abs(b.total[i]) + kSpectrumFloor * scale));

        const Peak* up = nearest(b.peaks, delta);
        const Peak* down = nearest(b.peaks, -delta);
        if (!e.cross_pump) {
            // both lines are present without the cross-pump term
            const bool ok = b.peaks.size() == 2 && std::abs(up->position - delta) <= step &&
                            std::abs(down->position + delta) <= step;
            positions = positions && ok;
            o.detail << " pump " << e.gamma_pump << " cross off: peaks";
            for (const auto& p : b.peaks) o.detail << ' ' << p.position;
            o.detail << " vs +-" << delta << " (step " << step << ");";
        } else {
            double ratio = 0;
            if (down && down != up && down->position < 0) ratio = down->prominence / up->prominence;
            o.detail << " pump " << e.gamma_pump << " cross on: " << b.peaks.size() << " peak(s), subradiant/superradiant "
                     << ratio << ';';
            if (std::abs(e.gamma_pump - 0.001) < 1e-15) faint = ratio;
            if (std::abs(e.gamma_pump - 0.1) < 1e-15) visible = ratio;
        }
    }
    o.detail << " time-domain vs resolvent max rel " << worst;
    o.require(worst <= kSpectrumRel, "time-domain vs resolvent");
    o.require(positions, "peaks at +-delta within one grid step");
    o.require(faint >= 0 && faint < kFaintProminence, "subradiant prominence < 5% at pump 0.001");
    o.require(visible > kVisibleProminence, "subradiant prominence > 20% at pump 0.1");
}

// ---- 7

void stability(Outcome& o) {
    CMat grow = CMat::Zero(4, 4);
    grow(0, 0) = 2e-8;
    bool rejected = false;
    try {
        check_stability(grow);
    } catch (const RegimeError&) {
        rejected = true;
    }
    o.require(rejected, "eigenvalue with Re = 2e-8 rejected");

    const fs::path out = fs::temp_directory_path() / "gainqe_acceptance";
    const fs::path unstable = kPresets.parent_path() / "tests" / "data" / "unstable.json";
    const std::string cmd = std::string("\"") + GAINQE_CLI + "\" run --scenario \"" + unstable.string() + "\" --out \"" +
                            (out / "unstable").string() + "\" >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.detail << "unstable rate set exits " << code;
    o.require(code == 3, "unstable rate set exits with code 3");

    std::size_t accepted = 0, total = 0;
    for (const auto& f : fs::directory_iterator(kPresets)) {
        if (f.path().extension() != ".json") continue;
        ++total;
        try {
            const Scenario s = load_scenario(f.path());
            if (s.run.mode != RunMode::Rates)
                for (const auto& e : entries(s)) check_stability(liouvillian_matrix(entry_model(s, e)));
            run(s, out / "presets");
            ++accepted;
        } catch (const std::exception& ex) {
            o.detail << "; " << f.path().filename().string() << ": " << ex.what();
        }
    }
    o.detail << "; presets accepted " << accepted << "/" << total;
    o.require(total > 0 && accepted == total, "all presets accepted");
    fs::remove_all(out);
}

// ---- 8

void monotone(Outcome& o) {
    for (const char* name : {"fig4_near_resonant", "fig5_off_resonant"}) {
        Scenario s = preset(name);
        s.run.alpha_g = {0.0, 0.001, 0.1, 0.22};
        s.run.initial_state = InitialKind::ExcitedA;
        const auto t = s.run.t_grid.resolve();
        double prev_plateau = -1, prev_steady = -1;
        bool ok = true;
        o.detail << ' ' << s.run.omega0 << " eV plateau/steady:";
        for (const auto& e : entries(s)) {
            const auto model = entry_model(s, e);
            const auto aa = emitter_a_population(evolve(model, initial_state(s), t));
            const double plateau = window_mean(t, aa, kPlateauT0, kPlateauT1);
            const double steady = populations(bare_from_matrix(steady_state(model).matrix())).first;
            ok = ok && plateau > prev_plateau && steady > prev_steady;
            prev_plateau = plateau;
            prev_steady = steady;
            o.detail << ' ' << plateau << '/' << steady;
        }
        o.detail << ';';
        o.require(ok, std::string("strictly increasing at ") + name);
    }
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // 0 when the criterion has no runtime limit
        std::function<void(Outcome&)> check;
    };
    const std::vector<Criterion> all = {
        {1, "rate anchors", 1.0, anchors},
        {2, "oracle equivalence", 30.0, oracle_equivalence},
        {3, "closed-form steady laws", 0.0, closed_form},
        {4, "no-gain analytics and plateau", 5.0, no_gain},
        {5, "negativity", 0.0, negativity},
        {6, "spectra", 60.0, spectra},
        {7, "stability guard", 0.0, stability},
        {8, "gain monotonicity", 0.0, monotone},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.check(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime budget");
        std::printf("criterion %d %s: %s (%.2f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                    o.detail.str().c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, all.size());
    return failed ? 1 : 0;
}
