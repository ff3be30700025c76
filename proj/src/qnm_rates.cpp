#include "gainqe/qnm_rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gainqe {

namespace {

void check_pair(const QnmModel& m, std::size_t a, std::size_t b) {
    if (a >= m.emitter_count() || b >= m.emitter_count())
        throw ValidationError("emitter index out of range");
}

double dipole(const QnmModel& m, std::size_t a) {
    return m.dipole_scale.empty() ? 1.0 : m.dipole_scale[a];
}

void warn_if_not_psd(const RMat& m, const char* name) {
    if (m.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
    double tol = -1e-12 * std::max(1.0, m.norm());
    if (es.eigenvalues().minCoeff() < tol) {
        std::ostringstream os;
        os << name << " is not positive semidefinite (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
        warn(os.str());
    }
}

}  // namespace

void QnmModel::validate() const {
    if (!(gamma_c > 0)) throw ValidationError("qnm.gamma_c must be > 0");
    if (!(omega_c > 0)) throw ValidationError("qnm.omega_c must be > 0");
    if (!(n_b > 0)) throw ValidationError("qnm.n_b must be > 0");
    if (!(gain_overlap >= 0)) throw ValidationError("qnm.gain_overlap must be >= 0");
    if (!(alpha_g >= 0)) throw ValidationError("alpha_g must be >= 0");
    if (mode_amp.empty()) throw ValidationError("qnm.mode_amp needs at least one emitter");
    if (!dipole_scale.empty() && dipole_scale.size() != mode_amp.size())
        throw ValidationError("emitters.dipole_scale length does not match qnm.mode_amp");
    for (double d : dipole_scale)
        if (!(d > 0)) throw ValidationError("emitters.dipole_scale entries must be > 0");
}

RateSet RateSet::zeros(std::size_t n, double omega0) {
    RateSet r;
    r.omega0 = omega0;
    const auto k = static_cast<Eigen::Index>(n);
    r.gamma_down = RMat::Zero(k, k);
    r.gamma_up = RMat::Zero(k, k);
    r.delta_down = RMat::Zero(k, k);
    r.delta_up = RMat::Zero(k, k);
    r.gamma_dephase = RVec::Zero(k);
    r.gamma_pump = RVec::Zero(k);
    return r;
}

void RateSet::validate() const {
    const auto n = gamma_down.rows();
    if (n == 0) throw ValidationError("rate set has no emitters");
    auto square = [n](const RMat& m, const char* name) {
        if (m.rows() != n || m.cols() != n)
            throw ValidationError(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
        if (!m.allFinite()) throw ValidationError(std::string(name) + " has non-finite entries");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
            throw ValidationError(std::string(name) + " must be symmetric");
    };
    square(gamma_down, "gamma_down");
    square(gamma_up, "gamma_up");
    square(delta_down, "delta_down");
    square(delta_up, "delta_up");
    auto vec = [n](const RVec& v, const char* name) {
        if (v.size() != n) throw ValidationError(std::string(name) + " must have one entry per emitter");
        if (!v.allFinite() || (v.array() < 0).any()) throw ValidationError(std::string(name) + " entries must be >= 0");
    };
    vec(gamma_dephase, "gamma_dephase");
    vec(gamma_pump, "gamma_pump");
    warn_if_not_psd(gamma_down, "gamma_down");
    warn_if_not_psd(gamma_up, "gamma_up");
}

RateSet RateSet::scaled(double s) const {
    RateSet r = *this;
    r.gamma_down *= s;
    r.gamma_up *= s;
    r.delta_down *= s;
    r.delta_up *= s;
    r.gamma_dephase *= s;
    r.gamma_pump *= s;
    return r;
}

cplx ac_coefficient(double omega, const QnmModel& model) {
    const cplx pole(model.omega_c, -model.gamma_c);
    return omega / (2.0 * (pole - omega));
}

double background_green_im(double omega, double n_b) {
    const double k = omega / kHbarC;
    return k * k * k * n_b / (6.0 * std::numbers::pi);
}

cplx green_projected(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    check_pair(model, a, b);
    return dipole(model, a) * dipole(model, b) * ac_coefficient(omega, model) * model.mode_amp[a] * model.mode_amp[b];
}

double gamma_nldos(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    return 2.0 * green_projected(omega, model, a, b).imag() / background_green_im(omega, model.n_b);
}

double delta_nldos(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    return -green_projected(omega, model, a, b).real() / background_green_im(omega, model.n_b);
}

cplx k_projected(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    check_pair(model, a, b);
    const cplx fa = model.mode_amp[a], fb = model.mode_amp[b];
    const cplx overlap = fa == fb ? cplx(std::norm(fa), 0.0) : fa * std::conj(fb);
    return dipole(model, a) * dipole(model, b) * std::norm(ac_coefficient(omega, model)) * overlap * model.alpha_g *
           model.gain_overlap;
}

double gamma_up(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    return 2.0 * k_projected(omega, model, a, b).real() / background_green_im(omega, model.n_b);
}

double delta_up(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    // Im K is odd under a<->b; the coupling is a symmetric matrix, so the ordered pair (lo, hi) defines it.
    if (a == b) return 0.0;
    const auto lo = std::min(a, b), hi = std::max(a, b);
    return -k_projected(omega, model, lo, hi).imag() / background_green_im(omega, model.n_b);
}

double gamma_down_total(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    return gamma_nldos(omega, model, a, b) + gamma_up(omega, model, a, b);
}

double delta_down_total(double omega, const QnmModel& model, std::size_t a, std::size_t b) {
    return delta_nldos(omega, model, a, b) + delta_up(omega, model, a, b);
}

RateSet rates_at(double omega0, const QnmModel& model) {
    model.validate();
    if (!(omega0 > 0)) throw ValidationError("omega0 must be > 0");
    const std::size_t n = model.emitter_count();
    RateSet r = RateSet::zeros(n, omega0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            const auto i = static_cast<Eigen::Index>(a), j = static_cast<Eigen::Index>(b);
            r.gamma_down(i, j) = r.gamma_down(j, i) = gamma_down_total(omega0, model, a, b);
            r.gamma_up(i, j) = r.gamma_up(j, i) = gamma_up(omega0, model, a, b);
            if (a != b) {
                r.delta_down(i, j) = r.delta_down(j, i) = delta_down_total(omega0, model, a, b);
                r.delta_up(i, j) = r.delta_up(j, i) = delta_up(omega0, model, a, b);
            }
        }
    return r;
}

CollectiveRates collective_rates(const RateSet& rates) {
    if (rates.emitter_count() != 2) throw ValidationError("collective rates need exactly two emitters");
    auto sym = [](const RMat& m) {
        return std::abs(m(0, 0) - m(1, 1)) <= 1e-12 * std::max(1.0, std::abs(m(0, 0)));
    };
    if (!sym(rates.gamma_down) || !sym(rates.gamma_up))
        throw ValidationError("unequal diagonal rates: use the full master equation instead of collective rates");
    const double d = rates.gamma_down(0, 0), x = rates.gamma_down(0, 1);
    return {d + x, d - x};
}

CalibrationResult calibrate(const QnmModel& model, const std::vector<Anchor>& anchors, double tol) {
    if (anchors.empty()) throw ValidationError("calibration needs at least one anchor");
    model.validate();
    QnmModel base = model;
    bool has_up = false;
    for (const auto& a : anchors) {
        if (!(a.omega > 0) || !(a.target > 0)) throw ValidationError("calibration anchors need omega > 0 and target > 0");
        if (a.emitter >= base.emitter_count()) throw ValidationError("calibration anchor emitter out of range");
        if (a.kind == AnchorKind::GammaUp) {
            if (!(a.alpha_g > 0)) throw ValidationError("gain anchors need alpha_g > 0");
            has_up = true;
        }
    }
    if (has_up && base.gain_overlap == 0.0) base.gain_overlap = 1.0;

    // Rates are q*(N + t*U) for decay anchors and q*t*U for gain anchors,
    // with q the |mode_amp|^2 scale and t the overlap scale.
    std::vector<double> nl(anchors.size()), up(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        QnmModel m = base;
        m.alpha_g = anchors[i].alpha_g;
        const auto e = anchors[i].emitter;
        nl[i] = gamma_nldos(anchors[i].omega, m, e, e);
        up[i] = gamma_up(anchors[i].omega, m, e, e);
    }
    auto fit = [](const std::vector<double>& ratio) {
        double num = 0, den = 0;
        for (double r : ratio) { num += r; den += r * r; }
        return den > 0 ? num / den : 1.0;
    };
    double q = 1.0, t = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> rd, ru;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            if (anchors[i].kind == AnchorKind::GammaDown) rd.push_back((nl[i] + t * up[i]) / anchors[i].target);
        }
        const double q_new = rd.empty() ? q : fit(rd);
        for (std::size_t i = 0; i < anchors.size(); ++i)
            if (anchors[i].kind == AnchorKind::GammaUp) ru.push_back(q_new * up[i] / anchors[i].target);
        const double t_new = ru.empty() ? t : fit(ru);
        const bool done = std::abs(q_new - q) <= 1e-15 * q && std::abs(t_new - t) <= 1e-15 * t;
        q = q_new;
        t = t_new;
        if (done) break;
    }

    CalibrationResult res;
    res.model = base;
    if (!(q > 0) || !(t > 0)) {
        res.residuals.assign(anchors.size(), std::numeric_limits<double>::quiet_NaN());
        throw CalibrationError("calibration anchors cannot be met by a positive rescaling", res);
    }
    res.amp_scale = std::sqrt(q);
    for (auto& f : res.model.mode_amp) f *= res.amp_scale;
    res.model.gain_overlap = base.gain_overlap * t;
    res.overlap_scale = model.gain_overlap > 0 ? res.model.gain_overlap / model.gain_overlap : res.model.gain_overlap;
    double worst = 0;
    for (const auto& a : anchors) {
        QnmModel m = res.model;
        m.alpha_g = a.alpha_g;
        const double v = a.kind == AnchorKind::GammaDown ? gamma_down_total(a.omega, m, a.emitter, a.emitter)
                                                         : gamma_up(a.omega, m, a.emitter, a.emitter);
        res.residuals.push_back((v - a.target) / a.target);
        worst = std::max(worst, std::abs(res.residuals.back()));
    }
    if (worst > tol) {
        std::ostringstream os;
        os << "calibration anchors are inconsistent; best-fit relative residuals:";
        for (double r : res.residuals) os << ' ' << r;
        throw CalibrationError(os.str(), res);
    }
    return res;
}

}  // namespace gainqe
