#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gainqe/types.hpp"

namespace gainqe {

inline constexpr double kHbarC = 197.32698;  // eV nm

// Single quasinormal-mode cavity. Frequencies in eV, mode amplitudes in nm^-3/2.
struct QnmModel {
    double omega_c = 0.0;
    double gamma_c = 0.0;            // half width, mode pole at omega_c - i gamma_c
    std::vector<cplx> mode_amp;      // projected e . f_c(r) at each emitter
    double gain_overlap = 0.0;       // integral of |f_c|^2 over the gain volume
    double alpha_g = 0.0;            // |Im eps| of the gain region
    double n_b = 1.5;
    std::vector<double> dipole_scale;
    std::optional<cplx> detector_amp;  // mode value at a detector point, for weighted spectra

    std::size_t emitter_count() const { return mode_amp.size(); }
    // Throws ValidationError on broken invariants.
    void validate() const;
};

// All rates in units of the background rate Gamma_0(omega0) unless rescaled by the caller.
struct RateSet {
    double omega0 = 0.0;
    RMat gamma_down;
    RMat gamma_up;
    RMat delta_down;
    RMat delta_up;
    RVec gamma_dephase;
    RVec gamma_pump;

    std::size_t emitter_count() const { return static_cast<std::size_t>(gamma_down.rows()); }

    static RateSet zeros(std::size_t n, double omega0 = 0.0);
    // Shape/sign checks throw; non-PSD rate matrices only warn.
    void validate() const;
    // Multiplies every rate by s (unit change).
    RateSet scaled(double s) const;
};

cplx ac_coefficient(double omega, const QnmModel& model);
// Im G_B(omega) of the homogeneous background in nm^-3.
double background_green_im(double omega, double n_b);

cplx green_projected(double omega, const QnmModel& model, std::size_t a, std::size_t b);
double gamma_nldos(double omega, const QnmModel& model, std::size_t a, std::size_t b);
double delta_nldos(double omega, const QnmModel& model, std::size_t a, std::size_t b);
cplx k_projected(double omega, const QnmModel& model, std::size_t a, std::size_t b);
double gamma_up(double omega, const QnmModel& model, std::size_t a, std::size_t b);
double delta_up(double omega, const QnmModel& model, std::size_t a, std::size_t b);
double gamma_down_total(double omega, const QnmModel& model, std::size_t a, std::size_t b);
double delta_down_total(double omega, const QnmModel& model, std::size_t a, std::size_t b);

// Rate matrices at omega0; the delta_down diagonal (Lamb shift) is folded into the
// emitter frequency and left at zero.
RateSet rates_at(double omega0, const QnmModel& model);

struct CollectiveRates {
    double super;  // Gamma+ (decay of |+>)
    double sub;    // Gamma- (decay of |->)
};

// Two emitters with equal diagonal rates only.
CollectiveRates collective_rates(const RateSet& rates);

enum class AnchorKind { GammaDown, GammaUp };

struct Anchor {
    double omega = 0.0;
    double target = 0.0;
    double alpha_g = 0.0;
    AnchorKind kind = AnchorKind::GammaDown;
    std::size_t emitter = 0;
};

struct CalibrationResult {
    QnmModel model;
    double amp_scale = 1.0;      // factor applied to every mode amplitude
    double overlap_scale = 1.0;  // factor applied to gain_overlap
    std::vector<double> residuals;  // relative, one per anchor
};

class CalibrationError : public ValidationError {
public:
    CalibrationError(const std::string& what, CalibrationResult best)
        : ValidationError(what), best_fit(std::move(best)) {}
    CalibrationResult best_fit;
};

// Rescales |mode_amp|^2 to fit decay anchors and gain_overlap to fit gain anchors.
// Throws CalibrationError (carrying the best fit) if any residual exceeds tol.
CalibrationResult calibrate(const QnmModel& model, const std::vector<Anchor>& anchors, double tol = 1e-6);

}  // namespace gainqe
