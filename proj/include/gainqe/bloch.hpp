#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gainqe/liouvillian.hpp"
#include "gainqe/qnm_rates.hpp"

namespace gainqe {

// Two-emitter Bloch equations. Bare basis: 1=|gg>, 2=|g_a e_b>, 3=|e_a g_b>, 4=|e_a e_b>.
// Dressed basis: |G>=|gg>, |+-> = (|e_a g_b> +- |g_a e_b>)/sqrt2, |T>=|ee>.
// Rate inputs are the same RateSet/ModelOptions as the master equation; the
// heuristic pump enters through effective_up_rates.

struct BareState {
    double rho11 = 1.0, rho22 = 0.0, rho33 = 0.0, rho44 = 0.0;
    cplx rho23{0.0, 0.0};
};

struct DressedState {
    double rhoGG = 1.0, rhoPP = 0.0, rhoMM = 0.0, rhoTT = 0.0;
    cplx rhoPM{0.0, 0.0};
};

BareState bare_rhs(const BareState& s, const RateSet& rates, const ModelOptions& options = {});
// Requires equal diagonal rates for both emitters.
DressedState dressed_rhs(const DressedState& s, const RateSet& rates, const ModelOptions& options = {});
DressedState dressed_steady(const RateSet& rates, const ModelOptions& options = {});

struct NoGainTrajectory {
    std::vector<double> t;
    std::vector<double> rhoPP, rhoMM;
    std::vector<cplx> rhoPM;
};

// C1 = rho++(0), C2 = rho--(0), C3 = rho+-(0); valid without gain, pump or dephasing.
NoGainTrajectory nogain_analytic(const RateSet& rates, double c1, double c2, cplx c3, std::span<const double> t);

std::pair<double, double> populations(const BareState& s);

DressedState bare_to_dressed(const BareState& s);
BareState dressed_to_bare(const DressedState& s);

// Full 4x4 change of basis, columns ordered (G, -, +, T).
CMat dressed_basis();
CMat to_dressed(const CMat& bare);
CMat to_bare(const CMat& dressed);

BareState bare_from_matrix(const CMat& rho);
// Tracked elements of a dressed-basis matrix ordered (G, -, +, T).
DressedState dressed_from_matrix(const CMat& rho_dressed);
CMat bare_to_matrix(const BareState& s);

std::vector<BareState> evolve_bare(const RateSet& rates, const BareState& init, std::span<const double> t,
                                   const ModelOptions& options = {}, const EvolveOptions& opts = {});
std::vector<DressedState> evolve_dressed(const RateSet& rates, const DressedState& init, std::span<const double> t,
                                         const ModelOptions& options = {}, const EvolveOptions& opts = {});

}  // namespace gainqe
