#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gainqe/qnm_rates.hpp"
#include "gainqe/types.hpp"

namespace gainqe {

// Basis per emitter is {|g>, |e>}; emitter 0 is the most significant tensor factor,
// so for two emitters index 1 = |g_a e_b>, 2 = |e_a g_b>, 3 = |e_a e_b>.
// Superoperators act on column-stacked vec(rho), index i + d*j for rho(i, j).

CMat lowering_operator(std::size_t n, std::size_t site);
CMat raising_operator(std::size_t n, std::size_t site);
CMat number_operator(std::size_t n, std::size_t site);

class DensityMatrix {
public:
    // Validates Hermiticity and unit trace to 1e-12 and eigenvalues >= -1e-10.
    explicit DensityMatrix(CMat rho);

    static DensityMatrix ground(std::size_t n);
    static DensityMatrix basis_state(std::size_t n, std::size_t index);
    static DensityMatrix pure(const CVec& psi);

    const CMat& matrix() const { return rho_; }
    std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
    std::size_t emitters() const;

private:
    CMat rho_;
};

struct ModelOptions {
    // false zeroes the off-diagonal gain rates and the heuristic cross-pump term
    bool include_cross_pump = true;
};

enum class JumpFamily { Lowering, Raising, Number };

struct Dissipator {
    JumpFamily family;
    CMat rates;  // Hermitian rate matrix over emitters, Kossakowski form
    std::string label;
};

struct LindbladModel {
    std::size_t n = 0;
    RateSet rates;
    ModelOptions options;
    bool rotating_frame = true;
    CMat hamiltonian;
    std::vector<Dissipator> dissipators;

    std::size_t dim() const { return std::size_t{1} << n; }
};

CMat build_hamiltonian(const RateSet& rates);
// Upward rate matrix felt by the emitters: gain rates plus the heuristic pump.
RMat effective_up_rates(const RateSet& rates, const ModelOptions& options = {});
std::vector<Dissipator> build_dissipators(const RateSet& rates, const ModelOptions& options = {});
LindbladModel make_model(const RateSet& rates, const ModelOptions& options = {});

CMat liouvillian_matrix(const LindbladModel& model);
// d rho / dt in operator form, without building the superoperator.
CMat apply_generator(const LindbladModel& model, const CMat& rho);

CVec vectorize(const CMat& m);
CMat unvectorize(const CVec& v, std::size_t dim);

struct EvolveOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double positivity_tol = 1e-8;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<CMat> rho;
};

Trajectory evolve(const LindbladModel& model, const DensityMatrix& rho0, std::span<const double> t_grid,
                  const EvolveOptions& opts = {});

struct SteadyStateOptions {
    double unstable_tol = 1e-8;     // any eigenvalue with Re above this is rejected
    double degenerate_tol = 1e-11;  // relative to max(1, ||L||)
};

// Throws RegimeError if L has a growing mode or more than one null vector.
void check_stability(const CMat& liouvillian, double tol = 1e-8);
DensityMatrix steady_state(const LindbladModel& model, const SteadyStateOptions& opts = {});
DensityMatrix steady_state(const CMat& liouvillian, std::size_t dim, const SteadyStateOptions& opts = {});

CMat hermitize(const CMat& m);

}  // namespace gainqe
