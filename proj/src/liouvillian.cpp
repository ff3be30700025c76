#include "gainqe/liouvillian.hpp"

#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace gainqe {

namespace {

const cplx kI(0.0, 1.0);

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMat site_operator(std::size_t n, std::size_t site, const CMat& op) {
    if (site >= n) throw ValidationError("emitter index " + std::to_string(site) + " out of range for n=" + std::to_string(n));
    CMat out = CMat::Identity(1, 1);
    for (std::size_t k = 0; k < n; ++k) out = kron(out, k == site ? op : CMat::Identity(2, 2));
    return out;
}

CMat jump_operator(JumpFamily f, std::size_t n, std::size_t site) {
    switch (f) {
        case JumpFamily::Lowering: return lowering_operator(n, site);
        case JumpFamily::Raising: return raising_operator(n, site);
        case JumpFamily::Number: return number_operator(n, site);
    }
    return {};
}

// Diagonal channels of one dissipator: rates(a,b) = sum_k w_k u_k(a) conj(u_k(b)),
// jump C_k = sum_a u_k(a) A_a.
struct Channel {
    double weight;
    CMat jump;
    CMat jump_dag_jump;
};

std::vector<Channel> channels(const LindbladModel& model) {
    std::vector<Channel> out;
    for (const auto& d : model.dissipators) {
        Eigen::SelfAdjointEigenSolver<CMat> es(d.rates);
        const double scale = std::max(1.0, d.rates.cwiseAbs().maxCoeff());
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const double w = es.eigenvalues()(k);
            if (std::abs(w) <= 1e-15 * scale) continue;
            CMat c = CMat::Zero(model.dim(), model.dim());
            for (std::size_t a = 0; a < model.n; ++a)
                c += es.eigenvectors()(static_cast<Eigen::Index>(a), k) * jump_operator(d.family, model.n, a);
            out.push_back({w, c, c.adjoint() * c});
        }
    }
    return out;
}

CMat generator(const CMat& h, const std::vector<Channel>& ch, const CMat& rho) {
    CMat out = -kI * (h * rho - rho * h);
    for (const auto& c : ch)
        out += c.weight * (c.jump * rho * c.jump.adjoint() - 0.5 * (c.jump_dag_jump * rho + rho * c.jump_dag_jump));
    return out;
}

double min_eigenvalue(const CMat& rho) {
    Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

CMat lowering_operator(std::size_t n, std::size_t site) {
    CMat s = CMat::Zero(2, 2);
    s(0, 1) = 1.0;
    return site_operator(n, site, s);
}

CMat raising_operator(std::size_t n, std::size_t site) { return lowering_operator(n, site).adjoint(); }

CMat number_operator(std::size_t n, std::size_t site) {
    CMat s = CMat::Zero(2, 2);
    s(1, 1) = 1.0;
    return site_operator(n, site, s);
}

CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

DensityMatrix::DensityMatrix(CMat rho) : rho_(std::move(rho)) {
    const auto d = rho_.rows();
    if (d == 0 || d != rho_.cols() || (d & (d - 1)) != 0)
        throw ValidationError("density matrix must be square with dimension 2^n");
    if (!rho_.allFinite()) throw ValidationError("density matrix has non-finite entries");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(rho_.trace() - cplx(1.0)) > 1e-12) throw ValidationError("density matrix trace differs from 1");
    const double lo = min_eigenvalue(hermitize(rho_));
    if (lo < -1e-10) {
        std::ostringstream os;
        os << "density matrix is not positive semidefinite (min eigenvalue " << lo << ")";
        throw ValidationError(os.str());
    }
}

DensityMatrix DensityMatrix::ground(std::size_t n) { return basis_state(n, 0); }

DensityMatrix DensityMatrix::basis_state(std::size_t n, std::size_t index) {
    const std::size_t d = std::size_t{1} << n;
    if (index >= d) throw ValidationError("basis index out of range");
    CMat rho = CMat::Zero(d, d);
    rho(index, index) = 1.0;
    return DensityMatrix(rho);
}

DensityMatrix DensityMatrix::pure(const CVec& psi) {
    const double nrm = psi.norm();
    if (!(nrm > 0)) throw ValidationError("state vector has zero norm");
    CVec v = psi / nrm;
    return DensityMatrix(hermitize(v * v.adjoint()));
}

std::size_t DensityMatrix::emitters() const {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim()) ++n;
    return n;
}

CMat build_hamiltonian(const RateSet& rates) {
    const std::size_t n = rates.emitter_count();
    const std::size_t d = std::size_t{1} << n;
    CMat h = CMat::Zero(d, d);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto i = static_cast<Eigen::Index>(a), j = static_cast<Eigen::Index>(b);
            const CMat sa = lowering_operator(n, a), sb = lowering_operator(n, b);
            h += rates.delta_down(i, j) * sa.adjoint() * sb + rates.delta_up(i, j) * sa * sb.adjoint();
        }
    return hermitize(h);
}

RMat effective_up_rates(const RateSet& rates, const ModelOptions& options) {
    RMat up = rates.gamma_up;
    const auto n = up.rows();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a != b && !options.include_cross_pump) {
                up(a, b) = 0.0;
                continue;
            }
            up(a, b) += std::sqrt(rates.gamma_pump(a) * rates.gamma_pump(b));
        }
    return up;
}

std::vector<Dissipator> build_dissipators(const RateSet& rates, const ModelOptions& options) {
    std::vector<Dissipator> out;
    out.push_back({JumpFamily::Lowering, rates.gamma_down.cast<cplx>(), "decay"});
    const RMat up = effective_up_rates(rates, options);
    if (up.cwiseAbs().maxCoeff() > 0) out.push_back({JumpFamily::Raising, up.cast<cplx>(), "gain"});
    if (rates.gamma_dephase.cwiseAbs().maxCoeff() > 0)
        out.push_back({JumpFamily::Number, rates.gamma_dephase.cast<cplx>().asDiagonal(), "dephasing"});
    return out;
}

LindbladModel make_model(const RateSet& rates, const ModelOptions& options) {
    rates.validate();
    if (rates.emitter_count() > 6) throw ValidationError("at most 6 emitters are supported");
    LindbladModel m;
    m.n = rates.emitter_count();
    m.rates = rates;
    m.options = options;
    m.hamiltonian = build_hamiltonian(rates);
    m.dissipators = build_dissipators(rates, options);
    return m;
}

CVec vectorize(const CMat& m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

CMat unvectorize(const CVec& v, std::size_t dim) {
    if (static_cast<std::size_t>(v.size()) != dim * dim) throw ValidationError("vector length is not dim^2");
    return Eigen::Map<const CMat>(v.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

CMat liouvillian_matrix(const LindbladModel& model) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    const CMat id = CMat::Identity(d, d);
    const CMat& h = model.hamiltonian;
    CMat L = -kI * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& c : channels(model)) {
        L += c.weight * (kron(c.jump.conjugate(), c.jump) - 0.5 * kron(id, c.jump_dag_jump) -
                         0.5 * kron(c.jump_dag_jump.transpose(), id));
    }
    return L;
}

CMat apply_generator(const LindbladModel& model, const CMat& rho) {
    return generator(model.hamiltonian, channels(model), rho);
}

Trajectory evolve(const LindbladModel& model, const DensityMatrix& rho0, std::span<const double> t_grid,
                  const EvolveOptions& opts) {
    namespace ode = boost::numeric::odeint;
    if (rho0.dim() != model.dim()) throw ValidationError("initial state dimension does not match the model");
    if (t_grid.empty() || t_grid.front() != 0.0) throw ValidationError("time grid must start at 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw ValidationError("time grid must be strictly increasing");

    const auto d = static_cast<Eigen::Index>(model.dim());
    const auto ch = channels(model);
    using state = std::vector<double>;
    auto rhs = [&](const state& x, state& dxdt, double) {
        Eigen::Map<const CMat> rho(reinterpret_cast<const cplx*>(x.data()), d, d);
        Eigen::Map<CMat> out(reinterpret_cast<cplx*>(dxdt.data()), d, d);
        out = generator(model.hamiltonian, ch, rho);
    };

    Trajectory tr;
    tr.t.assign(t_grid.begin(), t_grid.end());
    tr.rho.reserve(t_grid.size());
    double worst = 0.0;
    auto observe = [&](const state& x, double) {
        Eigen::Map<const CMat> rho(reinterpret_cast<const cplx*>(x.data()), d, d);
        tr.rho.push_back(hermitize(rho));
        worst = std::min(worst, min_eigenvalue(tr.rho.back()));
    };

    state x(static_cast<std::size_t>(2 * d * d));
    Eigen::Map<CMat>(reinterpret_cast<cplx*>(x.data()), d, d) = rho0.matrix();
    if (t_grid.size() == 1) {
        observe(x, 0.0);
        return tr;
    }
    const double span = t_grid.back();
    try {
        auto stepper = ode::make_controlled(opts.atol, opts.rtol, ode::runge_kutta_dopri5<state>());
        ode::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), std::min(1e-3, span * 1e-3), observe,
                             ode::max_step_checker(1000000));
    } catch (const std::exception& e) {
        throw IntegrationError(std::string("master-equation integration failed: ") + e.what());
    }
    if (worst < -opts.positivity_tol) {
        std::ostringstream os;
        os << "trajectory left the positive cone (min eigenvalue " << worst << ")";
        warn(os.str());
    }
    return tr;
}

void check_stability(const CMat& liouvillian, double tol) {
    Eigen::ComplexEigenSolver<CMat> es(liouvillian, false);
    const double worst = es.eigenvalues().real().maxCoeff();
    if (worst > tol) {
        std::ostringstream os;
        os << "outside linear/stable regime: Liouvillian eigenvalue with Re = " << worst;
        throw RegimeError(os.str());
    }
}

DensityMatrix steady_state(const CMat& L, std::size_t dim, const SteadyStateOptions& opts) {
    check_stability(L, opts.unstable_tol);
    Eigen::BDCSVD<CMat> svd(L, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const auto D = s.size();
    const double floor = opts.degenerate_tol * std::max(1.0, s(0));
    if (D >= 2 && s(D - 2) < floor) {
        std::ostringstream os;
        os << "steady state is not unique: Liouvillian null space has dimension > 1 (singular values " << s(D - 2)
           << ", " << s(D - 1) << "); it depends on the initial condition";
        throw RegimeError(os.str());
    }
    CMat rho = unvectorize(svd.matrixV().col(D - 1), dim);
    rho /= rho.trace();
    rho = hermitize(rho);
    rho /= rho.trace().real();
    return DensityMatrix(rho);
}

DensityMatrix steady_state(const LindbladModel& model, const SteadyStateOptions& opts) {
    return steady_state(liouvillian_matrix(model), model.dim(), opts);
}

}  // namespace gainqe
