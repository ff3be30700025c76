#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gainqe/liouvillian.hpp"

using namespace gainqe;

namespace {

const cplx I1(0.0, 1.0);

// Superoperator assembled column by column from a plain operator-form map.
template <class F>
CMat superop_from_map(std::size_t d, F&& f) {
    const auto D = static_cast<Eigen::Index>(d * d);
    CMat L = CMat::Zero(D, D);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) {
            CMat e = CMat::Zero(d, d);
            e(i, j) = 1.0;
            CMat out = f(e);
            L.col(static_cast<Eigen::Index>(i + d * j)) = Eigen::Map<CVec>(out.data(), D);
        }
    return L;
}

CMat lindblad_term(const CMat& a, const CMat& rho) {
    CMat ad = a.adjoint();
    return a * rho * ad - 0.5 * (ad * a * rho + rho * ad * a);
}

RateSet random_rates(std::mt19937& rng, std::size_t n, bool with_gain) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto psd = [&](double scale) {
        RMat x(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) x(i, j) = u(rng);
        return RMat(scale * x * x.transpose());
    };
    auto sym = [&]() {
        RMat x(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) x(i, j) = u(rng);
        RMat s = x + x.transpose();
        s.diagonal().setZero();
        return s;
    };
    RateSet r = RateSet::zeros(n, 1.3);
    r.gamma_down = psd(1.0);
    if (with_gain) r.gamma_up = psd(0.4);
    r.delta_down = sym();
    r.delta_up = 0.2 * sym();
    for (std::size_t i = 0; i < n; ++i) r.gamma_dephase(i) = 0.1 * (1 + u(rng));
    return r;
}

CMat random_density(std::mt19937& rng, std::size_t d) {
    std::normal_distribution<double> g;
    CMat x(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = cplx(g(rng), g(rng));
    CMat rho = x * x.adjoint();
    return rho / rho.trace();
}

}  // namespace

TEST_CASE("single-emitter lowering operator and algebra") {
    CMat s = lowering_operator(1, 0);
    CMat expected(2, 2);
    expected << 0, 1, 0, 0;
    CHECK((s - expected).norm() == 0.0);
    for (std::size_t a = 0; a < 3; ++a) {
        CMat sa = lowering_operator(3, a);
        CHECK((sa * sa).norm() == 0.0);
        CHECK((raising_operator(3, a) - sa.adjoint()).norm() == 0.0);
        for (std::size_t b = 0; b < 3; ++b) {
            CMat sb = lowering_operator(3, b);
            CHECK((sa * sb - sb * sa).norm() == 0.0);
        }
    }
    CHECK_THROWS_AS(lowering_operator(2, 2), ValidationError);
}

TEST_CASE("two-emitter basis ordering matches |gg>, |g e>, |e g>, |ee>") {
    CMat sa = lowering_operator(2, 0), sb = lowering_operator(2, 1);
    // sigma_a^- maps |e_a g_b> (index 2) to |gg> (index 0)
    CHECK(sa(0, 2) == cplx(1.0));
    CHECK(sb(0, 1) == cplx(1.0));
    CHECK(sa(1, 3) == cplx(1.0));
    CHECK(sb(2, 3) == cplx(1.0));
}

TEST_CASE("vectorization is column stacking and round-trips") {
    CMat m(3, 3);
    for (int i = 0; i < 9; ++i) m(i % 3, i / 3) = cplx(i, -i);
    CVec v = vectorize(m);
    CHECK(v(1) == m(1, 0));
    CHECK(v(3) == m(0, 1));
    CHECK((unvectorize(v, 3) - m).norm() == 0.0);
}

TEST_CASE("Hamiltonian") {
    RateSet r = RateSet::zeros(2, 1.3);
    CHECK(build_hamiltonian(r).norm() == 0.0);

    r.delta_down << 0, 0.7, 0.7, 0;
    r.delta_up << 0, 0.2, 0.2, 0;
    CMat h = build_hamiltonian(r);
    CHECK((h - h.adjoint()).norm() < 1e-15);
    const double j = 0.9;
    CVec plus = CVec::Zero(4), minus = CVec::Zero(4);
    plus(2) = plus(1) = 1 / std::sqrt(2.0);
    minus(2) = 1 / std::sqrt(2.0);
    minus(1) = -1 / std::sqrt(2.0);
    CHECK((h * plus - j * plus).norm() < 1e-15);
    CHECK((h * minus + j * minus).norm() < 1e-15);
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-j));
    CHECK(es.eigenvalues()(3) == doctest::Approx(j));
}

TEST_CASE("symmetric decay matrix has a dark channel") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_down << 1.5, 1.5, 1.5, 1.5;
    auto ds = build_dissipators(r);
    REQUIRE(!ds.empty());
    Eigen::SelfAdjointEigenSolver<CMat> es(ds[0].rates);
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-15);
    CHECK(es.eigenvalues()(1) == doctest::Approx(3.0));
}

TEST_CASE("generator agrees with a naive Lindblad superoperator") {
    std::mt19937 rng(7);
    for (std::size_t n : {1u, 2u, 3u}) {
        RateSet r = random_rates(rng, n, true);
        r.gamma_pump.setConstant(0.05);
        auto model = make_model(r);
        const std::size_t d = model.dim();
        RMat up = r.gamma_up;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) up(a, b) += std::sqrt(r.gamma_pump(a) * r.gamma_pump(b));
        auto naive = superop_from_map(d, [&](const CMat& rho) {
            CMat h = CMat::Zero(d, d);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    if (a != b)
                        h += r.delta_down(a, b) * raising_operator(n, a) * lowering_operator(n, b) +
                             r.delta_up(a, b) * lowering_operator(n, a) * raising_operator(n, b);
            CMat out = -I1 * (h * rho - rho * h);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    CMat sa = lowering_operator(n, a), sb = lowering_operator(n, b);
                    out += r.gamma_down(a, b) *
                           (sa * rho * sb.adjoint() - 0.5 * (sb.adjoint() * sa * rho + rho * sb.adjoint() * sa));
                    out += up(a, b) *
                           (sa.adjoint() * rho * sb - 0.5 * (sb * sa.adjoint() * rho + rho * sb * sa.adjoint()));
                }
            for (std::size_t a = 0; a < n; ++a)
                out += r.gamma_dephase(a) * lindblad_term(number_operator(n, a), rho);
            return out;
        });
        CMat L = liouvillian_matrix(model);
        CHECK((L - naive).norm() < 1e-12 * naive.norm());
        CMat rho = random_density(rng, d);
        CVec lr = L * vectorize(rho);
        CHECK((unvectorize(lr, d) - apply_generator(model, rho)).norm() < 1e-12);
    }
}

TEST_CASE("trace preservation and dissipative spectrum") {
    std::mt19937 rng(11);
    for (int k = 0; k < 5; ++k) {
        auto model = make_model(random_rates(rng, 2, true));
        CMat L = liouvillian_matrix(model);
        CVec id = vectorize(CMat::Identity(4, 4));
        CHECK((id.adjoint() * L).norm() < 1e-12);
        Eigen::ComplexEigenSolver<CMat> es(L, false);
        CHECK(es.eigenvalues().real().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("single-emitter Liouvillian eigenvalues") {
    RateSet r = RateSet::zeros(1, 1.3);
    r.gamma_down(0, 0) = 2.0;
    r.gamma_dephase(0) = 0.4;
    Eigen::ComplexEigenSolver<CMat> es(liouvillian_matrix(make_model(r)), false);
    std::vector<double> re;
    for (auto l : es.eigenvalues()) {
        CHECK(std::abs(l.imag()) < 1e-12);
        re.push_back(l.real());
    }
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-2.0));
    CHECK(re[1] == doctest::Approx(-1.2));
    CHECK(re[2] == doctest::Approx(-1.2));
    CHECK(std::abs(re[3]) < 1e-12);
}

TEST_CASE("dephasing reproduces the dressed exchange term") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_dephase.setConstant(0.3);
    auto model = make_model(r);
    CVec plus = CVec::Zero(4), minus = CVec::Zero(4);
    plus(2) = plus(1) = 1 / std::sqrt(2.0);
    minus(2) = 1 / std::sqrt(2.0);
    minus(1) = -1 / std::sqrt(2.0);
    CMat rho = plus * plus.adjoint();
    CMat drho = apply_generator(model, rho);
    cplx dpp = (plus.adjoint() * drho * plus)(0);
    cplx dmm = (minus.adjoint() * drho * minus)(0);
    CHECK(dpp.real() == doctest::Approx(-0.15));
    CHECK(dmm.real() == doctest::Approx(0.15));
}

TEST_CASE("cross-pump switch zeroes the off-diagonal gain") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_up << 0.3, 0.3, 0.3, 0.3;
    r.gamma_pump << 0.1, 0.1;
    RMat on = effective_up_rates(r, {true});
    RMat off = effective_up_rates(r, {false});
    CHECK(on(0, 1) == doctest::Approx(0.4));
    CHECK(off(0, 1) == 0.0);
    CHECK(off(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("independent heuristic pumps") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_down << 1.0, 0.9, 0.9, 1.0;
    r.gamma_pump << 0.05, 0.05;
    auto model = make_model(r, {false});
    auto naive = superop_from_map(4, [&](const CMat& rho) {
        CMat out = CMat::Zero(4, 4);
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
                CMat sa = lowering_operator(2, a), sb = lowering_operator(2, b);
                out += r.gamma_down(a, b) *
                       (sa * rho * sb.adjoint() - 0.5 * (sb.adjoint() * sa * rho + rho * sb.adjoint() * sa));
            }
        for (std::size_t a = 0; a < 2; ++a) out += 0.05 * lindblad_term(raising_operator(2, a), rho);
        return out;
    });
    CHECK((liouvillian_matrix(model) - naive).norm() < 1e-13);
}

TEST_CASE("density matrix validation") {
    CMat bad = CMat::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);
    CMat nonherm = CMat::Zero(2, 2);
    nonherm(0, 0) = 1.0;
    nonherm(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{nonherm}, ValidationError);
    CMat negative = CMat::Zero(2, 2);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix{negative}, ValidationError);
    CHECK(DensityMatrix::ground(2).matrix()(0, 0) == cplx(1.0));
    CHECK(DensityMatrix::basis_state(2, 2).emitters() == 2);
}

TEST_CASE("ground state is dark without gain") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_down << 1.0, 0.8, 0.8, 1.0;
    r.delta_down << 0, 2.0, 2.0, 0;
    r.gamma_dephase.setConstant(0.01);
    std::vector<double> t = {0.0, 0.5, 1.0, 5.0};
    auto tr = evolve(make_model(r), DensityMatrix::ground(2), t);
    for (const auto& rho : tr.rho) CHECK((rho - DensityMatrix::ground(2).matrix()).norm() < 1e-14);
}

TEST_CASE("single emitter decays exponentially") {
    RateSet r = RateSet::zeros(1, 1.3);
    r.gamma_down(0, 0) = 1.7;
    std::vector<double> t;
    for (int i = 0; i <= 50; ++i) t.push_back(0.1 * i);
    auto tr = evolve(make_model(r), DensityMatrix::basis_state(1, 1), t);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(std::abs(tr.rho[i](1, 1).real() - std::exp(-1.7 * t[i])) < 1e-9);
}

TEST_CASE("trajectories keep trace, Hermiticity and positivity") {
    std::mt19937 rng(3);
    auto model = make_model(random_rates(rng, 2, true));
    std::vector<double> t;
    for (int i = 0; i <= 40; ++i) t.push_back(0.25 * i);
    auto tr = evolve(model, DensityMatrix(random_density(rng, 4)), t);
    for (const auto& rho : tr.rho) {
        CHECK(std::abs(rho.trace() - cplx(1.0)) < 1e-10);
        CHECK((rho - rho.adjoint()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<CMat> es(rho);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("finite-difference generator matches the Liouvillian") {
    std::mt19937 rng(5);
    auto model = make_model(random_rates(rng, 2, true));
    CMat L = liouvillian_matrix(model);
    CMat rho0 = random_density(rng, 4);
    const double eps = 1e-7;
    CMat step = (L * eps).exp();
    CVec r1 = step * vectorize(rho0);
    CVec fd = (r1 - vectorize(rho0)) / eps;
    CVec exact = L * vectorize(rho0);
    CHECK((fd - exact).norm() < 10 * eps * L.norm() * exact.norm() + 1e-7);

    std::vector<double> t = {0.0, 1e-3};
    auto tr = evolve(model, DensityMatrix(rho0), t);
    CVec fd_ode = (vectorize(tr.rho[1]) - vectorize(rho0)) / 1e-3;
    CHECK((fd_ode - exact).norm() < 1e-3 * L.norm() * exact.norm());
}

TEST_CASE("evolve rejects bad time grids") {
    auto model = make_model(RateSet::zeros(1, 1.0));
    std::vector<double> bad = {0.1, 0.2};
    CHECK_THROWS_AS(evolve(model, DensityMatrix::ground(1), bad), ValidationError);
    std::vector<double> nonmono = {0.0, 0.2, 0.1};
    CHECK_THROWS_AS(evolve(model, DensityMatrix::ground(1), nonmono), ValidationError);
}

TEST_CASE("steady state without gain is the ground state") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_down << 1.0, 1.0, 1.0, 1.0;
    r.delta_down << 0, 3.0, 3.0, 0;
    r.gamma_dephase.setConstant(1e-3);
    auto ss = steady_state(make_model(r));
    CHECK((ss.matrix() - DensityMatrix::ground(2).matrix()).norm() < 1e-10);
}

TEST_CASE("closed-form symmetric steady state") {
    const double l = 1.0;
    for (double g : {0.1, 0.5, 1.3}) {
        RateSet r = RateSet::zeros(2, 1.3);
        r.gamma_down.setConstant(l);
        r.gamma_up.setConstant(g);
        r.delta_down << 0, 2.0, 2.0, 0;
        r.gamma_dephase.setConstant(1e-6);
        CMat rho = steady_state(make_model(r)).matrix();
        const double s = l + g;
        CHECK(std::abs(rho(2, 2).real() + rho(3, 3).real() - g / s) < 1e-6);
        CHECK(std::abs(rho(3, 3).real() - g * g / (s * s)) < 1e-6);
        const double pp = 0.5 * (rho(1, 1) + rho(2, 2) + rho(1, 2) + rho(2, 1)).real();
        CHECK(std::abs(pp - g * l / (s * s)) < 1e-6);
    }
}

TEST_CASE("degenerate and unstable generators are rejected") {
    RateSet r = RateSet::zeros(2, 1.3);
    r.gamma_down.setConstant(1.0);
    CHECK_THROWS_AS(steady_state(make_model(r)), RegimeError);

    auto old = set_warning_sink([](const std::string&) {});
    RateSet u = RateSet::zeros(1, 1.3);
    u.gamma_down(0, 0) = -0.5;
    CHECK_THROWS_AS(steady_state(make_model(u)), RegimeError);
    set_warning_sink(old);
}
