#include "doctest.h"
#include "oracles.hpp"
#include "toda/taumodels.hpp"

using namespace toda;

namespace {

std::shared_ptr<ThetaTau> sample_theta_tau(int g, Rng& rng) {
    RiemannMatrix B(oracles::random_riemann_B(g, rng));
    auto m = std::make_shared<ThetaTau>(B, rng.cvec(g, 0.3));
    m->set_flow(FlowSlot::T, rng.cvec(g, 0.5));
    return m;
}

EllipticLattice sample_lattice() { return {cplx(1.0, 0.0), cplx(0.25, 1.15)}; }

}  // namespace

TEST_CASE("ThetaTau: integer-shift monodromy is trivial") {
    Rng rng(31);
    auto m = sample_theta_tau(2, rng);
    FlowPoint f;
    f.t = cplx(0.17, 0.05);
    VecC e1 = VecC::Zero(2);
    e1[1] = 1.0;
    auto r = monodromy_check(*m, e1, f, rng);
    CHECK(r.a.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(std::exp(r.b) - 1.0) < 1e-12);
    CHECK(r.residual < 1e-13);
}

TEST_CASE("ThetaTau: B-column monodromy matches theta quasi-periodicity") {
    Rng rng(32);
    auto m = sample_theta_tau(2, rng);
    FlowPoint f;
    f.t = cplx(0.21, -0.08);
    for (int j = 0; j < 2; ++j) {
        VecC lambda = m->B().mat().col(j);
        auto fit = monodromy_check(*m, lambda, f, rng);
        CHECK(fit.residual < 1e-11);
        auto ana = m->monodromy(lambda, f);
        CHECK((fit.a - ana.a).cwiseAbs().maxCoeff() < 1e-9);
        // b is defined mod 2 pi i
        CHECK(std::abs(std::exp(fit.b) - std::exp(ana.b)) / std::abs(std::exp(ana.b)) < 1e-9);
        // expected a = -2 pi i e_j
        VecC ej = VecC::Zero(2);
        ej[j] = 1.0;
        CHECK((ana.a + 2.0 * PI * I * ej).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("ThetaTau partials: analytic vs finite differences, first and second order") {
    Rng rng(33);
    auto m = sample_theta_tau(1, rng);
    // add a nontrivial gauge in t
    m->gauge().quad(int(FlowSlot::T), int(FlowSlot::T)) = cplx(0.03, 0.011);
    m->gauge().lin[int(FlowSlot::T)] = cplx(-0.07, 0.02);
    FlowPoint f;
    f.t = cplx(0.3, 0.1);
    VecC z = rng.cvec(1, 0.4);

    for (auto spec : {DerivSpec::d1(FlowVar::T), DerivSpec::d2(FlowVar::T)}) {
        cplx ana = m->partial(z, f, spec);
        cplx fd = m->TauModel::partial(z, f, spec);
        CHECK(rel_residual(ana, fd) < 1e-7);
    }
}

TEST_CASE("ThetaTau second derivative matches the term-wise differentiated sum (g=1, B=iI)") {
    MatC b(1, 1);
    b(0, 0) = I;
    RiemannMatrix B(b);
    ThetaTau m(B, VecC::Zero(1));
    VecC V = vec1(cplx(0.3, 0.0));
    m.set_flow(FlowSlot::T, V);
    FlowPoint f;  // t = 0
    cplx ana = m.partial(VecC::Zero(1), f, DerivSpec::d2(FlowVar::T));
    std::vector<VecC> dirs = {V, V};
    cplx oracle = oracles::theta_brute(VecC::Zero(1), B.mat(), 30, nullptr, nullptr, &dirs);
    CHECK(rel_residual(ana, oracle) < 1e-12);
}

TEST_CASE("EllipticPolynomialTau: frozen roots move only through the amplitude") {
    auto L = sample_lattice();
    auto roots = std::make_shared<FrozenRoots>(vec2(cplx(0.3, 0.0), cplx(0.7, 0.2)));
    cplx rate(0.23, -0.11);
    EllipticPolynomialTau tau(L, roots, [rate](cplx t) { return std::exp(rate * t); });
    FlowPoint f;
    f.t = cplx(0.4, 0.0);
    VecC z = vec1(cplx(0.11, -0.21));
    cplx dtau = tau.partial(z, f, DerivSpec::d1(FlowVar::T));
    CHECK(rel_residual(dtau, rate * tau.eval(z, f)) < 1e-9);
}

TEST_CASE("EllipticPolynomialTau: monodromy matches the sigma quasi-periodicity oracle") {
    auto L = sample_lattice();
    VecC x0 = vec2(cplx(-0.21, -0.12), cplx(0.21, 0.12));
    VecC v = vec2(cplx(0.4, 0.03), cplx(-0.37, 0.06));
    EllipticPolynomialTau tau(L, std::make_shared<LinearRoots>(x0, v));
    Rng rng(34);
    FlowPoint f;
    f.t = cplx(0.2, 0.0);

    for (auto lam : {2.0 * L.omega1(), 2.0 * L.omega2(), 2.0 * L.omega1() + 2.0 * L.omega2()}) {
        auto fit = monodromy_check(tau, vec1(lam), f, rng);
        CHECK(fit.residual < 1e-11);
        auto ana = tau.monodromy(vec1(lam), f);
        CHECK((fit.a - ana.a).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(std::exp(fit.b) - std::exp(ana.b)) / std::abs(std::exp(ana.b)) < 1e-8);
    }

    // spec form for lambda = 2 omega1: a = 2 N eta1, b = 2 eta1 (N omega - sum x) + N pi i
    auto ana = tau.monodromy(vec1(2.0 * L.omega1()), f);
    cplx sum_x = (x0 + f.t * v).sum();
    CHECK(std::abs(ana.a[0] - 2.0 * 2.0 * L.eta1()) < 1e-13);
    cplx expect_b = 2.0 * L.eta1() * (2.0 * L.omega1() - sum_x) + 2.0 * PI * I;
    CHECK(std::abs(std::exp(ana.b) - std::exp(expect_b)) < 1e-10 * std::abs(std::exp(expect_b)));

    // b_dot oracle: -2 eta1 sum(v)
    cplx bdot = tau.monodromy_b_dot(vec1(2.0 * L.omega1()), f, FlowVar::T);
    CHECK(std::abs(bdot + 2.0 * L.eta1() * v.sum()) < 1e-12);
}

TEST_CASE("EllipticPolynomialTau: analytic t-partials match finite differences") {
    auto L = sample_lattice();
    VecC x0 = vec2(cplx(-0.2, -0.1), cplx(0.25, 0.14));
    VecC v = vec2(cplx(0.31, 0.02), cplx(-0.18, 0.09));
    EllipticPolynomialTau tau(L, std::make_shared<LinearRoots>(x0, v));
    FlowPoint f;
    f.t = cplx(0.13, 0.0);
    VecC z = vec1(cplx(0.43, 0.37));
    for (auto spec : {DerivSpec::d1(FlowVar::T), DerivSpec::d2(FlowVar::T)}) {
        cplx ana = tau.partial(z, f, spec);
        cplx fd = tau.TauModel::partial(z, f, spec);
        CHECK(rel_residual(ana, fd) < 1e-7);
    }
    // log-derivative structure: d/dt ln tau = c_dot/c - sum v_i zeta(z - x_i)
    cplx lhs = tau.partial(z, f, DerivSpec::d1(FlowVar::T)) / tau.eval(z, f);
    CHECK(rel_residual(lhs, tau.log_t_derivative(z[0], f.t)) < 1e-9);
}

TEST_CASE("holomorphy: Cauchy-Riemann residual of the finite-difference gradient") {
    Rng rng(35);
    auto m = sample_theta_tau(2, rng);
    FlowPoint f;
    double h = 1e-5;
    for (int rep = 0; rep < 5; ++rep) {
        VecC z = rng.cvec(2, 0.4);
        for (int j = 0; j < 2; ++j) {
            VecC e = VecC::Zero(2);
            e[j] = 1.0;
            cplx dre = (m->eval(z + h * e, f) - m->eval(z - h * e, f)) / (2.0 * h);
            cplx dim = (m->eval(z + h * I * e, f) - m->eval(z - h * I * e, f)) / (2.0 * h * I);
            CHECK(rel_residual(dre, dim) < 1e-7);
        }
    }
}

TEST_CASE("monodromy_check raises on a non-section") {
    // A function with non-exponential ratio: tau + const breaks the relation.
    auto L = sample_lattice();
    struct Broken : TauModel {
        EllipticLattice L;
        explicit Broken(EllipticLattice lat) : L(std::move(lat)) {}
        int dim() const override { return 1; }
        cplx eval(const VecC& z, const FlowPoint&) const override {
            return L.sigma(z[0] - cplx(0.3, 0.1)) + 0.5;
        }
        std::vector<VecC> lattice_generators() const override {
            return {vec1(2.0 * L.omega1()), vec1(2.0 * L.omega2())};
        }
    } broken(L);
    Rng rng(36);
    FlowPoint f;
    CHECK_THROWS_AS(monodromy_check(broken, vec1(2.0 * L.omega1()), f, rng), not_a_section_error);
}

TEST_CASE("divisor_zeros finds constructed roots of an elliptic tau") {
    auto L = sample_lattice();
    VecC x = vec2(cplx(0.3, 0.0), cplx(0.7, 0.2));
    EllipticPolynomialTau tau(L, std::make_shared<FrozenRoots>(x));
    FlowPoint f;
    // line z = s (w = 1); search a cell-sized rectangle
    auto zeros = divisor_zeros(tau, VecC::Zero(1), vec1(cplx(1.0, 0.0)), f, cplx(-0.1, -0.4),
                               cplx(1.1, 0.9));
    REQUIRE(zeros.size() == 2);
    CHECK(std::abs(zeros[0].s - x[0]) < 1e-10);
    CHECK(std::abs(zeros[1].s - x[1]) < 1e-10);
}

TEST_CASE("divisor_zeros: sigma vanishes once per fundamental cell") {
    auto L = sample_lattice();
    EllipticPolynomialTau tau(L, std::make_shared<FrozenRoots>(vec1(cplx(0.0, 0.0))));
    FlowPoint f;
    auto zeros = divisor_zeros(tau, VecC::Zero(1), vec1(cplx(1.0, 0.0)), f, cplx(-0.9, -1.0),
                               cplx(1.05, 1.2));
    REQUIRE(zeros.size() == 1);
    CHECK(std::abs(zeros[0].s) < 1e-10);
}

TEST_CASE("divisor_zeros: zero count equals winding number for a theta line") {
    Rng rng(37);
    auto m = sample_theta_tau(1, rng);
    FlowPoint f;
    f.t = cplx(0.12, 0.07);
    VecC w = vec1(cplx(1.0, 0.3));
    cplx lo(-0.8, -0.8), hi(0.8, 0.8);
    int wnd = winding_number(*m, VecC::Zero(1), w, f, lo, hi);
    auto zeros = divisor_zeros(*m, VecC::Zero(1), w, f, lo, hi);
    int count = 0;
    for (auto& z : zeros) count += z.multiplicity;
    CHECK(count == wnd);
    for (auto& z : zeros) CHECK(std::abs(m->eval(z.s * w, f)) < 1e-10);
}

TEST_CASE("divisor_zeros rejects w = 0") {
    auto L = sample_lattice();
    EllipticPolynomialTau tau(L, std::make_shared<FrozenRoots>(vec1(cplx(0.0, 0.0))));
    FlowPoint f;
    CHECK_THROWS_AS(divisor_zeros(tau, VecC::Zero(1), vec1(cplx(0.0, 0.0)), f, cplx(-1, -1),
                                  cplx(1, 1)),
                    std::invalid_argument);
}
