#include "doctest.h"
#include "oracles.hpp"
#include "toda/constructions.hpp"
#include "toda/residuals.hpp"

using namespace toda;

namespace {

EllipticLattice lat() { return {cplx(1.0, 0.0), cplx(0.25, 1.15)}; }

MatC g1B() {
    MatC b(1, 1);
    b(0, 0) = cplx(0.21, 1.07);
    return b;
}

std::vector<VecC> box_samples(int n, int dim, double hw, Rng& rng) {
    std::vector<VecC> v;
    for (int i = 0; i < n; ++i) v.push_back(rng.cvec(dim, hw));
    return v;
}

}  // namespace

TEST_CASE("fay identity: genus-1 two-point fit, 100-sample holdout, fay/fay1 agreement") {
    Rng rng(51);
    SecancyData d = make_theta_g1_secancy(g1B(), cplx(0.37, 0.21), cplx(-0.22, 0.15),
                                          cplx(0.4, -0.3), rng);
    auto samples = box_samples(100, 1, 0.5, rng);
    auto rep = residual_secancy(d, samples, SecancyVariant::Fay);
    CHECK(rep.max_rel < 1e-10);
    CHECK(rep.extra["variant_agreement"] < 1e-10);

    // trivial degeneration: A = 0 (tauA = tau), V = 0 and E = e^p make both
    // sides vanish identically for any U
    SecancyData triv = d;
    triv.A = vec1(cplx(0, 0));
    triv.V = vec1(cplx(0, 0));
    triv.E = std::exp(triv.p);
    auto rep2 = residual_secancy(triv, box_samples(20, 1, 0.5, rng), SecancyVariant::Fay);
    CHECK(rep2.max_rel < 1e-13);
}

TEST_CASE("fit_constants: refit reproduces consistent constants; degenerate points error") {
    Rng rng(52);
    SecancyData d = make_theta_g1_secancy(g1B(), cplx(0.31, 0.18), cplx(-0.26, 0.12),
                                          cplx(0.35, -0.21), rng);
    auto fit = fit_constants_fay(d, box_samples(4, 1, 0.4, rng));
    CHECK(std::abs(fit.E - d.E) < 1e-10 * (1.0 + std::abs(d.E)));
    CHECK(std::abs(std::exp(fit.p) - std::exp(d.p)) < 1e-10 * std::abs(std::exp(d.p)));
    CHECK(fit.cond < 1e6);

    std::vector<VecC> same = {vec1(cplx(0.2, 0.1)), vec1(cplx(0.2, 0.1))};
    CHECK_THROWS_AS(fit_constants_fay(d, same), degenerate_fit_error);
}

TEST_CASE("fay negative control: scrambled constants fail by a large factor") {
    Rng rng(53);
    SecancyData d = make_theta_g1_secancy(g1B(), cplx(0.37, 0.21), cplx(-0.22, 0.15),
                                          cplx(0.4, -0.3), rng);
    auto samples = box_samples(50, 1, 0.5, rng);
    double good = residual_secancy(d, samples, SecancyVariant::Fay).max_rel;
    SecancyData bad = d;
    bad.E += 0.31;
    double worse = residual_secancy(bad, samples, SecancyVariant::Fay).max_rel;
    CHECK(worse > 1e3 * std::max(good, 1e-14));
    CHECK(worse > 1e-4);
}

TEST_CASE("gauge covariance: z-linear gauges move (p,E) but not the holdout residual") {
    Rng rng(54);
    MatC B = g1B();
    cplx A(0.37, 0.21), U(-0.22, 0.15), V(0.4, -0.3);
    SecancyData base = make_theta_g1_secancy(B, A, U, V, rng);

    // wrap tau and tauA with different z-linear exponential gauges
    struct Gauged : TauModel {
        std::shared_ptr<const TauModel> inner;
        cplx ell, off;
        int dim() const override { return 1; }
        cplx eval(const VecC& z, const FlowPoint& f) const override {
            return std::exp(ell * z[0] + off) * inner->eval(z, f);
        }
        std::vector<VecC> lattice_generators() const override {
            return inner->lattice_generators();
        }
        bool has_analytic_partials() const override { return true; }
        cplx partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const override {
            // gauge is t-independent
            return std::exp(ell * z[0] + off) * inner->partial(z, f, d);
        }
    };

    RiemannMatrix RB(B);
    auto tau0 = std::make_shared<ThetaTau>(RB, VecC::Zero(1));
    tau0->set_flow(FlowSlot::T, vec1(V));
    auto tauA0 = std::make_shared<ThetaTau>(RB, vec1(A));
    tauA0->set_flow(FlowSlot::T, vec1(V));

    auto gt = std::make_shared<Gauged>();
    gt->inner = tau0;
    gt->ell = cplx(0.21, -0.33);
    gt->off = cplx(0.05, 0.02);
    auto ga = std::make_shared<Gauged>();
    ga->inner = tauA0;
    ga->ell = cplx(-0.14, 0.09);  // a different linear form
    ga->off = cplx(-0.03, 0.07);

    SecancyData gauged;
    gauged.tau = gt;
    gauged.tauA = ga;
    gauged.U = vec1(U);
    gauged.A = vec1(A);
    gauged.V = vec1(V);
    auto fit = fit_constants_fay1(gauged, box_samples(4, 1, 0.4, rng));
    gauged.E = fit.E;
    gauged.p = fit.p;
    gauged.has_constants = true;

    auto samples = box_samples(60, 1, 0.5, rng);
    double res = residual_secancy(gauged, samples, SecancyVariant::Fay1).max_rel;
    CHECK(res < 1e-10);
    // p shifts by (ell_tau - ell_A) . U
    cplx expected_p_shift = (gt->ell - ga->ell) * U;
    cplx got_shift = std::exp(fit.p - base.p);
    CHECK(std::abs(got_shift - std::exp(expected_p_shift)) < 1e-8 * std::abs(got_shift));
    CHECK(std::abs(fit.E - base.E) < 1e-8 * (1.0 + std::abs(base.E)));
}

TEST_CASE("laxdd with the theta-quotient wave solves the differential-difference equation") {
    Rng rng(55);
    SecancyData d = make_theta_g1_secancy(g1B(), cplx(0.37, 0.21), cplx(-0.22, 0.15),
                                          cplx(0.4, -0.3), rng);
    SecancyData full = d;
    RiemannMatrix RB(g1B());
    auto tau = std::make_shared<ThetaTau>(RB, VecC::Zero(1));
    tau->set_flow(FlowSlot::T, d.V);
    auto tauA = std::make_shared<ThetaTau>(RB, d.A);
    tauA->set_flow(FlowSlot::T, d.V);
    full.tau = tau;
    full.tauA = tauA;
    FlowPoint f;
    f.t = cplx(0.11, -0.04);
    auto rep = residual_secancy(full, box_samples(25, 1, 0.4, rng), SecancyVariant::LaxddPd, f);
    CHECK(rep.max_rel < 1e-7);
}

TEST_CASE("2D Toda: constant tau gives zero residual; sigma family passes after gauge fit") {
    // constant tau
    struct One : TauModel {
        int dim() const override { return 1; }
        cplx eval(const VecC&, const FlowPoint&) const override { return 1.0; }
        std::vector<VecC> lattice_generators() const override { return {vec1(1.0), vec1(I)}; }
    } one;
    TodaGrid small;
    small.xi = {cplx(0.1, 0.0), cplx(-0.2, 0.1)};
    small.eta = {cplx(0.05, -0.1)};
    small.n_lo = 0;
    small.n_hi = 1;
    auto rep0 = residual_toda2d(one, VecC::Zero(1), small);
    CHECK(rep0.max_rel < 1e-12);

    // sigma-built family: fit the gauge on 10 points, validate on 100
    auto L = lat();
    auto m = make_sigma_toda_tau(L, cplx(0.41, 0.23), cplx(0.31, 0.17));
    m->set_qnn(cplx(0.2, -0.1));  // wrong gauge on purpose; the fit must recover it

    Rng rng(56);
    TodaGrid fit_grid;
    for (int i = 0; i < 5; ++i) fit_grid.xi.push_back(rng.box(0.25));
    for (int i = 0; i < 2; ++i) fit_grid.eta.push_back(rng.box(0.25));
    fit_grid.n_lo = 0;
    fit_grid.n_hi = 0;
    auto gf = fit_toda_gauge(*m, VecC::Zero(1), fit_grid);
    CHECK(std::abs(gf.qnn) < 1e-9);  // exact-solution gauge for Vp Vm = sigma(U)^2

    TodaGrid validate;
    for (int i = 0; i < 10; ++i) validate.xi.push_back(rng.box(0.3));
    for (int i = 0; i < 10; ++i) validate.eta.push_back(rng.box(0.3));
    validate.n_lo = -1;
    validate.n_hi = 1;
    auto rep = residual_toda2d(*m, VecC::Zero(1), validate);
    CHECK(rep.max_rel < 1e-8);

    // negative control: unrelated gauge ruins the equation
    m->set_qnn(cplx(0.25, 0.1));
    auto repb = residual_toda2d(*m, VecC::Zero(1), validate);
    CHECK(repb.max_rel > 1e3 * std::max(rep.max_rel, 1e-14));
}

TEST_CASE("BDHE: constant tau is flagged, sigma-built tau with three-term gauge passes") {
    struct One : TauModel {
        int dim() const override { return 1; }
        cplx eval(const VecC&, const FlowPoint&) const override { return 1.0; }
        std::vector<VecC> lattice_generators() const override { return {vec1(1.0), vec1(I)}; }
    } one;
    DiscreteGrid g;
    g.n0 = g.l0 = g.m0 = 0;
    g.n1 = g.l1 = g.m1 = 2;
    auto rep1 = residual_bdhe(one, g);
    CHECK(rep1.max_rel > 0.1);  // 1 - 1 + 1 != 0

    auto L = lat();
    BdheSigmaTau tau(L, cplx(0.13, 0.21), cplx(0.23, 0.11), cplx(-0.17, 0.19), cplx(0.29, -0.07));
    DiscreteGrid g5;
    g5.n0 = g5.l0 = g5.m0 = 0;
    g5.n1 = g5.l1 = g5.m1 = 4;
    auto rep2 = residual_bdhe(tau, g5);
    CHECK(rep2.max_rel < 1e-10);
}

TEST_CASE("weierstrass three-term identity (the BDHE gauge oracle)") {
    auto L = lat();
    Rng rng(57);
    for (int rep = 0; rep < 5; ++rep) {
        cplx w = rng.box(0.5), a = rng.box(0.4), b = rng.box(0.4), c = rng.box(0.4);
        cplx t1 = L.sigma(w + a) * L.sigma(w - a) * L.sigma(b + c) * L.sigma(b - c);
        cplx t2 = L.sigma(w + b) * L.sigma(w - b) * L.sigma(c + a) * L.sigma(c - a);
        cplx t3 = L.sigma(w + c) * L.sigma(w - c) * L.sigma(a + b) * L.sigma(a - b);
        double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
        CHECK(std::abs(t1 + t2 + t3) / (scale + 1e-300) < 1e-12);
    }
}

TEST_CASE("discrete secancy: fay2 fit + holdout, fay0 equivalence, f5d and tauA on-divisor") {
    Rng rng(58);
    auto L = lat();
    cplx A(0.33, 0.27), W(0.19, 0.07), Vnu(0.4 / 1.0, 2.0 * 0.23 / 5.0);
    // nu-periodic flow: N * Vnu in the lattice for N = 5
    Vnu = (2.0 * L.omega1() * 1.0 + 2.0 * L.omega2() * 2.0) / 5.0;
    SecancyData d = make_sigma_nu_pair(L, A, W, Vnu, rng);

    auto samples = box_samples(40, 1, 0.45, rng);
    auto rep = residual_fay2(d, samples, {0, 1, 2, 3});
    CHECK(rep.max_rel < 1e-10);

    // negative control
    SecancyData bad = d;
    bad.pW += 0.17;
    CHECK(residual_fay2(bad, samples, {0}).max_rel > 1e3 * rep.max_rel);

    // fay0 with theta data: same structural identity through theta(z + Vnu nu)
    SecancyData th;
    th.B = std::make_shared<RiemannMatrix>(g1B());
    th.A = vec1(cplx(0.31, 0.22));
    th.W = vec1(cplx(0.17, 0.05));
    th.V = vec1(cplx(-0.21, 0.13));
    auto fit = fit_constants_discrete(th, box_samples(6, 1, 0.4, rng), DiscreteVariant::Fay0);
    th.pW = fit.pW;
    th.E = fit.E;
    th.has_constants = true;
    auto rep0 = residual_fay0(th, samples);
    CHECK(rep0.max_rel < 1e-10);

    // f5d on the divisor of tau(., nu): zeros of sigma(z + Vnu nu)
    long nu = 1;
    auto* snt = dynamic_cast<const SigmaNuTau*>(d.tau.get());
    REQUIRE(snt != nullptr);
    std::vector<VecC> div_pts = {vec1(snt->zero_of(nu))};
    auto repf = on_divisor_f5d(*d.tau, div_pts, nu, d.W);
    CHECK(repf.max_rel < 1e-8);

    auto rept = on_divisor_tauA(d, div_pts, nu);
    CHECK(rept.max_rel < 1e-8);

    // off the divisor the triple ratio is nowhere near -1
    auto repoff = on_divisor_f5d(*d.tau, {vec1(snt->zero_of(nu) + cplx(0.31, 0.17))}, nu, d.W);
    CHECK(repoff.max_rel > 1e-2);
}

TEST_CASE("laxddd on an (n,m) block and the light-cone transcription") {
    Rng rng(59);
    auto L = lat();
    cplx A(0.33, 0.27), W(0.19, 0.07);
    cplx Vnu = (2.0 * L.omega1() * 1.0 + 2.0 * L.omega2() * 2.0) / 5.0;
    SecancyData d = make_sigma_nu_pair(L, A, W, Vnu, rng);
    DiscreteGrid g;
    g.n0 = 0;
    g.n1 = 3;
    g.m0 = 0;
    g.m1 = 3;
    auto rep = residual_laxddd(d, vec1(cplx(0.05, 0.03)), g);
    CHECK(rep.max_rel < 1e-10);
    CHECK(rep.extra["transcription"] < 1e-12);
}

TEST_CASE("te1/te2 hold on the divisor for fay1-consistent theta data") {
    Rng rng(60);
    MatC B = g1B();
    cplx A(0.37, 0.21), U(-0.22, 0.15), V(0.4, -0.3);
    SecancyData d = make_theta_g1_secancy(B, A, U, V, rng);
    RiemannMatrix RB(B);
    auto tau = std::make_shared<ThetaTau>(RB, VecC::Zero(1));
    tau->set_flow(FlowSlot::T, vec1(V));
    auto tauA = std::make_shared<ThetaTau>(RB, vec1(A));
    tauA->set_flow(FlowSlot::T, vec1(V));
    d.tau = tau;
    d.tauA = tauA;

    FlowPoint f;
    f.t = cplx(0.07, 0.02);
    auto pts = divisor_points_on_line(*d.tau, VecC::Zero(1), vec1(cplx(1.0, 0.0)), f,
                                      cplx(-0.9, -0.9), cplx(0.9, 0.9));
    REQUIRE(!pts.empty());
    auto rep = on_divisor_te12(d, pts, f);
    CHECK(rep.max_rel < 1e-8);

    // scrambled E breaks te1
    SecancyData bad = d;
    bad.E += 0.5;
    CHECK(on_divisor_te12(bad, pts, f).max_rel > 1e3 * rep.max_rel);
}

TEST_CASE("trisecant rank test: vacuous at g=1, zero minors on repeated rows, O(1) on random data") {
    RiemannMatrix B1(g1B());
    std::array<VecC, 3> pts1 = {vec1(cplx(0.1, 0.0)), vec1(cplx(0.2, 0.0)), vec1(cplx(0.3, 0.0))};
    CHECK_THROWS_AS(trisecant_rank(B1, pts1, TrisecantCase::Distinct), vacuous_case_error);

    Rng rng(61);
    RiemannMatrix B2(oracles::random_riemann_B(2, rng));
    VecC Z = rng.cvec(2, 0.3);
    std::array<VecC, 3> same = {Z, Z, Z};
    auto r1 = trisecant_rank(B2, same, TrisecantCase::AllCoincide);
    CHECK(r1.max_abs_minor < 1e-13);

    std::array<VecC, 3> random_pts = {rng.cvec(2, 0.4), rng.cvec(2, 0.4), rng.cvec(2, 0.4)};
    auto r2 = trisecant_rank(B2, random_pts, TrisecantCase::Distinct);
    CHECK(r2.max_abs_minor > 1e-3);  // a generic non-Jacobian configuration is far from secant
}

TEST_CASE("sample_z_avoiding rejects near-divisor samples") {
    Rng rng(62);
    auto L = lat();
    EllipticPolynomialTau tau(L, std::make_shared<FrozenRoots>(vec1(cplx(0.1, 0.1))));
    FlowPoint f;
    auto factors = [&](const VecC& z) {
        return std::vector<cplx>{tau.eval(z, f)};
    };
    auto pts = sample_z_avoiding(factors, 50, 1, 0.8, rng, 1e-3);
    for (auto& z : pts) CHECK(std::abs(tau.eval(z, f)) > 1e-6);
}
