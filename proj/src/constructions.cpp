#include "toda/constructions.hpp"

namespace toda {

// ---------------------------------------------------------------------------
// SigmaToda2DTau

SigmaToda2DTau::SigmaToda2DTau(EllipticLattice L, cplx z0, cplx U, cplx Vp, cplx Vm)
    : L_(std::move(L)), z0_(z0), U_(U), Vp_(Vp), Vm_(Vm) {}

cplx SigmaToda2DTau::arg(const VecC& z, const FlowPoint& f) const {
    return z[0] + z0_ + double(f.n) * U_ + f.xi * Vp_ + f.eta * Vm_;
}

cplx SigmaToda2DTau::eval(const VecC& z, const FlowPoint& f) const {
    return L_.sigma(arg(z, f)) * std::exp(qnn_ * double(f.n) * double(f.n));
}

std::vector<VecC> SigmaToda2DTau::lattice_generators() const {
    return {vec1(2.0 * L_.omega1()), vec1(2.0 * L_.omega2())};
}

cplx SigmaToda2DTau::partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const {
    cplx s = arg(z, f);
    cplx gauge = std::exp(qnn_ * double(f.n) * double(f.n));
    auto dir = [&](FlowVar v) -> cplx {
        switch (v) {
            case FlowVar::Xi: return Vp_;
            case FlowVar::Eta: return Vm_;
            default: return {0, 0};
        }
    };
    if (d.total_order() == 0) return eval(z, f);
    if (d.terms.size() == 1) {
        auto [v, o] = d.terms[0];
        cplx D = dir(v);
        if (o == 1) return D * L_.sigma_d(s, 1) * gauge;
        if (o == 2) return D * D * L_.sigma_d(s, 2) * gauge;
    } else if (d.terms.size() == 2 && d.terms[0].second == 1 && d.terms[1].second == 1) {
        return dir(d.terms[0].first) * dir(d.terms[1].first) * L_.sigma_d(s, 2) * gauge;
    }
    throw std::invalid_argument("SigmaToda2DTau::partial: unsupported derivative spec");
}

std::shared_ptr<SigmaToda2DTau> make_sigma_toda_tau(const EllipticLattice& L, cplx z0, cplx U) {
    cplx v = L.sigma(U);
    return std::make_shared<SigmaToda2DTau>(L, z0, U, v, v);
}

TodaGaugeFit fit_toda_gauge(SigmaToda2DTau& m, const VecC& z, const TodaGrid& grid) {
    std::vector<cplx> lhs_vals, ratio_vals;
    cplx saved = m.qnn();
    m.set_qnn({0, 0});
    for (cplx xi : grid.xi)
        for (cplx eta : grid.eta)
            for (long n = grid.n_lo; n <= grid.n_hi; ++n) {
                FlowPoint f;
                f.n = n;
                f.xi = xi;
                f.eta = eta;
                cplx tau = m.eval(z, f);
                cplx mixed = m.partial(z, f, DerivSpec::mixed(FlowVar::Xi, FlowVar::Eta));
                cplx dxi = m.partial(z, f, DerivSpec::d1(FlowVar::Xi));
                cplx deta = m.partial(z, f, DerivSpec::d1(FlowVar::Eta));
                lhs_vals.push_back(mixed / tau - dxi * deta / (tau * tau));
                FlowPoint fp = f, fm = f;
                fp.n = n + 1;
                fm.n = n - 1;
                ratio_vals.push_back(m.eval(z, fp) * m.eval(z, fm) / (tau * tau));
            }
    MatC A(lhs_vals.size(), 2);
    VecC b(lhs_vals.size());
    for (size_t i = 0; i < lhs_vals.size(); ++i) {
        A(long(i), 0) = ratio_vals[i];
        A(long(i), 1) = 1.0;
        b[long(i)] = lhs_vals[i];
    }
    auto sol = lsq_solve(A, b);
    if (sol.cond > 1e8) {
        m.set_qnn(saved);
        throw degenerate_fit_error("fit_toda_gauge: degenerate sample configuration");
    }
    TodaGaugeFit out;
    out.beta = sol.x[0];
    out.C = sol.x[1];
    // beta picked up by the gauge: tau_{n+1} tau_{n-1} / tau_n^2 carries
    // exp(2 q_nn), so beta = exp(-2 q_nn) relative to the raw family.
    out.qnn = -0.5 * std::log(out.beta);
    out.cond = sol.cond;
    m.set_qnn(out.qnn);
    return out;
}

// ---------------------------------------------------------------------------
// BdheSigmaTau

BdheSigmaTau::BdheSigmaTau(EllipticLattice L, cplx z0, cplx u0, cplx u1, cplx u2)
    : L_(std::move(L)), z0_(z0), u0_(u0), u1_(u1), u2_(u2) {
    // three-term identity data: P_a A + P_b B + P_c C = 0 with
    // a = (u1-u2)/2, b = (u1+u2)/2, c = u0 + (u1-u2)/2
    cplx a = (u1_ - u2_) / 2.0, b = (u1_ + u2_) / 2.0, c = u0_ + (u1_ - u2_) / 2.0;
    cplx A = L_.sigma(b + c) * L_.sigma(b - c);
    cplx B = L_.sigma(c + a) * L_.sigma(c - a);
    cplx C = L_.sigma(a + b) * L_.sigma(a - b);
    // need (g1, -g2, g3) proportional to (A, B, C)
    q_lm_ = -std::log(-A / B);
    q_nn_ = 0.5 * (std::log(-C / B) + q_lm_);
}

cplx BdheSigmaTau::eval(const VecC& z, const FlowPoint& f) const {
    double n = double(f.n), l = double(f.l), m = double(f.m);
    cplx s = z[0] + z0_ + n * u0_ + l * u1_ + m * u2_;
    return L_.sigma(s) * std::exp(q_nn_ * n * n + q_lm_ * l * m);
}

std::vector<VecC> BdheSigmaTau::lattice_generators() const {
    return {vec1(2.0 * L_.omega1()), vec1(2.0 * L_.omega2())};
}

// ---------------------------------------------------------------------------
// SigmaNuTau

SigmaNuTau::SigmaNuTau(EllipticLattice L, cplx base, cplx Vnu)
    : L_(std::move(L)), base_(base), Vnu_(Vnu) {}

cplx SigmaNuTau::eval(const VecC& z, const FlowPoint& f) const {
    return L_.sigma(z[0] + base_ + Vnu_ * double(f.nu));
}

std::vector<VecC> SigmaNuTau::lattice_generators() const {
    return {vec1(2.0 * L_.omega1()), vec1(2.0 * L_.omega2())};
}

SecancyData make_sigma_nu_pair(const EllipticLattice& L, cplx A, cplx W, cplx Vnu, Rng& rng) {
    SecancyData d;
    d.tau = std::make_shared<SigmaNuTau>(L, cplx{0, 0}, Vnu);
    d.tauA = std::make_shared<SigmaNuTau>(L, A, Vnu);
    d.A = vec1(A);
    d.W = vec1(W);
    d.V = vec1(Vnu);

    std::vector<VecC> pts;
    for (int i = 0; i < 6; ++i) pts.push_back(vec1(rng.box(0.5)));
    FitResult fit = fit_constants_discrete(d, pts, DiscreteVariant::Fay2, {0, 1});
    d.pW = fit.pW;
    d.E = fit.E;
    d.has_constants = true;
    return d;
}

SecancyData make_theta_g1_secancy(const MatC& B, cplx A, cplx U, cplx V, Rng& rng) {
    SecancyData d;
    d.B = std::make_shared<RiemannMatrix>(B);
    d.A = vec1(A);
    d.U = vec1(U);
    d.V = vec1(V);
    std::vector<VecC> pts = {vec1(rng.box(0.4)), vec1(rng.box(0.4))};
    FitResult fit = fit_constants_fay(d, pts);
    d.p = fit.p;
    d.E = fit.E;
    d.has_constants = true;
    return d;
}

RsFixture make_rs_fixture(const EllipticLattice& L) {
    RsFixture fx{{L, cplx(0.31, 0.17)}, {}, cplx(0.31, 0.17)};
    fx.s0.x = vec2(cplx(-0.22, -0.11), cplx(0.22, 0.11));
    fx.s0.v = vec2(cplx(0.40, 0.05), cplx(-0.40, -0.05));
    return fx;
}

}  // namespace toda
