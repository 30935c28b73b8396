#ifndef TODA_CONSTRUCTIONS_HPP
#define TODA_CONSTRUCTIONS_HPP

// Concrete solution families used by the experiment suites: sigma-function
// tau families for the 2D Toda lattice, the discrete Hirota equation, and
// the (z, nu) discrete secancy pair.

#include "toda/residuals.hpp"
#include "toda/rsdyn.hpp"
#include "toda/taumodels.hpp"

namespace toda {

// tau_n(xi, eta) = sigma(z + z0 + n U + xi Vp + eta Vm) * exp(Q(n, xi, eta)).
// With Vp * Vm = exp(2 q_nn) sigma(U)^2 this solves the 2D Toda lattice.
class SigmaToda2DTau : public TauModel {
  public:
    SigmaToda2DTau(EllipticLattice L, cplx z0, cplx U, cplx Vp, cplx Vm);

    int dim() const override { return 1; }
    cplx eval(const VecC& z, const FlowPoint& f) const override;
    std::vector<VecC> lattice_generators() const override;
    bool has_analytic_partials() const override { return true; }
    cplx partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const override;
    double fd_scale() const override { return L_.cell_size(); }

    void set_qnn(cplx q) { qnn_ = q; }
    cplx qnn() const { return qnn_; }
    cplx U() const { return U_; }
    const EllipticLattice& lattice() const { return L_; }

  private:
    cplx arg(const VecC& z, const FlowPoint& f) const;
    EllipticLattice L_;
    cplx z0_, U_, Vp_, Vm_, qnn_{0, 0};
};

// Builds the family with Vp = Vm = sigma(U) (the exact solution gauge is
// then q_nn = 0; leave q_nn free so it can be fitted).
std::shared_ptr<SigmaToda2DTau> make_sigma_toda_tau(const EllipticLattice& L, cplx z0, cplx U);

// Fits (beta, C) in  d_xi d_eta ln tau_n = beta * tau_{n+1} tau_{n-1} / tau_n^2 + C
// by least squares on the given samples, stores the implied q_nn on the
// model, and returns the fit conditioning.
struct TodaGaugeFit {
    cplx beta, C, qnn;
    double cond;
};
TodaGaugeFit fit_toda_gauge(SigmaToda2DTau& m, const VecC& z, const TodaGrid& fit_grid);

// ---------------------------------------------------------------------------
// BDHE sigma tau: tau(n,l,m) = sigma(z0 + n u0 + l u1 + m u2) exp(Q), with
// the gauge coefficients q_lm, q_nn pinned by the Weierstrass three-term
// identity so the bilinear discrete Hirota equation holds exactly.

class BdheSigmaTau : public TauModel {
  public:
    BdheSigmaTau(EllipticLattice L, cplx z0, cplx u0, cplx u1, cplx u2);

    int dim() const override { return 1; }
    cplx eval(const VecC& z, const FlowPoint& f) const override;
    std::vector<VecC> lattice_generators() const override;
    double fd_scale() const override { return L_.cell_size(); }

    cplx q_lm() const { return q_lm_; }
    cplx q_nn() const { return q_nn_; }

  private:
    EllipticLattice L_;
    cplx z0_, u0_, u1_, u2_, q_lm_, q_nn_;
};

// ---------------------------------------------------------------------------
// Discrete (z, nu) sigma family: tau(z, nu) = sigma(z + base + Vnu * nu).
class SigmaNuTau : public TauModel {
  public:
    SigmaNuTau(EllipticLattice L, cplx base, cplx Vnu);

    int dim() const override { return 1; }
    cplx eval(const VecC& z, const FlowPoint& f) const override;
    std::vector<VecC> lattice_generators() const override;
    double fd_scale() const override { return L_.cell_size(); }

    cplx zero_of(long nu) const { return -base_ - Vnu_ * double(nu); }
    cplx Vnu() const { return Vnu_; }
    const EllipticLattice& lattice() const { return L_; }

  private:
    EllipticLattice L_;
    cplx base_, Vnu_;
};

// Discrete secancy pair tau(z,nu) = sigma(z + Vnu nu), tauA = sigma(z + A + Vnu nu),
// with (pW, E) fitted from the homogeneous three-term system.
SecancyData make_sigma_nu_pair(const EllipticLattice& L, cplx A, cplx W, cplx Vnu, Rng& rng);

// Pure theta genus-1 secancy data with constants fitted at 2 points.
SecancyData make_theta_g1_secancy(const MatC& B, cplx A, cplx U, cplx V, Rng& rng);

// Standard N=2 center-of-momentum RS fixture on the given lattice.
struct RsFixture {
    RsSystem sys;
    ParticleState s0;
    cplx U;  // tau shift, equal to sys.kappa
};
RsFixture make_rs_fixture(const EllipticLattice& L);

}  // namespace toda

#endif
