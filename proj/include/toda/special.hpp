#ifndef TODA_SPECIAL_HPP
#define TODA_SPECIAL_HPP

// Riemann theta functions with half-integer characteristics and directional
// derivatives, the Kummer map, and Weierstrass sigma/zeta built on the
// genus-1 theta series.
//
// Conventions:
//   theta(z|B)        = sum_m exp(2 pi i (z,m) + pi i (B m, m))
//   theta[e,d](z|B)   = sum_m exp(pi i (B(m+e), m+e) + 2 pi i (m+e, z+d))
//   Kummer map        K(Z)_e = theta[e,0](2Z | 2B), e in {0,1/2}^g
//   EllipticLattice holds half-periods (omega1, omega2); the period lattice
//   is 2*omega1*Z + 2*omega2*Z, eta_j = zeta(omega_j).

#include <optional>

#include "toda/util.hpp"

namespace toda {

struct ThetaOptions {
    double tail = 1e-14;     // relative truncation target (vs leading term)
    double radius_cap = 60;  // ellipsoid radius cap, in the Im(B) metric
};

class RiemannMatrix {
  public:
    explicit RiemannMatrix(MatC b);

    int genus() const { return g_; }
    const MatC& mat() const { return b_; }
    const MatR& im() const { return y_; }
    const MatR& im_inv() const { return yinv_; }
    double im_eig_min() const { return eig_min_; }

  private:
    MatC b_;
    MatR y_, yinv_;
    double eig_min_;
    int g_;
};

struct Characteristic {
    VecR eps;    // entries in {0, 1/2}
    VecR delta;  // entries in {0, 1/2}
};

Characteristic zero_char(int g);
// Characteristic with eps = bits(index)/2, delta = 0; index in [0, 2^g).
Characteristic half_char(int g, unsigned index);

cplx riemann_theta(const VecC& z, const RiemannMatrix& B,
                   const std::vector<VecC>& deriv_dirs = {},
                   const ThetaOptions& opt = {});

cplx theta_char(const Characteristic& c, const VecC& z, const RiemannMatrix& B,
                const std::vector<VecC>& deriv_dirs = {},
                const ThetaOptions& opt = {});

// Kummer coordinates, sup-normalized so the largest-magnitude entry is 1.
VecC kummer_map(const VecC& Z, const RiemannMatrix& B);
// Directional derivative of the (unnormalized) Kummer coordinates along V.
VecC kummer_map_deriv(const VecC& Z, const RiemannMatrix& B, const VecC& V);

class EllipticLattice {
  public:
    // Half-periods; requires Im(omega2/omega1) > 0. eta1, eta2 are computed
    // from the theta series and validated against the Legendre relation
    // eta1*omega2 - eta2*omega1 = pi i / 2.
    EllipticLattice(cplx omega1, cplx omega2);

    cplx omega1() const { return w1_; }
    cplx omega2() const { return w2_; }
    cplx eta1() const { return eta1_; }
    cplx eta2() const { return eta2_; }
    cplx tau_modulus() const { return tau_; }
    double legendre_residual() const { return legendre_res_; }
    // A length scale for the fundamental cell.
    double cell_size() const { return cell_; }

    cplx sigma(cplx z) const;
    // d-th derivative of sigma, d <= 2.
    cplx sigma_d(cplx z, int d) const;
    cplx zeta(cplx z) const;  // throws pole_error within 1e-12 of a lattice point
    cplx wp(cplx z) const;

    // Distance from z to the nearest period-lattice point.
    double lattice_distance(cplx z) const;
    // Reduce z into the fundamental cell centered at 0.
    cplx reduce(cplx z) const;

    // eta for a general period lambda = 2a*omega1 + 2b*omega2:
    //   sigma(z+lambda) = (-1)^{ab+a+b} exp(eta_lambda (2z+lambda)) sigma(z)
    cplx eta_for(long a, long b) const { return 2.0 * (double(a) * eta1_ + double(b) * eta2_); }

  private:
    cplx theta1(cplx u, int d) const;  // odd g=1 theta and derivatives at (u | tau_)
    cplx w1_, w2_, tau_, eta1_, eta2_;
    double legendre_res_ = 0, cell_ = 0;
    std::optional<RiemannMatrix> bmod_;
};

struct pole_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// (sigma, zeta) at z.
std::pair<cplx, cplx> weierstrass(cplx z, const EllipticLattice& L);

}  // namespace toda

#endif
