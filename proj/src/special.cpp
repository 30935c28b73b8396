#include "toda/special.hpp"

#include <algorithm>
#include <cmath>

namespace toda {

RiemannMatrix::RiemannMatrix(MatC b) : b_(std::move(b)) {
    if (b_.rows() != b_.cols() || b_.rows() < 1)
        throw std::invalid_argument("RiemannMatrix: matrix must be square");
    g_ = int(b_.rows());
    if ((b_ - b_.transpose()).cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("RiemannMatrix: matrix must be symmetric as stored");
    y_ = b_.imag();
    Eigen::SelfAdjointEigenSolver<MatR> es(y_);
    eig_min_ = es.eigenvalues().minCoeff();
    if (!(eig_min_ > 0))
        throw std::invalid_argument("RiemannMatrix: Im(B) must be positive definite");
    yinv_ = y_.inverse();
}

Characteristic zero_char(int g) {
    Characteristic c;
    c.eps = VecR::Zero(g);
    c.delta = VecR::Zero(g);
    return c;
}

Characteristic half_char(int g, unsigned index) {
    Characteristic c = zero_char(g);
    for (int j = 0; j < g; ++j)
        if (index & (1u << j)) c.eps[j] = 0.5;
    return c;
}

namespace {

// Enumerates integer vectors m with Q(m) = (m+c)^T Y (m+c) <= Qcut and
// accumulates the theta series term-wise. Box bounds per coordinate come
// from the diagonal of Y^{-1}.
struct ThetaSum {
    const VecC& z;
    const MatC& B;
    const MatR& Y;
    const VecR center;  // c = Y^{-1} Im z + eps
    const VecR& eps;
    const VecR& delta;
    const std::vector<VecC>& dirs;
    const VecR& half_widths;
    double Qcut;
    int g;

    cplx total{0.0, 0.0};

    void run() {
        VecR m(g);
        recurse(0, m);
    }

    void recurse(int j, VecR& m) {
        if (j == g) {
            VecR q = m + center;
            if (q.dot(Y * q) > Qcut) return;
            add_term(m);
            return;
        }
        long lo = long(std::floor(-center[j] - half_widths[j]));
        long hi = long(std::ceil(-center[j] + half_widths[j]));
        for (long v = lo; v <= hi; ++v) {
            m[j] = double(v);
            recurse(j + 1, m);
        }
    }

    void add_term(const VecR& m) {
        VecC me(g);
        for (int i = 0; i < g; ++i) me[i] = m[i] + eps[i];
        cplx quad{0, 0}, lin{0, 0};
        for (int a = 0; a < g; ++a) {
            lin += me[a] * (z[a] + delta[a]);
            for (int b = 0; b < g; ++b) quad += B(a, b) * me[a] * me[b];
        }
        cplx term = std::exp(PI * I * quad + 2.0 * PI * I * lin);
        for (const auto& v : dirs) {
            cplx f{0, 0};
            for (int a = 0; a < g; ++a) f += v[a] * me[a];
            term *= 2.0 * PI * I * f;
        }
        total += term;
    }
};

cplx theta_core(const VecR& eps, const VecR& delta, const VecC& z, const RiemannMatrix& B,
                const std::vector<VecC>& dirs, const ThetaOptions& opt) {
    const int g = B.genus();
    if (z.size() != g) throw std::invalid_argument("theta: z has wrong dimension");
    for (const auto& v : dirs)
        if (v.size() != g) throw std::invalid_argument("theta: derivative direction has wrong dimension");

    VecR y = z.imag();
    VecR c = B.im_inv() * y;
    for (int i = 0; i < g; ++i) c[i] += eps[i];

    // Gaussian level of the leading term, at the rounded center.
    VecR m0(g);
    for (int i = 0; i < g; ++i) m0[i] = std::round(-c[i]);
    VecR q0v = m0 + c;
    double q0 = q0v.dot(B.im() * q0v);

    // Include everything whose Gaussian factor exceeds tail * leading;
    // margin covers term count and polynomial derivative factors.
    double Qcut = q0 - std::log(opt.tail) / PI + 4.0 + 2.0 * double(dirs.size());

    VecR half_widths(g);
    double max_half = 0;
    for (int j = 0; j < g; ++j) {
        half_widths[j] = std::sqrt(Qcut * B.im_inv()(j, j)) + 1.0;
        max_half = std::max(max_half, half_widths[j]);
    }
    if (max_half > opt.radius_cap)
        throw precision_error("theta: requested precision unreachable within radius cap");

    ThetaSum s{z, B.mat(), B.im(), c, eps, delta, dirs, half_widths, Qcut, g};
    s.run();
    return s.total;
}

}  // namespace

cplx riemann_theta(const VecC& z, const RiemannMatrix& B, const std::vector<VecC>& dirs,
                   const ThetaOptions& opt) {
    int g = B.genus();
    return theta_core(VecR::Zero(g), VecR::Zero(g), z, B, dirs, opt);
}

cplx theta_char(const Characteristic& c, const VecC& z, const RiemannMatrix& B,
                const std::vector<VecC>& dirs, const ThetaOptions& opt) {
    if (c.eps.size() != B.genus() || c.delta.size() != B.genus())
        throw std::invalid_argument("theta_char: characteristic has wrong dimension");
    return theta_core(c.eps, c.delta, z, B, dirs, opt);
}

VecC kummer_map(const VecC& Z, const RiemannMatrix& B) {
    const int g = B.genus();
    RiemannMatrix B2(2.0 * B.mat());
    const unsigned n = 1u << g;
    VecC out(n);
    unsigned imax = 0;
    for (unsigned i = 0; i < n; ++i) {
        out[i] = theta_char(half_char(g, i), 2.0 * Z, B2);
        if (std::abs(out[i]) > std::abs(out[imax])) imax = i;
    }
    if (std::abs(out[imax]) < 1e-13) throw std::runtime_error("kummer_map: base point of map");
    return out / out[imax];
}

VecC kummer_map_deriv(const VecC& Z, const RiemannMatrix& B, const VecC& V) {
    const int g = B.genus();
    RiemannMatrix B2(2.0 * B.mat());
    const unsigned n = 1u << g;
    VecC out(n);
    // d/ds theta[e,0](2(Z+sV) | 2B) = 2 * directional derivative along V
    for (unsigned i = 0; i < n; ++i)
        out[i] = 2.0 * theta_char(half_char(g, i), 2.0 * Z, B2, {V});
    return out;
}

// ---------------------------------------------------------------------------
// EllipticLattice

EllipticLattice::EllipticLattice(cplx omega1, cplx omega2) : w1_(omega1), w2_(omega2) {
    if (std::abs(w1_) == 0.0) throw std::invalid_argument("EllipticLattice: omega1 = 0");
    tau_ = w2_ / w1_;
    if (!(tau_.imag() > 0))
        throw std::invalid_argument("EllipticLattice: Im(omega2/omega1) must be positive");
    MatC bm(1, 1);
    bm(0, 0) = tau_;
    bmod_.emplace(bm);
    cell_ = std::max(std::abs(2.0 * w1_), std::abs(2.0 * w2_));

    // eta1 = -F'''(0) / (12 omega1 F'(0)) with F(u) = theta[1/2,1/2](u|tau)
    cplx f1 = theta1(0.0, 1);
    cplx f3 = theta1(0.0, 3);
    eta1_ = -f3 / (12.0 * w1_ * f1);

    // eta2 = zeta(omega2), via the theta form of zeta (pole-free at omega2)
    cplx u = w2_ / (2.0 * w1_);
    eta2_ = eta1_ * w2_ / w1_ + theta1(u, 1) / (2.0 * w1_ * theta1(u, 0));

    legendre_res_ = std::abs(eta1_ * w2_ - eta2_ * w1_ - PI * I / 2.0);
    if (legendre_res_ > 1e-12)
        throw std::runtime_error("EllipticLattice: Legendre relation residual too large");
}

cplx EllipticLattice::theta1(cplx u, int d) const {
    Characteristic c;
    c.eps = VecR::Constant(1, 0.5);
    c.delta = VecR::Constant(1, 0.5);
    VecC z = vec1(u);
    std::vector<VecC> dirs(d, vec1(cplx{1.0, 0.0}));
    return theta_char(c, z, *bmod_, dirs);
}

double EllipticLattice::lattice_distance(cplx z) const {
    // solve z = 2a w1 + 2b w2 over the reals
    double det = (2.0 * w1_).real() * (2.0 * w2_).imag() - (2.0 * w1_).imag() * (2.0 * w2_).real();
    double a = (z.real() * (2.0 * w2_).imag() - z.imag() * (2.0 * w2_).real()) / det;
    double b = ((2.0 * w1_).real() * z.imag() - (2.0 * w1_).imag() * z.real()) / det;
    double best = std::numeric_limits<double>::infinity();
    for (long da = -1; da <= 1; ++da)
        for (long db = -1; db <= 1; ++db) {
            cplx p = 2.0 * w1_ * (std::round(a) + double(da)) + 2.0 * w2_ * (std::round(b) + double(db));
            best = std::min(best, std::abs(z - p));
        }
    return best;
}

cplx EllipticLattice::reduce(cplx z) const {
    double det = (2.0 * w1_).real() * (2.0 * w2_).imag() - (2.0 * w1_).imag() * (2.0 * w2_).real();
    double a = (z.real() * (2.0 * w2_).imag() - z.imag() * (2.0 * w2_).real()) / det;
    double b = ((2.0 * w1_).real() * z.imag() - (2.0 * w1_).imag() * z.real()) / det;
    return z - 2.0 * w1_ * std::round(a) - 2.0 * w2_ * std::round(b);
}

cplx EllipticLattice::sigma_d(cplx z, int d) const {
    // sigma = C e^{Q} F(u),  u = z/(2 w1),  Q = eta1 z^2/(2 w1),  C = 2 w1 / F'(0)
    cplx C = 2.0 * w1_ / theta1(0.0, 1);
    cplx u = z / (2.0 * w1_);
    cplx Q = eta1_ * z * z / (2.0 * w1_);
    cplx Qp = eta1_ * z / w1_;
    cplx Qpp = eta1_ / w1_;
    cplx f0 = theta1(u, 0);
    cplx eq = std::exp(Q);
    cplx s = 1.0 / (2.0 * w1_);
    switch (d) {
        case 0:
            return C * eq * f0;
        case 1:
            return C * eq * (Qp * f0 + s * theta1(u, 1));
        case 2: {
            cplx f1 = theta1(u, 1), f2 = theta1(u, 2);
            return C * eq * ((Qpp + Qp * Qp) * f0 + 2.0 * Qp * s * f1 + s * s * f2);
        }
        default:
            throw std::invalid_argument("sigma_d: order must be <= 2");
    }
}

cplx EllipticLattice::sigma(cplx z) const { return sigma_d(z, 0); }

cplx EllipticLattice::zeta(cplx z) const {
    if (lattice_distance(z) < 1e-12) throw pole_error("zeta: z is a lattice point");
    cplx u = z / (2.0 * w1_);
    return eta1_ * z / w1_ + theta1(u, 1) / (2.0 * w1_ * theta1(u, 0));
}

cplx EllipticLattice::wp(cplx z) const {
    if (lattice_distance(z) < 1e-12) throw pole_error("wp: z is a lattice point");
    cplx u = z / (2.0 * w1_);
    cplx f0 = theta1(u, 0), f1 = theta1(u, 1), f2 = theta1(u, 2);
    cplx s = 1.0 / (2.0 * w1_);
    // wp = -zeta' = -eta1/w1 - [F''F - F'^2] s^2 / F^2
    return -eta1_ / w1_ - s * s * (f2 * f0 - f1 * f1) / (f0 * f0);
}

std::pair<cplx, cplx> weierstrass(cplx z, const EllipticLattice& L) {
    return {L.sigma(z), L.zeta(z)};
}

}  // namespace toda
