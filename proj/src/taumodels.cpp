#include "toda/taumodels.hpp"

#include <algorithm>
#include <cmath>

namespace toda {

namespace {

FlowPoint shifted(const FlowPoint& f, FlowVar v, cplx dh) {
    FlowPoint g = f;
    switch (v) {
        case FlowVar::T: g.t += dh; break;
        case FlowVar::Xi: g.xi += dh; break;
        case FlowVar::Eta: g.eta += dh; break;
    }
    return g;
}

// 4th-order central stencils
template <class F>
cplx fd1(F&& f, double h) {
    return (-f(2.0) + 8.0 * f(1.0) - 8.0 * f(-1.0) + f(-2.0)) / (12.0 * h);
}
template <class F>
cplx fd2(F&& f, double h) {
    return (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * h * h);
}

}  // namespace

cplx TauModel::partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const {
    if (d.total_order() == 0) return eval(z, f);
    double h = 1e-4 * fd_scale();
    if (d.terms.size() == 1) {
        auto [v, o] = d.terms[0];
        auto g = [&](double k) { return eval(z, shifted(f, v, k * h)); };
        if (o == 1) return fd1(g, h);
        if (o == 2) return fd2(g, h);
        throw std::invalid_argument("tau partial: order must be <= 2");
    }
    if (d.terms.size() == 2 && d.terms[0].second == 1 && d.terms[1].second == 1) {
        FlowVar a = d.terms[0].first, b = d.terms[1].first;
        auto g = [&](double ka) {
            auto inner = [&](double kb) { return eval(z, shifted(shifted(f, a, ka * h), b, kb * h)); };
            return fd1(inner, h);
        };
        return fd1(g, h);
    }
    throw std::invalid_argument("tau partial: unsupported derivative spec");
}

MonodromyData TauModel::monodromy(const VecC&, const FlowPoint&) const {
    throw std::logic_error("analytic monodromy unavailable for this model");
}

cplx TauModel::monodromy_b_dot(const VecC&, const FlowPoint&, FlowVar) const {
    throw std::logic_error("analytic monodromy unavailable for this model");
}

cplx tau_partials(const TauModel& m, const VecC& z, const FlowPoint& f, const DerivSpec& d,
                  double) {
    return m.partial(z, f, d);
}

// ---------------------------------------------------------------------------
// GaugeForm

namespace {
VecC flow_vector(const FlowPoint& f) {
    VecC v(kNumFlowSlots);
    v << cplx(double(f.n)), cplx(double(f.l)), cplx(double(f.m)), cplx(double(f.nu)), f.t, f.xi,
        f.eta;
    return v;
}
int slot_of(FlowVar v) {
    switch (v) {
        case FlowVar::T: return int(FlowSlot::T);
        case FlowVar::Xi: return int(FlowSlot::XI);
        default: return int(FlowSlot::ETA);
    }
}
}  // namespace

cplx GaugeForm::value(const FlowPoint& f) const {
    VecC v = flow_vector(f);
    return (v.transpose() * quad * v).value() + (lin.array() * v.array()).sum();
}

cplx GaugeForm::partial(const FlowPoint& f, FlowVar var) const {
    VecC v = flow_vector(f);
    int i = slot_of(var);
    cplx acc = lin[i];
    for (int j = 0; j < kNumFlowSlots; ++j) acc += (quad(i, j) + quad(j, i)) * v[j];
    return acc;
}

cplx GaugeForm::second(FlowVar a, FlowVar b) const {
    int i = slot_of(a), j = slot_of(b);
    return quad(i, j) + quad(j, i);
}

// ---------------------------------------------------------------------------
// ThetaTau

ThetaTau::ThetaTau(RiemannMatrix B, VecC z0)
    : B_(std::move(B)), z0_(std::move(z0)), flows_(kNumFlowSlots) {
    if (z0_.size() != B_.genus()) throw std::invalid_argument("ThetaTau: z0 has wrong dimension");
}

void ThetaTau::set_flow(FlowSlot slot, VecC direction) {
    if (direction.size() != B_.genus())
        throw std::invalid_argument("ThetaTau: flow vector has wrong dimension");
    flows_[size_t(slot)] = std::move(direction);
}

const VecC* ThetaTau::flow(FlowSlot slot) const {
    return flows_[size_t(slot)] ? &*flows_[size_t(slot)] : nullptr;
}

VecC ThetaTau::theta_arg(const VecC& z, const FlowPoint& f) const {
    VecC w = z + z0_;
    VecC coeffs = flow_vector(f);
    for (int s = 0; s < kNumFlowSlots; ++s)
        if (flows_[size_t(s)]) w += coeffs[s] * (*flows_[size_t(s)]);
    return w;
}

cplx ThetaTau::eval(const VecC& z, const FlowPoint& f) const {
    return riemann_theta(theta_arg(z, f), B_) * std::exp(gauge_.value(f));
}

std::vector<VecC> ThetaTau::lattice_generators() const {
    std::vector<VecC> gen;
    int g = B_.genus();
    for (int j = 0; j < g; ++j) {
        VecC e = VecC::Zero(g);
        e[j] = 1.0;
        gen.push_back(e);
    }
    for (int j = 0; j < g; ++j) gen.push_back(B_.mat().col(j));
    return gen;
}

VecC ThetaTau::flow_dir(FlowVar v) const {
    const VecC* d = flows_[size_t(FlowSlot(slot_of(v)))] ? &*flows_[size_t(slot_of(v))] : nullptr;
    return d ? *d : VecC::Zero(B_.genus());
}

cplx ThetaTau::partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const {
    VecC w = theta_arg(z, f);
    cplx eq = std::exp(gauge_.value(f));
    if (d.total_order() == 0) return riemann_theta(w, B_) * eq;

    auto single = [&](FlowVar a) {
        VecC Da = flow_dir(a);
        cplx th = riemann_theta(w, B_);
        cplx tha = riemann_theta(w, B_, {Da});
        return (tha + gauge_.partial(f, a) * th) * eq;
    };
    auto dbl = [&](FlowVar a, FlowVar b) {
        VecC Da = flow_dir(a), Db = flow_dir(b);
        cplx th = riemann_theta(w, B_);
        cplx tha = riemann_theta(w, B_, {Da});
        cplx thb = riemann_theta(w, B_, {Db});
        cplx thab = riemann_theta(w, B_, {Da, Db});
        cplx Qa = gauge_.partial(f, a), Qb = gauge_.partial(f, b), Qab = gauge_.second(a, b);
        return (thab + Qa * thb + Qb * tha + (Qab + Qa * Qb) * th) * eq;
    };

    if (d.terms.size() == 1) {
        auto [v, o] = d.terms[0];
        if (o == 1) return single(v);
        if (o == 2) return dbl(v, v);
    } else if (d.terms.size() == 2 && d.terms[0].second == 1 && d.terms[1].second == 1) {
        return dbl(d.terms[0].first, d.terms[1].first);
    }
    throw std::invalid_argument("ThetaTau::partial: unsupported derivative spec");
}

std::pair<VecR, VecR> ThetaTau::decompose(const VecC& lambda) const {
    int g = B_.genus();
    VecR q = B_.im_inv() * lambda.imag();
    VecR p = lambda.real() - B_.mat().real() * q;
    VecR qr(g), pr(g);
    for (int i = 0; i < g; ++i) {
        qr[i] = std::round(q[i]);
        pr[i] = std::round(p[i]);
    }
    VecC rec = pr.cast<cplx>() + B_.mat() * qr.cast<cplx>();
    if ((rec - lambda).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("ThetaTau::monodromy: lambda not in the period lattice");
    return {pr, qr};
}

MonodromyData ThetaTau::monodromy(const VecC& lambda, const FlowPoint& f) const {
    auto [p, q] = decompose(lambda);
    VecC qc = q.cast<cplx>();
    MonodromyData md;
    md.a = -2.0 * PI * I * qc;
    VecC F = theta_arg(VecC::Zero(B_.genus()), f);  // z0 + flow part
    md.b = -PI * I * (qc.transpose() * B_.mat() * qc).value() - 2.0 * PI * I * (qc.array() * F.array()).sum();
    return md;
}

cplx ThetaTau::monodromy_b_dot(const VecC& lambda, const FlowPoint&, FlowVar v) const {
    auto [p, q] = decompose(lambda);
    VecC qc = q.cast<cplx>();
    VecC Dv = flow_dir(v);
    cplx acc{0, 0};
    for (int i = 0; i < B_.genus(); ++i) acc += qc[i] * Dv[i];
    return -2.0 * PI * I * acc;
}

// ---------------------------------------------------------------------------
// EllipticPolynomialTau

EllipticPolynomialTau::EllipticPolynomialTau(EllipticLattice lattice,
                                             std::shared_ptr<const RootSource> roots,
                                             std::function<cplx(cplx)> amplitude)
    : L_(std::move(lattice)), roots_(std::move(roots)), amplitude_(std::move(amplitude)) {
    if (!roots_ || roots_->count() < 1)
        throw std::invalid_argument("EllipticPolynomialTau: needs at least one root");
}

cplx EllipticPolynomialTau::eval(const VecC& z, const FlowPoint& f) const {
    RootState rs = roots_->state(f.t);
    cplx prod = amp(f.t);
    for (int i = 0; i < rs.x.size(); ++i) prod *= L_.sigma(z[0] - rs.x[i]);
    return prod;
}

std::vector<VecC> EllipticPolynomialTau::lattice_generators() const {
    return {vec1(2.0 * L_.omega1()), vec1(2.0 * L_.omega2())};
}

cplx EllipticPolynomialTau::amp_dot(cplx t) const {
    if (!amplitude_) return {0, 0};
    double h = 1e-5 * L_.cell_size();
    auto g = [&](double k) { return amplitude_(t + k * h); };
    return fd1(g, h);
}

cplx EllipticPolynomialTau::partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const {
    if (d.total_order() == 0) return eval(z, f);
    for (auto& [v, o] : d.terms)
        if (v != FlowVar::T) return TauModel::partial(z, f, d);  // only the t-flow is analytic

    RootState rs = roots_->state(f.t);
    const int N = int(rs.x.size());
    if (rs.v.size() != N) return TauModel::partial(z, f, d);

    std::vector<cplx> s0(N), s1(N), s2(N);
    for (int i = 0; i < N; ++i) {
        cplx zi = z[0] - rs.x[i];
        s0[i] = L_.sigma(zi);
        s1[i] = L_.sigma_d(zi, 1);
        s2[i] = L_.sigma_d(zi, 2);
    }
    auto prod_except = [&](int skip1, int skip2) {
        cplx p{1, 0};
        for (int k = 0; k < N; ++k)
            if (k != skip1 && k != skip2) p *= s0[k];
        return p;
    };

    cplx P{1, 0};
    for (int i = 0; i < N; ++i) P *= s0[i];
    cplx Pdot{0, 0};
    for (int i = 0; i < N; ++i) Pdot += -rs.v[i] * s1[i] * prod_except(i, -1);

    cplx c = amp(f.t), cdot = amp_dot(f.t);

    int order = d.total_order();
    if (order == 1) return cdot * P + c * Pdot;

    if (rs.a.size() != N) return TauModel::partial(z, f, d);
    cplx Pdd{0, 0};
    for (int i = 0; i < N; ++i) {
        Pdd += (-rs.a[i] * s1[i] + rs.v[i] * rs.v[i] * s2[i]) * prod_except(i, -1);
        for (int j = 0; j < N; ++j)
            if (j != i) Pdd += rs.v[i] * rs.v[j] * s1[i] * s1[j] * prod_except(i, j);
    }
    // c'' via one more finite difference of amp_dot; exact zero for constant c
    cplx cdd{0, 0};
    if (amplitude_) {
        double h = 1e-5 * L_.cell_size();
        auto g = [&](double k) { return amp_dot(f.t + k * h); };
        cdd = fd1(g, h);
    }
    return cdd * P + 2.0 * cdot * Pdot + c * Pdd;
}

std::pair<long, long> EllipticPolynomialTau::decompose(cplx lambda) const {
    cplx w1 = 2.0 * L_.omega1(), w2 = 2.0 * L_.omega2();
    double det = w1.real() * w2.imag() - w1.imag() * w2.real();
    double a = (lambda.real() * w2.imag() - lambda.imag() * w2.real()) / det;
    double b = (w1.real() * lambda.imag() - w1.imag() * lambda.real()) / det;
    long ar = std::lround(a), br = std::lround(b);
    if (std::abs(lambda - (w1 * double(ar) + w2 * double(br))) > 1e-9)
        throw std::invalid_argument("EllipticPolynomialTau::monodromy: lambda not in lattice");
    return {ar, br};
}

MonodromyData EllipticPolynomialTau::monodromy(const VecC& lambda, const FlowPoint& f) const {
    auto [a, b] = decompose(lambda[0]);
    RootState rs = roots_->state(f.t);
    const double N = double(rs.x.size());
    cplx eta = L_.eta_for(a, b);
    MonodromyData md;
    md.a = vec1(N * eta);
    cplx sx = rs.x.sum();
    md.b = eta * (N * lambda[0] / 2.0 - sx) + double((a * b + a + b) % 2) * N * PI * I;
    return md;
}

cplx EllipticPolynomialTau::monodromy_b_dot(const VecC& lambda, const FlowPoint& f, FlowVar v) const {
    if (v != FlowVar::T) throw std::invalid_argument("elliptic monodromy_b_dot: only the t-flow");
    auto [a, b] = decompose(lambda[0]);
    RootState rs = roots_->state(f.t);
    if (rs.v.size() != rs.x.size())
        throw std::logic_error("monodromy_b_dot: root source provides no velocities");
    return -L_.eta_for(a, b) * rs.v.sum();
}

cplx EllipticPolynomialTau::log_t_derivative(cplx z, cplx t) const {
    RootState rs = roots_->state(t);
    cplx acc = amplitude_ ? amp_dot(t) / amp(t) : cplx{0, 0};
    for (int i = 0; i < rs.x.size(); ++i) acc += -rs.v[i] * L_.zeta(z - rs.x[i]);
    return acc;
}

// ---------------------------------------------------------------------------
// monodromy_check

MonodromyCheckResult monodromy_check(const TauModel& m, const VecC& lambda, const FlowPoint& f,
                                     Rng& rng, double fail_tol) {
    const int d = m.dim();
    auto ratio = [&](const VecC& z) {
        cplx denom = m.eval(z, f);
        if (std::abs(denom) < 1e-250) throw std::runtime_error("monodromy_check: probe hit a zero");
        return m.eval(z + lambda, f) / denom;
    };

    VecC base;
    cplx r0;
    for (int attempt = 0;; ++attempt) {
        base = rng.cvec(d, 0.3);
        try {
            r0 = ratio(base);
            break;
        } catch (const std::runtime_error&) {
            if (attempt > 20) throw;
        }
    }

    const double delta = 0.02;
    VecC a(d);
    for (int j = 0; j < d; ++j) {
        VecC e = VecC::Zero(d);
        e[j] = 1.0;
        a[j] = std::log(ratio(base + delta * e) / r0) / delta;
    }
    cplx b = std::log(r0);
    for (int j = 0; j < d; ++j) b -= a[j] * base[j];

    double worst = 0;
    int used = 0;
    for (int rep = 0; used < 20 && rep < 200; ++rep) {
        VecC z = rng.cvec(d, 0.45);
        cplx r;
        try {
            r = ratio(z);
        } catch (const std::runtime_error&) {
            continue;
        }
        cplx model = std::exp((a.array() * z.array()).sum() + b);
        worst = std::max(worst, rel_residual(r, model));
        ++used;
    }
    if (worst > fail_tol)
        throw not_a_section_error("monodromy_check: ratio is not exponential (residual " +
                                  std::to_string(worst) + ")");
    return {a, b, worst};
}

// ---------------------------------------------------------------------------
// divisor_zeros

namespace {

struct LineFn {
    const TauModel& m;
    const VecC& z0;
    const VecC& w;
    const FlowPoint& f;
    cplx operator()(cplx s) const { return m.eval(z0 + s * w, f); }
};

// Walks the rectangle boundary accumulating the phase, adaptively refining
// so each step turns by less than ~1 radian.
double boundary_winding(const LineFn& fn, cplx lo, cplx hi, double zero_guard,
                        bool* hit_zero) {
    std::vector<cplx> corners = {lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag()), lo};
    double total = 0;
    *hit_zero = false;
    for (int e = 0; e < 4; ++e) {
        cplx a = corners[size_t(e)], b = corners[size_t(e) + 1];
        double t0 = 0;
        cplx f0 = fn(a);
        if (std::abs(f0) < zero_guard) { *hit_zero = true; return 0; }
        double step = 1.0 / 16.0;
        while (t0 < 1.0 - 1e-12) {
            double t1 = std::min(1.0, t0 + step);
            cplx f1 = fn(a + (b - a) * t1);
            if (std::abs(f1) < zero_guard) { *hit_zero = true; return 0; }
            double dphi = std::arg(f1 / f0);
            if (std::abs(dphi) > 1.0 && t1 - t0 > 1e-7) {
                step = (t1 - t0) / 2.0;
                continue;
            }
            total += dphi;
            t0 = t1;
            f0 = f1;
            step = std::min(0.25, step * 1.9);
        }
    }
    return total / (2.0 * PI);
}

}  // namespace

int winding_number(const TauModel& m, const VecC& z0, const VecC& w, const FlowPoint& f,
                   cplx lo, cplx hi, const ZeroSearchOptions& opt) {
    LineFn fn{m, z0, w, f};
    // scale from boundary samples
    double scale = 0;
    for (int i = 0; i < 16; ++i) {
        double t = double(i) / 16.0;
        scale = std::max(scale, std::abs(fn(lo + t * (hi - lo))));
        scale = std::max(scale, std::abs(fn(cplx(hi.real(), lo.imag()) + t * (cplx(lo.real(), hi.imag()) - cplx(hi.real(), lo.imag())))));
    }
    cplx lo2 = lo, hi2 = hi;
    Rng jitter(12345);
    for (int attempt = 0; attempt <= opt.perturb_retries; ++attempt) {
        bool hit = false;
        double wnd = boundary_winding(fn, lo2, hi2, 1e-11 * (scale + 1e-30), &hit);
        if (!hit) {
            long rounded = std::lround(wnd);
            if (std::abs(wnd - double(rounded)) > 0.25)
                throw contour_error("winding_number: phase tracking inconsistent");
            return int(rounded);
        }
        cplx d = (hi - lo) * (1e-3 * (attempt + 1));
        lo2 = lo - d * cplx(1.0, 0.618);
        hi2 = hi + d * cplx(0.707, 1.0);
    }
    throw contour_error("winding_number: zero on contour after perturbation retries");
}

namespace {

DivisorZero newton_refine(const LineFn& fn, cplx s0, double box_diag, double local_scale,
                          const ZeroSearchOptions& opt) {
    cplx s = s0;
    double h = std::max(1e-9, 1e-6 * box_diag);
    for (int it = 0; it < 80; ++it) {
        cplx fv = fn(s);
        if (std::abs(fv) < opt.newton_tol_rel * local_scale) return {s, 1, true};
        cplx dp = (fn(s + h) - fn(s - h)) / (2.0 * h);
        if (std::abs(dp) == 0.0) break;
        cplx step = fv / dp;
        if (std::abs(step) > 4.0 * box_diag) break;
        s -= step;
    }
    throw refinement_error("divisor_zeros: Newton refinement failed near box center");
}

void search(const TauModel& m, const VecC& z0, const VecC& w, const FlowPoint& f, cplx lo,
            cplx hi, const ZeroSearchOptions& opt, int depth, double local_scale,
            std::vector<DivisorZero>& out) {
    int wnd = winding_number(m, z0, w, f, lo, hi, opt);
    if (wnd == 0) return;
    LineFn fn{m, z0, w, f};
    double diag = std::abs(hi - lo);
    if (wnd == 1) {
        out.push_back(newton_refine(fn, (lo + hi) / 2.0, diag, local_scale, opt));
        return;
    }
    if (depth >= opt.max_depth || diag < 1e-8) {
        // unresolved cluster: report at the center with the full multiplicity
        out.push_back({(lo + hi) / 2.0, wnd, false});
        return;
    }
    cplx mid = (lo + hi) / 2.0 + (hi - lo) * cplx(3.1e-3, 1.7e-3);  // dodge zeros on the split
    cplx boxes[4][2] = {
        {lo, mid},
        {cplx(mid.real(), lo.imag()), cplx(hi.real(), mid.imag())},
        {cplx(lo.real(), mid.imag()), cplx(mid.real(), hi.imag())},
        {mid, hi},
    };
    for (auto& bx : boxes) search(m, z0, w, f, bx[0], bx[1], opt, depth + 1, local_scale, out);
}

}  // namespace

std::vector<DivisorZero> divisor_zeros(const TauModel& m, const VecC& z0, const VecC& w,
                                       const FlowPoint& f, cplx lo, cplx hi,
                                       const ZeroSearchOptions& opt) {
    if (w.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("divisor_zeros: w = 0");
    LineFn fn{m, z0, w, f};
    double scale = 0;
    for (int i = 0; i < 32; ++i) {
        double t = double(i) / 32.0;
        cplx s = lo + t * (hi - lo);
        scale = std::max(scale, std::abs(fn(s)));
    }
    std::vector<DivisorZero> out;
    search(m, z0, w, f, lo, hi, opt, 0, scale + 1e-300, out);
    std::sort(out.begin(), out.end(), [](const DivisorZero& a, const DivisorZero& b) {
        if (a.s.real() != b.s.real()) return a.s.real() < b.s.real();
        return a.s.imag() < b.s.imag();
    });
    return out;
}

}  // namespace toda
