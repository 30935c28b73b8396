#ifndef TODA_TAUMODELS_HPP
#define TODA_TAUMODELS_HPP

// Tau-function families: holomorphic sections of line bundles on an abelian
// variety, evaluated at a point z and a tuple of flow variables. Concrete
// families: theta-built and elliptic-polynomial (sigma product) taus.

#include <functional>
#include <memory>

#include "toda/special.hpp"
#include "toda/util.hpp"

namespace toda {

// Flow variables a tau family may depend on. Integer indices and continuous
// flows; each concrete model reads the slots it understands.
struct FlowPoint {
    long n = 0, l = 0, m = 0, nu = 0;
    cplx t{0, 0}, xi{0, 0}, eta{0, 0};
};

enum class FlowVar { T, Xi, Eta };

struct DerivSpec {
    std::vector<std::pair<FlowVar, int>> terms;  // (variable, order), total order <= 2
    static DerivSpec d1(FlowVar v) { return {{{v, 1}}}; }
    static DerivSpec d2(FlowVar v) { return {{{v, 2}}}; }
    static DerivSpec mixed(FlowVar a, FlowVar b) { return {{{a, 1}, {b, 1}}}; }
    int total_order() const {
        int s = 0;
        for (auto& [v, o] : terms) s += o;
        return s;
    }
};

struct MonodromyData {
    VecC a;   // a_lambda
    cplx b;   // b_lambda at the given flow point
};

struct not_a_section_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TauModel {
  public:
    virtual ~TauModel() = default;
    virtual int dim() const = 0;
    virtual cplx eval(const VecC& z, const FlowPoint& f) const = 0;
    virtual std::vector<VecC> lattice_generators() const = 0;

    virtual bool has_analytic_partials() const { return false; }
    virtual cplx partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const;

    virtual bool has_analytic_monodromy() const { return false; }
    virtual MonodromyData monodromy(const VecC& lambda, const FlowPoint& f) const;
    // time derivative of b_lambda along the given flow
    virtual cplx monodromy_b_dot(const VecC& lambda, const FlowPoint& f, FlowVar v) const;

    // finite-difference step scale (models may override with a lattice scale)
    virtual double fd_scale() const { return 1.0; }
};

// tau_partials: analytic when the model provides it, otherwise 4th-order
// central differences with step h = step_rel * fd_scale().
cplx tau_partials(const TauModel& m, const VecC& z, const FlowPoint& f, const DerivSpec& d,
                  double step_rel = 1e-4);

// ---------------------------------------------------------------------------
// ThetaTau: theta(z + z0 + n U + l Ul + m Um + nu Vnu + t V + xi Vp + eta Vm | B) * exp(Q)

enum class FlowSlot { N, L, M, NU, T, XI, ETA };
inline constexpr int kNumFlowSlots = 7;

// Quadratic gauge in the flow variables (integers promoted to complex).
struct GaugeForm {
    MatC quad{MatC::Zero(kNumFlowSlots, kNumFlowSlots)};  // symmetric
    VecC lin{VecC::Zero(kNumFlowSlots)};
    cplx value(const FlowPoint& f) const;
    cplx partial(const FlowPoint& f, FlowVar v) const;          // dQ/dv
    cplx second(FlowVar a, FlowVar b) const;                    // d2Q/dadb
};

class ThetaTau : public TauModel {
  public:
    ThetaTau(RiemannMatrix B, VecC z0);

    void set_flow(FlowSlot slot, VecC direction);
    const VecC* flow(FlowSlot slot) const;
    GaugeForm& gauge() { return gauge_; }
    const GaugeForm& gauge_form() const { return gauge_; }

    int dim() const override { return B_.genus(); }
    cplx eval(const VecC& z, const FlowPoint& f) const override;
    std::vector<VecC> lattice_generators() const override;

    bool has_analytic_partials() const override { return true; }
    cplx partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const override;

    bool has_analytic_monodromy() const override { return true; }
    MonodromyData monodromy(const VecC& lambda, const FlowPoint& f) const override;
    cplx monodromy_b_dot(const VecC& lambda, const FlowPoint& f, FlowVar v) const override;

    const RiemannMatrix& B() const { return B_; }
    // full theta argument at (z, f)
    VecC theta_arg(const VecC& z, const FlowPoint& f) const;

  private:
    VecC flow_dir(FlowVar v) const;
    // decompose lambda = p + B q with integer vectors; throws if not in the lattice
    std::pair<VecR, VecR> decompose(const VecC& lambda) const;

    RiemannMatrix B_;
    VecC z0_;
    std::vector<std::optional<VecC>> flows_;
    GaugeForm gauge_;
};

// ---------------------------------------------------------------------------
// EllipticPolynomialTau: c(t) * prod_i sigma(z - x_i(t)), d = 1.

struct RootState {
    VecC x;  // positions
    VecC v;  // velocities (may be empty)
    VecC a;  // accelerations (may be empty)
};

class RootSource {
  public:
    virtual ~RootSource() = default;
    virtual int count() const = 0;
    virtual RootState state(cplx t) const = 0;
};

// Roots frozen in time.
class FrozenRoots : public RootSource {
  public:
    explicit FrozenRoots(VecC x) : x_(std::move(x)) {}
    int count() const override { return int(x_.size()); }
    RootState state(cplx) const override {
        return {x_, VecC::Zero(x_.size()), VecC::Zero(x_.size())};
    }

  private:
    VecC x_;
};

// Straight-line root motion x_i(t) = x_i + v_i t.
class LinearRoots : public RootSource {
  public:
    LinearRoots(VecC x0, VecC v) : x0_(std::move(x0)), v_(std::move(v)) {}
    int count() const override { return int(x0_.size()); }
    RootState state(cplx t) const override {
        return {x0_ + t * v_, v_, VecC::Zero(x0_.size())};
    }

  private:
    VecC x0_, v_;
};

class EllipticPolynomialTau : public TauModel {
  public:
    EllipticPolynomialTau(EllipticLattice lattice, std::shared_ptr<const RootSource> roots,
                          std::function<cplx(cplx)> amplitude = nullptr);

    int dim() const override { return 1; }
    cplx eval(const VecC& z, const FlowPoint& f) const override;
    std::vector<VecC> lattice_generators() const override;

    bool has_analytic_partials() const override { return true; }
    cplx partial(const VecC& z, const FlowPoint& f, const DerivSpec& d) const override;

    bool has_analytic_monodromy() const override { return true; }
    MonodromyData monodromy(const VecC& lambda, const FlowPoint& f) const override;
    cplx monodromy_b_dot(const VecC& lambda, const FlowPoint& f, FlowVar v) const override;

    double fd_scale() const override { return L_.cell_size(); }

    const EllipticLattice& lattice() const { return L_; }
    const RootSource& roots() const { return *roots_; }
    int root_count() const { return roots_->count(); }

    // tau_dot / tau and (c dot / c) helpers used by wave-recursion code
    cplx log_t_derivative(cplx z, cplx t) const;

  private:
    std::pair<long, long> decompose(cplx lambda) const;
    cplx amp(cplx t) const { return amplitude_ ? amplitude_(t) : cplx{1, 0}; }
    cplx amp_dot(cplx t) const;

    EllipticLattice L_;
    std::shared_ptr<const RootSource> roots_;
    std::function<cplx(cplx)> amplitude_;
};

// ---------------------------------------------------------------------------
// monodromy_check: fit (a_lambda, b_lambda) from probes and validate at 20
// fresh probes; throws not_a_section_error when the ratio is not exponential.

struct MonodromyCheckResult {
    VecC a;
    cplx b;
    double residual;
};

MonodromyCheckResult monodromy_check(const TauModel& m, const VecC& lambda, const FlowPoint& f,
                                     Rng& rng, double fail_tol = 1e-6);

// ---------------------------------------------------------------------------
// divisor_zeros: all zeros of s -> tau(z0 + s w) inside a rectangle, via
// argument-principle counting on subdivided contours plus Newton refinement.

struct DivisorZero {
    cplx s;        // line parameter
    int multiplicity = 1;
    bool refined = true;
};

struct contour_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct refinement_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroSearchOptions {
    int boundary_segments = 64;
    int max_depth = 42;
    double newton_tol_rel = 1e-12;
    int perturb_retries = 3;
};

std::vector<DivisorZero> divisor_zeros(const TauModel& m, const VecC& z0, const VecC& w,
                                       const FlowPoint& f, cplx corner_lo, cplx corner_hi,
                                       const ZeroSearchOptions& opt = {});

// winding number of tau(z0 + s w) around a rectangle (oracle-style helper)
int winding_number(const TauModel& m, const VecC& z0, const VecC& w, const FlowPoint& f,
                   cplx corner_lo, cplx corner_hi, const ZeroSearchOptions& opt = {});

}  // namespace toda

#endif
