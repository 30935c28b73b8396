#ifndef TODA_RESIDUALS_HPP
#define TODA_RESIDUALS_HPP

// Residual evaluation for the bilinear identities, on-divisor relations and
// the Kummer collinearity (trisecant) rank test, plus constant fitting.
//
// Every residual is |LHS - RHS| / (|LHS| + |RHS| + floor) with floor 1e-300.

#include <array>
#include <map>

#include "toda/taumodels.hpp"

namespace toda {

struct degenerate_fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SampleRow {
    std::vector<cplx> where;  // sample coordinates (z components, or indices)
    double residual = 0;
    bool skipped = false;
};

struct ResidualReport {
    std::string id;
    std::vector<SampleRow> rows;
    int skipped = 0;
    double max_rel = 0;
    double median = 0;
    std::map<std::string, double> extra;  // variant-specific diagnostics

    void add(std::vector<cplx> where, double r);
    void add_skipped(std::vector<cplx> where);
    void finalize();
    bool pass(double tol) const { return skipped < int(rows.size()) && max_rel < tol; }
};

// ---------------------------------------------------------------------------

struct SecancyData {
    // tau pair for fay1/fay2 variants (tauA plays theta(A + .)).
    std::shared_ptr<const TauModel> tau, tauA;
    // pure theta data for the fay/fay0 variants
    std::shared_ptr<const RiemannMatrix> B;
    VecC U, A, V, W;
    cplx E{0, 0};
    cplx p{0, 0};   // continuous case
    cplx pW{0, 0};  // discrete case: the scalar p . W
    bool has_constants = false;
};

struct FitResult {
    cplx E{0, 0};
    cplx p{0, 0};
    cplx pW{0, 0};
    double cond = 0;
    double fit_residual = 0;
};

enum class SecancyVariant { Fay, Fay1, LaxddPd };
enum class DiscreteVariant { Fay0, Fay2 };

FitResult fit_constants_fay(const SecancyData& d, const std::vector<VecC>& fit_points,
                            const FlowPoint& f = {});
FitResult fit_constants_fay1(const SecancyData& d, const std::vector<VecC>& fit_points,
                             const FlowPoint& f = {});
// Homogeneous three-term fit for the discrete identities; variant selects
// theta data (Fay0) or the tau pair (Fay2, at the given nu values).
FitResult fit_constants_discrete(const SecancyData& d, const std::vector<VecC>& fit_points,
                                 DiscreteVariant variant, const std::vector<long>& nus = {0});

// Continuous secancy identities. For the Fay variant on pure theta data the
// report's extra["variant_agreement"] holds the max pointwise difference
// between the fay and fay1 residual columns.
ResidualReport residual_secancy(const SecancyData& d, const std::vector<VecC>& samples,
                                SecancyVariant variant, const FlowPoint& f = {});

// 2D Toda lattice residual on a (xi, eta) grid and an n-range. The tau
// family is evaluated through FlowPoint.n; the bilinear ratio is
// phi_n = ln( tau(n) / tau(n+1) ).
struct TodaGrid {
    std::vector<cplx> xi, eta;
    long n_lo = 0, n_hi = 2;
};
ResidualReport residual_toda2d(const TauModel& m, const VecC& z, const TodaGrid& grid);

// Discrete identities.
struct DiscreteGrid {
    long n0 = 0, n1 = 4, l0 = 0, l1 = 4, m0 = 0, m1 = 4;
};
// Bilinear discrete Hirota equation over an (n,l,m) block.
ResidualReport residual_bdhe(const TauModel& m, const DiscreteGrid& g);
ResidualReport residual_fay0(const SecancyData& d, const std::vector<VecC>& samples);
ResidualReport residual_fay2(const SecancyData& d, const std::vector<VecC>& samples,
                             const std::vector<long>& nus);
// (laxddd) on an (n,m) block plus the light-cone transcription check against
// (laxm1); extra["transcription"] holds the max pointwise disagreement.
ResidualReport residual_laxddd(const SecancyData& d, const VecC& z0, const DiscreteGrid& g);

// ---------------------------------------------------------------------------
// On-divisor relations.

// Relative residual of the relation
//   tau_tt(z) tau(z+U) tau(z-U) = tau_t(z) d/dt[ tau(z+U) tau(z-U) ]
double rs_residual_at(const TauModel& m, const VecC& z, const FlowPoint& f, const VecC& U);

ResidualReport on_divisor_rs(const TauModel& m, const std::vector<VecC>& divisor_points,
                             const FlowPoint& f, const VecC& U);
// (te1)/(te2) for fay1-consistent data, at divisor points of tau.
ResidualReport on_divisor_te12(const SecancyData& d, const std::vector<VecC>& divisor_points,
                               const FlowPoint& f);
// (f5d) triple ratio = -1 at divisor points of tau(., nu).
ResidualReport on_divisor_f5d(const TauModel& tau, const std::vector<VecC>& divisor_points,
                              long nu, const VecC& W);
// (tauA1) vs (tauA2) vs the direct tau_A at divisor points of tau(., nu).
ResidualReport on_divisor_tauA(const SecancyData& d, const std::vector<VecC>& divisor_points,
                               long nu);
// (may2) = -(may3) given tau_s(z, nu) = xi_s * tau as a callback.
using TauSFn = std::function<cplx(const VecC&, long nu)>;
ResidualReport on_divisor_may(const TauModel& tau, const TauSFn& tau_s,
                              const std::vector<VecC>& divisor_points, long nu, const VecC& W);

// Divisor points of tau(., f) along the line z0 + s w inside the rectangle.
std::vector<VecC> divisor_points_on_line(const TauModel& m, const VecC& z0, const VecC& w,
                                         const FlowPoint& f, cplx lo, cplx hi);

// Rejection-samples z in a centered box until every listed factor exceeds
// frac of its local scale (the identities are between holomorphic
// quantities; conditioning near their zeros is artificial).
std::vector<VecC> sample_z_avoiding(const std::function<std::vector<cplx>(const VecC&)>& factors,
                                    int count, int dim, double half_width, Rng& rng,
                                    double frac = 1e-6);

// ---------------------------------------------------------------------------
// Trisecant rank test.

enum class TrisecantCase { AllCoincide, TwoCoincide, Distinct };

struct TrisecantResult {
    std::vector<cplx> minors;
    double max_abs_minor = 0;
};

struct vacuous_case_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Case (ii) replaces the third row by the V-directional derivative row at
// points[1]; rows are sup-normalized before minors are taken.
TrisecantResult trisecant_rank(const RiemannMatrix& B, const std::array<VecC, 3>& points,
                               TrisecantCase c, const VecC* V = nullptr);

}  // namespace toda

#endif
