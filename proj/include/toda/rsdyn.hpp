#ifndef TODA_RSDYN_HPP
#define TODA_RSDYN_HPP

// Ruijsenaars-Schneider pole dynamics:
//   xdd_i = sum_{s != i} xd_i xd_s (V(x_i - x_s) - V(x_s - x_i)),
//   V(x) = zeta(x) - zeta(x + kappa).
// V is not odd, so the pair term is kept verbatim.

#include "toda/taumodels.hpp"

namespace toda {

struct collision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct step_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParticleState {
    VecC x;
    VecC v;
};

struct RsSystem {
    EllipticLattice lattice;
    cplx kappa;                 // coupling shift; defaults to the tau shift U downstream
    double guard_frac = 1e-6;   // min pairwise separation, as a fraction of cell size
};

VecC rs_rhs(const RsSystem& sys, const ParticleState& s);

struct IntegrateOptions {
    double tol = 1e-10;
    double h_fixed = 0.0;  // > 0 selects fixed-step mode
    double h_init = 1e-3;
    long max_steps = 2000000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<ParticleState> states;
};

// Integrates from t_span.first, producing the state exactly at each node
// (nodes must be increasing and start at t_span.first).
Trajectory integrate(const RsSystem& sys, const ParticleState& s0,
                     std::pair<double, double> t_span, const std::vector<double>& nodes,
                     const IntegrateOptions& opt = {});

// Root source backed by on-demand RS integration from the initial state.
class RsRootSource : public RootSource {
  public:
    RsRootSource(RsSystem sys, ParticleState s0, IntegrateOptions opt = {});
    int count() const override { return int(s0_.x.size()); }
    RootState state(cplx t) const override;

  private:
    RsSystem sys_;
    ParticleState s0_;
    IntegrateOptions opt_;
    mutable std::vector<std::pair<double, ParticleState>> cache_;
};

struct CorrespondenceRow {
    double t;
    double rs_residual;
    double tracking_error;
};

struct CorrespondenceReport {
    std::vector<CorrespondenceRow> rows;
    double max_rs_residual = 0;
    double max_tracking_error = 0;
};

// Builds the elliptic tau from the trajectory, evaluates the on-divisor
// relation at every node and root, and closes the loop by re-extracting
// the divisor zeros and comparing them with the trajectory.
CorrespondenceReport correspondence_check(const RsSystem& sys, const ParticleState& s0,
                                          const std::vector<double>& nodes, cplx U,
                                          const IntegrateOptions& opt = {});

}  // namespace toda

#endif
