#include "toda/rsdyn.hpp"

#include <algorithm>
#include <cmath>

#include "toda/residuals.hpp"

namespace toda {

namespace {

void check_guard(const RsSystem& sys, const VecC& x) {
    const double guard = sys.guard_frac * sys.lattice.cell_size();
    const int N = int(x.size());
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            cplx d = x[i] - x[j];
            for (cplx probe : {d, d + sys.kappa, d - sys.kappa}) {
                if (sys.lattice.lattice_distance(probe) < guard)
                    throw collision_error("rs_rhs: collision guard violated for pair (" +
                                          std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
}

}  // namespace

VecC rs_rhs(const RsSystem& sys, const ParticleState& s) {
    const int N = int(s.x.size());
    check_guard(sys, s.x);
    auto V = [&](cplx x) { return sys.lattice.zeta(x) - sys.lattice.zeta(x + sys.kappa); };
    VecC acc = VecC::Zero(N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            cplx d = s.x[i] - s.x[j];
            acc[i] += s.v[i] * s.v[j] * (V(d) - V(-d));
        }
    return acc;
}

namespace {

// Dormand-Prince 5(4)
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 5179.0 / 57600, E3 = 7571.0 / 16695, E4 = 393.0 / 640,
                 E5 = -92097.0 / 339200, E6 = 187.0 / 2100, E7 = 1.0 / 40;

struct Oded {
    const RsSystem& sys;
    int N;
    VecC f(const VecC& y) const {
        ParticleState s{y.head(N), y.tail(N)};
        VecC out(2 * N);
        out.head(N) = s.v;
        out.tail(N) = rs_rhs(sys, s);
        return out;
    }
};

}  // namespace

Trajectory integrate(const RsSystem& sys, const ParticleState& s0,
                     std::pair<double, double> t_span, const std::vector<double>& nodes,
                     const IntegrateOptions& opt) {
    const int N = int(s0.x.size());
    Oded ode{sys, N};
    VecC y(2 * N);
    y.head(N) = s0.x;
    y.tail(N) = s0.v;

    Trajectory traj;
    double t = t_span.first;
    size_t next_node = 0;
    auto emit_if_node = [&](double tt, const VecC& yy) {
        while (next_node < nodes.size() && std::abs(nodes[next_node] - tt) < 1e-13) {
            traj.t.push_back(nodes[next_node]);
            traj.states.push_back({yy.head(N), yy.tail(N)});
            ++next_node;
        }
    };
    emit_if_node(t, y);

    double h = (opt.h_fixed > 0) ? opt.h_fixed : opt.h_init;
    VecC k1 = ode.f(y);
    long steps = 0;
    while (next_node < nodes.size() && t < t_span.second + 1e-13) {
        if (++steps > opt.max_steps) throw step_error("integrate: step budget exhausted");
        double target = nodes[next_node];
        double hs = std::min(h, target - t);
        if (hs <= 1e-15) throw step_error("integrate: step underflow");

        VecC k2 = ode.f(y + hs * (A21 * k1));
        VecC k3 = ode.f(y + hs * (A31 * k1 + A32 * k2));
        VecC k4 = ode.f(y + hs * (A41 * k1 + A42 * k2 + A43 * k3));
        VecC k5 = ode.f(y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        VecC k6 = ode.f(y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        VecC y5 = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        VecC k7 = ode.f(y5);
        VecC y4 = y + hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

        if (opt.h_fixed > 0) {
            t += hs;
            y = y5;
            k1 = k7;
            emit_if_node(t, y);
            continue;
        }

        double err = 0;
        for (int i = 0; i < 2 * N; ++i) {
            double sc = opt.tol + opt.tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
        }
        if (err <= 1.0) {
            t += hs;
            y = y5;
            k1 = k7;
            emit_if_node(t, y);
            double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h = hs * std::clamp(grow, 0.2, 5.0);
        } else {
            h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            if (h < 1e-14) throw step_error("integrate: step underflow under error control");
        }
    }
    return traj;
}

RsRootSource::RsRootSource(RsSystem sys, ParticleState s0, IntegrateOptions opt)
    : sys_(std::move(sys)), s0_(std::move(s0)), opt_(std::move(opt)) {
    cache_.emplace_back(0.0, s0_);
}

RootState RsRootSource::state(cplx t) const {
    if (std::abs(t.imag()) > 1e-12)
        throw std::invalid_argument("RsRootSource: flow parameter must be real");
    double tt = t.real();
    // nearest cached time at or before tt (integration is cheap to restart)
    const std::pair<double, ParticleState>* best = &cache_.front();
    for (const auto& c : cache_)
        if (c.first <= tt + 1e-15 && std::abs(tt - c.first) < std::abs(tt - best->first)) best = &c;

    ParticleState s = best->second;
    if (std::abs(tt - best->first) > 1e-15) {
        IntegrateOptions o = opt_;
        o.tol = std::min(opt_.tol, 1e-11);
        Trajectory tr = integrate(sys_, s, {best->first, tt}, {tt}, o);
        s = tr.states.back();
        cache_.emplace_back(tt, s);
        if (cache_.size() > 4096) cache_.erase(cache_.begin() + 1, cache_.begin() + 2048);
    }
    RootState rs;
    rs.x = s.x;
    rs.v = s.v;
    rs.a = rs_rhs(sys_, s);
    return rs;
}

CorrespondenceReport correspondence_check(const RsSystem& sys, const ParticleState& s0,
                                          const std::vector<double>& nodes, cplx U,
                                          const IntegrateOptions& opt) {
    auto source = std::make_shared<RsRootSource>(sys, s0, opt);
    EllipticPolynomialTau tau(sys.lattice, source);
    const int N = int(s0.x.size());

    CorrespondenceReport rep;
    for (double tn : nodes) {
        FlowPoint f;
        f.t = tn;
        RootState rs = source->state(tn);
        CorrespondenceRow row{tn, 0.0, 0.0};
        for (int j = 0; j < N; ++j) {
            row.rs_residual = std::max(
                row.rs_residual, rs_residual_at(tau, vec1(rs.x[j]), f, vec1(U)));

            // re-extract the zero near x_j and compare
            double r = 0.05 * sys.lattice.cell_size();
            auto zeros = divisor_zeros(tau, vec1(rs.x[j]), vec1(cplx(1.0, 0.0)), f,
                                       cplx(-r, -r), cplx(r, r));
            double track = std::numeric_limits<double>::infinity();
            for (auto& zr : zeros) track = std::min(track, std::abs(zr.s));
            row.tracking_error = std::max(row.tracking_error, track);
        }
        rep.rows.push_back(row);
        rep.max_rs_residual = std::max(rep.max_rs_residual, row.rs_residual);
        rep.max_tracking_error = std::max(rep.max_tracking_error, row.tracking_error);
    }
    return rep;
}

}  // namespace toda
