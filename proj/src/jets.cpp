#include "toda/jets.hpp"

#include <cmath>

namespace toda {

Jet Jet::with_lead(int new_lead) const {
    if (new_lead < lead_) throw std::invalid_argument("Jet::with_lead: cannot drop leading terms");
    int pad = new_lead - lead_;
    std::vector<cplx> c(size_t(depth() + pad) + 1, cplx{0, 0});
    for (size_t s = 0; s < c_.size(); ++s) c[s + size_t(pad)] = c_[s];
    return Jet(new_lead, std::move(c));
}

Jet operator+(const Jet& a, const Jet& b) {
    int lead = std::max(a.lead(), b.lead());
    int tail = std::max(a.tail_power(), b.tail_power());
    std::vector<cplx> c(size_t(lead - tail) + 1, cplx{0, 0});
    for (int p = lead; p >= tail; --p) {
        cplx va = (p <= a.lead()) ? a.c_[size_t(a.lead() - p)] : cplx{0, 0};
        cplx vb = (p <= b.lead()) ? b.c_[size_t(b.lead() - p)] : cplx{0, 0};
        c[size_t(lead - p)] = va + vb;
    }
    return Jet(lead, std::move(c));
}

Jet operator-(const Jet& a) {
    std::vector<cplx> c(a.c_);
    for (auto& x : c) x = -x;
    return Jet(a.lead(), std::move(c));
}

Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

Jet operator*(cplx s, const Jet& a) {
    std::vector<cplx> c(a.c_);
    for (auto& x : c) x *= s;
    return Jet(a.lead(), std::move(c));
}

Jet operator*(const Jet& a, const Jet& b) {
    int S = std::min(a.depth(), b.depth());
    std::vector<cplx> c(size_t(S) + 1, cplx{0, 0});
    for (int s = 0; s <= S; ++s)
        for (int i = 0; i <= s; ++i) c[size_t(s)] += a.c_[size_t(i)] * b.c_[size_t(s - i)];
    return Jet(a.lead() + b.lead(), std::move(c));
}

Jet Jet::inverse() const {
    if (c_[0] == cplx{0, 0}) throw singular_jet_error("Jet::inverse: zero leading coefficient");
    int S = depth();
    std::vector<cplx> b(size_t(S) + 1, cplx{0, 0});
    b[0] = 1.0 / c_[0];
    for (int s = 1; s <= S; ++s) {
        cplx acc{0, 0};
        for (int i = 1; i <= s; ++i) acc += c_[size_t(i)] * b[size_t(s - i)];
        b[size_t(s)] = -acc / c_[0];
    }
    return Jet(-lead_, std::move(b));
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }

Jet jet_exp(const Jet& a) {
    if (a.lead() > 0 && a.max_abs() > 0) {
        // only admissible when all positive powers carry zero coefficients
        for (int p = a.lead(); p > 0; --p)
            if (a.coeff(p) != cplx{0, 0})
                throw std::domain_error("jet_exp: positive powers of k present");
    }
    int tail = a.tail_power();
    if (tail > 0) return Jet::constant(std::exp(a.coeff(0)), 0);
    int S = -tail;
    // strictly negative part, re-based at lead 0
    std::vector<cplx> wc(size_t(S) + 1, cplx{0, 0});
    for (int s = 1; s <= S; ++s) wc[size_t(s)] = a.coeff(-s);
    Jet w(0, std::move(wc));
    Jet result = Jet::constant(1.0, S);
    Jet term = Jet::constant(1.0, S);
    for (int j = 1; j <= S; ++j) {
        term = (1.0 / double(j)) * (term * w);
        result = result + term;
    }
    return std::exp(a.coeff(0)) * result;
}

Jet jet_log(const Jet& a) {
    if (a.lead() != 0)
        throw std::domain_error("jet_log: leading power must be zero");
    if (a.c0() == cplx{0, 0}) throw singular_jet_error("jet_log: zero leading coefficient");
    int S = a.depth();
    Jet r = (1.0 / a.c0()) * a - Jet::constant(1.0, S);
    Jet result = Jet::constant(std::log(a.c0()), S);
    Jet term = Jet::constant(1.0, S);
    for (int j = 1; j <= S; ++j) {
        term = term * r;
        result = result + (((j % 2 == 1) ? 1.0 : -1.0) / double(j)) * term;
    }
    return result;
}

Jet jet_scale_shift(const Jet& a, cplx alpha, int m) {
    std::vector<cplx> c(a.coeffs());
    for (auto& x : c) x *= alpha;
    return Jet(a.lead() + m, std::move(c));
}

double jet_distance(const Jet& a, const Jet& b) {
    Jet d = a - b;
    return d.max_abs();
}

}  // namespace toda
