#ifndef TODA_JETS_HPP
#define TODA_JETS_HPP

// Truncated formal series in k^{-1}: c[0] k^lead + c[1] k^{lead-1} + ...
// Arithmetic keeps the minimum common depth; it never silently extends it.

#include "toda/util.hpp"

namespace toda {

struct singular_jet_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Jet {
  public:
    Jet() : lead_(0), c_(1, cplx{0, 0}) {}
    Jet(int lead, std::vector<cplx> coeffs) : lead_(lead), c_(std::move(coeffs)) {
        if (c_.empty()) c_.assign(1, cplx{0, 0});
    }

    static Jet constant(cplx v, int depth) {
        std::vector<cplx> c(size_t(depth) + 1, cplx{0, 0});
        c[0] = v;
        return Jet(0, std::move(c));
    }
    static Jet k_power(int p, int depth) {
        std::vector<cplx> c(size_t(depth) + 1, cplx{0, 0});
        c[0] = cplx{1, 0};
        return Jet(p, std::move(c));
    }

    int lead() const { return lead_; }
    int depth() const { return int(c_.size()) - 1; }
    int tail_power() const { return lead_ - depth(); }
    const std::vector<cplx>& coeffs() const { return c_; }
    cplx c0() const { return c_[0]; }

    // Coefficient of k^p (0 if above the lead; throws below the valid range).
    cplx coeff(int p) const {
        if (p > lead_) return {0, 0};
        int s = lead_ - p;
        if (s > depth()) throw std::out_of_range("Jet::coeff below truncation depth");
        return c_[size_t(s)];
    }

    bool wave_normalized(double tol = 0.0) const { return std::abs(c_[0]) > tol; }

    Jet truncated(int new_depth) const {
        std::vector<cplx> c(c_.begin(), c_.begin() + std::min<size_t>(c_.size(), size_t(new_depth) + 1));
        c.resize(size_t(new_depth) + 1, cplx{0, 0});
        return Jet(lead_, std::move(c));
    }

    // Re-express with leading power new_lead >= lead, padding zeros above.
    // The tail power is preserved.
    Jet with_lead(int new_lead) const;

    double max_abs() const {
        double m = 0;
        for (auto& x : c_) m = std::max(m, std::abs(x));
        return m;
    }

    friend Jet operator+(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator*(cplx s, const Jet& a);
    friend Jet operator-(const Jet& a);

    Jet inverse() const;

  private:
    int lead_;
    std::vector<cplx> c_;
};

Jet jet_exp(const Jet& a);
Jet jet_log(const Jet& a);
// alpha * k^m * a
Jet jet_scale_shift(const Jet& a, cplx alpha, int m);

double jet_distance(const Jet& a, const Jet& b);

}  // namespace toda

#endif
