#ifndef TODA_UTIL_HPP
#define TODA_UTIL_HPP

#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace toda {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double PI = 3.141592653589793238462643383279502884;
inline constexpr cplx I{0.0, 1.0};

// Relative residual with an additive floor, so identities between
// near-zero quantities do not blow up.
inline double rel_residual(cplx lhs, cplx rhs, double floor = 1e-300) {
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + floor);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(eng_);
    }
    cplx box(double half_width) {
        return {uniform(-half_width, half_width), uniform(-half_width, half_width)};
    }
    VecC cvec(int n, double half_width) {
        VecC v(n);
        for (int i = 0; i < n; ++i) v[i] = box(half_width);
        return v;
    }
    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

inline VecC vec1(cplx a) {
    VecC v(1);
    v[0] = a;
    return v;
}

inline VecC vec2(cplx a, cplx b) {
    VecC v(2);
    v[0] = a;
    v[1] = b;
    return v;
}

// Least squares solve A x = b via SVD; returns x and the condition number
// sigma_max / sigma_min of A.
struct LsqResult {
    VecC x;
    double cond;
    double residual;  // ||Ax-b|| / (||b|| + tiny)
};

inline LsqResult lsq_solve(const MatC& A, const VecC& b) {
    Eigen::JacobiSVD<MatC> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    LsqResult r;
    r.x = svd.solve(b);
    double smin = sv[sv.size() - 1];
    r.cond = (smin > 0) ? sv[0] / smin : std::numeric_limits<double>::infinity();
    r.residual = (A * r.x - b).norm() / (b.norm() + 1e-300);
    return r;
}

// Smallest right singular vector of A (homogeneous least squares),
// plus the singular spectrum for conditioning diagnostics.
struct NullVecResult {
    VecC v;
    VecR spectrum;
};

inline NullVecResult lsq_nullvec(const MatC& A) {
    Eigen::JacobiSVD<MatC> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
    NullVecResult r;
    r.spectrum = svd.singularValues();
    r.v = svd.matrixV().col(A.cols() - 1);
    return r;
}

}  // namespace toda

#endif
