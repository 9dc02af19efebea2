#pragma once

// Numerical comparison helpers shared by tests, benchmarks and diagnostics.

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "funpls/funcore.hpp"
#include "funpls/mgs.hpp"

namespace funpls {

namespace detail {
inline double relative(double diff, double ref) {
    if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / ref;
}
}  // namespace detail

/// ||f - g|| / ||g|| in L2. Relative to the second argument, so not symmetric.
/// A zero reference gives 0 when f is also zero and +inf otherwise.
inline double rel_l2(const Curve& f, const Curve& g) {
    return detail::relative(l2_norm(f - g), l2_norm(g));
}

/// Kernel version using the quadrature Hilbert-Schmidt norm.
inline double rel_l2(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid, b.grid, "rel_l2");
    return detail::relative(kernel_norm(Kernel(a.grid, a.values - b.values)), kernel_norm(b));
}

/// max |G - I| over the Gram matrix of the family.
template <class V, class ScalarProduct>
double gram_defect(std::span<const V> family, const ScalarProduct& sp) {
    const Matrix g = gram_matrix(family, sp);
    return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

/// Largest off-diagonal |G_ij| only.
template <class V, class ScalarProduct>
double off_diagonal_defect(std::span<const V> family, const ScalarProduct& sp) {
    Matrix g = gram_matrix(family, sp);
    g.diagonal().setZero();
    return g.cwiseAbs().maxCoeff();
}

/// sigma_max / sigma_min of (A + A^T) / 2; +inf when singular.
inline double cond_estimate(const Matrix& a) {
    const Matrix sym = 0.5 * (a + a.transpose());
    const Vector sv = Eigen::JacobiSVD<Matrix>(sym).singularValues();
    const double lo = sv(sv.size() - 1);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return sv(0) / lo;
}

struct ComparisonReport {
    std::string quantity;
    double observed;
    double reference;
    double relative_error;
    double tolerance;
    bool pass;
};

inline ComparisonReport compare(std::string quantity, double observed, double reference, double tolerance) {
    const double rel = detail::relative(std::abs(observed - reference), std::abs(reference));
    return {std::move(quantity), observed, reference, rel, tolerance, rel <= tolerance};
}

}  // namespace funpls
