#pragma once

// Modified Gram-Schmidt with a pluggable scalar product.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "funpls/funcore.hpp"

namespace funpls {

/// Euclidean dot product on length-n vectors.
struct EuclideanProduct {
    double operator()(const Vector& a, const Vector& b) const { return a.dot(b); }
};

/// The bilinear form (f, g) -> double integral f(s) g(t) K(s,t) on curves.
/// May be only semidefinite; degeneracy shows up as a RankError.
class KernelProduct {
public:
    explicit KernelProduct(const Kernel& k) : kernel_(&k) {}
    double operator()(const Curve& f, const Curve& g) const { return k_bilinear(f, g, *kernel_); }

private:
    const Kernel* kernel_;
};

/// Plain L2 product on curves.
struct L2Product {
    double operator()(const Curve& f, const Curve& g) const { return inner_product(f, g); }
};

template <class V>
struct GramSchmidtResult {
    std::vector<V> orthonormal;
    /// Upper triangular: v_j = sum_{i<=j} r(i, j) u_i.
    Matrix r;
};

/// Orthonormalize v_1..v_p in order. Each residual whose norm falls below
/// pivot_relative * ||v_j|| raises a RankError naming j (1-based).
template <class V, class ScalarProduct>
GramSchmidtResult<V> modified_gram_schmidt(std::span<const V> family, const ScalarProduct& sp) {
    const auto p = static_cast<Index>(family.size());
    if (p < 1) throw InputError("modified_gram_schmidt needs at least one vector");
    GramSchmidtResult<V> out{{}, Matrix::Zero(p, p)};
    out.orthonormal.reserve(family.size());
    for (Index j = 0; j < p; ++j) {
        const V& v = family[static_cast<std::size_t>(j)];
        const double v_norm = std::sqrt(std::max(0.0, sp(v, v)));
        V u = v;
        for (Index i = 0; i < j; ++i) {
            const V& ui = out.orthonormal[static_cast<std::size_t>(i)];
            const double c = sp(u, ui);
            out.r(i, j) = c;
            u = u - c * ui;
        }
        const double u_norm = std::sqrt(std::max(0.0, sp(u, u)));
        if (!(u_norm > tol::pivot_relative * v_norm))
            throw RankError(static_cast<std::size_t>(j + 1),
                            "residual norm " + std::to_string(u_norm) + " vs input norm " +
                                std::to_string(v_norm));
        out.r(j, j) = u_norm;
        out.orthonormal.push_back((1.0 / u_norm) * u);
    }
    return out;
}

template <class V, class ScalarProduct>
Matrix gram_matrix(std::span<const V> family, const ScalarProduct& sp) {
    const auto p = static_cast<Index>(family.size());
    Matrix g(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = i; j < p; ++j) {
            g(i, j) = sp(family[static_cast<std::size_t>(i)], family[static_cast<std::size_t>(j)]);
            g(j, i) = g(i, j);
        }
    return g;
}

}  // namespace funpls
