#pragma once

#include <random>

#include "funpls/simbench.hpp"

namespace funpls::testing {

inline GridPtr unit_grid(Index m) { return share(Grid::uniform(0.0, 1.0, m)); }

inline Vector random_vector(std::mt19937_64& rng, Index m) {
    std::normal_distribution<double> nd;
    Vector v(m);
    for (Index i = 0; i < m; ++i) v(i) = nd(rng);
    return v;
}

inline Curve random_curve(const GridPtr& g, std::mt19937_64& rng) { return Curve(g, random_vector(rng, g->size())); }

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> nd;
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) x(i, j) = nd(rng);
    return x;
}

/// Curves built from a handful of smooth components plus a little roughness,
/// responses linear in the curves plus noise.
inline Dataset random_dataset(const GridPtr& g, Index n, std::uint64_t seed, double noise = 0.1) {
    std::mt19937_64 rng(seed);
    const auto basis = sine_basis(g, 6);
    Matrix x = 0.05 * random_matrix(rng, n, g->size());
    const Matrix coef = random_matrix(rng, n, 6);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < 6; ++k) x.row(i) += coef(i, k) / (1.0 + static_cast<double>(k)) * basis[static_cast<std::size_t>(k)].values.transpose();
    const Curve b(g, (g->points().array() * 3.0).sin().matrix());
    Vector y = scores(x, b) + noise * random_vector(rng, n);
    y.array() += 2.0;
    return Dataset(g, std::move(x), std::move(y));
}

/// Rank 8, eigenvalues evenly spaced from 1 down to 0.1, slope coefficients +-1.
inline SpectralModel equivalence_model(Index m = 64) {
    const Vector theta = Vector::LinSpaced(8, 1.0, 0.1);
    Vector beta(8);
    for (Index k = 0; k < 8; ++k) beta(k) = (k % 2 == 0) ? 1.0 : -1.0;
    return make_sine_model(unit_grid(m), theta, beta, 0.0);
}

/// Rank-r model with distinct eigenvalues and nonzero slope coefficients.
inline SpectralModel small_model(std::size_t r, Index m = 64, double sigma = 0.0) {
    Vector theta(static_cast<Index>(r));
    Vector beta(static_cast<Index>(r));
    for (Index k = 0; k < theta.size(); ++k) {
        theta(k) = 1.0 / (1.0 + static_cast<double>(k));
        beta(k) = (k % 2 == 0 ? 1.0 : -0.7) / (1.0 + 0.3 * static_cast<double>(k));
    }
    return make_sine_model(unit_grid(m), theta, beta, sigma);
}

/// Dense least squares of y on the columns of s, in long double via normal equations.
inline Vector normal_equations(const Matrix& s, const Vector& y) {
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const LMatrix sl = s.cast<long double>();
    const LMatrix a = sl.transpose() * sl;
    const LVector rhs = sl.transpose() * y.cast<long double>();
    return a.fullPivLu().solve(rhs).cast<double>();
}

}  // namespace funpls::testing
