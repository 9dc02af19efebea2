#pragma once

// Functional regression on the leading empirical principal components.

#include <algorithm>
#include <numeric>
#include <vector>

#include "funpls/covest.hpp"

namespace funpls {

struct EigenSystem {
    /// Nonincreasing, nonnegative.
    Vector eigenvalues;
    /// L2-orthonormal under the grid quadrature.
    std::vector<Curve> eigenfunctions;

    [[nodiscard]] std::size_t size() const noexcept { return eigenfunctions.size(); }

    /// Number of eigenvalues that survived the clamp.
    [[nodiscard]] std::size_t usable_rank() const {
        return static_cast<std::size_t>((eigenvalues.array() > 0.0).count());
    }
};

/// Eigen-pairs of the integral operator of K. Solves the symmetric problem
/// W^1/2 K W^1/2 v = theta v and returns phi = W^-1/2 v, so that phi is
/// orthonormal under the quadrature inner product. Eigenvalues below
/// eigen_clamp * theta_1 are set to 0; signs make the largest |entry| positive.
inline EigenSystem eigendecompose(const Kernel& k, std::size_t r) {
    const Index m = k.grid->size();
    if (r < 1 || static_cast<Index>(r) > m) throw InputError("eigendecompose needs 1 <= r <= m");
    const double scale = k.values.cwiseAbs().maxCoeff();
    if ((k.values - k.values.transpose()).cwiseAbs().maxCoeff() > tol::kernel_symmetry * scale)
        throw InputError("eigendecompose: kernel is not symmetric");
    const Vector sw = k.grid->weights().cwiseSqrt();
    const Matrix a = sw.asDiagonal() * k.values * sw.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.transpose()));
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver failed");

    // Eigen returns ascending order.
    const double top = std::max(0.0, solver.eigenvalues()(m - 1));
    EigenSystem out{Vector(static_cast<Index>(r)), {}};
    out.eigenfunctions.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
        const Index src = m - 1 - static_cast<Index>(i);
        double theta = solver.eigenvalues()(src);
        if (theta < tol::eigen_clamp * top) theta = 0.0;
        out.eigenvalues(static_cast<Index>(i)) = theta;
        Vector phi = solver.eigenvectors().col(src).cwiseQuotient(sw);
        Index at = 0;
        phi.cwiseAbs().maxCoeff(&at);
        if (phi(at) < 0.0) phi = -phi;
        out.eigenfunctions.emplace_back(k.grid, std::move(phi));
    }
    return out;
}

struct PcaModel {
    std::size_t p;
    Curve mean_curve;
    double mean_y;
    EigenSystem eigensystem;
    Vector coefficients;
    Curve slope;
};

/// Least-squares fit on the scores of the first p eigenfunctions of `eig`,
/// which must come from the covariance of `c`.
inline PcaModel fit_pca(const Centered& c, const EigenSystem& eig, std::size_t p) {
    if (p < 1) throw InputError("component count p must be >= 1");
    if (p > eig.size() || p > eig.usable_rank())
        throw RankError(std::min(eig.usable_rank(), eig.size()) + 1,
                        "p = " + std::to_string(p) + " exceeds the usable rank " + std::to_string(eig.usable_rank()));
    EigenSystem head{eig.eigenvalues.head(static_cast<Index>(p)),
                     {eig.eigenfunctions.begin(), eig.eigenfunctions.begin() + static_cast<std::ptrdiff_t>(p)}};
    const Dataset& cd = c.centered;
    Matrix s(cd.n(), static_cast<Index>(p));
    for (std::size_t j = 0; j < p; ++j) s.col(static_cast<Index>(j)) = scores(cd.curves, head.eigenfunctions[j]);
    Vector coef = s.householderQr().solve(cd.responses);
    Curve slope = assemble_slope(cd.grid, head.eigenfunctions, coef);
    return PcaModel{p, c.mean_curve, c.mean_y, std::move(head), std::move(coef), std::move(slope)};
}

inline PcaModel fit_pca(Workspace& ws, std::size_t p) {
    return fit_pca(ws.centered(), eigendecompose(*ws.covariance(), static_cast<std::size_t>(ws.grid()->size())), p);
}

inline PcaModel fit_pca(const Dataset& data, std::size_t p) {
    Workspace ws(data);
    return fit_pca(ws, p);
}

inline double predict_pca(const PcaModel& model, const Curve& x) {
    return predict_linear(model.mean_y, model.mean_curve, model.slope, x);
}

}  // namespace funpls
