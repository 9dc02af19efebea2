#pragma once

// Population truth for a finite-rank spectral model
//
//   K(s,t) = sum_k theta_k phi_k(s) phi_k(t),   b = sum_k beta_k phi_k,
//
// with closed forms for the Krylov curves K^j(b) = sum_k theta_k^j beta_k phi_k,
// the Hankel matrix h_jk = sum_r beta_r^2 theta_r^(j+k+1), alpha_j = h_0j,
// gamma = H^-1 alpha, and the approximation error t_p. Everything here is
// exact up to round-off, which is what the equivalence and rate tests
// measure against.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "funpls/funcore.hpp"
#include "funpls/mgs.hpp"

namespace funpls {

struct SpectralModel {
    GridPtr grid;
    Vector eigenvalues;
    std::vector<Curve> eigenfunctions;
    Vector slope_coefficients;
    double noise_sd;
    Curve mean_curve;

    SpectralModel(GridPtr g, Vector theta, std::vector<Curve> phi, Vector beta, double sigma, Curve mean)
        : grid(std::move(g)),
          eigenvalues(std::move(theta)),
          eigenfunctions(std::move(phi)),
          slope_coefficients(std::move(beta)),
          noise_sd(sigma),
          mean_curve(std::move(mean)) {
        validate();
    }

    SpectralModel(GridPtr g, Vector theta, std::vector<Curve> phi, Vector beta, double sigma)
        : SpectralModel(g, std::move(theta), std::move(phi), std::move(beta), sigma, Curve::zero(g)) {}

    [[nodiscard]] std::size_t rank() const noexcept { return eigenfunctions.size(); }

    /// b = sum_k beta_k phi_k.
    [[nodiscard]] Curve slope() const { return assemble_slope(grid, eigenfunctions, slope_coefficients); }

    /// m x r matrix whose columns are the eigenfunctions.
    [[nodiscard]] Matrix basis_matrix() const {
        Matrix phi(grid->size(), static_cast<Index>(rank()));
        for (std::size_t k = 0; k < rank(); ++k) phi.col(static_cast<Index>(k)) = eigenfunctions[k].values;
        return phi;
    }

    /// E(Y) for the model Y = integral b X + eps (no intercept).
    [[nodiscard]] double mean_response() const { return inner_product(slope(), mean_curve); }

    /// Variance of integral b X: sum_k theta_k beta_k^2.
    [[nodiscard]] double signal_variance() const {
        return (eigenvalues.array() * slope_coefficients.array().square()).sum();
    }

    /// Hilbert-Schmidt norm of K: (sum_k theta_k^2)^1/2.
    [[nodiscard]] double kernel_hs_norm() const { return eigenvalues.norm(); }

private:
    void validate() const {
        const auto r = static_cast<Index>(eigenfunctions.size());
        if (r < 1) throw InputError("spectral model needs rank >= 1");
        if (eigenvalues.size() != r || slope_coefficients.size() != r)
            throw InputError("spectral model: eigenvalue / eigenfunction / slope counts differ");
        if (!(noise_sd >= 0.0)) throw InputError("spectral model: noise_sd must be >= 0");
        require_same_grid(grid, mean_curve.grid, "spectral model mean");
        for (Index k = 0; k < r; ++k) {
            if (!(eigenvalues(k) > 0.0)) throw InputError("spectral model: eigenvalues must be positive");
            if (k > 0 && eigenvalues(k) > eigenvalues(k - 1))
                throw InputError("spectral model: eigenvalues must be nonincreasing");
            require_same_grid(grid, eigenfunctions[static_cast<std::size_t>(k)].grid, "spectral model");
        }
        const Matrix g = gram_matrix<Curve>(eigenfunctions, L2Product{});
        if ((g - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() > tol::tight)
            throw InputError("spectral model: eigenfunctions are not orthonormal");
    }
};

/// First r functions sqrt(2/L) sin(k pi (t - a) / L), made exactly orthonormal
/// under the grid quadrature by modified Gram-Schmidt.
inline std::vector<Curve> sine_basis(const GridPtr& grid, std::size_t r) {
    if (static_cast<Index>(r) > grid->size() - 2)
        throw InputError("sine_basis: rank too large for the grid");
    const double a = grid->lower();
    const double len = grid->upper() - a;
    std::vector<Curve> raw;
    raw.reserve(r);
    for (std::size_t k = 1; k <= r; ++k) {
        Vector v = ((grid->points().array() - a) * (static_cast<double>(k) * M_PI / len)).sin() * std::sqrt(2.0 / len);
        raw.emplace_back(grid, std::move(v));
    }
    auto gs = modified_gram_schmidt<Curve>(raw, L2Product{});
    // A second pass leaves orthonormality at round-off level.
    return modified_gram_schmidt<Curve>(gs.orthonormal, L2Product{}).orthonormal;
}

inline SpectralModel make_sine_model(const GridPtr& grid, const Vector& eigenvalues, const Vector& slope,
                                     double noise_sd) {
    return SpectralModel(grid, eigenvalues, sine_basis(grid, static_cast<std::size_t>(eigenvalues.size())), slope,
                         noise_sd);
}

/// Same model with eigenvalues multiplied by `factor` (X rescaled by sqrt(factor)).
inline SpectralModel rescaled(const SpectralModel& m, double factor) {
    return SpectralModel(m.grid, factor * m.eigenvalues, m.eigenfunctions, m.slope_coefficients, m.noise_sd,
                         std::sqrt(factor) * m.mean_curve);
}

inline Kernel population_kernel(const SpectralModel& model) {
    const Matrix phi = model.basis_matrix();
    const Matrix k = phi * model.eigenvalues.asDiagonal() * phi.transpose();
    return Kernel(model.grid, 0.5 * (k + k.transpose()));
}

/// K^1(b), ..., K^p(b) from the closed form.
inline std::vector<Curve> population_krylov(const SpectralModel& model, std::size_t p) {
    if (p < 1) throw InputError("population_krylov needs p >= 1");
    std::vector<Curve> out;
    out.reserve(p);
    Vector coef = model.slope_coefficients;
    for (std::size_t j = 1; j <= p; ++j) {
        coef = coef.cwiseProduct(model.eigenvalues);
        out.push_back(assemble_slope(model.grid, model.eigenfunctions, coef));
    }
    return out;
}

/// t_p(w) = E{integral (X - EX) b - sum_j w_j integral (X - EX) K^j(b)}^2
///        = sum_k theta_k beta_k^2 (1 - sum_j w_j theta_k^j)^2.
inline double population_tp(const SpectralModel& model, const Vector& w) {
    double total = 0.0;
    for (Index k = 0; k < model.eigenvalues.size(); ++k) {
        const double theta = model.eigenvalues(k);
        double poly = 0.0;
        double power = 1.0;
        for (Index j = 0; j < w.size(); ++j) {
            power *= theta;
            poly += w(j) * power;
        }
        const double resid = 1.0 - poly;
        total += theta * model.slope_coefficients(k) * model.slope_coefficients(k) * resid * resid;
    }
    return total;
}

struct OracleReport {
    Matrix h_matrix;
    Vector alpha;
    Vector gamma;
    double lambda_p;
    double tp_value;
    std::vector<Curve> psi_basis;
    Curve bp;
    Curve slope;
};

namespace detail {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// h_jk for 0 <= j,k <= p in extended precision.
inline LongMatrix hankel_moments(const SpectralModel& model, std::size_t p) {
    const auto n = static_cast<Index>(p + 1);
    LongMatrix h = LongMatrix::Zero(n, n);
    std::vector<long double> moments(2 * p + 2, 0.0L);
    for (Index r = 0; r < model.eigenvalues.size(); ++r) {
        const long double theta = model.eigenvalues(r);
        const long double beta2 = static_cast<long double>(model.slope_coefficients(r)) * model.slope_coefficients(r);
        long double power = theta;  // theta^(s+1) with s starting at 0
        for (std::size_t s = 0; s < moments.size(); ++s) {
            moments[s] += beta2 * power;
            power *= theta;
        }
    }
    for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k) h(j, k) = moments[static_cast<std::size_t>(j + k)];
    return h;
}

}  // namespace detail

/// gamma = H^-1 alpha, solved in extended precision. Requires p <= rank.
inline Vector population_gamma(const SpectralModel& model, std::size_t p) {
    if (p < 1) throw InputError("population_gamma needs p >= 1");
    if (p > model.rank())
        throw SingularityError("H is singular for p = " + std::to_string(p) + " > rank " +
                               std::to_string(model.rank()));
    const detail::LongMatrix full = detail::hankel_moments(model, p);
    const auto n = static_cast<Index>(p);
    const detail::LongMatrix h = full.block(1, 1, n, n);
    const detail::LongVector alpha = full.block(0, 1, 1, n).transpose();
    const detail::LongVector g = h.fullPivLu().solve(alpha);
    return g.cast<double>();
}

/// f_p(w) = cov{Y - g_{p-1}(X), integral X w} = <b - b_{p-1}, w>_K, where
/// b_{p-1} is the K-projection of b on span(prior).
inline double pls_objective(const SpectralModel& model, const Kernel& k, std::span<const Curve> prior,
                            const Curve& w) {
    const Curve b = model.slope();
    Curve b_prev = Curve::zero(model.grid);
    if (!prior.empty()) {
        const auto q = static_cast<Index>(prior.size());
        Matrix g(q, q);
        Vector rhs(q);
        for (Index i = 0; i < q; ++i) {
            rhs(i) = k_bilinear(prior[static_cast<std::size_t>(i)], b, k);
            for (Index j = 0; j < q; ++j)
                g(i, j) = k_bilinear(prior[static_cast<std::size_t>(i)], prior[static_cast<std::size_t>(j)], k);
        }
        const Vector c = g.ldlt().solve(rhs);
        for (Index i = 0; i < q; ++i) b_prev = b_prev + c(i) * prior[static_cast<std::size_t>(i)];
    }
    return k_bilinear(b - b_prev, w, k);
}

/// The explicit orthonormal PLS basis:
///   psi_q = c0 [ K{ b - sum_{j<q} (integral b psi_j) psi_j } + sum_{k<q} c_k psi_k ]
/// with c_k fixed by the K-orthogonality constraints (solved densely, one
/// refinement pass) and c0 by ||psi_q||_K = 1, sign chosen so f_q(psi_q) >= 0.
inline std::vector<Curve> explicit_pls_basis(const SpectralModel& model, std::size_t p) {
    if (p < 1) throw InputError("explicit_pls_basis needs p >= 1");
    if (p > model.rank())
        throw SingularityError("explicit_pls_basis: p = " + std::to_string(p) + " exceeds rank " +
                               std::to_string(model.rank()));
    const Kernel k = population_kernel(model);
    const Curve b = model.slope();
    std::vector<Curve> psi;
    psi.reserve(p);
    for (std::size_t q = 1; q <= p; ++q) {
        Curve resid = b;
        for (const Curve& prev : psi) resid = resid - inner_product(b, prev) * prev;
        const Curve v = apply_kernel(k, resid);
        Curve cand = v;
        const auto nq = static_cast<Index>(psi.size());
        if (nq > 0) {
            Matrix g(nq, nq);
            for (Index i = 0; i < nq; ++i)
                for (Index j = 0; j < nq; ++j)
                    g(i, j) = k_bilinear(psi[static_cast<std::size_t>(i)], psi[static_cast<std::size_t>(j)], k);
            const auto solver = g.fullPivLu();
            for (int pass = 0; pass < 2; ++pass) {
                Vector rhs(nq);
                for (Index i = 0; i < nq; ++i) rhs(i) = -k_bilinear(psi[static_cast<std::size_t>(i)], cand, k);
                const Vector c = solver.solve(rhs);
                for (Index i = 0; i < nq; ++i) cand = cand + c(i) * psi[static_cast<std::size_t>(i)];
            }
        }
        const double norm = k_norm(cand, k);
        if (!(norm > tol::pivot_relative * k_norm(v, k)))
            throw RankError(q, "candidate direction has vanishing K-norm");
        Curve next = (1.0 / norm) * cand;
        if (pls_objective(model, k, psi, next) < 0.0) next = -1.0 * next;
        psi.push_back(std::move(next));
    }
    return psi;
}

/// Full oracle ledger at order p.
inline OracleReport population_h_gamma(const SpectralModel& model, std::size_t p) {
    Vector gamma = population_gamma(model, p);
    const detail::LongMatrix full = detail::hankel_moments(model, p);
    const auto n = static_cast<Index>(p);
    Matrix h = full.block(1, 1, n, n).cast<double>();
    Vector alpha = full.block(0, 1, 1, n).transpose().cast<double>();
    const double lambda = Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
    const double tp = population_tp(model, gamma);
    const std::vector<Curve> krylov = population_krylov(model, p);
    Curve bp = assemble_slope(model.grid, krylov, gamma);
    return OracleReport{std::move(h), std::move(alpha), gamma, lambda, tp, explicit_pls_basis(model, p),
                        std::move(bp), model.slope()};
}

/// g_p(x) = E(Y) + sum_j gamma_j integral (x - EX) K^j(b).
inline double population_predictor(const SpectralModel& model, std::size_t p, const Curve& x) {
    const Vector gamma = population_gamma(model, p);
    const Curve bp = assemble_slope(model.grid, population_krylov(model, p), gamma);
    return predict_linear(model.mean_response(), model.mean_curve, bp, x);
}

/// Coordinates of b_p in the eigenbasis: beta_k * sum_j gamma_j theta_k^j.
inline Vector bp_pca_coordinates(const SpectralModel& model, const Vector& gamma) {
    Vector out(model.eigenvalues.size());
    for (Index k = 0; k < out.size(); ++k) {
        double s = 0.0;
        double power = 1.0;
        for (Index j = 0; j < gamma.size(); ++j) {
            power *= model.eigenvalues(k);
            s += gamma(j) * power;
        }
        out(k) = model.slope_coefficients(k) * s;
    }
    return out;
}

}  // namespace funpls
