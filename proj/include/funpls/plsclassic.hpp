#pragma once

// Conventional iterative functional PLS by deflation.
//
// For j = 1..p on the centred data X^[1], Y^[1]:
//   psi_j   = sum_i X_i^[j] Y_i^[j] / || sum_i X_i^[j] Y_i^[j] ||      (L2 norm)
//   t_i     = integral X_i^[j] psi_j
//   beta_j  = sum_i Y_i^[j] t_i / sum_i t_i^2
//   delta_j = sum_i X_i^[j] t_i / sum_i t_i^2
//   X^[j+1] = X^[j] - delta_j t,   Y^[j+1] = Y^[j] - beta_j t
// then M^-1 = (integral delta_j psi_k) and slope = sum_{j,k} beta_k M_jk psi_j.

#include <string>
#include <vector>

#include "funpls/covest.hpp"

namespace funpls {

struct ClassicPlsModel {
    std::size_t p;
    Curve mean_curve;
    double mean_y;
    std::vector<Curve> weight_curves;
    Vector beta;
    std::vector<Curve> delta;
    /// (integral delta_j psi_k)_{j,k}; unit upper triangular in exact arithmetic.
    Matrix m_inverse;
    /// Coefficients of the slope in the weight curves: M * beta.
    Vector slope_coefficients;
    Curve slope;
};

/// Model plus the deflated data after the last step.
struct ClassicPlsTrace {
    ClassicPlsModel model;
    Matrix deflated_curves;
    Vector deflated_responses;
    /// Column j holds the scores integral X_i^[j] psi_j.
    Matrix step_scores;
};

inline ClassicPlsTrace fit_classic_traced(const Centered& c, std::size_t p) {
    if (p < 1) throw InputError("component count p must be >= 1");
    const GridPtr& grid = c.centered.grid;
    const Vector& w = grid->weights();
    Matrix x = c.centered.curves;
    Vector y = c.centered.responses;
    const double energy = (x.array().square().rowwise() * w.transpose().array()).sum();

    std::vector<Curve> psi;
    std::vector<Curve> delta;
    const auto np = static_cast<Index>(p);
    Vector beta(np);
    Matrix step_scores(x.rows(), np);
    for (Index j = 0; j < np; ++j) {
        const Curve cov(grid, x.transpose() * y);
        const double norm = l2_norm(cov);
        if (!(norm > 0.0))
            throw RankError(static_cast<std::size_t>(j + 1), "zero covariance between deflated X and Y");
        Curve weight = (1.0 / norm) * cov;
        const Vector t = scores(x, weight);
        const double tt = t.squaredNorm();
        if (!(tt > tol::pivot_relative * energy))
            throw RankError(static_cast<std::size_t>(j + 1), "degenerate score, sum t^2 = " + std::to_string(tt));
        beta(j) = y.dot(t) / tt;
        Curve d(grid, x.transpose() * t / tt);
        x.noalias() -= t * d.values.transpose();
        y -= beta(j) * t;
        step_scores.col(j) = t;
        psi.push_back(std::move(weight));
        delta.push_back(std::move(d));
    }

    Matrix m_inverse(np, np);
    for (Index j = 0; j < np; ++j)
        for (Index k = 0; k < np; ++k)
            m_inverse(j, k) = inner_product(delta[static_cast<std::size_t>(j)], psi[static_cast<std::size_t>(k)]);
    Vector coef = m_inverse.fullPivLu().solve(beta);
    Curve slope = assemble_slope(grid, psi, coef);
    ClassicPlsModel model{p,           c.mean_curve,    c.mean_y,        std::move(psi), std::move(beta),
                          std::move(delta), std::move(m_inverse), std::move(coef), std::move(slope)};
    return {std::move(model), std::move(x), std::move(y), std::move(step_scores)};
}

inline ClassicPlsModel fit_classic(const Centered& c, std::size_t p) { return fit_classic_traced(c, p).model; }

inline ClassicPlsModel fit_classic(const Dataset& data, std::size_t p) { return fit_classic(center(data), p); }

inline double predict_classic(const ClassicPlsModel& model, const Curve& x) {
    return predict_linear(model.mean_y, model.mean_curve, model.slope, x);
}

}  // namespace funpls
