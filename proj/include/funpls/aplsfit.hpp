#pragma once

// Empirical APLS: regression of the centred responses on the scores of the
// Krylov sequence Khat(b), ..., Khat^p(b).
//
// Three routes to the same predictor:
//   raw            solves Hhat gamma = alphahat directly;
//   qr_stabilized  orthogonalizes the n x p score matrix by modified
//                  Gram-Schmidt and back-substitutes R gamma = U^T Yc;
//   ortho_basis    Khat-orthonormalizes the Krylov curves into psi_1..psi_p
//                  and regresses on their scores.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "funpls/covest.hpp"
#include "funpls/metrics.hpp"
#include "funpls/mgs.hpp"

namespace funpls {

enum class AplsVariant { raw, qr_stabilized, ortho_basis };

inline const char* to_string(AplsVariant v) {
    switch (v) {
        case AplsVariant::raw: return "raw";
        case AplsVariant::qr_stabilized: return "qr_stabilized";
        case AplsVariant::ortho_basis: return "ortho_basis";
    }
    return "?";
}

struct AplsModel {
    AplsVariant variant;
    std::size_t p;
    Curve mean_curve;
    double mean_y;
    /// Krylov terms for raw / qr_stabilized, psi_j for ortho_basis.
    std::vector<Curve> basis;
    Vector coefficients;
    Curve slope;
    /// Covariance the basis was built from; kept so the Khat-orthonormality
    /// of an ortho_basis model can be checked after the fact.
    std::shared_ptr<const Kernel> covariance;

    /// Intercept a = Ybar - integral(slope * Xbar).
    [[nodiscard]] double intercept() const { return mean_y - inner_product(slope, mean_curve); }
};

struct AplsDiagnostics {
    Matrix h_matrix;
    Vector alpha;
    double smallest_eigenvalue;
    double condition_estimate;
};

class IllConditionedError : public NumericalError {
public:
    explicit IllConditionedError(AplsDiagnostics d)
        : NumericalError("Hhat condition estimate " + std::to_string(d.condition_estimate) +
                         " exceeds " + std::to_string(tol::raw_condition_limit)),
          diagnostics_(std::move(d)) {}

    [[nodiscard]] const AplsDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    AplsDiagnostics diagnostics_;
};

/// hhat_jk = integral Khat^{j+1}(b) Khat^k(b), alphahat_j = integral Khat(b) Khat^j(b).
inline AplsDiagnostics build_h_hat(const KrylovSequence& seq, std::size_t p) {
    if (p < 1) throw InputError("build_h_hat needs p >= 1");
    if (seq.size() < p + 1)
        throw InputError("build_h_hat needs " + std::to_string(p + 1) + " Krylov terms, have " +
                         std::to_string(seq.size()));
    const auto n = static_cast<Index>(p);
    Matrix h(n, n);
    Vector alpha(n);
    for (Index j = 0; j < n; ++j) {
        alpha(j) = inner_product(seq.terms[0], seq.terms[static_cast<std::size_t>(j)]);
        for (Index k = 0; k < n; ++k)
            h(j, k) = inner_product(seq.terms[static_cast<std::size_t>(j + 1)], seq.terms[static_cast<std::size_t>(k)]);
    }
    const Matrix sym = 0.5 * (h + h.transpose());
    const double lambda = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
    const double cond = cond_estimate(h);
    return {std::move(h), std::move(alpha), lambda, cond};
}

/// Symmetric Hankel alternative htilde_jk = integral Khat^{j+k}(b) Khat(b).
/// Needs 2p Krylov terms.
inline Matrix build_h_tilde(const KrylovSequence& seq, std::size_t p) {
    if (p < 1) throw InputError("build_h_tilde needs p >= 1");
    if (seq.size() < 2 * p)
        throw InputError("build_h_tilde needs " + std::to_string(2 * p) + " Krylov terms, have " +
                         std::to_string(seq.size()));
    // moments[s] = integral Khat^s(b) Khat(b), s = 2..2p
    std::vector<double> moments(2 * p + 1, 0.0);
    for (std::size_t s = 2; s <= 2 * p; ++s) moments[s] = inner_product(seq.term(s), seq.term(1));
    const auto n = static_cast<Index>(p);
    Matrix h(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k) h(j, k) = moments[static_cast<std::size_t>(j + k + 2)];
    return h;
}

namespace detail {

inline std::vector<Curve> first_terms(const KrylovSequence& seq, std::size_t p) {
    return {seq.terms.begin(), seq.terms.begin() + static_cast<std::ptrdiff_t>(p)};
}

inline void require_p(std::size_t p) {
    if (p < 1) throw InputError("component count p must be >= 1");
}

/// Flip so that the entry of largest magnitude is positive.
inline Curve fix_sign(Curve c) {
    Index at = 0;
    c.values.cwiseAbs().maxCoeff(&at);
    if (c.values(at) < 0.0) c.values = -c.values;
    return c;
}

/// Upper triangular solve r x = rhs, no pivoting.
inline Vector back_substitute(const Matrix& r, const Vector& rhs) {
    const Index p = r.rows();
    Vector x(p);
    for (Index i = p - 1; i >= 0; --i) {
        double s = rhs(i);
        for (Index k = i + 1; k < p; ++k) s -= r(i, k) * x(k);
        x(i) = s / r(i, i);
    }
    return x;
}

inline AplsModel make_model(AplsVariant variant, std::size_t p, Workspace& ws, std::vector<Curve> basis,
                            Vector coefficients, std::shared_ptr<const Kernel> covariance) {
    Curve slope = assemble_slope(ws.grid(), basis, coefficients);
    const Centered& c = ws.centered();
    return AplsModel{variant,         p, c.mean_curve, c.mean_y, std::move(basis), std::move(coefficients),
                     std::move(slope), std::move(covariance)};
}

}  // namespace detail

inline std::pair<AplsModel, AplsDiagnostics> fit_apls_raw(Workspace& ws, std::size_t p) {
    detail::require_p(p);
    const KrylovSequence& seq = ws.krylov(p + 1);
    AplsDiagnostics diag = build_h_hat(seq, p);
    Vector gamma = Vector::Zero(static_cast<Index>(p));
    // Constant responses give Khat(b) = 0: the minimizer is gamma = 0.
    if (!seq.terms[0].values.isZero(0.0)) {
        if (!(diag.condition_estimate <= tol::raw_condition_limit)) throw IllConditionedError(std::move(diag));
        gamma = diag.h_matrix.fullPivLu().solve(diag.alpha);
    }
    AplsModel model = detail::make_model(AplsVariant::raw, p, ws, detail::first_terms(seq, p), std::move(gamma),
                                         ws.covariance());
    return {std::move(model), std::move(diag)};
}

inline std::pair<AplsModel, AplsDiagnostics> fit_apls_raw(const Dataset& data, std::size_t p) {
    Workspace ws(data);
    return fit_apls_raw(ws, p);
}

inline AplsModel fit_apls_qr(Workspace& ws, std::size_t p) {
    detail::require_p(p);
    const KrylovSequence& seq = ws.krylov(p);
    const Dataset& cd = ws.centered().centered;
    std::vector<Vector> columns;
    columns.reserve(p);
    for (std::size_t j = 0; j < p; ++j) columns.push_back(scores(cd.curves, seq.terms[j]));
    const auto qr = modified_gram_schmidt<Vector>(columns, EuclideanProduct{});
    Vector rhs(static_cast<Index>(p));
    for (std::size_t j = 0; j < p; ++j) rhs(static_cast<Index>(j)) = qr.orthonormal[j].dot(cd.responses);
    Vector gamma = detail::back_substitute(qr.r, rhs);
    return detail::make_model(AplsVariant::qr_stabilized, p, ws, detail::first_terms(seq, p), std::move(gamma),
                              ws.covariance());
}

inline AplsModel fit_apls_qr(const Dataset& data, std::size_t p) {
    Workspace ws(data);
    return fit_apls_qr(ws, p);
}

inline AplsModel fit_apls_ortho(Workspace& ws, std::size_t p) {
    detail::require_p(p);
    const KrylovSequence& seq = ws.krylov(p);
    const auto& cov = ws.covariance();
    const std::vector<Curve> krylov = detail::first_terms(seq, p);
    auto gs = modified_gram_schmidt<Curve>(krylov, KernelProduct(*cov));
    std::vector<Curve> psi;
    psi.reserve(p);
    for (auto& u : gs.orthonormal) psi.push_back(detail::fix_sign(std::move(u)));

    const Dataset& cd = ws.centered().centered;
    Matrix s(cd.n(), static_cast<Index>(p));
    for (std::size_t j = 0; j < p; ++j) s.col(static_cast<Index>(j)) = scores(cd.curves, psi[j]);
    Vector beta = s.householderQr().solve(cd.responses);
    return detail::make_model(AplsVariant::ortho_basis, p, ws, std::move(psi), std::move(beta), cov);
}

inline AplsModel fit_apls_ortho(const Dataset& data, std::size_t p) {
    Workspace ws(data);
    return fit_apls_ortho(ws, p);
}

/// Ybar + integral (x - Xbar) * slope.
inline double predict(const AplsModel& model, const Curve& x) {
    return predict_linear(model.mean_y, model.mean_curve, model.slope, x);
}

/// n^-1 sum_i (Yc_i - integral Xc_i * slope)^2, the minimized least-squares criterion.
inline double training_criterion(const Dataset& data, const Curve& slope) {
    const Centered c = center(data);
    const Vector r = c.centered.responses - scores(c.centered.curves, slope);
    return r.squaredNorm() / static_cast<double>(data.n());
}

}  // namespace funpls
