#pragma once

// Method-agnostic view of a fitted predictor: every method ends up as
// Ybar + integral (x - Xbar) * slope with slope = sum_j c_j basis_j.
// This is the shape that gets serialized and that the benchmark consumes.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "funpls/aplsfit.hpp"
#include "funpls/pcareg.hpp"
#include "funpls/plsclassic.hpp"

namespace funpls {

enum class Method { apls_raw, apls_qr, apls_ortho, classic, pca };

inline constexpr std::string_view method_name(Method m) {
    switch (m) {
        case Method::apls_raw: return "apls_raw";
        case Method::apls_qr: return "apls_qr";
        case Method::apls_ortho: return "apls_ortho";
        case Method::classic: return "classic";
        case Method::pca: return "pca";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (Method m : {Method::apls_raw, Method::apls_qr, Method::apls_ortho, Method::classic, Method::pca})
        if (method_name(m) == s) return m;
    throw InputError("unknown method '" + std::string(s) + "'");
}

struct LinearModel {
    /// raw | qr_stabilized | ortho_basis | classic | pca
    std::string variant;
    std::size_t p;
    Curve mean_curve;
    double mean_y;
    std::vector<Curve> basis;
    Vector coefficients;
    Curve slope;

    [[nodiscard]] const GridPtr& grid() const noexcept { return mean_curve.grid; }

    /// Rebuilds the slope from basis and coefficients.
    static LinearModel assemble(std::string variant, std::size_t p, Curve mean_curve, double mean_y,
                                std::vector<Curve> basis, Vector coefficients) {
        Curve slope = assemble_slope(mean_curve.grid, basis, coefficients);
        return LinearModel{std::move(variant), p,         std::move(mean_curve), mean_y, std::move(basis),
                           std::move(coefficients), std::move(slope)};
    }
};

inline double predict(const LinearModel& m, const Curve& x) {
    return predict_linear(m.mean_y, m.mean_curve, m.slope, x);
}

/// Predictions for every row of `curves`.
inline Vector predict_all(const LinearModel& m, const CurveSet& curves) {
    require_same_grid(m.grid(), curves.grid, "predict");
    Vector out(curves.n());
    for (Index i = 0; i < curves.n(); ++i) out(i) = predict(m, curves.curve(i));
    return out;
}

inline LinearModel to_linear(const AplsModel& m) {
    return {to_string(m.variant), m.p, m.mean_curve, m.mean_y, m.basis, m.coefficients, m.slope};
}

inline LinearModel to_linear(const ClassicPlsModel& m) {
    return {"classic", m.p, m.mean_curve, m.mean_y, m.weight_curves, m.slope_coefficients, m.slope};
}

inline LinearModel to_linear(const PcaModel& m) {
    return {"pca", m.p, m.mean_curve, m.mean_y, m.eigensystem.eigenfunctions, m.coefficients, m.slope};
}

/// One dataset, many fits: caches centering, covariance, Krylov terms and
/// the eigen-decomposition across methods and component counts.
class FitSession {
public:
    explicit FitSession(const Dataset& data) : ws_(data) {}

    /// Raw-APLS diagnostics from the most recent apls_raw fit.
    [[nodiscard]] const std::optional<AplsDiagnostics>& last_diagnostics() const noexcept { return diag_; }

    LinearModel fit(Method method, std::size_t p) {
        switch (method) {
            case Method::apls_raw: {
                auto [model, diag] = fit_apls_raw(ws_, p);
                diag_ = std::move(diag);
                return to_linear(model);
            }
            case Method::apls_qr: return to_linear(fit_apls_qr(ws_, p));
            case Method::apls_ortho: return to_linear(fit_apls_ortho(ws_, p));
            case Method::classic: return to_linear(fit_classic(ws_.centered(), p));
            case Method::pca:
                if (!eig_) eig_ = eigendecompose(*ws_.covariance(), static_cast<std::size_t>(ws_.grid()->size()));
                return to_linear(fit_pca(ws_.centered(), *eig_, p));
        }
        throw InputError("unknown method");
    }

    Workspace& workspace() noexcept { return ws_; }

private:
    Workspace ws_;
    std::optional<EigenSystem> eig_;
    std::optional<AplsDiagnostics> diag_;
};

inline LinearModel fit_method(const Dataset& data, Method method, std::size_t p) {
    FitSession s(data);
    return s.fit(method, p);
}

}  // namespace funpls
