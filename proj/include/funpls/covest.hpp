#pragma once

// Empirical covariance kernel, cross-covariance K(b) estimate and the
// Krylov sequence K(b), K^2(b), ... obtained by iterating one kernel.

#include <memory>
#include <optional>
#include <vector>

#include "funpls/funcore.hpp"

namespace funpls {

/// terms[0] = K(b), terms[j] = K(terms[j-1]); 0-based storage of the 1-based
/// sequence K^1(b), K^2(b), ...
struct KrylovSequence {
    GridPtr grid;
    std::vector<Curve> terms;
    std::shared_ptr<const Kernel> kernel;

    [[nodiscard]] std::size_t size() const noexcept { return terms.size(); }

    /// Term K^j(b), 1-based.
    [[nodiscard]] const Curve& term(std::size_t j) const { return terms.at(j - 1); }

    void extend_to(std::size_t count) {
        if (terms.empty()) throw InputError("cannot extend an empty Krylov sequence");
        while (terms.size() < count) terms.push_back(apply_kernel(*kernel, terms.back()));
    }
};

namespace detail {

inline Kernel covariance_of_centered(const GridPtr& grid, const Matrix& xc) {
    const Index m = xc.cols();
    Matrix k = Matrix::Zero(m, m);
    k.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), 1.0 / static_cast<double>(xc.rows()));
    Matrix full = k.selfadjointView<Eigen::Lower>();
    return Kernel(grid, std::move(full));
}

inline Curve cross_covariance_of_centered(const GridPtr& grid, const Matrix& xc, const Vector& yc) {
    return Curve(grid, xc.transpose() * yc / static_cast<double>(xc.rows()));
}

}  // namespace detail

/// K(s,t) = n^-1 sum_i (X_i(s) - Xbar(s)) (X_i(t) - Xbar(t)); exactly symmetric.
inline Kernel empirical_covariance(const Dataset& data) {
    const Centered c = center(data);
    return detail::covariance_of_centered(data.grid, c.centered.curves);
}

/// K(b)(t) estimated by n^-1 sum_i (X_i(t) - Xbar(t)) (Y_i - Ybar).
inline Curve empirical_cross_covariance(const Dataset& data) {
    const Centered c = center(data);
    return detail::cross_covariance_of_centered(data.grid, c.centered.curves, c.centered.responses);
}

/// Krylov sequence seeded at `seed` and iterated with `kernel`.
inline KrylovSequence krylov_from(std::shared_ptr<const Kernel> kernel, Curve seed, std::size_t p) {
    if (p < 1) throw InputError("Krylov sequence needs p >= 1");
    require_same_grid(kernel->grid, seed.grid, "krylov_from");
    KrylovSequence seq{seed.grid, {std::move(seed)}, std::move(kernel)};
    seq.extend_to(p);
    return seq;
}

inline KrylovSequence krylov_sequence(const Dataset& data, std::size_t p) {
    const Centered c = center(data);
    auto k = std::make_shared<const Kernel>(detail::covariance_of_centered(data.grid, c.centered.curves));
    return krylov_from(std::move(k),
                       detail::cross_covariance_of_centered(data.grid, c.centered.curves, c.centered.responses),
                       p);
}

/// Per-dataset cache shared by the fitters: centering, covariance and the
/// Krylov sequence are computed once and reused across component counts.
class Workspace {
public:
    explicit Workspace(const Dataset& data) : centered_(center(data)) {}

    [[nodiscard]] const Centered& centered() const noexcept { return centered_; }
    [[nodiscard]] const GridPtr& grid() const noexcept { return centered_.centered.grid; }

    const std::shared_ptr<const Kernel>& covariance() {
        if (!kernel_)
            kernel_ = std::make_shared<const Kernel>(
                detail::covariance_of_centered(grid(), centered_.centered.curves));
        return kernel_;
    }

    const KrylovSequence& krylov(std::size_t count) {
        if (!krylov_) {
            krylov_ = krylov_from(covariance(),
                                  detail::cross_covariance_of_centered(grid(), centered_.centered.curves,
                                                                       centered_.centered.responses),
                                  count);
        }
        krylov_->extend_to(count);
        return *krylov_;
    }

private:
    Centered centered_;
    std::shared_ptr<const Kernel> kernel_;
    std::optional<KrylovSequence> krylov_;
};

}  // namespace funpls
