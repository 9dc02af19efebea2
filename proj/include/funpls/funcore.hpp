#pragma once

// Grids, curves, kernels and the quadrature inner products built on them.
//
// Every function on the interval I is represented by its samples on a Grid;
// every integral over I is the weighted sum with the grid's quadrature
// weights. A kernel K(s,t) is the m x m matrix of samples K(t_i, t_j).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "funpls/errors.hpp"
#include "funpls/tolerances.hpp"

namespace funpls {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Grid {
public:
    /// Validates: strictly increasing points inside [lower, upper], positive
    /// weights summing to upper - lower, at least two points.
    Grid(Vector points, Vector weights, double lower, double upper)
        : points_(std::move(points)), weights_(std::move(weights)), lower_(lower), upper_(upper) {
        validate();
    }

    /// Interval taken as [first point, last point].
    Grid(Vector points, Vector weights)
        : Grid(points, std::move(weights), points.size() > 0 ? points(0) : 0.0,
               points.size() > 0 ? points(points.size() - 1) : 0.0) {}

    /// Composite trapezoid weights on arbitrary strictly increasing abscissae.
    static Grid trapezoid(const Vector& points) {
        const Index m = points.size();
        if (m < 2) throw InputError("grid needs at least two points");
        Vector w = Vector::Zero(m);
        for (Index i = 0; i + 1 < m; ++i) {
            const double h = points(i + 1) - points(i);
            if (!(h > 0.0)) throw InputError("grid points must be strictly increasing");
            w(i) += 0.5 * h;
            w(i + 1) += 0.5 * h;
        }
        return Grid(points, std::move(w));
    }

    static Grid uniform(double lower, double upper, Index m) {
        if (m < 2) throw InputError("grid needs at least two points");
        return trapezoid(Vector::LinSpaced(m, lower, upper));
    }

    /// Abscissae 1, 2, ..., m (the convention for equispaced spectra).
    static Grid integer(Index m) { return uniform(1.0, static_cast<double>(m), m); }

    [[nodiscard]] const Vector& points() const noexcept { return points_; }
    [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
    [[nodiscard]] double lower() const noexcept { return lower_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }
    [[nodiscard]] Index size() const noexcept { return points_.size(); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.size() == b.size() && a.lower_ == b.lower_ && a.upper_ == b.upper_ && a.points_ == b.points_ &&
               a.weights_ == b.weights_;
    }

private:
    void validate() const {
        const Index m = points_.size();
        if (m < 2) throw InputError("grid needs at least two points");
        if (weights_.size() != m) throw InputError("grid points and weights differ in length");
        if (!(upper_ > lower_)) throw InputError("grid interval is empty");
        for (Index i = 0; i < m; ++i) {
            if (!std::isfinite(points_(i)) || points_(i) < lower_ || points_(i) > upper_)
                throw InputError("grid point " + std::to_string(i) + " outside the interval");
            if (i > 0 && !(points_(i) > points_(i - 1)))
                throw InputError("grid points must be strictly increasing");
            if (!(weights_(i) > 0.0) || !std::isfinite(weights_(i)))
                throw InputError("grid weight " + std::to_string(i) + " is not positive");
        }
        const double length = upper_ - lower_;
        if (std::abs(weights_.sum() - length) > tol::grid_weight_sum * length)
            throw InputError("grid weights do not sum to the interval length");
    }

    Vector points_;
    Vector weights_;
    double lower_;
    double upper_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr share(Grid g) { return std::make_shared<const Grid>(std::move(g)); }

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* where) {
    if (!same_grid(a, b)) throw GridMismatchError(std::string("grid mismatch in ") + where);
}

/// A function on I, sampled on a grid.
struct Curve {
    GridPtr grid;
    Vector values;

    Curve(GridPtr g, Vector v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid) throw InputError("curve without grid");
        if (values.size() != grid->size()) throw InputError("curve length does not match grid");
    }

    static Curve zero(const GridPtr& g) { return Curve(g, Vector::Zero(g->size())); }

    [[nodiscard]] Index size() const noexcept { return values.size(); }

    friend Curve operator+(const Curve& a, const Curve& b) {
        require_same_grid(a.grid, b.grid, "curve addition");
        return Curve(a.grid, a.values + b.values);
    }
    friend Curve operator-(const Curve& a, const Curve& b) {
        require_same_grid(a.grid, b.grid, "curve subtraction");
        return Curve(a.grid, a.values - b.values);
    }
    friend Curve operator*(double c, const Curve& a) { return Curve(a.grid, c * a.values); }
};

/// A bivariate function on I x I: values(i, j) = K(t_i, t_j).
struct Kernel {
    GridPtr grid;
    Matrix values;

    Kernel(GridPtr g, Matrix v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid) throw InputError("kernel without grid");
        if (values.rows() != grid->size() || values.cols() != grid->size())
            throw InputError("kernel dimensions do not match grid");
    }
};

/// n curves without responses, one per row.
struct CurveSet {
    GridPtr grid;
    Matrix values;  // n x m

    CurveSet(GridPtr g, Matrix v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid) throw InputError("curve set without grid");
        if (values.cols() != grid->size()) throw InputError("curve set does not match grid");
    }

    [[nodiscard]] Index n() const noexcept { return values.rows(); }
    [[nodiscard]] Curve curve(Index i) const { return Curve(grid, values.row(i).transpose()); }
};

/// n curves (rows of `curves`) with scalar responses.
struct Dataset {
    GridPtr grid;
    Matrix curves;     // n x m
    Vector responses;  // n

    Dataset(GridPtr g, Matrix x, Vector y)
        : grid(std::move(g)), curves(std::move(x)), responses(std::move(y)) {
        if (!grid) throw InputError("dataset without grid");
        if (curves.cols() != grid->size()) throw InputError("dataset curves do not match grid");
        if (curves.rows() < 2) throw InputError("dataset needs at least two curves");
        if (responses.size() != curves.rows())
            throw InputError("dataset has " + std::to_string(curves.rows()) + " curves but " +
                             std::to_string(responses.size()) + " responses");
    }

    [[nodiscard]] Index n() const noexcept { return curves.rows(); }
    [[nodiscard]] Curve curve(Index i) const { return Curve(grid, curves.row(i).transpose()); }
};

/// Integral of f*g over I.
inline double inner_product(const Curve& f, const Curve& g) {
    require_same_grid(f.grid, g.grid, "inner_product");
    return (f.grid->weights().array() * (f.values.array() * g.values.array())).sum();
}

inline double l2_norm(const Curve& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

/// K(f)(t) = integral of f(s) K(s, t) ds.
inline Curve apply_kernel(const Kernel& k, const Curve& f) {
    require_same_grid(k.grid, f.grid, "apply_kernel");
    const Vector wf = f.grid->weights().cwiseProduct(f.values);
    return Curve(f.grid, k.values.transpose() * wf);
}

/// Double integral of f(s) g(t) K(s, t).
inline double k_bilinear(const Curve& f, const Curve& g, const Kernel& k) {
    require_same_grid(f.grid, g.grid, "k_bilinear");
    return inner_product(f, apply_kernel(k, g));
}

/// Quadrature version of the Hilbert-Schmidt norm: (double integral of K^2)^(1/2).
inline double kernel_norm(const Kernel& k) {
    const Vector& w = k.grid->weights();
    return std::sqrt((w.asDiagonal() * k.values.cwiseAbs2() * w.asDiagonal()).sum());
}

/// Norm induced by a positive semidefinite kernel.
inline double k_norm(const Curve& f, const Kernel& k) {
    const double q = k_bilinear(f, f, k);
    if (q < 0.0) {
        const double f2 = inner_product(f, f);
        const double scale = f2 * kernel_norm(k);
        if (q < -tol::psd_negative * scale)
            throw NotPsdError("negative quadratic form " + std::to_string(q) +
                              ": kernel is not positive semidefinite");
    }
    return std::sqrt(std::max(0.0, q));
}

struct Centered {
    Curve mean_curve;
    double mean_y;
    Dataset centered;
};

/// Subtract the pointwise mean curve and the mean response.
inline Centered center(const Dataset& data) {
    const Vector mean = data.curves.colwise().mean().transpose();
    const double mean_y = data.responses.mean();
    Matrix xc = data.curves.rowwise() - mean.transpose();
    Vector yc = data.responses.array() - mean_y;
    return Centered{Curve(data.grid, mean), mean_y, Dataset(data.grid, std::move(xc), std::move(yc))};
}

/// Row i of the result is the integral of X_i * f, for the rows X_i of `curves`.
inline Vector scores(const Matrix& curves, const Curve& f) {
    return curves * f.grid->weights().cwiseProduct(f.values);
}

/// sum_j coefficients[j] * basis[j], accumulated in index order.
inline Curve assemble_slope(const GridPtr& grid, const std::vector<Curve>& basis, const Vector& coefficients) {
    if (static_cast<Index>(basis.size()) != coefficients.size())
        throw InputError("basis and coefficient counts differ");
    Vector s = Vector::Zero(grid->size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        require_same_grid(grid, basis[j].grid, "assemble_slope");
        s += coefficients(static_cast<Index>(j)) * basis[j].values;
    }
    return Curve(grid, std::move(s));
}

/// mean_y + integral of (x - mean_curve) * slope.
inline double predict_linear(double mean_y, const Curve& mean_curve, const Curve& slope, const Curve& x) {
    require_same_grid(slope.grid, x.grid, "predict");
    return mean_y + inner_product(x - mean_curve, slope);
}

}  // namespace funpls
