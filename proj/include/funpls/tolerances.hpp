#pragma once

// Single place for every numeric threshold used by the library and its tests.

namespace funpls::tol {

// Library thresholds.
inline constexpr double pivot_relative = 1e-12;        // shared Gram-Schmidt / deflation pivot rule
inline constexpr double raw_condition_limit = 1e12;    // raw APLS refuses to solve above this
inline constexpr double psd_negative = 1e-8;           // k_norm: tolerated negative quadratic form (relative)
inline constexpr double eigen_clamp = 1e-14;           // eigenvalues below this * theta_1 become 0
inline constexpr double kernel_symmetry = 1e-10;       // eigendecompose input symmetry check
inline constexpr double grid_weight_sum = 1e-10;       // sum(weights) vs interval length, relative

// Test tolerances.
inline constexpr double exact = 1e-12;
inline constexpr double tight = 1e-10;
inline constexpr double loose = 1e-8;
inline constexpr double equivalence = 1e-6;
inline constexpr double quadrature_oracle = 1e-4;

// Monte Carlo acceptance bands.
inline constexpr double rate_slope_low = -0.65;
inline constexpr double rate_slope_high = -0.35;
inline constexpr double clt_skewness = 0.5;
inline constexpr double clt_excess_kurtosis = 1.0;
inline constexpr double consistency_floor_factor = 1.05;
inline constexpr double pca_pls_ratio = 10.0;

}  // namespace funpls::tol
