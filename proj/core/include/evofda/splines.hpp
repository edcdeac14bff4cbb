#pragma once

#include "evofda/preprocess.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace evofda {

/// Cubic B-spline knot layout over an interval: strictly increasing interior
/// knots plus 4-fold clamped boundary knots at both ends. The basis dimension
/// is interior count + 4.
struct KnotGrid {
    double t_min = 0;
    double t_max = double(kWindowDays);
    std::vector<double> interior;

    std::size_t dimension() const { return interior.size() + 4; }
    /// Full clamped knot vector [t_min x4, interior..., t_max x4].
    std::vector<double> full_knots() const;

    bool operator==(const KnotGrid&) const = default;
};

/// Knot count heuristic: observed span divided by the mean release gap,
/// rounded to nearest, never below 2. Throws on a non-positive gap.
int default_knot_count(long span_days, double mean_release_gap_days);

/// `count` equally spaced interior knots strictly inside [t_min, t_max]:
/// knot_j = t_min + (t_max - t_min) * j / (count + 1). Requires count >= 2.
KnotGrid make_knot_grid(double t_min, double t_max, int count);
KnotGrid make_knot_grid(int count); // over [0, kWindowDays]

/// Rows = evaluation points, columns = basis functions; entries are values of
/// the `deriv`-th derivative (0, 1 or 2). Rows of the value matrix sum to 1.
/// Throws std::domain_error for evaluation points outside the interval.
Eigen::MatrixXd basis_matrix(const KnotGrid& knots, std::span<const double> grid, int deriv = 0);

/// Roughness penalty Omega_ij = integral of B_i'' B_j'' over the interval,
/// evaluated exactly with 3-point Gauss quadrature per inter-knot segment.
/// Symmetric positive semi-definite; its null space is spanned by the
/// coefficient images of constant and linear functions.
Eigen::MatrixXd penalty_matrix(const KnotGrid& knots);

/// Greville abscissae: the coefficient vector (xi_0..xi_{dim-1}) representing
/// the identity function t in the basis.
std::vector<double> greville_abscissae(const KnotGrid& knots);

struct SplineFit {
    KnotGrid knots;
    double lambda = 0;
    Eigen::VectorXd coefficients;      // length = knots.dimension()
    std::vector<double> fitted_values; // basis * coefficients on the evaluation grid
    double rss = 0;                    // residual sum of squares on the fitting grid
    double penalized_rss = 0;          // rss + lambda * integral of (f'')^2
    double edf = 0;                    // trace of the hat operator
    bool ridged = false;               // set when a fallback ridge rescued a singular solve
};

/// Penalized least squares on arbitrary (x, y) samples:
///   minimize  sum_i (y_i - f(x_i))^2 + lambda * integral (f'')^2
/// solved through the normal equations (B'B + lambda*Omega) c = B'y with a
/// symmetric positive-definite factorization. A singular system (possible at
/// lambda = 0 with fewer distinct samples than basis dimension) gets one
/// ridge of 1e-10 * trace, flagged in the result; if that still fails the fit
/// aborts with std::runtime_error. fitted_values are reported on eval_grid.
SplineFit fit_penalized(std::span<const double> xs, std::span<const double> ys,
                        const KnotGrid& knots, double lambda,
                        std::span<const double> eval_grid);

/// Fits a daily curve. The fitting grid is all kCurveLength daily samples, or
/// only {0, interior knots, kWindowDays} when fit_at_knots is set; fitted
/// values are always reported on the full daily grid.
SplineFit fit_smoothing_spline(const DailyCurve& curve, const KnotGrid& knots, double lambda,
                               bool fit_at_knots = false);

/// Value of the fitted spline at t. Throws std::domain_error outside the
/// knot interval.
double evaluate_spline(const SplineFit& fit, double t);

/// Smallest lambda whose effective degrees of freedom on the given fitting
/// grid reach the target, found by bisection in log-lambda. Targets at or
/// above the attainable maximum give 0; at or below 2 give the upper bound.
double lambda_for_edf(const KnotGrid& knots, std::span<const double> fit_grid, double target_edf);

/// Effective degrees of freedom tr[(B'B + lambda*Omega)^-1 B'B] of the
/// smoother on a fitting grid.
double effective_df(const KnotGrid& knots, std::span<const double> fit_grid, double lambda);

/// Cross-project mean of fitted values with a pointwise 95% band,
/// mean +- 1.96 * s / sqrt(n). Requires >= 2 fits on one knot grid.
struct MeanBand {
    std::vector<double> mean;
    std::vector<double> lower;
    std::vector<double> upper;
};

MeanBand mean_curve_with_ci(const std::vector<SplineFit>& fits);

/// The daily evaluation grid 0, 1, ..., kWindowDays.
const std::vector<double>& daily_grid();

} // namespace evofda
