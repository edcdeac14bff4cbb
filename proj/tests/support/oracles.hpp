#pragma once

// Independent reference implementations the tests check the library against.
// Everything here is deliberately naive: textbook recursions, dense
// quadrature, exhaustive search, closed forms. Slow is fine; sharing code
// with the library under test is not.

#include "evofda/splines.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace evofda::testsupport {

/// Cox-de Boor recursion straight from the definition: value of the i-th
/// B-spline of `degree` over the full (clamped) knot vector at x, with 0/0
/// terms dropped and the rightmost interval closed at the domain end.
double naive_bspline(const std::vector<double>& knots, int i, int degree, double x);

/// Second derivative of naive_bspline by central differencing. On a cubic
/// polynomial piece the three-point formula has zero truncation error, so
/// accuracy is limited only by rounding; x must sit at least h away from
/// the nearest knot.
double naive_bspline_second_derivative(const std::vector<double>& knots, int i, double x,
                                       double h = 1e-3);

/// Roughness penalty by dense composite trapezoid quadrature of
/// integral B_i'' B_j'', segment by segment between knots, using the naive
/// basis derivatives above with a wide stencil (differencing is exact on
/// polynomial pieces, so step size only controls rounding noise). The
/// h-wide bands at segment edges, where the stencil would straddle a knot,
/// take linearly extrapolated values — exact because second derivatives of
/// cubics are linear per segment. points_per_segment >= 700 puts the
/// trapezoid bias well under 1e-6 relative.
Eigen::MatrixXd quadrature_penalty(const KnotGrid& knots, int points_per_segment);

/// Basis value matrix built from naive_bspline (library code untouched).
Eigen::MatrixXd naive_basis_matrix(const KnotGrid& knots, std::span<const double> grid);

/// Minimizes |y - B c|^2 + lambda c' Omega c by restarted conjugate
/// gradients on the quadratic, never forming a factorization.
Eigen::VectorXd cg_minimize(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& penalty,
                            const Eigen::VectorXd& y, double lambda);

/// Global k-medoids optimum by enumerating every medoid subset.
double exhaustive_kmedoids_objective(const Eigen::MatrixXd& dist, int k);

struct Line {
    double intercept = 0;
    double slope = 0;
};

/// Closed-form simple linear regression.
Line ols_line(std::span<const double> xs, std::span<const double> ys);

/// Two-sided Student-t p-value by Simpson quadrature of the t density.
double numeric_t_two_sided_p(double t, double df);

/// Upper-tail F probability by Simpson quadrature of the F density (with a
/// square-root substitution so df1 = 1 stays integrable).
double numeric_f_upper_p(double f, double df1, double df2);

} // namespace evofda::testsupport
