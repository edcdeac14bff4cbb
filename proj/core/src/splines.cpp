#include "evofda/splines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace evofda {

namespace {

constexpr int kDegree = 3; // cubic

/// Index i of the knot span [T[i], T[i+1]) containing x, with x == t_max
/// mapped to the last non-empty span.
int find_span(const std::vector<double>& T, double x) {
    const int dim = int(T.size()) - kDegree - 1;
    if (x >= T[std::size_t(dim)])
        return dim - 1;
    auto it = std::upper_bound(T.begin() + kDegree, T.begin() + dim + 1, x);
    return int(it - T.begin()) - 1;
}

/// Values and derivatives up to `order` of the kDegree+1 basis functions that
/// do not vanish on span `span`, following the classic two-triangle scheme.
/// ders[d][j] is the d-th derivative of basis function span-kDegree+j at x.
void basis_derivatives(const std::vector<double>& T, int span, double x, int order,
                       double ders[3][kDegree + 1]) {
    double ndu[kDegree + 1][kDegree + 1];
    double left[kDegree + 1], right[kDegree + 1];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= kDegree; ++j) {
        left[j] = x - T[std::size_t(span + 1 - j)];
        right[j] = T[std::size_t(span + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= kDegree; ++j)
        ders[0][j] = ndu[j][kDegree];
    if (order == 0)
        return;

    for (int r = 0; r <= kDegree; ++r) {
        double a[2][kDegree + 1];
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int d = 1; d <= order; ++d) {
            double value = 0.0;
            const int rk = r - d;
            const int pk = kDegree - d;
            if (r >= d) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                value = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = r - 1 <= pk ? d - 1 : kDegree - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                value += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][d] = -a[s1][d - 1] / ndu[pk + 1][r];
                value += a[s2][d] * ndu[r][pk];
            }
            ders[d][r] = value;
            std::swap(s1, s2);
        }
    }
    double factor = double(kDegree);
    for (int d = 1; d <= order; ++d) {
        for (int j = 0; j <= kDegree; ++j)
            ders[d][j] *= factor;
        factor *= double(kDegree - d);
    }
}

void check_interval(const KnotGrid& knots, double t) {
    if (!(t >= knots.t_min && t <= knots.t_max))
        throw std::domain_error("evaluation point " + std::to_string(t) + " outside [" +
                                std::to_string(knots.t_min) + ", " + std::to_string(knots.t_max) +
                                "]");
}

} // namespace

std::vector<double> KnotGrid::full_knots() const {
    std::vector<double> T;
    T.reserve(interior.size() + 8);
    for (int i = 0; i < 4; ++i)
        T.push_back(t_min);
    T.insert(T.end(), interior.begin(), interior.end());
    for (int i = 0; i < 4; ++i)
        T.push_back(t_max);
    return T;
}

int default_knot_count(long span_days, double mean_release_gap_days) {
    if (mean_release_gap_days <= 0)
        throw std::invalid_argument("mean release gap must be positive");
    const long rounded = std::lround(double(span_days) / mean_release_gap_days);
    return int(std::max(rounded, 2L));
}

KnotGrid make_knot_grid(double t_min, double t_max, int count) {
    if (count < 2)
        throw std::invalid_argument("knot count must be at least 2, got " + std::to_string(count));
    if (!(t_max > t_min))
        throw std::invalid_argument("knot interval is empty");
    KnotGrid grid;
    grid.t_min = t_min;
    grid.t_max = t_max;
    grid.interior.reserve(std::size_t(count));
    for (int j = 1; j <= count; ++j)
        grid.interior.push_back(t_min + (t_max - t_min) * double(j) / double(count + 1));
    return grid;
}

KnotGrid make_knot_grid(int count) { return make_knot_grid(0.0, double(kWindowDays), count); }

Eigen::MatrixXd basis_matrix(const KnotGrid& knots, std::span<const double> grid, int deriv) {
    if (deriv < 0 || deriv > 2)
        throw std::invalid_argument("basis_matrix supports derivative orders 0..2");
    const auto T = knots.full_knots();
    const std::size_t dim = knots.dimension();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(Eigen::Index(grid.size()), Eigen::Index(dim));
    double ders[3][kDegree + 1];
    for (std::size_t row = 0; row < grid.size(); ++row) {
        check_interval(knots, grid[row]);
        const int span = find_span(T, grid[row]);
        basis_derivatives(T, span, grid[row], deriv, ders);
        for (int j = 0; j <= kDegree; ++j)
            B(Eigen::Index(row), span - kDegree + j) = ders[deriv][j];
    }
    return B;
}

Eigen::MatrixXd penalty_matrix(const KnotGrid& knots) {
    const auto T = knots.full_knots();
    const std::size_t dim = knots.dimension();
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim));

    // Segment endpoints: t_min, interior knots, t_max. The integrand (product
    // of two second derivatives of cubics) is a polynomial of degree <= 2 on
    // each segment, so 3-point Gauss is exact.
    static const double gauss_x[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gauss_w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

    std::vector<double> cuts;
    cuts.push_back(knots.t_min);
    cuts.insert(cuts.end(), knots.interior.begin(), knots.interior.end());
    cuts.push_back(knots.t_max);

    double ders[3][kDegree + 1];
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        if (half <= 0)
            continue;
        for (int g = 0; g < 3; ++g) {
            const double x = mid + half * gauss_x[g];
            const double w = half * gauss_w[g];
            const int span = find_span(T, x);
            basis_derivatives(T, span, x, 2, ders);
            // Upper triangle only, mirrored below: (w*a)*b and (w*b)*a round
            // differently, and the matrix must be exactly symmetric.
            for (int i = 0; i <= kDegree; ++i) {
                const Eigen::Index gi = span - kDegree + i;
                for (int j = i; j <= kDegree; ++j) {
                    const Eigen::Index gj = span - kDegree + j;
                    omega(gi, gj) += w * ders[2][i] * ders[2][j];
                }
            }
        }
    }
    omega.triangularView<Eigen::StrictlyLower>() = omega.transpose();
    return omega;
}

std::vector<double> greville_abscissae(const KnotGrid& knots) {
    const auto T = knots.full_knots();
    std::vector<double> xi(knots.dimension());
    for (std::size_t i = 0; i < xi.size(); ++i)
        xi[i] = (T[i + 1] + T[i + 2] + T[i + 3]) / 3.0;
    return xi;
}

namespace {

struct NormalSolve {
    Eigen::VectorXd coefficients;
    bool ridged = false;
};

NormalSolve solve_normal_equations(const Eigen::MatrixXd& BtB, const Eigen::MatrixXd& omega,
                                   double lambda, const Eigen::VectorXd& rhs) {
    const Eigen::MatrixXd A = BtB + lambda * omega;
    auto try_solve = [&](const Eigen::MatrixXd& M) -> std::optional<Eigen::VectorXd> {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() != Eigen::Success)
            return std::nullopt;
        Eigen::VectorXd c = ldlt.solve(rhs);
        const double scale = std::max(1e-300, rhs.norm());
        if ((M * c - rhs).norm() > 1e-6 * std::max(scale, M.norm() * c.norm()))
            return std::nullopt;
        return c;
    };
    if (auto c = try_solve(A))
        return {*c, false};
    const double ridge = 1e-10 * A.trace();
    const Eigen::MatrixXd Ar =
        A + ridge * Eigen::MatrixXd::Identity(A.rows(), A.cols());
    if (auto c = try_solve(Ar))
        return {*c, true};
    throw std::runtime_error("singular normal equations: fit aborted");
}

} // namespace

SplineFit fit_penalized(std::span<const double> xs, std::span<const double> ys,
                        const KnotGrid& knots, double lambda,
                        std::span<const double> eval_grid) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_penalized: xs and ys length mismatch");
    if (xs.empty())
        throw std::invalid_argument("fit_penalized: no samples");
    if (lambda < 0)
        throw std::invalid_argument("fit_penalized: lambda must be non-negative");

    const Eigen::MatrixXd B = basis_matrix(knots, xs);
    const Eigen::MatrixXd omega = penalty_matrix(knots);
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), Eigen::Index(ys.size()));
    const Eigen::MatrixXd BtB = B.transpose() * B;
    const Eigen::VectorXd rhs = B.transpose() * y;

    NormalSolve solved = solve_normal_equations(BtB, omega, lambda, rhs);

    SplineFit fit;
    fit.knots = knots;
    fit.lambda = lambda;
    fit.coefficients = std::move(solved.coefficients);
    fit.ridged = solved.ridged;
    fit.rss = (y - B * fit.coefficients).squaredNorm();
    fit.penalized_rss = fit.rss + lambda * fit.coefficients.dot(omega * fit.coefficients);

    const Eigen::MatrixXd A =
        BtB + lambda * omega +
        (fit.ridged ? 1e-10 * (BtB + lambda * omega).trace() : 0.0) *
            Eigen::MatrixXd::Identity(BtB.rows(), BtB.cols());
    fit.edf = Eigen::LDLT<Eigen::MatrixXd>(A).solve(BtB).trace();

    const Eigen::MatrixXd E = basis_matrix(knots, eval_grid);
    const Eigen::VectorXd fitted = E * fit.coefficients;
    fit.fitted_values.assign(fitted.data(), fitted.data() + fitted.size());
    return fit;
}

SplineFit fit_smoothing_spline(const DailyCurve& curve, const KnotGrid& knots, double lambda,
                               bool fit_at_knots) {
    if (curve.values.size() != kCurveLength)
        throw std::invalid_argument("daily curve must have " + std::to_string(kCurveLength) +
                                    " values");
    if (!fit_at_knots)
        return fit_penalized(daily_grid(), curve.values, knots, lambda, daily_grid());

    // Subsampled variant: the step function sampled at the knot sites only.
    std::vector<double> xs;
    xs.push_back(knots.t_min);
    xs.insert(xs.end(), knots.interior.begin(), knots.interior.end());
    xs.push_back(knots.t_max);
    std::vector<double> ys;
    ys.reserve(xs.size());
    for (double x : xs) {
        const double clamped = std::clamp(x, 0.0, double(kWindowDays));
        ys.push_back(curve.values[std::size_t(std::llround(std::floor(clamped)))]);
    }
    return fit_penalized(xs, ys, knots, lambda, daily_grid());
}

double evaluate_spline(const SplineFit& fit, double t) {
    check_interval(fit.knots, t);
    const auto T = fit.knots.full_knots();
    const int span = find_span(T, t);
    double ders[3][kDegree + 1];
    basis_derivatives(T, span, t, 0, ders);
    double value = 0;
    for (int j = 0; j <= kDegree; ++j)
        value += ders[0][j] * fit.coefficients[span - kDegree + j];
    return value;
}

double effective_df(const KnotGrid& knots, std::span<const double> fit_grid, double lambda) {
    const Eigen::MatrixXd B = basis_matrix(knots, fit_grid);
    const Eigen::MatrixXd BtB = B.transpose() * B;
    const Eigen::MatrixXd omega = penalty_matrix(knots);
    const Eigen::MatrixXd A = BtB + lambda * omega;
    return Eigen::LDLT<Eigen::MatrixXd>(A).solve(BtB).trace();
}

double lambda_for_edf(const KnotGrid& knots, std::span<const double> fit_grid, double target_edf) {
    const double lo_lambda = 1e-9, hi_lambda = 1e13;
    if (effective_df(knots, fit_grid, lo_lambda) <= target_edf)
        return 0.0;
    if (effective_df(knots, fit_grid, hi_lambda) >= target_edf)
        return hi_lambda;
    double lo = std::log10(lo_lambda), hi = std::log10(hi_lambda);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double edf = effective_df(knots, fit_grid, std::pow(10.0, mid));
        if (edf > target_edf)
            lo = mid; // edf decreases in lambda
        else
            hi = mid;
        if (hi - lo < 1e-12)
            break;
    }
    return std::pow(10.0, 0.5 * (lo + hi));
}

MeanBand mean_curve_with_ci(const std::vector<SplineFit>& fits) {
    if (fits.size() < 2)
        throw std::invalid_argument("mean_curve_with_ci requires at least 2 fits");
    const std::size_t len = fits.front().fitted_values.size();
    for (const auto& f : fits) {
        if (!(f.knots == fits.front().knots))
            throw std::invalid_argument("mean_curve_with_ci: mismatched knot grids");
        if (f.fitted_values.size() != len)
            throw std::invalid_argument("mean_curve_with_ci: mismatched evaluation grids");
    }
    const double n = double(fits.size());
    MeanBand band;
    band.mean.resize(len);
    band.lower.resize(len);
    band.upper.resize(len);
    for (std::size_t d = 0; d < len; ++d) {
        double sum = 0;
        for (const auto& f : fits)
            sum += f.fitted_values[d];
        const double mean = sum / n;
        double ss = 0;
        for (const auto& f : fits)
            ss += (f.fitted_values[d] - mean) * (f.fitted_values[d] - mean);
        const double sd = std::sqrt(ss / (n - 1));
        const double half = 1.96 * sd / std::sqrt(n);
        band.mean[d] = mean;
        band.lower[d] = mean - half;
        band.upper[d] = mean + half;
    }
    return band;
}

const std::vector<double>& daily_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g(kCurveLength);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = double(i);
        return g;
    }();
    return grid;
}

} // namespace evofda
