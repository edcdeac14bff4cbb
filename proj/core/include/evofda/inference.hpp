#pragma once

#include "evofda/clustering.hpp"
#include "evofda/ingest.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace evofda {

/// One-way ANOVA decomposition. `degenerate` marks zero within-group
/// variance with unequal means, where F is infinite and p is reported as 0.
struct AnovaResult {
    double f = 0;
    int df_between = 0;
    int df_within = 0;
    double p_value = 1;
    double eta_squared = 0; // SS_between / SS_total
    bool degenerate = false;
};

/// Wilks' lambda with Rao's F approximation. df2 is generally non-integral.
struct ManovaResult {
    double wilks_lambda = 1;
    double f_approx = 0;
    double df1 = 0;
    double df2 = 0;
    double p_value = 1;
};

/// One unordered cluster pair; `mean_difference` is mean(a) - mean(b).
struct PairwiseComparison {
    int cluster_a = 0;
    int cluster_b = 0;
    double mean_difference = 0;
    double p_value = 1;
    bool significant = false;            // p < 0.05
    bool significant_bonferroni = false; // p < 0.05 / pair count
};

struct PairwiseTable {
    std::vector<PairwiseComparison> comparisons;
    int df_within = 0;
    double pooled_mse = 0;
    bool degenerate = false; // zero pooled within-group variance
};

/// Pearson correlation with the usual t-based two-sided p-value.
struct Correlation {
    double r = 0;
    double p_value = 1;
    std::size_t n = 0;
};

/// Per-cluster descriptive statistics; `stats[i]` summarizes the projects of
/// `clusters[i]` with the same measures as describe_sample.
struct ClusterProfile {
    std::vector<int> clusters;
    std::vector<std::size_t> counts;
    std::vector<DescriptiveStats> stats;
};

/// Lower tail of the F(df1, df2) distribution, via the regularized
/// incomplete beta function.
double f_cdf(double f, double df1, double df2);

/// Two-sided p-value of a t statistic with df degrees of freedom.
double t_two_sided_p(double t, double df);

/// Standard between/within decomposition over the groups defined by
/// `labels`. Requires >= 2 distinct labels and more observations than
/// groups; throws std::invalid_argument otherwise or on a length mismatch.
/// All group means equal gives F = 0; zero within-variance with unequal
/// means gives an infinite F, p = 0, and the degenerate flag.
AnovaResult one_way_anova(const std::vector<double>& values, const std::vector<int>& labels);

/// MANOVA on an observations-by-variables matrix. Wilks' lambda is
/// det(W)/det(W+B) over the within/between cross-product matrices; the
/// p-value comes from Rao's F approximation. A rank-deficient total
/// cross-product matrix throws std::runtime_error naming the collinear
/// variables (names taken from `variable_names` when provided). A single
/// column reproduces one_way_anova's F exactly.
ManovaResult manova(const Eigen::MatrixXd& values, const std::vector<int>& labels,
                    const std::vector<std::string>& variable_names = {});

/// Fisher LSD pairwise comparisons on the pooled within-group variance: for
/// each unordered pair of clusters, the mean difference and a two-sided p
/// from t with the ANOVA within degrees of freedom. No multiplicity
/// correction on `significant`; the Bonferroni flag divides 0.05 by the
/// number of pairs.
PairwiseTable pairwise_comparisons(const std::vector<double>& values,
                                   const std::vector<int>& labels);

/// Per-cluster describe_sample over the projects of each cluster, in label
/// order. `projects` must line up with `solution.assignment`.
ClusterProfile cluster_profile(const std::vector<ProjectSeries>& projects,
                               const ClusterSolution& solution);

/// Pearson correlation of two equal-length sequences (n >= 3); throws
/// std::invalid_argument on shorter input, a length mismatch, or zero
/// variance in either sequence.
Correlation pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace evofda
