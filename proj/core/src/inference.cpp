#include "evofda/inference.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace evofda {

namespace {

constexpr double kAlpha = 0.05;

struct Grouped {
    std::vector<int> labels;               // distinct labels, ascending
    std::vector<std::vector<double>> groups; // values per label, same order
    std::size_t n = 0;
};

Grouped group_values(const std::vector<double>& values, const std::vector<int>& labels) {
    if (values.size() != labels.size())
        throw std::invalid_argument("inference: values and labels differ in length");
    std::map<int, std::vector<double>> by_label;
    for (std::size_t i = 0; i < values.size(); ++i) by_label[labels[i]].push_back(values[i]);
    Grouped g;
    g.n = values.size();
    for (auto& [label, group] : by_label) {
        g.labels.push_back(label);
        g.groups.push_back(std::move(group));
    }
    if (g.labels.size() < 2) throw std::invalid_argument("inference: need at least two groups");
    if (g.n <= g.labels.size())
        throw std::invalid_argument("inference: need more observations than groups");
    return g;
}

double mean_of(const std::vector<double>& xs) {
    double sum = 0;
    for (double x : xs) sum += x;
    return sum / double(xs.size());
}

} // namespace

double f_cdf(double f, double df1, double df2) {
    if (f <= 0) return 0;
    if (std::isinf(f)) return 1;
    const double x = df1 * f / (df1 * f + df2);
    return boost::math::ibeta(df1 / 2, df2 / 2, x);
}

double t_two_sided_p(double t, double df) {
    if (std::isinf(t)) return 0;
    const double x = df / (df + t * t);
    return boost::math::ibeta(df / 2, 0.5, x);
}

AnovaResult one_way_anova(const std::vector<double>& values, const std::vector<int>& labels) {
    const Grouped g = group_values(values, labels);
    const double grand = mean_of(values);

    double ssb = 0, ssw = 0;
    for (const auto& group : g.groups) {
        const double m = mean_of(group);
        ssb += double(group.size()) * (m - grand) * (m - grand);
        for (double x : group) ssw += (x - m) * (x - m);
    }

    AnovaResult r;
    r.df_between = int(g.labels.size()) - 1;
    r.df_within = int(g.n - g.labels.size());
    if (ssw == 0 && ssb == 0) {
        // All values identical: no variation to attribute.
        return r;
    }
    if (ssw == 0) {
        r.f = std::numeric_limits<double>::infinity();
        r.p_value = 0;
        r.eta_squared = 1;
        r.degenerate = true;
        return r;
    }
    r.f = (ssb / r.df_between) / (ssw / r.df_within);
    r.p_value = boost::math::ibetac(r.df_between / 2.0, r.df_within / 2.0,
                                    r.df_between * r.f / (r.df_between * r.f + r.df_within));
    r.eta_squared = ssb / (ssb + ssw);
    return r;
}

ManovaResult manova(const Eigen::MatrixXd& values, const std::vector<int>& labels,
                    const std::vector<std::string>& variable_names) {
    const Eigen::Index n = values.rows();
    const Eigen::Index p = values.cols();
    if (std::size_t(n) != labels.size())
        throw std::invalid_argument("manova: values and labels differ in length");
    if (p < 1) throw std::invalid_argument("manova: need at least one variable");

    std::map<int, std::vector<Eigen::Index>> by_label;
    for (Eigen::Index i = 0; i < n; ++i) by_label[labels[i]].push_back(i);
    const std::size_t q_groups = by_label.size();
    if (q_groups < 2) throw std::invalid_argument("manova: need at least two groups");
    if (std::size_t(n) <= q_groups + std::size_t(p))
        throw std::invalid_argument("manova: need more observations than variables plus groups");

    const Eigen::RowVectorXd grand = values.colwise().mean();
    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd between = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [label, rows] : by_label) {
        Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(p);
        for (Eigen::Index i : rows) m += values.row(i);
        m /= double(rows.size());
        for (Eigen::Index i : rows) {
            const Eigen::RowVectorXd d = values.row(i) - m;
            within += d.transpose() * d;
        }
        const Eigen::RowVectorXd d = m - grand;
        between += double(rows.size()) * d.transpose() * d;
    }
    const Eigen::MatrixXd total = within + between;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(total);
    if (qr.rank() < p) {
        // The permutation sorts columns by decreasing pivot; the trailing
        // ones past the numerical rank are the linearly dependent variables.
        std::string names;
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < p; ++j) {
            if (!names.empty()) names += ", ";
            const Eigen::Index col = perm(j);
            if (std::size_t(col) < variable_names.size())
                names += variable_names[col];
            else
                names += "var" + std::to_string(col + 1);
        }
        throw std::runtime_error("manova: singular total cross-product matrix; collinear variables: " + names);
    }

    ManovaResult r;
    const double lambda = within.determinant() / total.determinant();
    r.wilks_lambda = std::clamp(lambda, 0.0, 1.0);

    const double pp = double(p);
    const double qq = double(q_groups) - 1; // hypothesis degrees of freedom
    const double t = (pp * pp + qq * qq - 5 > 0)
                         ? std::sqrt((pp * pp * qq * qq - 4) / (pp * pp + qq * qq - 5))
                         : 1.0;
    const double w = double(n) - 1 - (pp + qq + 1) / 2;
    r.df1 = pp * qq;
    r.df2 = w * t - pp * qq / 2 + 1;
    const double root = t == 1.0 ? r.wilks_lambda : std::pow(r.wilks_lambda, 1.0 / t);
    if (root == 0) {
        r.f_approx = std::numeric_limits<double>::infinity();
        r.p_value = 0;
        return r;
    }
    r.f_approx = (1 - root) / root * (r.df2 / r.df1);
    r.p_value = boost::math::ibetac(r.df1 / 2, r.df2 / 2,
                                    r.df1 * r.f_approx / (r.df1 * r.f_approx + r.df2));
    return r;
}

PairwiseTable pairwise_comparisons(const std::vector<double>& values,
                                   const std::vector<int>& labels) {
    const Grouped g = group_values(values, labels);
    const std::size_t k = g.labels.size();

    std::vector<double> means(k);
    double ssw = 0;
    for (std::size_t i = 0; i < k; ++i) {
        means[i] = mean_of(g.groups[i]);
        for (double x : g.groups[i]) ssw += (x - means[i]) * (x - means[i]);
    }

    PairwiseTable table;
    table.df_within = int(g.n - k);
    table.degenerate = ssw == 0;
    table.pooled_mse = ssw / table.df_within;
    const std::size_t pairs = k * (k - 1) / 2;

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            PairwiseComparison c;
            c.cluster_a = g.labels[a];
            c.cluster_b = g.labels[b];
            c.mean_difference = means[a] - means[b];
            if (table.degenerate) {
                c.p_value = c.mean_difference == 0 ? 1 : 0;
            } else {
                const double se = std::sqrt(table.pooled_mse *
                                            (1.0 / double(g.groups[a].size()) + 1.0 / double(g.groups[b].size())));
                c.p_value = t_two_sided_p(c.mean_difference / se, double(table.df_within));
            }
            c.significant = c.p_value < kAlpha;
            c.significant_bonferroni = c.p_value < kAlpha / double(pairs);
            table.comparisons.push_back(c);
        }
    }
    return table;
}

ClusterProfile cluster_profile(const std::vector<ProjectSeries>& projects,
                               const ClusterSolution& solution) {
    if (projects.size() != solution.assignment.size())
        throw std::invalid_argument("cluster_profile: assignment does not cover the projects");
    std::map<int, std::vector<ProjectSeries>> by_cluster;
    for (std::size_t i = 0; i < projects.size(); ++i)
        by_cluster[solution.assignment[i]].push_back(projects[i]);

    ClusterProfile profile;
    for (auto& [cluster, members] : by_cluster) {
        profile.clusters.push_back(cluster);
        profile.counts.push_back(members.size());
        profile.stats.push_back(describe_sample(members));
    }
    return profile;
}

Correlation pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("pearson_correlation: length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("pearson_correlation: need at least 3 points");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0 || syy == 0)
        throw std::invalid_argument("pearson_correlation: zero variance");

    Correlation c;
    c.n = xs.size();
    c.r = sxy / std::sqrt(sxx * syy);
    const double df = double(c.n) - 2;
    const double r2 = std::min(c.r * c.r, 1.0);
    if (r2 == 1.0) {
        c.p_value = 0;
    } else {
        const double t = c.r * std::sqrt(df / (1 - r2));
        c.p_value = t_two_sided_p(t, df);
    }
    return c;
}

} // namespace evofda
