#include "evofda/pipeline.hpp"

#include "evofda/svg.hpp"
#include "evofda/textio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace evofda {

namespace {

using nlohmann::json;

/// Wraps one pipeline stage so failures identify where they happened.
template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
    }
}

/// Collects the files a run writes so a failed run leaves nothing behind.
class OutputTracker {
public:
    explicit OutputTracker(std::string dir) : dir_(std::move(dir)) {}
    OutputTracker(const OutputTracker&) = delete;
    OutputTracker& operator=(const OutputTracker&) = delete;

    void write(const std::string& name, std::string_view content) {
        const std::string path = dir_ + "/" + name;
        write_file(path, content);
        written_.push_back(path);
    }

    std::vector<std::string> commit() {
        committed_ = true;
        return std::move(written_);
    }

    ~OutputTracker() {
        if (committed_) return;
        for (const std::string& path : written_) std::remove(path.c_str());
    }

private:
    std::string dir_;
    std::vector<std::string> written_;
    bool committed_ = false;
};

void validate_config(const PipelineConfig& config) {
    if (config.knots < 2) throw std::invalid_argument("knots must be at least 2");
    if (config.k_min < 2 || config.k_min > config.k_max)
        throw std::invalid_argument("k range must satisfy 2 <= k_min <= k_max");
    if (config.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (config.lambda && *config.lambda < 0)
        throw std::invalid_argument("lambda must be non-negative");
    if (!config.lambda && config.target_edf < 2)
        throw std::invalid_argument("target effective degrees of freedom must be at least 2");
    if (config.screening.min_release_count < 1)
        throw std::invalid_argument("screening min_release_count must be at least 1");
}

FeatureMatrix make_features(const std::vector<SplineFit>& fits,
                            const std::vector<std::string>& ids, FeatureKind kind) {
    FeatureMatrix features;
    features.project_ids = ids;
    features.feature_kind = kind;
    for (const SplineFit& fit : fits) {
        if (kind == FeatureKind::coefficients)
            features.rows.emplace_back(fit.coefficients.data(),
                                       fit.coefficients.data() + fit.coefficients.size());
        else
            features.rows.push_back(fit.fitted_values);
    }
    return features;
}

/// Sign of each cluster mean's net standardized change (day 730 - day 0).
std::vector<int> shape_signature(const std::vector<SplineFit>& fits,
                                 const ClusterSolution& solution) {
    std::vector<double> net(solution.k, 0.0);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const std::vector<double>& fv = fits[i].fitted_values;
        net[solution.assignment[i] - 1] += fv.back() - fv.front();
    }
    std::vector<int> signs(solution.k, 0);
    for (int c = 0; c < solution.k; ++c) signs[c] = net[c] > 0 ? 1 : net[c] < 0 ? -1 : 0;
    return signs;
}

std::vector<int> cluster_sizes(const ClusterSolution& solution) {
    std::vector<int> sizes(solution.k, 0);
    for (int label : solution.assignment) ++sizes[label - 1];
    return sizes;
}

json knots_to_json(const KnotGrid& knots) {
    return json{{"t_min", knots.t_min}, {"t_max", knots.t_max}, {"interior", knots.interior}};
}

json stats_to_json(const DescriptiveStats& stats) {
    json measures = json::object();
    for (const MeasureStats& m : stats.measures)
        measures[m.measure] =
            json{{"mean", m.mean}, {"stddev", m.stddev}, {"min", m.min}, {"max", m.max}};
    return json{{"project_count", stats.project_count}, {"measures", measures}};
}

json anova_to_json(const AnovaResult& r) {
    return json{{"f", r.f},
                {"df_between", r.df_between},
                {"df_within", r.df_within},
                {"p_value", r.p_value},
                {"eta_squared", r.eta_squared},
                {"degenerate", r.degenerate}};
}

json pairwise_to_json(const PairwiseTable& table) {
    json comparisons = json::array();
    for (const PairwiseComparison& c : table.comparisons)
        comparisons.push_back(json{{"cluster_a", c.cluster_a},
                                   {"cluster_b", c.cluster_b},
                                   {"mean_difference", c.mean_difference},
                                   {"p_value", c.p_value},
                                   {"significant", c.significant},
                                   {"significant_bonferroni", c.significant_bonferroni}});
    return json{{"comparisons", comparisons},
                {"df_within", table.df_within},
                {"pooled_mse", table.pooled_mse},
                {"degenerate", table.degenerate}};
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

/// Report p against the conventional thresholds, exact value otherwise.
std::string fmt_p(double p) {
    if (p < 0.001) return "p < 0.001";
    if (p < 0.01) return "p < 0.01";
    if (p < 0.05) return "p < 0.05";
    return "p = " + fmt("%.3f", p);
}

std::string fmt_f_test(double f, double df1, double df2, double p) {
    return "F" + fmt("%g", df1) + "," + fmt("%g", df2) + " = " + fmt("%.3f", f) + ", " + fmt_p(p);
}

/// The two outcome variables every cluster solution is tested on.
constexpr const char* kOutcomeNames[2] = {"percent_change", "active_life_days"};

std::vector<double> outcome_column(const Analysis& analysis, int which) {
    std::vector<double> column;
    column.reserve(analysis.outcomes.size());
    for (const OutcomeScalars& o : analysis.outcomes)
        column.push_back(which == 0 ? o.percent_change : double(o.active_life));
    return column;
}

json inference_to_json(const Analysis& analysis, const ClusterSolution& solution) {
    json report;
    report["k"] = solution.k;
    report["variables"] = json::array({kOutcomeNames[0], kOutcomeNames[1]});

    json anova = json::object();
    json pairwise = json::object();
    for (int v = 0; v < 2; ++v) {
        const std::vector<double> column = outcome_column(analysis, v);
        try {
            anova[kOutcomeNames[v]] = anova_to_json(one_way_anova(column, solution.assignment));
            pairwise[kOutcomeNames[v]] = pairwise_to_json(pairwise_comparisons(column, solution.assignment));
        } catch (const std::exception& e) {
            anova[kOutcomeNames[v]] = json{{"error", e.what()}};
        }
    }
    report["anova"] = anova;
    report["pairwise"] = pairwise;

    try {
        Eigen::MatrixXd vars(analysis.outcomes.size(), 2);
        for (std::size_t i = 0; i < analysis.outcomes.size(); ++i) {
            vars(Eigen::Index(i), 0) = analysis.outcomes[i].percent_change;
            vars(Eigen::Index(i), 1) = double(analysis.outcomes[i].active_life);
        }
        const ManovaResult m =
            manova(vars, solution.assignment, {kOutcomeNames[0], kOutcomeNames[1]});
        report["manova"] = json{{"wilks_lambda", m.wilks_lambda},
                                {"f_approx", m.f_approx},
                                {"df1", m.df1},
                                {"df2", m.df2},
                                {"p_value", m.p_value}};
    } catch (const std::exception& e) {
        report["manova"] = json{{"error", e.what()}};
    }

    const ClusterProfile profile = cluster_profile(analysis.screening.kept, solution);
    json clusters = json::array();
    for (std::size_t c = 0; c < profile.clusters.size(); ++c)
        clusters.push_back(json{{"cluster", profile.clusters[c]},
                                {"count", profile.counts[c]},
                                {"stats", stats_to_json(profile.stats[c])}});
    report["profile"] = clusters;

    try {
        std::vector<double> loc, cplxlcoh;
        for (const ProjectSeries& p : analysis.screening.kept) {
            loc.push_back(double(p.last().loc));
            cplxlcoh.push_back(p.last().cplxlcoh);
        }
        const Correlation corr = pearson_correlation(loc, cplxlcoh);
        report["loc_cplxlcoh_correlation"] =
            json{{"r", corr.r}, {"p_value", corr.p_value}, {"n", corr.n}};
    } catch (const std::exception& e) {
        report["loc_cplxlcoh_correlation"] = json{{"error", e.what()}};
    }
    return report;
}

std::string inference_text(const Analysis& analysis, const ClusterSolution& solution) {
    std::string text;
    text += "cluster solution k = " + std::to_string(solution.k) + " (seed " +
            std::to_string(solution.seed) + ", n = " + std::to_string(analysis.kept_ids.size()) +
            ")\n";
    text += "config = " + config_json(analysis.config) + "\n\n";

    text += "cluster sizes:";
    for (int size : cluster_sizes(solution)) text += " " + std::to_string(size);
    text += "\n\n";

    try {
        Eigen::MatrixXd vars(analysis.outcomes.size(), 2);
        for (std::size_t i = 0; i < analysis.outcomes.size(); ++i) {
            vars(Eigen::Index(i), 0) = analysis.outcomes[i].percent_change;
            vars(Eigen::Index(i), 1) = double(analysis.outcomes[i].active_life);
        }
        const ManovaResult m =
            manova(vars, solution.assignment, {kOutcomeNames[0], kOutcomeNames[1]});
        text += "multivariate: Wilks lambda = " + fmt("%.4f", m.wilks_lambda) + ", " +
                fmt_f_test(m.f_approx, m.df1, m.df2, m.p_value) + "\n\n";
    } catch (const std::exception& e) {
        text += std::string("multivariate: not computed (") + e.what() + ")\n\n";
    }

    for (int v = 0; v < 2; ++v) {
        const std::vector<double> column = outcome_column(analysis, v);
        text += std::string(kOutcomeNames[v]) + ": ";
        try {
            const AnovaResult r = one_way_anova(column, solution.assignment);
            text += fmt_f_test(r.f, r.df_between, r.df_within, r.p_value) +
                    ", eta^2 = " + fmt("%.4f", r.eta_squared);
            if (r.degenerate) text += " (degenerate: zero within-group variance)";
            text += "\n";
            const PairwiseTable table = pairwise_comparisons(column, solution.assignment);
            text += "  pairwise (Fisher LSD, df = " + std::to_string(table.df_within) + "):\n";
            for (const PairwiseComparison& c : table.comparisons) {
                text += "    " + std::to_string(c.cluster_a) + " vs " +
                        std::to_string(c.cluster_b) + ": difference = " +
                        fmt("%.4f", c.mean_difference) + ", " + fmt_p(c.p_value) +
                        (c.significant ? " *" : "") + "\n";
            }
        } catch (const std::exception& e) {
            text += std::string("not computed (") + e.what() + ")\n";
        }
        text += "\n";
    }

    const ClusterProfile profile = cluster_profile(analysis.screening.kept, solution);
    text += "profile (cluster means):\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-28s", "measure");
    text += line;
    for (std::size_t c = 0; c < profile.clusters.size(); ++c) {
        std::snprintf(line, sizeof line, " %12s",
                      ("c" + std::to_string(profile.clusters[c])).c_str());
        text += line;
    }
    text += "\n";
    const std::size_t measure_count = profile.stats.front().measures.size();
    for (std::size_t m = 0; m < measure_count; ++m) {
        std::snprintf(line, sizeof line, "%-28s", profile.stats.front().measures[m].measure.c_str());
        text += line;
        for (const DescriptiveStats& stats : profile.stats) {
            std::snprintf(line, sizeof line, " %12.3f", stats.measures[m].mean);
            text += line;
        }
        text += "\n";
    }
    return text;
}

std::string band_csv(const MeanBand& band, const std::string& stamp) {
    std::string out = "# config = " + stamp + "\n";
    out += "day,mean,lower,upper\n";
    for (std::size_t d = 0; d < band.mean.size(); ++d) {
        out += std::to_string(d);
        out += ',';
        out += format_double(band.mean[d]);
        out += ',';
        out += format_double(band.lower[d]);
        out += ',';
        out += format_double(band.upper[d]);
        out += '\n';
    }
    return out;
}

std::string band_svg(const MeanBand& band, const std::string& title, const std::string& stamp) {
    SvgPlot plot;
    plot.title = title;
    plot.x_label = "day";
    plot.y_label = "CplXLCoh";
    SvgBand region;
    region.xs = daily_grid();
    region.lower = band.lower;
    region.upper = band.upper;
    plot.bands.push_back(std::move(region));
    SvgSeries mean;
    mean.label = "mean";
    mean.xs = daily_grid();
    mean.ys = band.mean;
    mean.width = 2;
    plot.series.push_back(std::move(mean));
    return "<!-- config = " + stamp + " -->\n" + render_svg(plot);
}

/// Per-cluster means of the standardized fitted curves plus the overall mean.
struct ClusterMeans {
    std::vector<std::vector<double>> per_cluster; // [cluster][day]
    std::vector<double> overall;
    std::vector<int> sizes;
};

ClusterMeans cluster_mean_curves(const Analysis& analysis, const ClusterSolution& solution) {
    ClusterMeans means;
    means.per_cluster.assign(solution.k, std::vector<double>(kCurveLength, 0.0));
    means.overall.assign(kCurveLength, 0.0);
    means.sizes = cluster_sizes(solution);
    for (std::size_t i = 0; i < analysis.std_fits.size(); ++i) {
        const std::vector<double>& fv = analysis.std_fits[i].fitted_values;
        std::vector<double>& target = means.per_cluster[solution.assignment[i] - 1];
        for (std::size_t d = 0; d < kCurveLength; ++d) {
            target[d] += fv[d];
            means.overall[d] += fv[d];
        }
    }
    for (int c = 0; c < solution.k; ++c)
        for (double& v : means.per_cluster[c]) v /= double(means.sizes[c]);
    for (double& v : means.overall) v /= double(analysis.std_fits.size());
    return means;
}

std::string cluster_means_csv(const ClusterMeans& means, const std::string& stamp) {
    std::string out = "# config = " + stamp + "\n";
    out += "day";
    for (std::size_t c = 0; c < means.per_cluster.size(); ++c)
        out += ",cluster_" + std::to_string(c + 1);
    out += ",overall\n";
    for (std::size_t d = 0; d < kCurveLength; ++d) {
        out += std::to_string(d);
        for (const std::vector<double>& curve : means.per_cluster) {
            out += ',';
            out += format_double(curve[d]);
        }
        out += ',';
        out += format_double(means.overall[d]);
        out += '\n';
    }
    return out;
}

std::string cluster_means_svg(const ClusterMeans& means, int k, const std::string& stamp) {
    SvgPlot plot;
    plot.title = "cluster mean curves, k = " + std::to_string(k) + " (standardized)";
    plot.x_label = "day";
    plot.y_label = "standardized CplXLCoh";
    const std::vector<std::string>& palette = cluster_palette();
    for (std::size_t c = 0; c < means.per_cluster.size(); ++c) {
        SvgSeries series;
        series.label = "cluster " + std::to_string(c + 1) + " (n = " +
                       std::to_string(means.sizes[c]) + ")";
        series.xs = daily_grid();
        series.ys = means.per_cluster[c];
        series.color = palette[c % palette.size()];
        series.width = 2;
        plot.series.push_back(std::move(series));
    }
    SvgSeries overall;
    overall.label = "overall mean";
    overall.xs = daily_grid();
    overall.ys = means.overall;
    overall.color = "#333333";
    overall.dashed = true;
    plot.series.push_back(std::move(overall));
    return "<!-- config = " + stamp + " -->\n" + render_svg(plot);
}

json fits_to_json(const Analysis& analysis, const std::vector<SplineFit>& fits) {
    json per_project = json::object();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const SplineFit& fit = fits[i];
        std::vector<double> coefficients(fit.coefficients.data(),
                                         fit.coefficients.data() + fit.coefficients.size());
        per_project[analysis.kept_ids[i]] = json{{"coefficients", coefficients},
                                                 {"lambda", fit.lambda},
                                                 {"edf", fit.edf},
                                                 {"rss", fit.rss},
                                                 {"ridged", fit.ridged}};
    }
    return json{{"config", json::parse(config_json(analysis.config))},
                {"knots", knots_to_json(analysis.knots)},
                {"lambda", analysis.lambda},
                {"edf", analysis.edf},
                {"fits", per_project}};
}

json solution_to_json(const Analysis& analysis, const ClusterSolution& solution) {
    json assignment = json::object();
    for (std::size_t i = 0; i < analysis.kept_ids.size(); ++i)
        assignment[analysis.kept_ids[i]] = solution.assignment[i];
    json medoids = json::array();
    for (int medoid : solution.medoids) medoids.push_back(analysis.kept_ids[medoid]);
    json j{{"config", json::parse(config_json(analysis.config))},
           {"k", solution.k},
           {"seed", solution.seed},
           {"medoids", medoids},
           {"assignment", assignment},
           {"objective", solution.total_dissimilarity},
           {"avg_within", solution.avg_within},
           {"avg_between", solution.avg_between},
           {"iterations", solution.iterations},
           {"sizes", cluster_sizes(solution)},
           {"shape_signature", shape_signature(analysis.std_fits, solution)}};
    const auto ari = analysis.truth_ari.find(solution.k);
    if (ari != analysis.truth_ari.end()) j["truth_ari"] = ari->second;
    return j;
}

json summary_to_json(const Analysis& analysis) {
    json rejected = json::array();
    for (const RejectedProject& r : analysis.screening.rejected)
        rejected.push_back(json{{"project_id", r.project_id}, {"reason", r.reason}});
    json solutions = json::array();
    for (const ClusterSolution& solution : analysis.solutions) {
        json s{{"k", solution.k},
               {"objective", solution.total_dissimilarity},
               {"sizes", cluster_sizes(solution)},
               {"avg_within", solution.avg_within},
               {"avg_between", solution.avg_between},
               {"iterations", solution.iterations},
               {"shape_signature", shape_signature(analysis.std_fits, solution)}};
        const auto ari = analysis.truth_ari.find(solution.k);
        if (ari != analysis.truth_ari.end()) s["truth_ari"] = ari->second;
        solutions.push_back(std::move(s));
    }
    return json{{"config", json::parse(config_json(analysis.config))},
                {"projects_loaded", analysis.projects.size()},
                {"projects_kept", analysis.kept_ids.size()},
                {"rejected", rejected},
                {"knots", knots_to_json(analysis.knots)},
                {"lambda", analysis.lambda},
                {"edf", analysis.edf},
                {"clustered", analysis.clustered},
                {"solutions", solutions},
                {"notices", analysis.notices}};
}

} // namespace

std::string_view feature_kind_name(FeatureKind kind) {
    return kind == FeatureKind::coefficients ? "coefficients" : "fitted_values";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
    if (name == "coefficients") return FeatureKind::coefficients;
    if (name == "fitted_values") return FeatureKind::fitted_values;
    return std::nullopt;
}

std::string config_json(const PipelineConfig& config) {
    json j{{"input_csv", config.input_csv},
           {"truth_csv", config.truth_csv},
           {"output_dir", config.output_dir},
           {"screening",
            json{{"min_loc_growth_fraction", config.screening.min_loc_growth_fraction},
                 {"min_release_count", config.screening.min_release_count},
                 {"require_any_positive_growth", config.screening.require_any_positive_growth}}},
           {"knots", config.knots},
           {"lambda", config.lambda ? json(*config.lambda) : json()},
           {"target_edf", config.target_edf},
           {"feature_kind", std::string(feature_kind_name(config.feature_kind))},
           {"k_min", config.k_min},
           {"k_max", config.k_max},
           {"seed", config.seed},
           {"restarts", config.restarts}};
    return j.dump();
}

Analysis run_analysis(const PipelineConfig& config) {
    std::vector<ProjectSeries> projects = stage("load", [&] {
        if (config.input_csv.empty()) throw std::invalid_argument("input_csv is required");
        return load_releases(read_file(config.input_csv));
    });
    return run_analysis(config, std::move(projects));
}

Analysis run_analysis(const PipelineConfig& config, std::vector<ProjectSeries> projects) {
    stage("config", [&] {
        validate_config(config);
        return 0;
    });

    Analysis analysis;
    analysis.config = config;
    analysis.projects = std::move(projects);

    analysis.screening = stage("screen", [&] {
        return screen_projects(analysis.projects, config.screening);
    });

    stage("curves", [&] {
        for (const ProjectSeries& project : analysis.screening.kept) {
            AlignedSeries aligned = align_and_truncate(project);
            DailyCurve raw = to_daily_step(aligned);
            analysis.outcomes.push_back(outcome_scalars(aligned));
            analysis.std_curves.push_back(standardize(raw));
            analysis.raw_curves.push_back(std::move(raw));
            analysis.aligned.push_back(std::move(aligned));
            analysis.kept_ids.push_back(project.project_id);
        }
        return 0;
    });

    stage("fit", [&] {
        analysis.knots = make_knot_grid(config.knots);
        const std::vector<double>& grid = daily_grid();
        analysis.lambda =
            config.lambda ? *config.lambda : lambda_for_edf(analysis.knots, grid, config.target_edf);
        analysis.edf = effective_df(analysis.knots, grid, analysis.lambda);
        for (const DailyCurve& curve : analysis.raw_curves)
            analysis.raw_fits.push_back(fit_smoothing_spline(curve, analysis.knots, analysis.lambda));
        for (const DailyCurve& curve : analysis.std_curves)
            analysis.std_fits.push_back(fit_smoothing_spline(curve, analysis.knots, analysis.lambda));
        return 0;
    });

    const int n = int(analysis.kept_ids.size());
    if (n < 2) {
        analysis.notices.push_back(
            "n < 2 after screening: mean band, clustering, and inference skipped");
        return analysis;
    }

    const int k_hi = std::min(config.k_max, n);
    if (k_hi < config.k_min) {
        analysis.notices.push_back("clustering skipped: only " + std::to_string(n) +
                                   " projects for k_min = " + std::to_string(config.k_min));
    } else {
        if (k_hi < config.k_max)
            analysis.notices.push_back("k range clipped at n = " + std::to_string(n));
        stage("cluster", [&] {
            const FeatureMatrix features =
                make_features(analysis.std_fits, analysis.kept_ids, config.feature_kind);
            const Eigen::MatrixXd dist = distance_matrix(features);
            analysis.solutions = sweep_k(dist, config.k_min, k_hi, config.seed, config.restarts);
            analysis.clustered = true;
            return 0;
        });
    }

    if (!config.truth_csv.empty()) {
        stage("truth", [&] {
            const std::map<std::string, std::string> truth =
                load_truth(read_file(config.truth_csv));
            std::vector<int> labels;
            std::map<std::string, int> label_ids;
            for (const std::string& id : analysis.kept_ids) {
                const auto found = truth.find(id);
                if (found == truth.end()) {
                    analysis.notices.push_back("truth file does not cover project '" + id +
                                               "'; recovery scoring skipped");
                    return 0;
                }
                labels.push_back(
                    label_ids.emplace(found->second, int(label_ids.size())).first->second);
            }
            analysis.truth_labels = labels;
            for (const ClusterSolution& solution : analysis.solutions)
                analysis.truth_ari[solution.k] = adjusted_rand_index(solution.assignment, labels);
            return 0;
        });
    }
    return analysis;
}

std::string screening_csv(const ScreeningResult& screening, const PipelineConfig& config) {
    std::string out = "# config = " + config_json(config) + "\n";
    out += "project_id,kept,reason\n";
    for (const ProjectSeries& p : screening.kept) out += p.project_id + ",1,\n";
    for (const RejectedProject& r : screening.rejected)
        out += r.project_id + ",0," + r.reason + "\n";
    return out;
}

std::string descriptives_json(const DescriptiveStats& stats, const PipelineConfig& config) {
    json j = stats_to_json(stats);
    j["config"] = json::parse(config_json(config));
    return j.dump(2) + "\n";
}

std::map<std::string, std::string> load_truth(std::string_view csv_content) {
    const auto lines = split_lines(csv_content);
    std::size_t header_at = 0;
    while (header_at < lines.size() && trim(lines[header_at]).starts_with('#')) ++header_at;
    if (header_at == lines.size() || trim(lines[header_at]) != "project_id,family")
        throw ParseError(header_at + 1, "truth CSV must start with 'project_id,family'");
    std::map<std::string, std::string> truth;
    for (std::size_t ln = header_at + 1; ln < lines.size(); ++ln) {
        if (trim(lines[ln]).empty()) continue;
        const auto fields = split_csv(lines[ln]);
        if (fields.size() != 2) throw ParseError(ln + 1, "expected 2 fields");
        const std::string id(trim(fields[0]));
        if (id.empty()) throw ParseError(ln + 1, "empty project_id");
        if (!truth.emplace(id, std::string(trim(fields[1]))).second)
            throw ParseError(ln + 1, "duplicate project_id '" + id + "'");
    }
    return truth;
}

std::vector<std::string> write_run_bundle(const Analysis& analysis) {
    const PipelineConfig& config = analysis.config;
    const std::string stamp = config_json(config);
    OutputTracker out(config.output_dir);

    stage("output", [&] {
        std::filesystem::create_directories(config.output_dir);
        out.write("config.json", json::parse(stamp).dump(2) + "\n");
        out.write("screening.csv", screening_csv(analysis.screening, config));
        if (!analysis.screening.kept.empty())
            out.write("descriptives.json",
                      descriptives_json(describe_sample(analysis.screening.kept), config));

        const std::vector<std::string> comments = {"config = " + stamp};
        out.write("curves_raw.csv", write_curves_csv(analysis.raw_curves, comments));
        out.write("curves_standardized.csv", write_curves_csv(analysis.std_curves, comments));
        out.write("fits_raw.json", fits_to_json(analysis, analysis.raw_fits).dump(2) + "\n");
        out.write("fits_standardized.json",
                  fits_to_json(analysis, analysis.std_fits).dump(2) + "\n");

        std::string outcomes = "# config = " + stamp + "\n";
        outcomes += "project_id,percent_change,active_life_days\n";
        for (std::size_t i = 0; i < analysis.kept_ids.size(); ++i) {
            outcomes += analysis.kept_ids[i] + "," +
                        format_double(analysis.outcomes[i].percent_change) + "," +
                        std::to_string(analysis.outcomes[i].active_life) + "\n";
        }
        out.write("outcomes.csv", outcomes);

        if (analysis.kept_ids.size() >= 2) {
            const MeanBand raw_band = mean_curve_with_ci(analysis.raw_fits);
            const MeanBand std_band = mean_curve_with_ci(analysis.std_fits);
            out.write("mean_band_raw.csv", band_csv(raw_band, stamp));
            out.write("mean_band_standardized.csv", band_csv(std_band, stamp));
            out.write("mean_band_raw.svg",
                      band_svg(raw_band, "mean CplXLCoh with 95% pointwise band", stamp));
            out.write("mean_band_standardized.svg",
                      band_svg(std_band, "mean standardized CplXLCoh with 95% pointwise band",
                               stamp));
        }

        if (analysis.clustered) {
            std::string sizes_csv = "# config = " + stamp + "\n";
            sizes_csv += "k";
            for (int c = 1; c <= config.k_max; ++c) sizes_csv += ",size_" + std::to_string(c);
            sizes_csv += "\n";

            std::string assignments = "# config = " + stamp + "\n";
            assignments += "project_id";
            for (const ClusterSolution& solution : analysis.solutions)
                assignments += ",k" + std::to_string(solution.k);
            assignments += "\n";
            for (std::size_t i = 0; i < analysis.kept_ids.size(); ++i) {
                assignments += analysis.kept_ids[i];
                for (const ClusterSolution& solution : analysis.solutions)
                    assignments += "," + std::to_string(solution.assignment[i]);
                assignments += "\n";
            }

            for (const ClusterSolution& solution : analysis.solutions) {
                const std::string suffix = "_k" + std::to_string(solution.k);
                out.write("clusters" + suffix + ".json",
                          solution_to_json(analysis, solution).dump(2) + "\n");

                const ClusterMeans means = cluster_mean_curves(analysis, solution);
                out.write("cluster_means" + suffix + ".csv", cluster_means_csv(means, stamp));
                out.write("cluster_means" + suffix + ".svg",
                          cluster_means_svg(means, solution.k, stamp));

                json inference = inference_to_json(analysis, solution);
                inference["config"] = json::parse(stamp);
                out.write("inference" + suffix + ".json", inference.dump(2) + "\n");
                out.write("report" + suffix + ".txt", inference_text(analysis, solution));

                const std::vector<int> sizes = cluster_sizes(solution);
                sizes_csv += std::to_string(solution.k);
                for (int c = 0; c < config.k_max; ++c) {
                    sizes_csv += ',';
                    if (c < int(sizes.size())) sizes_csv += std::to_string(sizes[c]);
                }
                sizes_csv += "\n";
            }
            out.write("cluster_sizes.csv", sizes_csv);
            out.write("assignments.csv", assignments);
        }

        out.write("run_summary.json", summary_to_json(analysis).dump(2) + "\n");
        return 0;
    });
    return out.commit();
}

SensitivityReport run_sensitivity(const PipelineConfig& base, const SensitivityAxes& axes) {
    stage("config", [&] {
        validate_config(base);
        if (axes.k < 2) throw std::invalid_argument("sensitivity k must be at least 2");
        if (axes.knot_counts.empty() || axes.lambda_modes.empty() || axes.feature_kinds.empty() ||
            axes.screening_modes.empty())
            throw std::invalid_argument("sensitivity axes must be non-empty");
        for (const std::string& mode : axes.lambda_modes)
            if (mode != "low" && mode != "default" && mode != "high")
                throw std::invalid_argument("unknown lambda mode '" + mode + "'");
        for (const std::string& mode : axes.screening_modes)
            if (mode != "default" && mode != "min3" && mode != "any_growth")
                throw std::invalid_argument("unknown screening mode '" + mode + "'");
        return 0;
    });

    const std::vector<ProjectSeries> projects = stage("load", [&] {
        if (base.input_csv.empty()) throw std::invalid_argument("input_csv is required");
        return load_releases(read_file(base.input_csv));
    });

    SensitivityReport report;
    report.axes = axes;
    for (int knots : axes.knot_counts) {
        for (const std::string& lambda_mode : axes.lambda_modes) {
            for (FeatureKind feature_kind : axes.feature_kinds) {
                for (const std::string& screening_mode : axes.screening_modes) {
                    SensitivityVariant variant;
                    variant.knots = knots;
                    variant.lambda_mode = lambda_mode;
                    variant.feature_kind = feature_kind;
                    variant.screening_mode = screening_mode;
                    variant.name =
                        "knots" + std::to_string(knots) + "_lam" + lambda_mode + "_" +
                        (feature_kind == FeatureKind::coefficients ? "coeff" : "fitted") +
                        "_scr" + screening_mode;

                    PipelineConfig config = base;
                    config.knots = knots;
                    config.feature_kind = feature_kind;
                    config.k_min = config.k_max = axes.k;
                    if (lambda_mode == "low") {
                        config.lambda = 0;
                    } else if (lambda_mode == "high") {
                        config.lambda.reset();
                        config.target_edf = 2;
                    } // "default" keeps the base smoothing
                    if (screening_mode == "min3") {
                        config.screening.min_release_count = 3;
                    } else if (screening_mode == "any_growth") {
                        config.screening.require_any_positive_growth = true;
                    } // "default" keeps the base screening

                    Analysis analysis;
                    try {
                        analysis = run_analysis(config, projects);
                    } catch (const std::exception& e) {
                        throw std::runtime_error("variant " + variant.name + ": " + e.what());
                    }
                    if (!analysis.clustered)
                        throw std::runtime_error("variant " + variant.name +
                                                 ": clustering impossible with " +
                                                 std::to_string(analysis.kept_ids.size()) +
                                                 " kept projects");

                    const ClusterSolution& solution = analysis.solutions.front();
                    variant.lambda_value = analysis.lambda;
                    variant.kept_ids = analysis.kept_ids;
                    variant.assignment = solution.assignment;
                    variant.signature = shape_signature(analysis.std_fits, solution);
                    for (int sign : variant.signature) {
                        if (sign > 0) ++variant.increasing;
                        if (sign < 0) ++variant.decreasing;
                    }
                    report.variants.push_back(std::move(variant));
                }
            }
        }
    }

    const std::size_t count = report.variants.size();
    report.ari.assign(count, std::vector<double>(count, 1.0));
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i + 1; j < count; ++j) {
            const SensitivityVariant& x = report.variants[i];
            const SensitivityVariant& y = report.variants[j];
            std::map<std::string, int> position;
            for (std::size_t p = 0; p < y.kept_ids.size(); ++p) position[y.kept_ids[p]] = int(p);
            std::vector<int> labels_x, labels_y;
            for (std::size_t p = 0; p < x.kept_ids.size(); ++p) {
                const auto found = position.find(x.kept_ids[p]);
                if (found == position.end()) continue;
                labels_x.push_back(x.assignment[p]);
                labels_y.push_back(y.assignment[found->second]);
            }
            const double ari = labels_x.empty()
                                   ? std::numeric_limits<double>::quiet_NaN()
                                   : adjusted_rand_index(labels_x, labels_y);
            report.ari[i][j] = report.ari[j][i] = ari;
        }
    }
    return report;
}

std::vector<std::string> write_sensitivity_report(const SensitivityReport& report,
                                                  const PipelineConfig& base) {
    const std::string stamp = config_json(base);
    OutputTracker out(base.output_dir);

    stage("output", [&] {
        std::filesystem::create_directories(base.output_dir);

        json variants = json::array();
        for (const SensitivityVariant& v : report.variants) {
            json assignment = json::object();
            for (std::size_t i = 0; i < v.kept_ids.size(); ++i)
                assignment[v.kept_ids[i]] = v.assignment[i];
            variants.push_back(json{{"name", v.name},
                                    {"knots", v.knots},
                                    {"lambda_mode", v.lambda_mode},
                                    {"lambda", v.lambda_value},
                                    {"feature_kind", std::string(feature_kind_name(v.feature_kind))},
                                    {"screening_mode", v.screening_mode},
                                    {"kept", v.kept_ids.size()},
                                    {"signature", v.signature},
                                    {"increasing", v.increasing},
                                    {"decreasing", v.decreasing},
                                    {"assignment", assignment}});
        }
        json j{{"config", json::parse(stamp)},
               {"k", report.axes.k},
               {"variants", variants},
               {"ari", report.ari}};
        out.write("sensitivity.json", j.dump(2) + "\n");

        std::string signatures = "# config = " + stamp + "\n";
        signatures += "variant,knots,lambda_mode,feature_kind,screening_mode,kept,increasing,decreasing,signature\n";
        for (const SensitivityVariant& v : report.variants) {
            std::string shape;
            for (int sign : v.signature) shape += sign > 0 ? '+' : sign < 0 ? '-' : '0';
            signatures += v.name + "," + std::to_string(v.knots) + "," + v.lambda_mode + "," +
                          std::string(feature_kind_name(v.feature_kind)) + "," + v.screening_mode +
                          "," + std::to_string(v.kept_ids.size()) + "," +
                          std::to_string(v.increasing) + "," + std::to_string(v.decreasing) + "," +
                          shape + "\n";
        }
        out.write("sensitivity_signatures.csv", signatures);

        std::string matrix = "# config = " + stamp + "\n";
        matrix += "variant";
        for (const SensitivityVariant& v : report.variants) matrix += "," + v.name;
        matrix += "\n";
        for (std::size_t i = 0; i < report.variants.size(); ++i) {
            matrix += report.variants[i].name;
            for (std::size_t j = 0; j < report.variants.size(); ++j) {
                matrix += ',';
                if (!std::isnan(report.ari[i][j])) matrix += format_double(report.ari[i][j]);
            }
            matrix += "\n";
        }
        out.write("sensitivity_ari.csv", matrix);
        return 0;
    });
    return out.commit();
}

} // namespace evofda
