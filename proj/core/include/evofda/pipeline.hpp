#pragma once

#include "evofda/clustering.hpp"
#include "evofda/inference.hpp"
#include "evofda/ingest.hpp"
#include "evofda/preprocess.hpp"
#include "evofda/splines.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evofda {

/// Everything one analysis run depends on. The resolved config is stamped
/// (as canonical JSON) into every file the run writes, so any artifact
/// identifies the run that produced it.
struct PipelineConfig {
    std::string input_csv;
    std::string truth_csv; // optional generator labels for recovery scoring
    std::string output_dir = "evofda-out";
    ScreeningCriteria screening;
    int knots = 13;               // interior knot count
    std::optional<double> lambda; // fixed smoothing; when absent, solved for target_edf
    double target_edf = 5;
    FeatureKind feature_kind = FeatureKind::coefficients;
    int k_min = 2;
    int k_max = 5;
    std::uint64_t seed = 0;
    int restarts = 10;
};

std::string_view feature_kind_name(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

/// Canonical one-line JSON of the resolved config: sorted keys, no
/// timestamps, so identical configs stamp identical bytes.
std::string config_json(const PipelineConfig& config);

/// In-memory result of the analysis stages. Curve fitting and clustering
/// run on the standardized curves; the raw curves keep their own fits for
/// the absolute-level mean band.
struct Analysis {
    PipelineConfig config;
    std::vector<ProjectSeries> projects; // everything loaded
    ScreeningResult screening;
    std::vector<std::string> kept_ids;
    std::vector<AlignedSeries> aligned; // kept projects only, same order
    std::vector<DailyCurve> raw_curves;
    std::vector<DailyCurve> std_curves;
    std::vector<OutcomeScalars> outcomes;
    KnotGrid knots;
    double lambda = 0; // resolved smoothing parameter
    double edf = 0;    // effective degrees of freedom at that lambda
    std::vector<SplineFit> raw_fits;
    std::vector<SplineFit> std_fits;
    bool clustered = false;
    std::vector<ClusterSolution> solutions; // one per k actually run
    std::optional<std::vector<int>> truth_labels; // aligned with kept_ids
    std::map<int, double> truth_ari;              // per k, when truth available
    std::vector<std::string> notices; // non-fatal conditions, e.g. "n < 2"
};

/// Runs load -> screen -> curves -> fit -> cluster in memory. Fewer than
/// two kept projects stops after the fits with an "n < 2" notice instead of
/// failing. Errors carry the stage name ("stage <name>: <cause>").
Analysis run_analysis(const PipelineConfig& config);

/// Same, starting from already-loaded projects (the load stage is skipped).
Analysis run_analysis(const PipelineConfig& config, std::vector<ProjectSeries> projects);

/// Writes the full output bundle (config, screening log, descriptives,
/// curves, fits, mean bands with SVG, cluster solutions, inference reports,
/// profiles, outcomes, run summary) into config.output_dir. Returns the
/// paths written; on error removes every partial output and rethrows.
std::vector<std::string> write_run_bundle(const Analysis& analysis);

/// `project_id,kept,reason` screening log with the config stamp.
std::string screening_csv(const ScreeningResult& screening, const PipelineConfig& config);

/// Canonical JSON report of sample descriptive statistics.
std::string descriptives_json(const DescriptiveStats& stats, const PipelineConfig& config);

/// `project_id,family` map from a truth CSV (leading '#' comments allowed).
std::map<std::string, std::string> load_truth(std::string_view csv_content);

/// Axes of the sensitivity sweep; each defaults to the full grid. The sweep
/// clusters at the single fixed k below.
struct SensitivityAxes {
    std::vector<int> knot_counts = {6, 13, 26};
    std::vector<std::string> lambda_modes = {"low", "default", "high"};
    std::vector<FeatureKind> feature_kinds = {FeatureKind::coefficients,
                                              FeatureKind::fitted_values};
    std::vector<std::string> screening_modes = {"default", "min3", "any_growth"};
    int k = 4;
};

/// One grid cell: which settings ran, who survived screening, the cluster
/// assignment, and the per-cluster shape signature (sign of the cluster
/// mean's day-730 minus day-0 standardized fitted value).
struct SensitivityVariant {
    std::string name;
    int knots = 0;
    std::string lambda_mode;
    double lambda_value = 0;
    FeatureKind feature_kind = FeatureKind::coefficients;
    std::string screening_mode;
    std::vector<std::string> kept_ids;
    std::vector<int> assignment; // aligned with kept_ids
    std::vector<int> signature;  // +1 / -1 / 0 per cluster label 1..k
    int increasing = 0;
    int decreasing = 0;
};

struct SensitivityReport {
    SensitivityAxes axes;
    std::vector<SensitivityVariant> variants;
    // Pairwise adjusted Rand index between variant assignments, restricted
    // to the projects both variants kept.
    std::vector<std::vector<double>> ari;
};

/// Re-runs screening, fitting, and clustering over the requested grid on
/// one shared load of the input. Lambda modes: "low" = 0, "default" = the
/// base config's smoothing, "high" = solved for 2 effective degrees of
/// freedom (a straight-line fit).
SensitivityReport run_sensitivity(const PipelineConfig& base, const SensitivityAxes& axes);

/// Writes sensitivity.json plus the agreement matrix and signature CSVs
/// into base.output_dir; same partial-output cleanup as write_run_bundle.
std::vector<std::string> write_sensitivity_report(const SensitivityReport& report,
                                                  const PipelineConfig& base);

} // namespace evofda
