// Command-line front end: metrics extraction, screening, the full analysis
// run, the sensitivity sweep, and the synthetic-corpus generator.

#include "evofda/metrics.hpp"
#include "evofda/pipeline.hpp"
#include "evofda/synth.hpp"
#include "evofda/textio.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evofda;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

/// Wires the screening flags shared by ingest, run, and sensitivity.
void add_screening_flags(CLI::App* sub, ScreeningCriteria& screening) {
    sub->add_option("--min-growth", screening.min_loc_growth_fraction,
                    "minimum first-to-last LOC growth fraction (default 0.05)");
    sub->add_option("--min-releases", screening.min_release_count,
                    "minimum release count (default 1)");
    sub->add_flag("--any-growth", screening.require_any_positive_growth,
                  "replace the growth-fraction rule with 'any positive growth'");
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-")
        std::cout << content;
    else
        write_file(path, content);
}

int cmd_metrics(const std::string& dir, const std::string& out_path, CouplingMode mode) {
    std::vector<fs::path> files;
    for (const fs::directory_entry& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".facts")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<ProjectSeries> series;
    std::map<std::string, std::size_t> index;
    for (const fs::path& path : files) {
        const std::string stem = path.stem().string();
        const std::size_t split = stem.rfind('_');
        if (split == std::string::npos || split == 0 || split + 1 == stem.size())
            throw std::runtime_error(path.string() + ": file name must be <project>_<date>.facts");
        ReleaseRecord record;
        record.project_id = stem.substr(0, split);
        try {
            record.release_date = Date::parse(stem.substr(split + 1));
            const CodeModel model = parse_code_model(read_file(path.string()));
            const ComplexitySnapshot snapshot = project_complexity(model, mode);
            record.loc = snapshot.loc;
            record.cplxlcoh = snapshot.cplxlcoh;
            record.cpl = snapshot.cpl;
            record.lcoh = snapshot.lcoh;
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ": " + e.what());
        }
        const auto at = index.emplace(record.project_id, series.size());
        if (at.second) {
            series.push_back(ProjectSeries{record.project_id, {}});
        }
        series[at.first->second].releases.push_back(record);
    }
    for (ProjectSeries& project : series)
        std::sort(project.releases.begin(), project.releases.end(),
                  [](const ReleaseRecord& a, const ReleaseRecord& b) {
                      return a.release_date < b.release_date;
                  });

    const json stamp{{"command", "metrics"},
                     {"input_dir", dir},
                     {"coupling_mode", mode == CouplingMode::distinct ? "distinct" : "instances"}};
    write_output(out_path, "# config = " + stamp.dump() + "\n" + write_releases_csv(series));
    std::cerr << files.size() << " snapshots across " << series.size() << " projects\n";
    return 0;
}

int cmd_ingest(const PipelineConfig& config) {
    const std::vector<ProjectSeries> projects = load_releases(read_file(config.input_csv));
    const ScreeningResult screening = screen_projects(projects, config.screening);
    const std::string screening_out = screening_csv(screening, config);
    std::string descriptives_out;
    if (!screening.kept.empty())
        descriptives_out = descriptives_json(describe_sample(screening.kept), config);

    fs::create_directories(config.output_dir);
    write_file(config.output_dir + "/screening.csv", screening_out);
    if (!descriptives_out.empty())
        write_file(config.output_dir + "/descriptives.json", descriptives_out);

    std::cout << "kept " << screening.kept.size() << " of " << projects.size() << " projects\n";
    for (const RejectedProject& r : screening.rejected)
        std::cout << "  rejected " << r.project_id << ": " << r.reason << "\n";
    if (!screening.kept.empty()) {
        const DescriptiveStats stats = describe_sample(screening.kept);
        for (const MeasureStats& m : stats.measures)
            std::cout << "  " << m.measure << ": mean " << fmt("%.4g", m.mean) << ", sd "
                      << fmt("%.4g", m.stddev) << ", range [" << fmt("%.4g", m.min) << ", "
                      << fmt("%.4g", m.max) << "]\n";
    }
    std::cout << "wrote " << (descriptives_out.empty() ? 1 : 2) << " files to "
              << config.output_dir << "\n";
    return 0;
}

void print_analysis_summary(const Analysis& analysis) {
    std::cout << "kept " << analysis.kept_ids.size() << " of " << analysis.projects.size()
              << " projects\n";
    std::cout << "smoothing lambda " << fmt("%.6g", analysis.lambda) << " (edf "
              << fmt("%.2f", analysis.edf) << ", " << analysis.config.knots
              << " interior knots)\n";
    for (const ClusterSolution& solution : analysis.solutions) {
        std::map<int, int> sizes;
        for (int label : solution.assignment) ++sizes[label];
        std::cout << "k=" << solution.k << ": objective " << fmt("%.6g", solution.total_dissimilarity)
                  << ", sizes";
        for (const auto& size : sizes) std::cout << " " << size.second;
        const auto ari = analysis.truth_ari.find(solution.k);
        if (ari != analysis.truth_ari.end())
            std::cout << ", truth ARI " << fmt("%.4f", ari->second);
        std::cout << "\n";
    }
    for (const std::string& notice : analysis.notices) std::cout << "notice: " << notice << "\n";
}

int cmd_run(const PipelineConfig& config) {
    const Analysis analysis = run_analysis(config);
    const std::vector<std::string> written = write_run_bundle(analysis);
    print_analysis_summary(analysis);
    std::cout << "wrote " << written.size() << " files to " << config.output_dir << "\n";
    return 0;
}

int cmd_sensitivity(const PipelineConfig& config, const SensitivityAxes& axes) {
    const SensitivityReport report = run_sensitivity(config, axes);
    const std::vector<std::string> written = write_sensitivity_report(report, config);
    for (const SensitivityVariant& v : report.variants)
        std::cout << v.name << ": kept " << v.kept_ids.size() << ", " << v.increasing
                  << " increasing / " << v.decreasing << " decreasing cluster means\n";
    double min_ari = 1;
    for (std::size_t i = 0; i < report.ari.size(); ++i)
        for (std::size_t j = i + 1; j < report.ari.size(); ++j)
            if (!std::isnan(report.ari[i][j])) min_ari = std::min(min_ari, report.ari[i][j]);
    if (report.variants.size() > 1)
        std::cout << "minimum cross-variant ARI " << fmt("%.4f", min_ari) << "\n";
    std::cout << "wrote " << written.size() << " files to " << config.output_dir << "\n";
    return 0;
}

json synth_stamp(const CorpusSpec& spec) {
    return json{{"command", "synth"},
                {"family_counts", spec.family_counts},
                {"amplitude", spec.amplitude},
                {"noise_sd", spec.noise_sd},
                {"gap_mean_days", spec.gap_mean_days},
                {"gap_dispersion", spec.gap_dispersion},
                {"loc_growth_min", spec.loc_growth_min},
                {"loc_growth_max", spec.loc_growth_max},
                {"base_min", spec.base_min},
                {"base_max", spec.base_max},
                {"seed", spec.seed}};
}

int cmd_synth(const CorpusSpec& spec, const std::string& output_dir) {
    for (const std::string& warning : corpus_warnings(spec))
        std::cerr << "warning: " << warning << "\n";
    const SynthCorpus corpus = generate_corpus(spec);
    const std::string stamp = "# config = " + synth_stamp(spec).dump() + "\n";
    fs::create_directories(output_dir);
    write_file(output_dir + "/releases.csv", stamp + write_releases_csv(corpus.projects));
    write_file(output_dir + "/truth.csv", stamp + write_truth_csv(corpus));
    std::cout << "wrote " << corpus.projects.size() << " projects to " << output_dir
              << "/releases.csv (+ truth.csv)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"release-history structural-complexity analysis"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML-style key-value config file");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "turn fact-file snapshots into a releases CSV");
    std::string fact_dir;
    std::string metrics_out = "-";
    std::string coupling_mode = "distinct";
    metrics->add_option("dir", fact_dir, "directory of <project>_<date>.facts files")
        ->required()
        ->check(CLI::ExistingDirectory);
    metrics->add_option("-o,--output", metrics_out, "output CSV path, '-' for stdout");
    metrics->add_option("--coupling-mode", coupling_mode, "distinct or instances")
        ->check(CLI::IsMember({"distinct", "instances"}));

    // shared analysis config
    PipelineConfig config;

    auto* ingest = app.add_subcommand("ingest", "load, screen, and describe a releases CSV");
    ingest->add_option("-i,--input", config.input_csv, "releases CSV")->required();
    ingest->add_option("-O,--output-dir", config.output_dir, "output directory")
        ->envname("EVOFDA_OUTPUT_DIR");
    add_screening_flags(ingest, config.screening);

    auto* run = app.add_subcommand("run", "full analysis: curves, fits, clustering, inference");
    double lambda_value = 0;
    std::string feature_name = "coefficients";
    run->add_option("-i,--input", config.input_csv, "releases CSV")->required();
    run->add_option("--truth", config.truth_csv, "generator labels CSV for recovery scoring");
    run->add_option("-O,--output-dir", config.output_dir, "output directory")
        ->envname("EVOFDA_OUTPUT_DIR");
    run->add_option("--knots", config.knots, "interior knot count (default 13)");
    auto* lambda_opt =
        run->add_option("--lambda", lambda_value, "fixed smoothing parameter (>= 0)");
    run->add_option("--target-edf", config.target_edf,
                    "effective degrees of freedom the smoothing is solved for (default 5)");
    run->add_option("--features", feature_name, "clustering features")
        ->check(CLI::IsMember({"coefficients", "fitted_values"}));
    run->add_option("--k-min", config.k_min, "smallest cluster count (default 2)");
    run->add_option("--k-max", config.k_max, "largest cluster count (default 5)");
    run->add_option("--seed", config.seed, "clustering restart seed (default 0)");
    run->add_option("--restarts", config.restarts, "k-medoids restarts (default 10)");
    add_screening_flags(run, config.screening);

    auto* sens = app.add_subcommand("sensitivity", "re-cluster across the settings grid");
    SensitivityAxes axes;
    std::vector<std::string> feature_axis = {"coefficients", "fitted_values"};
    sens->add_option("-i,--input", config.input_csv, "releases CSV")->required();
    sens->add_option("-O,--output-dir", config.output_dir, "output directory")
        ->envname("EVOFDA_OUTPUT_DIR");
    sens->add_option("--k", axes.k, "cluster count every variant uses (default 4)");
    sens->add_option("--knot-axis", axes.knot_counts, "knot counts to sweep (default 6,13,26)")
        ->delimiter(',');
    sens->add_option("--lambda-axis", axes.lambda_modes,
                     "smoothing modes to sweep, from low,default,high")
        ->delimiter(',');
    sens->add_option("--feature-axis", feature_axis,
                     "feature kinds to sweep, from coefficients,fitted_values")
        ->delimiter(',');
    sens->add_option("--screening-axis", axes.screening_modes,
                     "screening modes to sweep, from default,min3,any_growth")
        ->delimiter(',');
    sens->add_option("--seed", config.seed, "clustering restart seed (default 0)");
    sens->add_option("--restarts", config.restarts, "k-medoids restarts (default 10)");
    add_screening_flags(sens, config.screening);

    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    CorpusSpec spec;
    int per_family = -1;
    std::vector<int> counts;
    std::string synth_out = "synth-out";
    synth->add_option("--seed", spec.seed, "generator seed")->required();
    synth->add_option("-O,--output-dir", synth_out, "output directory")
        ->envname("EVOFDA_OUTPUT_DIR");
    synth->add_option("--per-family", per_family, "projects per family (default 15)");
    synth->add_option("--counts", counts,
                      "per-family counts: early_decrease,early_increase,midterm_increase,"
                      "midterm_decrease")
        ->delimiter(',')
        ->expected(4);
    synth->add_option("--amplitude", spec.amplitude, "template amplitude (default 40)");
    synth->add_option("--noise-sd", spec.noise_sd, "release-value noise sd (default 2)");
    synth->add_option("--gap-mean", spec.gap_mean_days, "mean release gap in days (default 56)");
    synth->add_option("--gap-dispersion", spec.gap_dispersion,
                      "gap coefficient of variation (default 1)");
    synth->add_option("--base-min", spec.base_min, "complexity base lower bound (default 20)");
    synth->add_option("--base-max", spec.base_max, "complexity base upper bound (default 60)");
    synth->add_option("--growth-min", spec.loc_growth_min, "LOC growth lower bound (default 0.10)");
    synth->add_option("--growth-max", spec.loc_growth_max, "LOC growth upper bound (default 1.00)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (metrics->parsed()) {
            return cmd_metrics(fact_dir, metrics_out,
                               coupling_mode == "distinct" ? CouplingMode::distinct
                                                           : CouplingMode::instances);
        }
        if (ingest->parsed()) return cmd_ingest(config);
        if (run->parsed()) {
            if (lambda_opt->count() > 0) config.lambda = lambda_value;
            config.feature_kind = *parse_feature_kind(feature_name);
            return cmd_run(config);
        }
        if (sens->parsed()) {
            axes.feature_kinds.clear();
            for (const std::string& name : feature_axis) {
                const std::optional<FeatureKind> kind = parse_feature_kind(name);
                if (!kind) throw std::invalid_argument("unknown feature kind '" + name + "'");
                axes.feature_kinds.push_back(*kind);
            }
            return cmd_sensitivity(config, axes);
        }
        if (synth->parsed()) {
            if (per_family >= 0) spec.family_counts.fill(per_family);
            if (!counts.empty())
                std::copy(counts.begin(), counts.end(), spec.family_counts.begin());
            return cmd_synth(spec, synth_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
