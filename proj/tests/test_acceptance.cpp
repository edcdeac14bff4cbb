// Acceptance gate: ten end-to-end checks, one pass/fail line each. Exits
// nonzero if any check fails so the suite can run under ctest. Each check is
// self-contained enough to diagnose from its failure detail alone.

#include "evofda/clustering.hpp"
#include "evofda/inference.hpp"
#include "evofda/ingest.hpp"
#include "evofda/pipeline.hpp"
#include "evofda/preprocess.hpp"
#include "evofda/splines.hpp"
#include "evofda/synth.hpp"
#include "evofda/textio.hpp"

#include "support/oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace evofda;
namespace fs = std::filesystem;

namespace {

int criteria_run = 0;
int criteria_failed = 0;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Runs one numbered criterion: the body returns an empty string on success or
// a failure detail. A stated runtime bound is part of the criterion.
void criterion(const std::string& name, double time_bound_seconds,
               const std::function<std::string()>& body) {
    ++criteria_run;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        detail = std::string("unexpected exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (detail.empty() && time_bound_seconds > 0 && seconds >= time_bound_seconds)
        detail = "runtime " + num(seconds) + " s exceeded the " + num(time_bound_seconds) + " s bound";
    const bool ok = detail.empty();
    if (!ok) ++criteria_failed;
    std::printf("%2d. %s (%6.2f s)  %s\n", criteria_run, ok ? "PASS" : "FAIL", seconds, name.c_str());
    if (!ok) std::printf("      %s\n", detail.c_str());
    std::fflush(stdout);
}

// Appends a failure message when a condition does not hold.
void expect(std::string& detail, bool condition, const std::string& message) {
    if (condition) return;
    if (!detail.empty()) detail += "; ";
    detail += message;
}

const char* kSampleCsv = "project_id,release_date,loc,cplxlcoh\n"
                         "3064,2003-01-17,4901,45.71\n"
                         "3064,2003-03-02,5449,79.31\n"
                         "3064,2003-07-16,6775,113.83\n"
                         "3064,2003-08-16,10915,135.98\n"
                         "3064,2003-10-25,13516,149.15\n"
                         "3064,2004-01-04,13991,148.65\n"
                         "3064,2004-02-07,14892,162.30\n";

// Shared state built by the synthetic-corpus criterion and reused by the
// later ones so the corpus and base clustering are computed once.
struct SharedCorpus {
    fs::path dir;
    SynthCorpus corpus;
    PipelineConfig config;
    Analysis analysis;
};
std::optional<SharedCorpus> shared;

// Count of net-increasing / net-decreasing cluster mean trajectories: the
// sign of (day-730 minus day-0) of the mean standardized fitted curve.
std::pair<int, int> shape_split(const Analysis& analysis, const ClusterSolution& solution) {
    int increasing = 0, decreasing = 0;
    for (int label = 1; label <= solution.k; ++label) {
        double delta = 0;
        int members = 0;
        for (std::size_t i = 0; i < analysis.std_fits.size(); ++i) {
            if (solution.assignment[i] != label) continue;
            delta += analysis.std_fits[i].fitted_values.back() - analysis.std_fits[i].fitted_values.front();
            ++members;
        }
        if (members == 0) continue;
        if (delta > 0) ++increasing;
        if (delta < 0) ++decreasing;
    }
    return {increasing, decreasing};
}

int spawn_cli(const std::string& args, const std::string& env_prefix = "") {
    const int status = std::system((env_prefix + EVOFDA_CLI_PATH + " " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot_files(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file())
            files[entry.path().filename().string()] = read_file(entry.path().string());
    return files;
}

} // namespace

int main() {
    criterion("worked sample: day offsets, active life, percent change, screening", 1.0, [] {
        std::string detail;
        const ProjectSeries series = load_releases(kSampleCsv).at(0);
        const AlignedSeries aligned = align_and_truncate(series);
        const std::vector<long> expected = {0, 44, 180, 211, 281, 352, 386};
        std::vector<long> days;
        for (const AlignedRelease& release : aligned.releases) days.push_back(release.day);
        expect(detail, days == expected, "day offsets differ from the hand-computed calendar arithmetic");
        const OutcomeScalars outcome = outcome_scalars(aligned);
        expect(detail, outcome.active_life == 386, "active life " + std::to_string(outcome.active_life) + " != 386");
        expect(detail, std::abs(outcome.percent_change - 2.5506) <= 1e-4,
               "percent change " + num(outcome.percent_change) + " not within 1e-4 of 2.5506");
        const ScreeningResult screening = screen_projects({series}, ScreeningCriteria{});
        expect(detail, screening.kept.size() == 1 && screening.rejected.empty(),
               "the sample project failed the 5% LOC-growth screen");
        return detail;
    });

    criterion("default knot count for a two-year window at the mean release gap", 0, [] {
        std::string detail;
        expect(detail, default_knot_count(730, 56) == 13,
               "default_knot_count(730, 56) = " + std::to_string(default_knot_count(730, 56)) + " != 13");
        return detail;
    });

    criterion("spline solver matches direct penalized-objective minimization", 10.0, [] {
        std::string detail;
        std::mt19937 rng(1234);
        std::uniform_real_distribution<double> on_window(0.0, 730.0);
        std::uniform_real_distribution<double> jitter(-0.5, 0.5);
        const double lambdas[] = {0.1, 1.0, 10.0};
        for (int instance = 0; instance < 20; ++instance) {
            const int m = 10 + (instance * 7) % 22;          // 10..31 sample points
            const int interior = 2 + instance % 3;           // 2..4 interior knots
            const double lambda = lambdas[instance % 3];
            std::vector<double> xs(m), ys(m);
            for (double& x : xs) x = on_window(rng);
            std::sort(xs.begin(), xs.end());
            for (int i = 0; i < m; ++i) ys[i] = std::sin(xs[i] / 100.0) + jitter(rng);

            const KnotGrid knots = make_knot_grid(interior);
            const SplineFit fit = fit_penalized(xs, ys, knots, lambda, xs);
            const Eigen::MatrixXd basis = testsupport::naive_basis_matrix(knots, xs);
            const Eigen::MatrixXd penalty = testsupport::quadrature_penalty(knots, 1000);
            Eigen::VectorXd y(m);
            for (int i = 0; i < m; ++i) y[i] = ys[i];
            const Eigen::VectorXd direct = testsupport::cg_minimize(basis, penalty, y, lambda);
            for (Eigen::Index c = 0; c < direct.size(); ++c) {
                if (std::abs(fit.coefficients[c] - direct[c]) > 1e-6 * (1.0 + std::abs(direct[c]))) {
                    expect(detail, false,
                           "instance " + std::to_string(instance) + " coefficient " + std::to_string(c) +
                               ": solver " + num(fit.coefficients[c]) + " vs direct " + num(direct[c]));
                    break;
                }
            }
            if (!detail.empty()) break;
        }

        // At enormous lambda the penalty forces the least-squares line.
        std::vector<double> xs(201), ys(201);
        for (int i = 0; i < 201; ++i) {
            xs[i] = 730.0 * i / 200.0;
            ys[i] = 1.0 + 0.002 * xs[i] + std::sin(xs[i] / 58.0);
        }
        const SplineFit flat = fit_penalized(xs, ys, make_knot_grid(6), 1e12, xs);
        const testsupport::Line line = testsupport::ols_line(xs, ys);
        double max_diff = 0;
        for (int i = 0; i < 201; ++i)
            max_diff = std::max(max_diff, std::abs(flat.fitted_values[i] - (line.intercept + line.slope * xs[i])));
        expect(detail, max_diff <= 1e-4,
               "lambda = 1e12 fit deviates from the least-squares line by " + num(max_diff));
        return detail;
    });

    criterion("curvature penalty annihilates constant and affine splines", 0, [] {
        std::string detail;
        const KnotGrid knots = make_knot_grid(13);
        const Eigen::MatrixXd penalty = penalty_matrix(knots);
        const Eigen::Index dim = Eigen::Index(knots.dimension());

        const Eigen::VectorXd constant = Eigen::VectorXd::Ones(dim);
        expect(detail, (penalty * constant).cwiseAbs().maxCoeff() <= 1e-10,
               "penalty * constant = " + num((penalty * constant).cwiseAbs().maxCoeff()));
        const std::vector<double> greville = greville_abscissae(knots);
        Eigen::VectorXd affine(dim);
        for (Eigen::Index i = 0; i < dim; ++i) affine[i] = greville[std::size_t(i)];
        expect(detail, (penalty * affine).cwiseAbs().maxCoeff() <= 1e-10,
               "penalty * affine = " + num((penalty * affine).cwiseAbs().maxCoeff()));

        std::mt19937 rng(99);
        std::uniform_real_distribution<double> on_window(0.0, 730.0);
        std::vector<double> points(1000);
        for (double& p : points) p = on_window(rng);
        const Eigen::MatrixXd basis = basis_matrix(knots, points);
        const double worst = (basis.rowwise().sum().array() - 1.0).abs().maxCoeff();
        expect(detail, worst <= 1e-12, "basis row sums deviate from 1 by " + num(worst));
        return detail;
    });

    criterion("k-medoids best-of-restarts attains the exhaustive optimum", 30.0, [] {
        std::string detail;
        std::mt19937 rng(777);
        std::uniform_real_distribution<double> coord(0.0, 10.0);
        for (int instance = 0; instance < 50 && detail.empty(); ++instance) {
            const int n = 4 + instance % 7; // 4..10 rows
            const int k = 2 + instance % 2; // 2..3 clusters
            FeatureMatrix features;
            features.rows.resize(std::size_t(n), std::vector<double>(3));
            for (int i = 0; i < n; ++i) {
                features.project_ids.push_back("r" + std::to_string(i));
                for (double& v : features.rows[std::size_t(i)]) v = coord(rng);
            }
            const Eigen::MatrixXd dist = distance_matrix(features);
            const double best10 = kmedoids(dist, k, std::uint64_t(instance), 10).total_dissimilarity;
            const double best1 = kmedoids(dist, k, std::uint64_t(instance), 1).total_dissimilarity;
            const double optimum = testsupport::exhaustive_kmedoids_objective(dist, k);
            expect(detail, std::abs(best10 - optimum) <= 1e-9,
                   "instance " + std::to_string(instance) + ": best-of-10 " + num(best10) +
                       " vs exhaustive optimum " + num(optimum));
            expect(detail, best1 >= best10 - 1e-12,
                   "instance " + std::to_string(instance) + ": single restart " + num(best1) +
                       " beat best-of-10 " + num(best10));
        }
        return detail;
    });

    criterion("synthetic four-family corpus: recovery ARI and 2-up/2-down split", 60.0, [] {
        std::string detail;
        SharedCorpus state;
        state.dir = fs::temp_directory_path() / "evofda_acceptance";
        fs::remove_all(state.dir);
        fs::create_directories(state.dir);

        CorpusSpec spec; // defaults: 15 per family, noise sd 2 = 5% of amplitude 40
        spec.seed = 42;
        state.corpus = generate_corpus(spec);
        write_file((state.dir / "releases.csv").string(), write_releases_csv(state.corpus.projects));
        write_file((state.dir / "truth.csv").string(), write_truth_csv(state.corpus));

        state.config.input_csv = (state.dir / "releases.csv").string();
        state.config.truth_csv = (state.dir / "truth.csv").string();
        state.config.output_dir = (state.dir / "out").string();
        state.analysis = run_analysis(state.config);

        expect(detail, state.analysis.kept_ids.size() == 60,
               "kept " + std::to_string(state.analysis.kept_ids.size()) + " of 60 projects");
        const auto ari = state.analysis.truth_ari.find(4);
        if (ari == state.analysis.truth_ari.end()) {
            expect(detail, false, "no recovery score at k = 4");
        } else {
            expect(detail, ari->second >= 0.9, "k = 4 recovery ARI " + num(ari->second) + " < 0.9");
        }
        for (const ClusterSolution& solution : state.analysis.solutions) {
            if (solution.k != 4) continue;
            const auto [up, down] = shape_split(state.analysis, solution);
            expect(detail, up == 2 && down == 2,
                   "cluster mean trajectories split " + std::to_string(up) + " up / " +
                       std::to_string(down) + " down, expected 2/2");
        }
        shared = std::move(state);
        return detail;
    });

    criterion("settings sweep preserves the 2-up/2-down signature in every variant", 300.0, [] {
        std::string detail;
        if (!shared) return std::string("synthetic corpus unavailable (previous criterion failed)");
        SensitivityAxes axes; // knots 6/13/26 x lambda low/default/high x both feature kinds
        axes.screening_modes = {"default"};
        const SensitivityReport report = run_sensitivity(shared->config, axes);
        expect(detail, report.variants.size() == 18,
               "expected 18 sweep variants, got " + std::to_string(report.variants.size()));
        for (const SensitivityVariant& variant : report.variants)
            expect(detail, variant.increasing == 2 && variant.decreasing == 2,
                   variant.name + " split " + std::to_string(variant.increasing) + " up / " +
                       std::to_string(variant.decreasing) + " down");
        return detail;
    });

    criterion("analysis-of-variance identities on hand-checkable groups", 0, [] {
        std::string detail;
        const AnovaResult hand = one_way_anova({1, 2, 3, 4, 5, 6}, {1, 1, 1, 2, 2, 2});
        expect(detail, std::abs(hand.f - 13.5) <= 1e-12 && hand.df_between == 1 && hand.df_within == 4,
               "F(" + std::to_string(hand.df_between) + "," + std::to_string(hand.df_within) + ") = " +
                   num(hand.f) + ", expected F(1,4) = 13.5");

        // For two groups the F statistic is the square of the pooled t.
        const std::vector<double> values = {1.2, 3.4, 2.2, 5.0, 4.1, 6.3, 5.5};
        const std::vector<int> labels = {1, 1, 1, 1, 2, 2, 2};
        const AnovaResult two = one_way_anova(values, labels);
        const double m1 = (1.2 + 3.4 + 2.2 + 5.0) / 4, m2 = (4.1 + 6.3 + 5.5) / 3;
        double ss1 = 0, ss2 = 0;
        for (int i = 0; i < 4; ++i) ss1 += (values[std::size_t(i)] - m1) * (values[std::size_t(i)] - m1);
        for (int i = 4; i < 7; ++i) ss2 += (values[std::size_t(i)] - m2) * (values[std::size_t(i)] - m2);
        const double pooled = (ss1 + ss2) / 5.0;
        const double t = (m1 - m2) / std::sqrt(pooled * (1.0 / 4 + 1.0 / 3));
        expect(detail, std::abs(two.f - t * t) <= 1e-10,
               "two-group F " + num(two.f) + " != t^2 " + num(t * t));

        Eigen::MatrixXd column(7, 1);
        for (int i = 0; i < 7; ++i) column(i, 0) = values[std::size_t(i)];
        const ManovaResult single = manova(column, labels);
        expect(detail, std::abs(single.f_approx - two.f) <= 1e-10,
               "single-variable MANOVA F " + num(single.f_approx) + " != ANOVA F " + num(two.f));

        Eigen::MatrixXd balanced(6, 2);
        balanced << 1, 2, 2, 4, 3, 3, 1, 4, 3, 2, 2, 3; // both group means are (2, 3)
        const ManovaResult identical = manova(balanced, {1, 1, 1, 2, 2, 2});
        expect(detail, identical.wilks_lambda == 1.0,
               "Wilks lambda " + num(identical.wilks_lambda) + " != 1 for identical group means");
        return detail;
    });

    criterion("identical configuration reruns emit byte-identical files", 0, [] {
        std::string detail;
        if (!shared) return std::string("synthetic corpus unavailable (previous criterion failed)");
        const std::string out = (shared->dir / "rerun").string();
        const std::string args = "run -i '" + shared->config.input_csv + "' --truth '" +
                                 shared->config.truth_csv + "' -O '" + out + "' --seed 0 >/dev/null 2>&1";
        expect(detail, spawn_cli(args) == 0, "first run exited nonzero");
        const std::map<std::string, std::string> first = snapshot_files(out);
        // A different thread-count hint must not change a single byte.
        expect(detail, spawn_cli(args, "env OMP_NUM_THREADS=3 ") == 0, "second run exited nonzero");
        const std::map<std::string, std::string> second = snapshot_files(out);
        expect(detail, first.size() == 35, "expected 35 files, got " + std::to_string(first.size()));
        expect(detail, first.size() == second.size(), "rerun changed the file count");
        for (const auto& [name, bytes] : first) {
            const auto again = second.find(name);
            if (again == second.end() || again->second != bytes) {
                expect(detail, false, name + " differs between identical runs");
                break;
            }
        }
        return detail;
    });

    criterion("standardized curves are mean-zero; level shifts leave clusters unchanged", 0, [] {
        std::string detail;
        if (!shared) return std::string("synthetic corpus unavailable (previous criterion failed)");
        for (const DailyCurve& curve : shared->analysis.std_curves) {
            const double mean = std::accumulate(curve.values.begin(), curve.values.end(), 0.0) /
                                double(curve.values.size());
            if (std::abs(mean) > 1e-9) {
                expect(detail, false, curve.project_id + " standardized mean " + num(mean));
                break;
            }
        }

        // Shift each project's complexity values by its own constant; the
        // centered curves, and therefore the clustering, must not move.
        std::vector<ProjectSeries> shifted = shared->corpus.projects;
        for (std::size_t i = 0; i < shifted.size(); ++i)
            for (ReleaseRecord& release : shifted[i].releases)
                release.cplxlcoh += 50.0 + 10.0 * double(i);
        PipelineConfig config = shared->config;
        config.truth_csv.clear();
        const Analysis moved = run_analysis(config, std::move(shifted));
        expect(detail, moved.solutions.size() == shared->analysis.solutions.size(),
               "shifted corpus produced a different solution count");
        for (std::size_t s = 0; s < moved.solutions.size() && detail.empty(); ++s)
            expect(detail,
                   moved.solutions[s].assignment == shared->analysis.solutions[s].assignment,
                   "k = " + std::to_string(moved.solutions[s].k) +
                       " assignments changed under per-project level shifts");
        return detail;
    });

    if (shared) fs::remove_all(shared->dir);
    std::printf("acceptance: %d/%d criteria passed\n", criteria_run - criteria_failed, criteria_run);
    return criteria_failed == 0 ? 0 : 1;
}
