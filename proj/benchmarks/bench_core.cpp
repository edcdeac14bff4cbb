// Microbenchmarks for the two hot paths: penalized spline fitting on the
// daily grid and k-medoids clustering with restarts.

#include "evofda/clustering.hpp"
#include "evofda/preprocess.hpp"
#include "evofda/rng.hpp"
#include "evofda/splines.hpp"
#include "evofda/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace evofda;

DailyCurve synthetic_curve(std::uint64_t seed) {
    CorpusSpec spec;
    spec.seed = seed;
    const ProjectSeries project =
        generate_project(ShapeFamily::midterm_increase, spec, mix_seed(seed, 1), "bench");
    return to_daily_step(align_and_truncate(project));
}

void BM_SplineFit(benchmark::State& state) {
    const KnotGrid knots = make_knot_grid(int(state.range(0)));
    const double lambda = lambda_for_edf(knots, daily_grid(), 5);
    const DailyCurve curve = synthetic_curve(7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_smoothing_spline(curve, knots, lambda));
    }
}
BENCHMARK(BM_SplineFit)->Arg(6)->Arg(13)->Arg(26);

void BM_LambdaForEdf(benchmark::State& state) {
    const KnotGrid knots = make_knot_grid(13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lambda_for_edf(knots, daily_grid(), 5));
    }
}
BENCHMARK(BM_LambdaForEdf);

void BM_KMedoids(benchmark::State& state) {
    const int n = int(state.range(0));
    std::mt19937_64 engine(11);
    FeatureMatrix features;
    features.feature_kind = FeatureKind::coefficients;
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(17);
        for (double& v : row) v = normal_draw(engine);
        features.project_ids.push_back("p" + std::to_string(i));
        features.rows.push_back(std::move(row));
    }
    const Eigen::MatrixXd dist = distance_matrix(features);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kmedoids(dist, 4, 42));
    }
}
BENCHMARK(BM_KMedoids)->Arg(60)->Arg(200);

} // namespace

BENCHMARK_MAIN();
