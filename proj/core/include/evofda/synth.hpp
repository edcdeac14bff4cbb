#pragma once

#include "evofda/ingest.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evofda {

/// The four qualitative evolution shapes the generator can produce. The
/// concrete templates are logistic ramps (see family_template); their
/// transition windows and the early-decrease terminal drift are invented
/// constants chosen to match the qualitative shape descriptions.
enum class ShapeFamily { early_decrease, early_increase, midterm_increase, midterm_decrease };

inline constexpr std::array<ShapeFamily, 4> kAllFamilies = {
    ShapeFamily::early_decrease, ShapeFamily::early_increase,
    ShapeFamily::midterm_increase, ShapeFamily::midterm_decrease};

std::string_view family_name(ShapeFamily family);
std::optional<ShapeFamily> parse_family(std::string_view name);

/// Parameters of a synthetic corpus. Complexity at a release on day d is
/// base + amplitude * family_template(family, d) + Gaussian noise, clamped
/// to >= 0.01; the per-project base is uniform on [base_min, base_max].
/// Release gaps are a discretized log-normal with the given mean and
/// coefficient of variation (dispersion 1 approximates a geometric law).
/// LOC rises strictly monotonically from a fixed base to a total growth
/// drawn from [loc_growth_min, loc_growth_max].
struct CorpusSpec {
    std::array<int, 4> family_counts{15, 15, 15, 15}; // indexed like kAllFamilies
    double amplitude = 40;
    double noise_sd = 2;
    double gap_mean_days = 56;
    double gap_dispersion = 1;
    double loc_growth_min = 0.10;
    double loc_growth_max = 1.00;
    double base_min = 20;
    double base_max = 60;
    std::uint64_t seed = 0;
};

/// Labeled corpus. `families[i]` is the generator family of `projects[i]`;
/// it exists for recovery scoring only and is never an input to clustering.
struct SynthCorpus {
    std::vector<ProjectSeries> projects;
    std::vector<ShapeFamily> families;
};

/// Noise-free template value in roughly [0, 1] at the given day, built from
/// logistic ramps:
///   early_increase    rise centered at day 75 (width 25)
///   midterm_increase  rise centered at day 300 (width 50)
///   midterm_decrease  fall centered at day 300 (width 50)
///   early_decrease    fall centered at day 100 (width 35), plus a 0.4
///                     upward drift centered at day 650 (width 30)
double family_template(ShapeFamily family, double day);

/// Validation notes for a spec that still generates but deserves a caller
/// warning — currently a gap mean so long that fewer than two releases are
/// expected inside the observation window.
std::vector<std::string> corpus_warnings(const CorpusSpec& spec);

/// One deterministic project: release days start at 0 and follow the gap
/// law within the 731-day window, complexity follows the family template
/// plus noise, and LOC grows strictly. Throws std::invalid_argument on
/// non-positive gap mean, negative noise, or an empty/reversed range.
ProjectSeries generate_project(ShapeFamily family, const CorpusSpec& spec, std::uint64_t seed,
                               std::string project_id = "synthetic");

/// Full corpus in family order with per-project derived seeds and neutral
/// ids p001, p002, ... Requires a total count >= 8.
SynthCorpus generate_corpus(const CorpusSpec& spec);

/// `project_id,family` CSV recording the generator labels.
std::string write_truth_csv(const SynthCorpus& corpus);

/// Family labels as ints (kAllFamilies order), e.g. for agreement scoring.
std::vector<int> family_labels(const SynthCorpus& corpus);

} // namespace evofda
