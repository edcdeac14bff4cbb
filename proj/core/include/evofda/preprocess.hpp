#pragma once

#include "evofda/ingest.hpp"

#include <string>
#include <vector>

namespace evofda {

/// Observation window: releases more than kWindowDays after the first are
/// dropped, and daily curves carry one sample per day 0..kWindowDays.
inline constexpr long kWindowDays = 730;
inline constexpr std::size_t kCurveLength = kWindowDays + 1;

struct AlignedRelease {
    long day = 0; // days since the project's first release
    long loc = 0;
    double cplxlcoh = 0;
};

/// Release series rebased to day offsets and truncated to the window.
/// The first release sits at day 0 and is always retained.
struct AlignedSeries {
    std::string project_id;
    std::vector<AlignedRelease> releases;
};

/// One complexity sample per day over the window. Raw curves are piecewise
/// constant with jumps only at release days; standardized curves are
/// mean-centered (mean 0 within 1e-9).
struct DailyCurve {
    std::string project_id;
    std::vector<double> values; // exactly kCurveLength entries
    bool standardized = false;
};

struct OutcomeScalars {
    double percent_change = 0; // (last - first)/first on raw in-window values
    long active_life = 0;      // day offset of the last in-window release
};

enum class StandardizeMode {
    center,  // subtract the curve mean (default)
    zscore,  // subtract mean, divide by sample standard deviation
};

/// Rebases releases to days since the first release and drops releases past
/// the window. Idempotent: realigning an aligned series changes nothing.
AlignedSeries align_and_truncate(const ProjectSeries& series);

/// Step interpolation onto the daily grid: day d takes the cplxlcoh of the
/// latest release with day <= d, and the last release's value extends to the
/// end of the window. Requires a release at day 0.
DailyCurve to_daily_step(const AlignedSeries& aligned);

/// Mean-centers (or z-scores) the curve. Throws std::invalid_argument if the
/// curve is already standardized, unless allow_restandardize is set, in which
/// case the call is a no-op.
DailyCurve standardize(const DailyCurve& curve, StandardizeMode mode = StandardizeMode::center,
                       bool allow_restandardize = false);

/// Percent change and active life from the in-window releases, on raw values.
/// Throws std::invalid_argument when the first release's cplxlcoh is 0, which
/// makes percent change undefined.
OutcomeScalars outcome_scalars(const AlignedSeries& aligned);

/// Serializes curves to CSV rows `project_id,day,value,standardized`, with
/// optional leading `# key = value` config stamp comment lines.
std::string write_curves_csv(const std::vector<DailyCurve>& curves,
                             const std::vector<std::string>& comment_lines = {});

} // namespace evofda
