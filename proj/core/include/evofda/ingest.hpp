#pragma once

#include "evofda/dates.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evofda {

struct ReleaseRecord {
    std::string project_id;
    Date release_date;
    long loc = 0;                 // >= 1
    double cplxlcoh = 0;          // >= 0
    std::optional<double> cpl;    // present when the CSV carried components
    std::optional<double> lcoh;
};

/// Date-ordered release history of one project. Dates are strictly
/// increasing; duplicates are rejected at load time.
struct ProjectSeries {
    std::string project_id;
    std::vector<ReleaseRecord> releases;

    const ReleaseRecord& first() const { return releases.front(); }
    const ReleaseRecord& last() const { return releases.back(); }
    double loc_growth_fraction() const;
};

struct ScreeningCriteria {
    double min_loc_growth_fraction = 0.05;
    int min_release_count = 1;
    bool require_any_positive_growth = false; // replaces the fraction rule with "> 0"
};

struct RejectedProject {
    std::string project_id;
    std::string reason; // machine-readable: too_few_releases | insufficient_loc_growth
};

struct ScreeningResult {
    std::vector<ProjectSeries> kept;
    std::vector<RejectedProject> rejected;
};

/// min <= mean <= max summary of one measure across the sample.
struct MeasureStats {
    std::string measure;
    double mean = 0;
    double stddev = 0; // sample standard deviation (n-1); 0 for n < 2
    double min = 0;
    double max = 0;
};

struct DescriptiveStats {
    std::size_t project_count = 0;
    std::vector<MeasureStats> measures; // releases, frequency, first/last LOC, first/last cplxlcoh
};

/// Loads the releases CSV. Leading '#' comment lines are skipped; the header
/// must then match one of (bit-exact):
///   project_id,release_date,loc,cplxlcoh
///   project_id,release_date,loc,cpl,lcoh
///   project_id,release_date,loc,cpl,lcoh,cplxlcoh
/// With components present, cplxlcoh is their product; a carried cplxlcoh
/// column is cross-checked against it. Records are grouped by project in
/// first-appearance order and sorted by date. Throws ParseError with line
/// numbers for malformed rows, duplicate (project, date) pairs, or loc < 1.
std::vector<ProjectSeries> load_releases(std::string_view csv_content);

/// Serializes series back to CSV: the 6-column layout when every record
/// carries components, otherwise the 4-column cross-term layout.
std::string write_releases_csv(const std::vector<ProjectSeries>& projects);

/// Partitions projects into kept and rejected under the criteria. A project
/// is kept iff its release count meets min_release_count and its first-to-
/// last LOC growth meets the growth rule.
ScreeningResult screen_projects(const std::vector<ProjectSeries>& projects,
                                const ScreeningCriteria& criteria);

/// Sample statistics over release count, average release frequency in days
/// ((last-first)/(count-1), 0 for single-release projects), first/last LOC
/// and first/last cplxlcoh. Throws std::invalid_argument on empty input.
DescriptiveStats describe_sample(const std::vector<ProjectSeries>& projects);

/// Average gap in days between consecutive releases; 0 for a single release.
double release_frequency_days(const ProjectSeries& series);

} // namespace evofda
