#include "evofda/ingest.hpp"

#include "evofda/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace evofda {

double ProjectSeries::loc_growth_fraction() const {
    const double first_loc = double(first().loc);
    return (double(last().loc) - first_loc) / first_loc;
}

double release_frequency_days(const ProjectSeries& series) {
    const std::size_t n = series.releases.size();
    if (n < 2)
        return 0.0;
    return double(series.last().release_date - series.first().release_date) / double(n - 1);
}

namespace {

enum class CsvLayout { cross_term, components, components_and_cross_term };

CsvLayout parse_header(std::string_view header, std::size_t line_no) {
    if (header == "project_id,release_date,loc,cplxlcoh")
        return CsvLayout::cross_term;
    if (header == "project_id,release_date,loc,cpl,lcoh")
        return CsvLayout::components;
    if (header == "project_id,release_date,loc,cpl,lcoh,cplxlcoh")
        return CsvLayout::components_and_cross_term;
    throw ParseError(line_no, "unrecognized releases CSV header: '" + std::string(header) + "'");
}

} // namespace

std::vector<ProjectSeries> load_releases(std::string_view csv_content) {
    const auto lines = split_lines(csv_content);
    // Skip leading '#' comment lines (config stamps on emitted files).
    std::size_t header_at = 0;
    while (header_at < lines.size() && trim(lines[header_at]).starts_with('#'))
        ++header_at;
    if (header_at == lines.size())
        throw ParseError(header_at + 1, "empty CSV: missing header");
    const CsvLayout layout = parse_header(lines[header_at], header_at + 1);
    const std::size_t expected_fields =
        layout == CsvLayout::cross_term ? 4 : layout == CsvLayout::components ? 5 : 6;

    std::vector<ProjectSeries> projects;
    std::map<std::string, std::size_t, std::less<>> index;

    for (std::size_t ln = header_at + 1; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        if (trim(lines[ln]).empty())
            continue;
        const auto fields = split_csv(lines[ln]);
        if (fields.size() != expected_fields)
            throw ParseError(line_no, "expected " + std::to_string(expected_fields) +
                                          " fields, got " + std::to_string(fields.size()));
        ReleaseRecord rec;
        rec.project_id = std::string(trim(fields[0]));
        if (rec.project_id.empty())
            throw ParseError(line_no, "empty project_id");
        try {
            rec.release_date = Date::parse(trim(fields[1]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        rec.loc = parse_long(trim(fields[2]), line_no);
        if (rec.loc < 1)
            throw ParseError(line_no, "loc must be positive, got " + std::to_string(rec.loc));

        if (layout == CsvLayout::cross_term) {
            rec.cplxlcoh = parse_double(trim(fields[3]), line_no);
        } else {
            rec.cpl = parse_double(trim(fields[3]), line_no);
            rec.lcoh = parse_double(trim(fields[4]), line_no);
            rec.cplxlcoh = *rec.cpl * *rec.lcoh;
            if (layout == CsvLayout::components_and_cross_term) {
                const double carried = parse_double(trim(fields[5]), line_no);
                const double scale = std::max({1.0, std::abs(carried), std::abs(rec.cplxlcoh)});
                if (std::abs(carried - rec.cplxlcoh) > 1e-9 * scale)
                    throw ParseError(line_no, "cplxlcoh column disagrees with cpl*lcoh");
            }
        }
        if (rec.cplxlcoh < 0)
            throw ParseError(line_no, "cplxlcoh must be non-negative");

        auto [it, inserted] = index.try_emplace(rec.project_id, projects.size());
        if (inserted)
            projects.push_back(ProjectSeries{rec.project_id, {}});
        auto& series = projects[it->second].releases;
        for (const auto& existing : series)
            if (existing.release_date == rec.release_date)
                throw ParseError(line_no, "duplicate release date " + rec.release_date.to_iso() +
                                              " for project " + rec.project_id);
        series.push_back(std::move(rec));
    }

    for (auto& p : projects)
        std::sort(p.releases.begin(), p.releases.end(),
                  [](const ReleaseRecord& a, const ReleaseRecord& b) {
                      return a.release_date < b.release_date;
                  });
    return projects;
}

std::string write_releases_csv(const std::vector<ProjectSeries>& projects) {
    bool components = true;
    for (const auto& p : projects)
        for (const auto& r : p.releases)
            components = components && r.cpl.has_value() && r.lcoh.has_value();

    std::string out = components ? "project_id,release_date,loc,cpl,lcoh,cplxlcoh\n"
                                 : "project_id,release_date,loc,cplxlcoh\n";
    for (const auto& p : projects) {
        for (const auto& r : p.releases) {
            out += p.project_id;
            out += ',';
            out += r.release_date.to_iso();
            out += ',';
            out += std::to_string(r.loc);
            out += ',';
            if (components) {
                out += format_double(*r.cpl);
                out += ',';
                out += format_double(*r.lcoh);
                out += ',';
            }
            out += format_double(r.cplxlcoh);
            out += '\n';
        }
    }
    return out;
}

ScreeningResult screen_projects(const std::vector<ProjectSeries>& projects,
                                const ScreeningCriteria& criteria) {
    ScreeningResult result;
    for (const auto& p : projects) {
        if (long(p.releases.size()) < criteria.min_release_count) {
            result.rejected.push_back({p.project_id, "too_few_releases"});
            continue;
        }
        const double growth = p.loc_growth_fraction();
        const bool grows = criteria.require_any_positive_growth
                               ? growth > 0.0
                               : growth >= criteria.min_loc_growth_fraction;
        if (!grows) {
            result.rejected.push_back({p.project_id, "insufficient_loc_growth"});
            continue;
        }
        result.kept.push_back(p);
    }
    return result;
}

namespace {

MeasureStats summarize(std::string name, const std::vector<double>& values) {
    MeasureStats s;
    s.measure = std::move(name);
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0;
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    const double n = double(values.size());
    s.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (n - 1));
    }
    return s;
}

} // namespace

DescriptiveStats describe_sample(const std::vector<ProjectSeries>& projects) {
    if (projects.empty())
        throw std::invalid_argument("describe_sample requires at least one project");
    std::vector<double> releases, freq, first_loc, last_loc, first_cx, last_cx;
    for (const auto& p : projects) {
        releases.push_back(double(p.releases.size()));
        freq.push_back(release_frequency_days(p));
        first_loc.push_back(double(p.first().loc));
        last_loc.push_back(double(p.last().loc));
        first_cx.push_back(p.first().cplxlcoh);
        last_cx.push_back(p.last().cplxlcoh);
    }
    DescriptiveStats stats;
    stats.project_count = projects.size();
    stats.measures.push_back(summarize("number_of_releases", releases));
    stats.measures.push_back(summarize("avg_release_frequency_days", freq));
    stats.measures.push_back(summarize("first_release_loc", first_loc));
    stats.measures.push_back(summarize("last_release_loc", last_loc));
    stats.measures.push_back(summarize("first_release_cplxlcoh", first_cx));
    stats.measures.push_back(summarize("last_release_cplxlcoh", last_cx));
    return stats;
}

} // namespace evofda
