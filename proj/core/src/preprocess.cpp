#include "evofda/preprocess.hpp"

#include "evofda/textio.hpp"

#include <cmath>
#include <stdexcept>

namespace evofda {

AlignedSeries align_and_truncate(const ProjectSeries& series) {
    if (series.releases.empty())
        throw std::invalid_argument("align_and_truncate requires at least one release");
    AlignedSeries aligned;
    aligned.project_id = series.project_id;
    const Date origin = series.first().release_date;
    for (const auto& r : series.releases) {
        const long day = r.release_date - origin;
        if (day > kWindowDays)
            continue;
        aligned.releases.push_back(AlignedRelease{day, r.loc, r.cplxlcoh});
    }
    return aligned;
}

DailyCurve to_daily_step(const AlignedSeries& aligned) {
    if (aligned.releases.empty() || aligned.releases.front().day != 0)
        throw std::invalid_argument("to_daily_step requires an aligned series with a day-0 release");
    DailyCurve curve;
    curve.project_id = aligned.project_id;
    curve.values.resize(kCurveLength);
    std::size_t next = 0;
    double current = aligned.releases.front().cplxlcoh;
    for (long day = 0; day < long(kCurveLength); ++day) {
        while (next < aligned.releases.size() && aligned.releases[next].day <= day)
            current = aligned.releases[next++].cplxlcoh;
        curve.values[std::size_t(day)] = current;
    }
    return curve;
}

DailyCurve standardize(const DailyCurve& curve, StandardizeMode mode, bool allow_restandardize) {
    if (curve.standardized) {
        if (allow_restandardize)
            return curve;
        throw std::invalid_argument("curve for project " + curve.project_id +
                                    " is already standardized");
    }
    double mean = 0;
    for (double v : curve.values)
        mean += v;
    mean /= double(curve.values.size());

    DailyCurve out;
    out.project_id = curve.project_id;
    out.standardized = true;
    out.values.reserve(curve.values.size());
    for (double v : curve.values)
        out.values.push_back(v - mean);

    if (mode == StandardizeMode::zscore) {
        double ss = 0;
        for (double v : out.values)
            ss += v * v;
        const double sd = std::sqrt(ss / double(out.values.size() - 1));
        if (sd > 0)
            for (double& v : out.values)
                v /= sd;
    }
    return out;
}

OutcomeScalars outcome_scalars(const AlignedSeries& aligned) {
    if (aligned.releases.empty())
        throw std::invalid_argument("outcome_scalars requires at least one release");
    const double first = aligned.releases.front().cplxlcoh;
    if (first == 0)
        throw std::invalid_argument("percent change undefined: first release cplxlcoh is 0 for " +
                                    aligned.project_id);
    OutcomeScalars out;
    out.percent_change = (aligned.releases.back().cplxlcoh - first) / first;
    out.active_life = aligned.releases.back().day;
    return out;
}

std::string write_curves_csv(const std::vector<DailyCurve>& curves,
                             const std::vector<std::string>& comment_lines) {
    std::string out;
    for (const auto& c : comment_lines)
        out += "# " + c + "\n";
    out += "project_id,day,value,standardized\n";
    for (const auto& c : curves) {
        for (std::size_t day = 0; day < c.values.size(); ++day) {
            out += c.project_id;
            out += ',';
            out += std::to_string(day);
            out += ',';
            out += format_double(c.values[day]);
            out += ',';
            out += c.standardized ? '1' : '0';
            out += '\n';
        }
    }
    return out;
}

} // namespace evofda
