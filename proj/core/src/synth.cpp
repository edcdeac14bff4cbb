#include "evofda/synth.hpp"

#include "evofda/preprocess.hpp"
#include "evofda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace evofda {

namespace {

constexpr long kBaseLoc = 10000;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Strictly increasing LOC path from kBaseLoc to its grown final value,
/// linearly interpolated over the releases.
std::vector<long> loc_path(std::size_t releases, double growth) {
    long final_loc = std::lround(kBaseLoc * (1.0 + growth));
    final_loc = std::max(final_loc, kBaseLoc + long(releases) - 1);
    std::vector<long> locs(releases, kBaseLoc);
    for (std::size_t i = 1; i < releases; ++i) {
        long loc = kBaseLoc + std::lround(double(final_loc - kBaseLoc) * double(i) / double(releases - 1));
        locs[i] = std::max(loc, locs[i - 1] + 1);
    }
    return locs;
}

void validate(const CorpusSpec& spec) {
    if (spec.gap_mean_days <= 0) throw std::invalid_argument("synth: gap mean must be positive");
    if (spec.gap_dispersion <= 0) throw std::invalid_argument("synth: gap dispersion must be positive");
    if (spec.noise_sd < 0) throw std::invalid_argument("synth: noise must be non-negative");
    if (spec.base_min > spec.base_max) throw std::invalid_argument("synth: base range reversed");
    if (spec.loc_growth_min > spec.loc_growth_max)
        throw std::invalid_argument("synth: LOC growth range reversed");
    for (int count : spec.family_counts)
        if (count < 0) throw std::invalid_argument("synth: negative family count");
}

} // namespace

std::string_view family_name(ShapeFamily family) {
    switch (family) {
        case ShapeFamily::early_decrease: return "early_decrease";
        case ShapeFamily::early_increase: return "early_increase";
        case ShapeFamily::midterm_increase: return "midterm_increase";
        case ShapeFamily::midterm_decrease: return "midterm_decrease";
    }
    throw std::invalid_argument("synth: unknown family");
}

std::optional<ShapeFamily> parse_family(std::string_view name) {
    for (ShapeFamily family : kAllFamilies)
        if (name == family_name(family)) return family;
    return std::nullopt;
}

double family_template(ShapeFamily family, double day) {
    switch (family) {
        case ShapeFamily::early_increase:
            return logistic((day - 75) / 25);
        case ShapeFamily::midterm_increase:
            return logistic((day - 300) / 50);
        case ShapeFamily::midterm_decrease:
            return 1 - logistic((day - 300) / 50);
        case ShapeFamily::early_decrease:
            return 1 - logistic((day - 100) / 35) + 0.4 * logistic((day - 650) / 30);
    }
    throw std::invalid_argument("synth: unknown family");
}

std::vector<std::string> corpus_warnings(const CorpusSpec& spec) {
    std::vector<std::string> warnings;
    if (spec.gap_mean_days > double(kWindowDays))
        warnings.push_back("gap mean " + std::to_string(spec.gap_mean_days) +
                           " days expects fewer than two releases inside the observation window");
    return warnings;
}

ProjectSeries generate_project(ShapeFamily family, const CorpusSpec& spec, std::uint64_t seed,
                               std::string project_id) {
    validate(spec);
    std::mt19937_64 eng(seed);
    static const Date base_date = Date::parse("2000-01-01");

    // Release days: always day 0, then discretized log-normal gaps with the
    // requested mean and coefficient of variation, until the window ends.
    const double cv = spec.gap_dispersion;
    const double sigma2 = std::log(1.0 + cv * cv);
    const double mu = std::log(spec.gap_mean_days) - sigma2 / 2;
    std::vector<long> days{0};
    for (;;) {
        const double gap = std::exp(mu + std::sqrt(sigma2) * normal_draw(eng));
        const long next = days.back() + std::max<long>(1, std::lround(gap));
        if (next > kWindowDays) break;
        days.push_back(next);
    }

    const double base = spec.base_min + (spec.base_max - spec.base_min) * uniform_unit(eng);
    const double growth =
        spec.loc_growth_min + (spec.loc_growth_max - spec.loc_growth_min) * uniform_unit(eng);
    const std::vector<long> locs = loc_path(days.size(), growth);

    ProjectSeries series;
    series.project_id = project_id;
    for (std::size_t i = 0; i < days.size(); ++i) {
        ReleaseRecord record;
        record.project_id = project_id;
        record.release_date = base_date + days[i];
        record.loc = locs[i];
        const double noise = spec.noise_sd > 0 ? spec.noise_sd * normal_draw(eng) : 0.0;
        record.cplxlcoh =
            std::max(0.01, base + spec.amplitude * family_template(family, double(days[i])) + noise);
        series.releases.push_back(std::move(record));
    }
    return series;
}

SynthCorpus generate_corpus(const CorpusSpec& spec) {
    validate(spec);
    int total = 0;
    for (int count : spec.family_counts) total += count;
    if (total < 8) throw std::invalid_argument("synth: corpus needs at least 8 projects");

    SynthCorpus corpus;
    int index = 0;
    for (std::size_t f = 0; f < kAllFamilies.size(); ++f) {
        for (int i = 0; i < spec.family_counts[f]; ++i) {
            ++index;
            char id[16];
            std::snprintf(id, sizeof id, "p%03d", index);
            corpus.projects.push_back(generate_project(
                kAllFamilies[f], spec, mix_seed(spec.seed, std::uint64_t(index)), id));
            corpus.families.push_back(kAllFamilies[f]);
        }
    }
    return corpus;
}

std::string write_truth_csv(const SynthCorpus& corpus) {
    std::string out = "project_id,family\n";
    for (std::size_t i = 0; i < corpus.projects.size(); ++i) {
        out += corpus.projects[i].project_id;
        out += ',';
        out += family_name(corpus.families[i]);
        out += '\n';
    }
    return out;
}

std::vector<int> family_labels(const SynthCorpus& corpus) {
    std::vector<int> labels;
    labels.reserve(corpus.families.size());
    for (ShapeFamily family : corpus.families) labels.push_back(int(family));
    return labels;
}

} // namespace evofda
