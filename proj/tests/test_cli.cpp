#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evofda/ingest.hpp"
#include "evofda/pipeline.hpp"
#include "evofda/textio.hpp"

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

using namespace evofda;
namespace fs = std::filesystem;
using nlohmann::json;

// These tests drive the installed binary the way a user would: spawn it with a
// shell command line, capture stdout/stderr, and inspect the files it leaves
// behind. EVOFDA_CLI_PATH is injected by the build.

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const TempDir& dir, const std::string& env = "") {
    const std::string out_path = dir.file("cli_stdout.txt");
    const std::string err_path = dir.file("cli_stderr.txt");
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += std::string(EVOFDA_CLI_PATH) + " " + args + " >'" + out_path + "' 2>'" + err_path + "'";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

// One class with two methods where only one touches the single pair of fields:
// accruals 1, a_bar 0.5, lcom (0.5 - 2)/(1 - 2) = 1.5 clamped to 1, so A's
// lack-of-cohesion is 100. B has one method (cohesion 0) and no refs, while A
// refs B once; means over the two classes give cpl 0.5, lcoh 50, product 25.
std::string alpha_facts(int loc) {
    return "loc " + std::to_string(loc) + "\n"
           "class A\n"
           "field A.f\n"
           "field A.g\n"
           "method A.m1\n"
           "method A.m2\n"
           "access A.m1 f\n"
           "ref A.m1 B\n"
           "class B\n"
           "method B.x\n";
}

// Extract the JSON payload of a leading "# config = {...}" stamp line.
json stamp_of(const std::string& text) {
    REQUIRE(text.starts_with("# config = "));
    const std::size_t eol = text.find('\n');
    REQUIRE(eol != std::string::npos);
    return json::parse(text.substr(11, eol - 11));
}

std::size_t count_files(const std::string& dir) {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) ++n;
    return n;
}

} // namespace

TEST_CASE("a subcommand is required") {
    TempDir dir("evofda_cli_noargs");
    CHECK(run_cli("", dir).exit_code != 0);
}

TEST_CASE("metrics turns fact snapshots into a date-sorted releases CSV") {
    TempDir dir("evofda_cli_metrics");
    fs::create_directories(dir.file("facts"));
    // Written in shuffled order; output must still be sorted by release date.
    write_file(dir.file("facts/alpha_2003-03-01.facts"), alpha_facts(210));
    write_file(dir.file("facts/alpha_2003-01-17.facts"), alpha_facts(100));
    write_file(dir.file("facts/alpha_2003-02-02.facts"), alpha_facts(150));
    write_file(dir.file("facts/beta_2002-12-31.facts"), "loc 50\n"
                                                        "class Only\n"
                                                        "method Only.go\n");

    const CliResult r = run_cli("metrics '" + dir.file("facts") + "' -o '" + dir.file("out.csv") + "'", dir);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("4 snapshots across 2 projects") != std::string::npos);

    const std::string csv = read_file(dir.file("out.csv"));
    const json stamp = stamp_of(csv);
    CHECK(stamp.at("command") == "metrics");
    CHECK(stamp.at("coupling_mode") == "distinct");
    CHECK(csv.find("project_id,release_date,loc,cpl,lcoh,cplxlcoh\n") != std::string::npos);

    const std::vector<ProjectSeries> projects = load_releases(csv);
    REQUIRE(projects.size() == 2);
    CHECK(projects[0].project_id == "alpha");
    REQUIRE(projects[0].releases.size() == 3);
    CHECK(projects[0].releases[0].release_date == Date::parse("2003-01-17"));
    CHECK(projects[0].releases[1].release_date == Date::parse("2003-02-02"));
    CHECK(projects[0].releases[2].release_date == Date::parse("2003-03-01"));
    CHECK(projects[0].releases[0].loc == 100);
    CHECK(projects[0].releases[1].loc == 150);
    CHECK(projects[0].releases[2].loc == 210);
    for (const ReleaseRecord& release : projects[0].releases)
        CHECK(release.cplxlcoh == doctest::Approx(25.0));
    CHECK(projects[1].project_id == "beta");
    REQUIRE(projects[1].releases.size() == 1);
    CHECK(projects[1].releases[0].loc == 50);
}

TEST_CASE("metrics on an empty directory writes a header-only CSV") {
    TempDir dir("evofda_cli_metrics_empty");
    fs::create_directories(dir.file("facts"));
    const CliResult r = run_cli("metrics '" + dir.file("facts") + "' -o '" + dir.file("out.csv") + "'", dir);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("0 snapshots across 0 projects") != std::string::npos);
    const std::string csv = read_file(dir.file("out.csv"));
    CHECK(stamp_of(csv).at("command") == "metrics");
    // Stamp line plus a header line and nothing else.
    CHECK(csv.ends_with("\nproject_id,release_date,loc,cpl,lcoh,cplxlcoh\n"));
    CHECK(load_releases(csv).empty());
}

TEST_CASE("a malformed fact file fails naming the file and line") {
    TempDir dir("evofda_cli_metrics_bad");
    fs::create_directories(dir.file("facts"));
    write_file(dir.file("facts/gamma_2003-01-01.facts"), "class A\nwobble A\n");
    const CliResult r = run_cli("metrics '" + dir.file("facts") + "' -o '" + dir.file("out.csv") + "'", dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("gamma_2003-01-01.facts") != std::string::npos);
    CHECK(r.err.find("line 2") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.file("out.csv")));
}

TEST_CASE("a fact file without a date in its name is rejected") {
    TempDir dir("evofda_cli_metrics_name");
    fs::create_directories(dir.file("facts"));
    write_file(dir.file("facts/nodate.facts"), "class A\n");
    const CliResult r = run_cli("metrics '" + dir.file("facts") + "' -o '" + dir.file("out.csv") + "'", dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("file name must be <project>_<date>.facts") != std::string::npos);
}

TEST_CASE("synth refuses to run without a seed") {
    TempDir dir("evofda_cli_synth_noseed");
    const CliResult r = run_cli("synth -O '" + dir.file("corpus") + "'", dir);
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("--seed") != std::string::npos);
}

TEST_CASE("synth writes a loadable corpus with truth labels") {
    TempDir dir("evofda_cli_synth");
    const CliResult r =
        run_cli("synth --seed 42 --counts 2,2,2,2 -O '" + dir.file("corpus") + "'", dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("wrote 8 projects") != std::string::npos);

    const std::string releases = read_file(dir.file("corpus/releases.csv"));
    const json stamp = stamp_of(releases);
    CHECK(stamp.at("command") == "synth");
    CHECK(stamp.at("seed") == 42);
    CHECK(stamp.at("family_counts") == json::array({2, 2, 2, 2}));

    const std::vector<ProjectSeries> projects = load_releases(releases);
    REQUIRE(projects.size() == 8);
    CHECK(projects.front().project_id == "p001");
    CHECK(projects.back().project_id == "p008");

    const std::string truth = read_file(dir.file("corpus/truth.csv"));
    CHECK(stamp_of(truth).at("command") == "synth");
    CHECK(truth.find("project_id,family\n") != std::string::npos);
    const std::map<std::string, std::string> labels = load_truth(truth);
    CHECK(labels.size() == 8);
    CHECK(labels.count("p001") == 1);
}

TEST_CASE("run writes a full bundle and reports recovery against truth") {
    TempDir dir("evofda_cli_run");
    REQUIRE(run_cli("synth --seed 3 --counts 3,3,3,3 -O '" + dir.file("corpus") + "'", dir)
                .exit_code == 0);
    const CliResult r = run_cli("run -i '" + dir.file("corpus/releases.csv") + "' --truth '" +
                                    dir.file("corpus/truth.csv") + "' -O '" + dir.file("out") + "'",
                                dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("kept 12 of 12 projects") != std::string::npos);
    CHECK(r.out.find("k=4:") != std::string::npos);
    CHECK(r.out.find("truth ARI") != std::string::npos);
    CHECK(r.out.find("wrote 35 files") != std::string::npos);
    CHECK(count_files(dir.file("out")) == 35);

    const json summary = json::parse(read_file(dir.file("out/run_summary.json")));
    CHECK(summary.at("projects_loaded") == 12);
    const json stamp = json::parse(read_file(dir.file("out/config.json")));
    CHECK(stamp.at("input_csv") == dir.file("corpus/releases.csv"));
}

TEST_CASE("the output directory can come from the environment") {
    TempDir dir("evofda_cli_envdir");
    REQUIRE(run_cli("synth --seed 5 --counts 3,3,3,3 -O '" + dir.file("corpus") + "'", dir)
                .exit_code == 0);
    const CliResult r = run_cli("run -i '" + dir.file("corpus/releases.csv") + "'", dir,
                                "EVOFDA_OUTPUT_DIR='" + dir.file("env_out") + "'");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir.file("env_out/run_summary.json")));
    const json stamp = json::parse(read_file(dir.file("env_out/config.json")));
    CHECK(stamp.at("output_dir") == dir.file("env_out"));
}

TEST_CASE("run on a single-project corpus succeeds with a notice") {
    TempDir dir("evofda_cli_single");
    REQUIRE(run_cli("synth --seed 9 --counts 3,3,3,3 -O '" + dir.file("corpus") + "'", dir)
                .exit_code == 0);
    // The generator refuses tiny corpora, so cut one project out by hand.
    const std::vector<ProjectSeries> all = load_releases(read_file(dir.file("corpus/releases.csv")));
    write_file(dir.file("single.csv"), write_releases_csv({all.front()}));
    const CliResult r =
        run_cli("run -i '" + dir.file("single.csv") + "' -O '" + dir.file("out") + "'", dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("notice: n < 2 after screening") != std::string::npos);
    CHECK(fs::exists(dir.file("out/run_summary.json")));
    CHECK_FALSE(fs::exists(dir.file("out/clusters_k2.json")));
}

TEST_CASE("a config file can set run options") {
    TempDir dir("evofda_cli_config");
    REQUIRE(run_cli("synth --seed 3 --counts 3,3,3,3 -O '" + dir.file("corpus") + "'", dir)
                .exit_code == 0);
    write_file(dir.file("evofda.toml"), "[run]\n"
                                        "knots = 6\n"
                                        "k-max = 3\n");
    const CliResult r = run_cli("--config '" + dir.file("evofda.toml") + "' run -i '" +
                                    dir.file("corpus/releases.csv") + "' -O '" + dir.file("out") + "'",
                                dir);
    CHECK(r.exit_code == 0);
    const json stamp = json::parse(read_file(dir.file("out/config.json")));
    CHECK(stamp.at("knots") == 6);
    CHECK(stamp.at("k_max") == 3);
    CHECK(fs::exists(dir.file("out/clusters_k3.json")));
    CHECK_FALSE(fs::exists(dir.file("out/clusters_k4.json")));
}

TEST_CASE("ingest writes screening and descriptives files") {
    TempDir dir("evofda_cli_ingest");
    REQUIRE(run_cli("synth --seed 3 --counts 3,3,3,3 -O '" + dir.file("corpus") + "'", dir)
                .exit_code == 0);
    const CliResult r =
        run_cli("ingest -i '" + dir.file("corpus/releases.csv") + "' -O '" + dir.file("out") + "'", dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("kept 12 of 12 projects") != std::string::npos);
    CHECK(read_file(dir.file("out/screening.csv")).starts_with("# config = "));
    const json descriptives = json::parse(read_file(dir.file("out/descriptives.json")));
    CHECK(descriptives.at("project_count") == 12);
}

TEST_CASE("sensitivity can run a single grid cell") {
    TempDir dir("evofda_cli_sens");
    REQUIRE(run_cli("synth --seed 3 --counts 3,3,3,3 -O '" + dir.file("corpus") + "'", dir)
                .exit_code == 0);
    const CliResult r = run_cli(
        "sensitivity -i '" + dir.file("corpus/releases.csv") + "' -O '" + dir.file("out") +
            "' --knot-axis 13 --lambda-axis default --feature-axis coefficients --screening-axis default",
        dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("knots13_lamdefault_coeff_scrdefault") != std::string::npos);
    CHECK(r.out.find("wrote 3 files") != std::string::npos);
    CHECK(count_files(dir.file("out")) == 3);
    const json report = json::parse(read_file(dir.file("out/sensitivity.json")));
    CHECK(report.at("variants").size() == 1);
}
