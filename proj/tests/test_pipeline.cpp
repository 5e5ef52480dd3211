#include "ccovar/error.hpp"
#include "ccovar/pipeline.hpp"
#include "ccovar/spillover.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace ccovar;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ok;
}

std::string error_text(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ccovar-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const fs::path kFixture = fs::path(CCOVAR_FIXTURE_DIR) / "synthetic";

// Small search settings keep the end-to-end runs to a few seconds.
PipelineConfig fixture_config(const fs::path& out) {
    auto c = load_config(kFixture / "pipeline.conf");
    c.max_lag = 1;
    c.marginal.starts = 2;
    c.n_bootstrap = 200;
    c.out = out;
    return c;
}

class ScopedEnv {
public:
    ScopedEnv(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
    ~ScopedEnv() { ::unsetenv(name_); }

private:
    const char* name_;
};

}  // namespace

TEST(Config, LoadResolvesRelativePaths) {
    const auto c = load_config(kFixture / "pipeline.conf");
    EXPECT_EQ(c.futures.path, kFixture / "futures.csv");
    EXPECT_EQ(c.spot.path, kFixture / "spot.csv");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.candidates.size(), 10u);
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, RenderRoundTrip) {
    const auto dir = scratch("render");
    auto c = load_config(kFixture / "pipeline.conf");
    set_config_value(c, "n_bootstrap", "250");
    set_config_value(c, "copulas", "Clayton, Gumbel+SurvGumbel");
    set_config_value(c, "alpha_down", "0.01");
    write(dir / "again.conf", render_config(c));
    const auto back = load_config(dir / "again.conf");
    EXPECT_EQ(render_config(back), render_config(c));
    EXPECT_EQ(back.n_bootstrap, 250);
    EXPECT_EQ(back.candidates.size(), 2u);
    EXPECT_EQ(back.risk.alpha_down, 0.01);
}

TEST(Config, Errors) {
    const auto dir = scratch("config-errors");
    write(dir / "unknown.conf", "colour = blue\n");
    EXPECT_EQ(code_of([&] { load_config(dir / "unknown.conf"); }), ErrorCode::config_error);
    write(dir / "bad.conf", "n_bootstrap = many\n");
    EXPECT_EQ(code_of([&] { load_config(dir / "bad.conf"); }), ErrorCode::config_error);
    write(dir / "noeq.conf", "seed 5\n");
    EXPECT_EQ(code_of([&] { load_config(dir / "noeq.conf"); }), ErrorCode::config_error);
    EXPECT_EQ(code_of([&] { load_config(dir / "absent.conf"); }), ErrorCode::file_missing);

    auto c = load_config(kFixture / "pipeline.conf");
    c.max_lag = 4;
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::config_error);
    c = load_config(kFixture / "pipeline.conf");
    c.n_bootstrap = 50;
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::config_error);
    c = load_config(kFixture / "pipeline.conf");
    c.spot.path = dir / "missing.csv";
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::file_missing);
    c = load_config(kFixture / "pipeline.conf");
    c.risk.alpha_up = 0.4;
    EXPECT_NE(code_of([&] { validate(c); }), ErrorCode::ok);
}

TEST(Config, EnvironmentOverrides) {
    auto c = load_config(kFixture / "pipeline.conf");
    {
        ScopedEnv seed("CCOVAR_SEED", "1234");
        ScopedEnv out("CCOVAR_OUT", "/tmp/elsewhere");
        apply_env_overrides(c);
    }
    EXPECT_EQ(c.seed, 1234u);
    EXPECT_EQ(c.out, fs::path("/tmp/elsewhere"));
    ScopedEnv bad("CCOVAR_SEED", "-3");
    EXPECT_EQ(code_of([&] { apply_env_overrides(c); }), ErrorCode::config_error);
}

TEST(Simulate, TooShort) {
    PipelineConfig c;
    c.out = scratch("sim-short");
    c.simulation.T = 100;
    EXPECT_EQ(code_of([&] { simulate(c); }), ErrorCode::too_short);
}

TEST(Simulate, WritesLoadableDeterministicData) {
    PipelineConfig c;
    c.seed = 5;
    c.simulation.T = 300;
    const auto first = scratch("sim-a");
    c.out = first;
    const auto files = simulate(c);
    ASSERT_EQ(files.size(), 4u);
    for (const auto& f : files) EXPECT_GT(fs::file_size(f), 0u);

    const auto prices = load_prices(c.out / "futures.csv", CsvColumns{});
    ASSERT_EQ(prices.size(), 301u);
    EXPECT_EQ(prices.prices.front(), 100.0);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        EXPECT_GT(prices.prices[i], 0.0);
        const std::chrono::weekday wd{std::chrono::sys_days{prices.dates[i]}};
        EXPECT_NE(wd, std::chrono::Saturday);
        EXPECT_NE(wd, std::chrono::Sunday);
    }

    const auto conf = load_config(c.out / "pipeline.conf");
    EXPECT_EQ(conf.futures.path, c.out / "futures.csv");
    const auto truth = nlohmann::json::parse(slurp(c.out / "truth.json"));
    EXPECT_EQ(truth["pre_observations"].get<int>() + truth["post_observations"].get<int>(), 300);

    c.out = scratch("sim-b");
    simulate(c);
    for (const char* name : {"futures.csv", "spot.csv", "truth.json"}) {
        EXPECT_TRUE(slurp(first / name) == slurp(c.out / name)) << name;
    }
}

class FixtureRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        out_ = new fs::path(scratch("run"));
        manifest_ = new fs::path(run_pipeline(fixture_config(*out_)));
    }
    static void TearDownTestSuite() {
        delete out_;
        delete manifest_;
    }
    static nlohmann::json manifest() { return nlohmann::json::parse(slurp(*manifest_)); }

    static fs::path* out_;
    static fs::path* manifest_;
};

fs::path* FixtureRun::out_ = nullptr;
fs::path* FixtureRun::manifest_ = nullptr;

TEST_F(FixtureRun, ManifestListsTablesAndPlotData) {
    const auto m = manifest();
    int tables = 0, plots = 0;
    for (const auto& f : m["files"]) {
        const auto path = *out_ / f["name"].get<std::string>();
        ASSERT_TRUE(fs::exists(path)) << path;
        EXPECT_GT(fs::file_size(path), 0u);
        EXPECT_EQ(fs::file_size(path), f["bytes"].get<std::uintmax_t>());
        if (f["kind"] == "table") ++tables;
        if (f["kind"] == "plot-data") ++plots;
        if (path.extension() == ".json") EXPECT_TRUE(nlohmann::json::accept(slurp(path))) << path;
    }
    EXPECT_EQ(tables, 6);
    EXPECT_EQ(plots, 2);
    for (auto stage : kStages) EXPECT_TRUE(m["stages"].contains(std::string(stage))) << stage;
    EXPECT_EQ(m["stages"]["ingest"]["observations"]["pre"], 300);
    EXPECT_TRUE(fs::exists(*out_ / "timings.txt"));
}

TEST_F(FixtureRun, PositiveDependenceSigns) {
    std::ifstream in(*out_ / "figure2_risk.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line,
              "date,period,var_down_futures,var_up_futures,var_down_spot,var_up_spot,covar_down,covar_up,"
              "covar_median_down,covar_median_up,delta_covar_down,delta_covar_up");
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 12u);
        EXPECT_LT(std::stod(cells[10]), 0.0) << cells[0];
        EXPECT_GT(std::stod(cells[11]), 0.0) << cells[0];
        EXPECT_LE(std::stod(cells[6]), std::stod(cells[4])) << cells[0];
        ++rows;
    }
    EXPECT_EQ(rows, 600);
}

TEST_F(FixtureRun, SpilloverTableShape) {
    const auto t6 = nlohmann::json::parse(slurp(*out_ / "table6_spillover.json"));
    ASSERT_EQ(t6.size(), 12u);
    for (const auto& t : t6) {
        EXPECT_EQ(t["stars"].get<std::string>(), significance_stars(t["p_value"].get<double>()));
        EXPECT_EQ(t["n_bootstrap"], 200);
    }
    // Strong dependence in the fixture: the Panel A/B spillover tests all reject.
    for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(t6[i]["p_value"].get<double>(), 0.01);
}

TEST_F(FixtureRun, ReportRendersEveryTable) {
    const auto text = report(*out_);
    for (const char* heading : {"Table 1.", "Table 2.", "Table 3.", "Tables 4-5.", "Summary statistics of the risk measures", "Table 6."}) {
        EXPECT_NE(text.find(heading), std::string::npos) << heading;
    }
    EXPECT_NE(text.find("not computed"), std::string::npos);
    EXPECT_NE(text.find("#"), std::string::npos);  // smallest-AIC marker
    EXPECT_NE(text.find("***"), std::string::npos);
    EXPECT_EQ(text.find("nan"), std::string::npos);
}

TEST_F(FixtureRun, RepeatedRunIsByteIdentical) {
    auto c = fixture_config(scratch("run-again"));
    c.use_cache = false;
    run_pipeline(c);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(*out_)) {
        if (!entry.is_regular_file() || entry.path().filename() == "timings.txt") continue;
        EXPECT_TRUE(slurp(entry.path()) == slurp(c.out / entry.path().filename())) << entry.path().filename();
        ++compared;
    }
    EXPECT_EQ(compared, 9u);  // 8 artefacts + manifest
}

TEST_F(FixtureRun, ReportNamesMissingStage) {
    const auto dir = scratch("incomplete");
    for (const auto& entry : fs::directory_iterator(*out_)) {
        if (entry.is_regular_file()) fs::copy_file(entry.path(), dir / entry.path().filename());
    }
    auto m = manifest();
    m["stages"].erase("fit-copula");
    write(dir / "manifest.json", m.dump(2));
    EXPECT_EQ(code_of([&] { report(dir); }), ErrorCode::manifest_incomplete);
    EXPECT_NE(error_text([&] { report(dir); }).find("fit-copula"), std::string::npos);

    fs::remove(dir / "manifest.json");
    EXPECT_EQ(code_of([&] { report(dir); }), ErrorCode::manifest_incomplete);

    write(dir / "manifest.json", manifest().dump(2));
    fs::remove(dir / "table45_copulas.json");
    EXPECT_NE(error_text([&] { report(dir); }).find("table45_copulas.json"), std::string::npos);
}

TEST(Pipeline, BoundaryOutsideDataIsEmptySubPeriod) {
    auto c = fixture_config(scratch("late-boundary"));
    c.boundary = parse_date("2031-01-01");
    EXPECT_EQ(code_of([&] { run_pipeline(c); }), ErrorCode::empty_sub_period);
    EXPECT_NE(error_text([&] { run_pipeline(c); }).find("ingest"), std::string::npos);
    c.boundary = parse_date("2000-01-01");
    EXPECT_EQ(code_of([&] { run_stage(c, "ingest"); }), ErrorCode::empty_sub_period);
}

TEST(Pipeline, SingleStageBuildsItsDependencies) {
    const auto c = fixture_config(scratch("stage"));
    const auto paths = run_stage(c, "risk");
    ASSERT_EQ(paths.size(), 2u);
    for (const auto& p : paths) EXPECT_TRUE(fs::exists(p)) << p;
    EXPECT_TRUE(fs::exists(c.out / ".cache"));
    EXPECT_EQ(code_of([&] { run_stage(c, "plot"); }), ErrorCode::config_error);
}
