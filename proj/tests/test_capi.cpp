// Exercises the shared library strictly through its C interface.
#include "ccovar/ccovar.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

extern "C" int capi_from_c(double* level);

namespace fs = std::filesystem;

namespace {

std::string take(char* text) {
    std::string s = text ? text : "";
    ccovar_string_free(text);
    return s;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ccovar-capi-" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const fs::path kFixture = fs::path(CCOVAR_FIXTURE_DIR) / "synthetic";

}  // namespace

TEST(CApi, VersionAndStatusNames) {
    EXPECT_STREQ(ccovar_version(), "1.0.0");
    EXPECT_STREQ(ccovar_status_name(CCOVAR_OK), "Ok");
    EXPECT_STREQ(ccovar_status_name(CCOVAR_MANIFEST_INCOMPLETE), "ManifestIncomplete");
    EXPECT_STREQ(ccovar_status_name(CCOVAR_NULL_ARGUMENT), "NullArgument");
    EXPECT_STREQ(ccovar_status_name(12345), "unknown");
}

TEST(CApi, UsableFromC) {
    double level = 0.0;
    ASSERT_EQ(capi_from_c(&level), CCOVAR_OK);
    EXPECT_NEAR(level, 1.0 / std::sqrt(159601.0), 1e-9);
}

TEST(CApi, NullArgumentsAreRejected) {
    double out = 0.0;
    EXPECT_EQ(ccovar_skewt_cdf(0.0, 5.0, 0.0, nullptr), CCOVAR_NULL_ARGUMENT);
    EXPECT_EQ(ccovar_copula_cdf(nullptr, 0.5, 0.5, &out), CCOVAR_NULL_ARGUMENT);
    EXPECT_EQ(ccovar_config_load(nullptr, nullptr), CCOVAR_NULL_ARGUMENT);
    EXPECT_NE(std::string(ccovar_last_error()), "");
    ccovar_string_free(nullptr);
    ccovar_config_free(nullptr);
    ccovar_copula_free(nullptr);
}

TEST(CApi, SkewT) {
    double q = 0.0, p = 0.0, d = 0.0;
    ASSERT_EQ(ccovar_skewt_quantile(0.05, 5.0, 0.0, &q), CCOVAR_OK);
    EXPECT_NEAR(q, -1.5608, 1e-3);
    ASSERT_EQ(ccovar_skewt_cdf(q, 5.0, 0.0, &p), CCOVAR_OK);
    EXPECT_NEAR(p, 0.05, 1e-10);
    ASSERT_EQ(ccovar_skewt_pdf(0.0, 5.0, 0.3, &d), CCOVAR_OK);
    EXPECT_GT(d, 0.0);
    EXPECT_EQ(ccovar_skewt_cdf(0.0, 2.0, 0.0, &p), CCOVAR_INVALID_PARAMS);
    EXPECT_EQ(ccovar_skewt_quantile(1.5, 5.0, 0.0, &q), CCOVAR_PROBABILITY_OUT_OF_RANGE);
    EXPECT_NE(std::string(ccovar_last_error()), "");
}

TEST(CApi, CopulaLifecycle) {
    const double params[] = {3.5740, 3.2474, 0.5136};
    ccovar_copula* mix = nullptr;
    ASSERT_EQ(ccovar_copula_create("Gumbel+SurvGumbel", params, 3, &mix), CCOVAR_OK);
    EXPECT_EQ(take([&] {
                  char* s = nullptr;
                  ccovar_copula_label(mix, &s);
                  return s;
              }()),
              "Gumbel+SurvGumbel");
    double back[4] = {};
    size_t count = 0;
    ASSERT_EQ(ccovar_copula_params(mix, back, 4, &count), CCOVAR_OK);
    ASSERT_EQ(count, 3u);
    for (size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(back[i], params[i]);
    EXPECT_EQ(ccovar_copula_params(mix, back, 2, &count), CCOVAR_INVALID_PARAMS);

    double lower = 0.0, upper = 0.0;
    ASSERT_EQ(ccovar_copula_tail(mix, &lower, &upper), CCOVAR_OK);
    EXPECT_NEAR(upper, 0.4037, 5e-4);
    EXPECT_NEAR(lower, 0.3707, 5e-4);

    double c = 0.0, pdf = 0.0, h = 0.0, tau = 0.0;
    EXPECT_EQ(ccovar_copula_cdf(mix, 0.3, 0.6, &c), CCOVAR_OK);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 0.3);
    EXPECT_EQ(ccovar_copula_pdf(mix, 0.3, 0.6, &pdf), CCOVAR_OK);
    EXPECT_EQ(ccovar_copula_hfunc(mix, 0.3, 0.6, &h), CCOVAR_OK);
    EXPECT_EQ(ccovar_copula_kendall_tau(mix, &tau), CCOVAR_OK);
    EXPECT_GT(tau, 0.5);
    EXPECT_EQ(ccovar_copula_cdf(mix, 0.0, 0.6, &c), CCOVAR_ARGUMENT_OUT_OF_RANGE);

    std::vector<double> u1(1500), u2(1500);
    ASSERT_EQ(ccovar_copula_sample(mix, u1.size(), 3, u1.data(), u2.data()), CCOVAR_OK);
    ccovar_copula* fitted = nullptr;
    double loglik = 0.0, aic = 0.0;
    ASSERT_EQ(ccovar_copula_fit("Gumbel+SurvGumbel", u1.data(), u2.data(), u1.size(), &fitted, &loglik, &aic),
              CCOVAR_OK);
    EXPECT_NEAR(aic, 6.0 - 2.0 * loglik, 1e-9);
    ccovar_copula_free(fitted);

    ccovar_copula* bad = nullptr;
    const double alpha = 0.5;
    EXPECT_EQ(ccovar_copula_create("Gumbel", &alpha, 1, &bad), CCOVAR_INVALID_PARAMS);
    EXPECT_EQ(bad, nullptr);
    EXPECT_EQ(ccovar_copula_create("Frank", &alpha, 1, &bad), CCOVAR_INVALID_PARAMS);
    EXPECT_EQ(ccovar_copula_create("Clayton", params, 3, &bad), CCOVAR_INVALID_PARAMS);
    ccovar_copula_free(mix);
}

TEST(CApi, RiskLevels) {
    const double rho = 0.0;
    ccovar_copula* indep = nullptr;
    ASSERT_EQ(ccovar_copula_create("Normal", &rho, 1, &indep), CCOVAR_OK);
    double v = 0.0;
    ASSERT_EQ(ccovar_covar_level(indep, 0.05, CCOVAR_DOWN, &v), CCOVAR_OK);
    EXPECT_NEAR(v, 0.05, 1e-10);
    ASSERT_EQ(ccovar_covar_level(indep, 0.95, CCOVAR_UP, &v), CCOVAR_OK);
    EXPECT_NEAR(v, 0.95, 1e-10);
    ASSERT_EQ(ccovar_median_state_level(indep, 0.05, &v), CCOVAR_OK);
    EXPECT_NEAR(v, 0.05, 1e-10);
    ccovar_copula_free(indep);
}

TEST(CApi, KolmogorovSmirnov) {
    const double g[] = {1, 2}, h[] = {3, 4};
    double s = -1.0;
    ASSERT_EQ(ccovar_ks_statistic(g, 2, h, 2, CCOVAR_KS_GREATER, &s), CCOVAR_OK);
    EXPECT_DOUBLE_EQ(s, 1.0);
    ASSERT_EQ(ccovar_ks_statistic(g, 2, g, 2, CCOVAR_KS_LESS, &s), CCOVAR_OK);
    EXPECT_EQ(s, 0.0);
    EXPECT_EQ(ccovar_ks_statistic(g, 1, h, 2, CCOVAR_KS_GREATER, &s), CCOVAR_TOO_SHORT);
    double p = 0.0;
    ASSERT_EQ(ccovar_ks_pvalue(g, 2, h, 2, CCOVAR_KS_GREATER, 100, 1, &p), CCOVAR_OK);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
}

TEST(CApi, ConfigAndPipeline) {
    ccovar_config* config = nullptr;
    ASSERT_EQ(ccovar_config_load((kFixture / "pipeline.conf").c_str(), &config), CCOVAR_OK);
    const auto out = scratch("run");
    ASSERT_EQ(ccovar_config_set(config, "out", out.c_str()), CCOVAR_OK);
    ASSERT_EQ(ccovar_config_set(config, "max_lag", "1"), CCOVAR_OK);
    ASSERT_EQ(ccovar_config_set(config, "marginal.starts", "2"), CCOVAR_OK);
    ASSERT_EQ(ccovar_config_set(config, "n_bootstrap", "100"), CCOVAR_OK);
    EXPECT_EQ(ccovar_config_set(config, "colour", "blue"), CCOVAR_CONFIG_ERROR);
    char* value = nullptr;
    ASSERT_EQ(ccovar_config_get(config, "max_lag", &value), CCOVAR_OK);
    EXPECT_EQ(take(value), "1");
    EXPECT_EQ(ccovar_config_get(config, "colour", &value), CCOVAR_CONFIG_ERROR);
    char* rendered = nullptr;
    ASSERT_EQ(ccovar_config_render(config, &rendered), CCOVAR_OK);
    EXPECT_NE(take(rendered).find("n_bootstrap = 100"), std::string::npos);

    char* paths = nullptr;
    ASSERT_EQ(ccovar_run_stage(config, "ingest", &paths), CCOVAR_OK);
    EXPECT_NE(take(paths).find("figure1_returns.csv"), std::string::npos);
    EXPECT_EQ(ccovar_run_stage(config, "plot", &paths), CCOVAR_CONFIG_ERROR);

    char* manifest = nullptr;
    ASSERT_EQ(ccovar_run_pipeline(config, &manifest), CCOVAR_OK);
    EXPECT_TRUE(fs::exists(take(manifest)));
    char* text = nullptr;
    ASSERT_EQ(ccovar_report(out.c_str(), &text), CCOVAR_OK);
    EXPECT_NE(take(text).find("Table 6."), std::string::npos);
    EXPECT_EQ(ccovar_report(scratch("empty").c_str(), &text), CCOVAR_MANIFEST_INCOMPLETE);

    ASSERT_EQ(ccovar_config_set(config, "boundary", "2031-01-01"), CCOVAR_OK);
    EXPECT_EQ(ccovar_run_pipeline(config, &manifest), CCOVAR_EMPTY_SUB_PERIOD);
    ccovar_config_free(config);
}

TEST(CApi, SimulateAndEnvironment) {
    ccovar_config* config = nullptr;
    ASSERT_EQ(ccovar_config_default(&config), CCOVAR_OK);
    const auto out = scratch("sim");
    ::setenv("CCOVAR_OUT", out.c_str(), 1);
    ::setenv("CCOVAR_SEED", "77", 1);
    ASSERT_EQ(ccovar_config_apply_env(config), CCOVAR_OK);
    ::unsetenv("CCOVAR_OUT");
    ::unsetenv("CCOVAR_SEED");
    char* value = nullptr;
    ASSERT_EQ(ccovar_config_get(config, "seed", &value), CCOVAR_OK);
    EXPECT_EQ(take(value), "77");

    ASSERT_EQ(ccovar_config_set(config, "sim.T", "100"), CCOVAR_OK);
    char* paths = nullptr;
    EXPECT_EQ(ccovar_simulate(config, &paths), CCOVAR_TOO_SHORT);
    ASSERT_EQ(ccovar_config_set(config, "sim.T", "250"), CCOVAR_OK);
    ASSERT_EQ(ccovar_simulate(config, &paths), CCOVAR_OK);
    const auto listed = take(paths);
    for (const char* name : {"futures.csv", "spot.csv", "truth.json", "pipeline.conf"}) {
        EXPECT_NE(listed.find(name), std::string::npos) << name;
        EXPECT_TRUE(fs::exists(out / name)) << name;
    }
    ccovar_config_free(config);
}

TEST(CApi, IngestionErrorsReportRows) {
    const auto dir = scratch("bad-prices");
    {
        std::FILE* f = std::fopen((dir / "futures.csv").c_str(), "w");
        std::fputs("date,price\n2021-02-23,100\n2021-02-24,0\n", f);
        std::fclose(f);
    }
    ccovar_config* config = nullptr;
    ASSERT_EQ(ccovar_config_default(&config), CCOVAR_OK);
    ASSERT_EQ(ccovar_config_set(config, "futures.path", (dir / "futures.csv").c_str()), CCOVAR_OK);
    ASSERT_EQ(ccovar_config_set(config, "spot.path", (kFixture / "spot.csv").c_str()), CCOVAR_OK);
    ASSERT_EQ(ccovar_config_set(config, "out", (dir / "out").c_str()), CCOVAR_OK);
    char* paths = nullptr;
    EXPECT_EQ(ccovar_run_stage(config, "ingest", &paths), CCOVAR_NON_POSITIVE_PRICE);
    EXPECT_EQ(ccovar_last_error_row(), 3u);  // header is line 1
    ccovar_config_free(config);
}
