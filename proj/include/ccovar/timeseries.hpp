#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ccovar {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws Error(parse_error).
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

/// Date-indexed prices of one instrument. Dates strictly increase and prices are positive.
struct PriceSeries {
    std::string instrument_id;
    std::vector<Date> dates;
    std::vector<double> prices;

    [[nodiscard]] std::size_t size() const noexcept { return prices.size(); }
};

/// Percent log returns, 100 * ln(P_t / P_{t-1}), dated at the later day.
struct ReturnSeries {
    std::string instrument_id;
    std::vector<Date> dates;
    std::vector<double> returns;

    [[nodiscard]] std::size_t size() const noexcept { return returns.size(); }
};

enum class Period { whole, pre, post };
const char* to_string(Period period) noexcept;

/// Futures and spot returns on an identical (inner-joined) date vector.
struct AlignedPair {
    ReturnSeries futures;
    ReturnSeries spot;
    Period period = Period::whole;

    [[nodiscard]] std::size_t size() const noexcept { return futures.size(); }
    [[nodiscard]] const std::vector<Date>& dates() const noexcept { return futures.dates; }
};

struct SplitPairs {
    AlignedPair whole;
    AlignedPair pre;
    AlignedPair post;
};

struct CsvColumns {
    std::string date = "date";
    std::string price = "price";
};

/// Minimum observations per sub-period accepted by align_and_split.
inline constexpr std::size_t kMinSubPeriodObservations = 30;

PriceSeries load_prices(const std::filesystem::path& path, const CsvColumns& columns,
                        std::string instrument_id = {});
/// Same as load_prices on in-memory CSV text (header row required).
PriceSeries parse_prices(std::string_view csv_text, const CsvColumns& columns, std::string instrument_id = {});

ReturnSeries log_returns(const PriceSeries& prices);

SplitPairs align_and_split(const ReturnSeries& futures, const ReturnSeries& spot, const Date& boundary);

struct Correlations {
    double pearson = 0.0;
    double kendall = 0.0;
    double spearman = 0.0;
    double pearson_p = 1.0;
    double kendall_p = 1.0;
    double spearman_p = 1.0;
};

Correlations correlations(std::span<const double> x, std::span<const double> y);
inline Correlations correlations(const AlignedPair& pair) {
    return correlations(pair.futures.returns, pair.spot.returns);
}

struct Description {
    double max = 0.0;
    double min = 0.0;
    double mean = 0.0;
    double std = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;  // raw, normal = 3
};

Description describe(std::span<const double> values);

struct TestStatistic {
    std::string test;
    int lags = 0;
    double statistic = 0.0;
    double p_value = 1.0;
};

TestStatistic jarque_bera(std::span<const double> values);
/// Q = n(n+2) sum_k r_k^2/(n-k) against chi-square(lags - fitted_params).
TestStatistic ljung_box(std::span<const double> values, int lags, int fitted_params = 0);
/// Engle's LM test: (n - lags) * R^2 of x_t^2 regressed on its own lags.
TestStatistic arch_lm(std::span<const double> values, int lags);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace ccovar
