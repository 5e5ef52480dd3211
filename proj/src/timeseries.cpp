#include "ccovar/timeseries.hpp"

#include "ccovar/distributions.hpp"
#include "ccovar/error.hpp"
#include "csv.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace ccovar {

namespace {

void require_size(std::size_t n, std::size_t minimum, const char* what) {
    if (n < minimum) {
        throw Error(ErrorCode::too_short, std::string(what) + " needs at least " + std::to_string(minimum) +
                                              " observations, got " + std::to_string(n));
    }
}

int parse_int(std::string_view text) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::parse_error, "bad date component '" + std::string(text) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

struct CentralMoments {
    double mean, m2, m3, m4;
};

bool is_constant(std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

CentralMoments central_moments(std::span<const double> v) {
    if (is_constant(v)) return {v.empty() ? 0.0 : v.front(), 0.0, 0.0, 0.0};
    const double mean = mean_of(v);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double n = double(v.size());
    return {mean, m2 / n, m3 / n, m4 / n};
}

}  // namespace

Date parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(ErrorCode::parse_error, "expected YYYY-MM-DD date, got '" + std::string(text) + "'");
    }
    const Date date{std::chrono::year{parse_int(text.substr(0, 4))},
                    std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2)))},
                    std::chrono::day{static_cast<unsigned>(parse_int(text.substr(8, 2)))}};
    if (!date.ok()) throw Error(ErrorCode::parse_error, "invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(date.year()), unsigned(date.month()),
                  unsigned(date.day()));
    return buf;
}

const char* to_string(Period period) noexcept {
    switch (period) {
        case Period::whole: return "whole";
        case Period::pre: return "pre";
        case Period::post: return "post";
    }
    return "whole";
}

PriceSeries parse_prices(std::string_view csv_text, const CsvColumns& columns, std::string instrument_id) {
    const auto rows = csv::parse(csv_text);
    if (rows.empty()) throw Error(ErrorCode::parse_error, "CSV has no header row", 1);

    const auto& header = rows.front();
    auto column_index = [&](const std::string& name) {
        const auto it = std::find_if(header.begin(), header.end(),
                                     [&](const std::string& h) { return trim(h) == name; });
        if (it == header.end()) throw Error(ErrorCode::parse_error, "CSV header lacks column '" + name + "'", 1);
        return std::size_t(it - header.begin());
    };
    const std::size_t date_col = column_index(columns.date);
    const std::size_t price_col = column_index(columns.price);

    std::vector<std::pair<Date, double>> obs;
    obs.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() <= std::max(date_col, price_col)) {
            throw Error(ErrorCode::parse_error, "row " + std::to_string(line) + " has too few fields", line);
        }
        Date date;
        try {
            date = parse_date(row[date_col]);
        } catch (const Error& e) {
            throw Error(ErrorCode::parse_error, "row " + std::to_string(line) + ": " + e.what(), line);
        }
        const std::string_view text = trim(row[price_col]);
        double price = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), price);
        if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(price)) {
            throw Error(ErrorCode::parse_error,
                        "row " + std::to_string(line) + ": unparsable price '" + std::string(text) + "'", line);
        }
        if (!(price > 0.0)) {
            throw Error(ErrorCode::non_positive_price,
                        "row " + std::to_string(line) + ": price must be positive", line);
        }
        obs.emplace_back(date, price);
    }

    // Keep the original line of each observation so a duplicate can be reported by row.
    std::vector<std::size_t> order(obs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return obs[a].first < obs[b].first; });

    PriceSeries series;
    series.instrument_id = std::move(instrument_id);
    series.dates.reserve(obs.size());
    series.prices.reserve(obs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& [date, price] = obs[order[k]];
        if (k > 0 && series.dates.back() == date) {
            const std::size_t line = std::max(order[k], order[k - 1]) + 2;
            throw Error(ErrorCode::duplicate_date,
                        "row " + std::to_string(line) + ": duplicate date " + format_date(date), line);
        }
        series.dates.push_back(date);
        series.prices.push_back(price);
    }
    return series;
}

PriceSeries load_prices(const std::filesystem::path& path, const CsvColumns& columns, std::string instrument_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::file_missing, "cannot open price file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (instrument_id.empty()) instrument_id = path.stem().string();
    return parse_prices(buffer.str(), columns, std::move(instrument_id));
}

ReturnSeries log_returns(const PriceSeries& prices) {
    require_size(prices.size(), 2, "log_returns");
    ReturnSeries out;
    out.instrument_id = prices.instrument_id;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.returns.reserve(prices.size() - 1);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        out.returns.push_back(100.0 * std::log(prices.prices[t] / prices.prices[t - 1]));
    }
    return out;
}

SplitPairs align_and_split(const ReturnSeries& futures, const ReturnSeries& spot, const Date& boundary) {
    if (futures.size() == 0 || spot.size() == 0) {
        throw Error(ErrorCode::too_short, "align_and_split needs two non-empty series");
    }
    SplitPairs out;
    out.whole.period = Period::whole;
    out.pre.period = Period::pre;
    out.post.period = Period::post;
    for (AlignedPair* pair : {&out.whole, &out.pre, &out.post}) {
        pair->futures.instrument_id = futures.instrument_id;
        pair->spot.instrument_id = spot.instrument_id;
    }

    std::size_t i = 0, j = 0;
    while (i < futures.size() && j < spot.size()) {
        if (futures.dates[i] < spot.dates[j]) {
            ++i;
        } else if (spot.dates[j] < futures.dates[i]) {
            ++j;
        } else {
            const Date& d = futures.dates[i];
            for (AlignedPair* pair : {&out.whole, d < boundary ? &out.pre : &out.post}) {
                pair->futures.dates.push_back(d);
                pair->futures.returns.push_back(futures.returns[i]);
                pair->spot.dates.push_back(d);
                pair->spot.returns.push_back(spot.returns[j]);
            }
            ++i;
            ++j;
        }
    }
    if (out.whole.size() == 0) throw Error(ErrorCode::empty_intersection, "futures and spot share no dates");
    if (out.pre.size() < kMinSubPeriodObservations || out.post.size() < kMinSubPeriodObservations) {
        throw Error(ErrorCode::empty_sub_period,
                    "boundary " + format_date(boundary) + " leaves " + std::to_string(out.pre.size()) + " pre and " +
                        std::to_string(out.post.size()) + " post observations (need " +
                        std::to_string(kMinSubPeriodObservations) + " each)");
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t k = 0;
    while (k < n) {
        std::size_t end = k + 1;
        while (end < n && values[order[end]] == values[order[k]]) ++end;
        const double rank = 0.5 * double(k + 1 + end);  // mean of positions k+1 .. end
        for (std::size_t m = k; m < end; ++m) ranks[order[m]] = rank;
        k = end;
    }
    return ranks;
}

Correlations correlations(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::length_mismatch, "correlation inputs differ in length");
    require_size(x.size(), 3, "correlations");
    const std::size_t n = x.size();
    const double nd = double(n);

    auto pearson = [](std::span<const double> a, std::span<const double> b) {
        const double ma = mean_of(a), mb = mean_of(b);
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        if (saa == 0.0 || sbb == 0.0) throw Error(ErrorCode::degenerate_series, "correlation of a constant series");
        return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    };

    Correlations c;
    c.pearson = pearson(x, y);
    if (std::abs(c.pearson) >= 1.0) {
        c.pearson_p = 0.0;
    } else {
        const double t = c.pearson * std::sqrt((nd - 2.0) / (1.0 - c.pearson * c.pearson));
        c.pearson_p = n > 2 ? 2.0 * student_t_cdf(-std::abs(t), nd - 2.0) : 1.0;
    }

    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    c.spearman = pearson(rx, ry);
    c.spearman_p = 2.0 * normal_cdf(-std::abs(c.spearman) * std::sqrt(nd - 1.0));

    // Kendall tau-b by pair enumeration.
    double concordant_minus_discordant = 0.0;
    double untied_x = 0.0, untied_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx != 0.0) untied_x += 1.0;
            if (dy != 0.0) untied_y += 1.0;
            const double s = dx * dy;
            if (s > 0.0) concordant_minus_discordant += 1.0;
            if (s < 0.0) concordant_minus_discordant -= 1.0;
        }
    }
    c.kendall = std::clamp(concordant_minus_discordant / std::sqrt(untied_x * untied_y), -1.0, 1.0);
    const double kendall_z = 3.0 * c.kendall * std::sqrt(nd * (nd - 1.0)) / std::sqrt(2.0 * (2.0 * nd + 5.0));
    c.kendall_p = 2.0 * normal_cdf(-std::abs(kendall_z));
    return c;
}

Description describe(std::span<const double> values) {
    require_size(values.size(), 4, "describe");
    const auto m = central_moments(values);
    if (m.m2 == 0.0) throw Error(ErrorCode::degenerate_series, "describe: series has zero variance");
    const double n = double(values.size());
    Description d;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    d.min = *lo;
    d.max = *hi;
    d.mean = m.mean;
    d.std = std::sqrt(m.m2 * n / (n - 1.0));
    d.skewness = m.m3 / std::pow(m.m2, 1.5);
    d.kurtosis = m.m4 / (m.m2 * m.m2);
    return d;
}

TestStatistic jarque_bera(std::span<const double> values) {
    require_size(values.size(), 8, "jarque_bera");
    const auto m = central_moments(values);
    if (m.m2 == 0.0) throw Error(ErrorCode::degenerate_series, "jarque_bera: series has zero variance");
    const double s = m.m3 / std::pow(m.m2, 1.5);
    const double k = m.m4 / (m.m2 * m.m2);
    const double stat = double(values.size()) / 6.0 * (s * s + (k - 3.0) * (k - 3.0) / 4.0);
    return {"JB", 0, stat, chi_square_sf(stat, 2.0)};
}

TestStatistic ljung_box(std::span<const double> values, int lags, int fitted_params) {
    const std::size_t n = values.size();
    if (lags < 1 || 2 * std::size_t(lags) >= n) {
        throw Error(ErrorCode::too_short, "ljung_box needs 1 <= lags < n/2 (lags=" + std::to_string(lags) +
                                              ", n=" + std::to_string(n) + ")");
    }
    if (fitted_params >= lags) {
        throw Error(ErrorCode::df_non_positive, "ljung_box: fitted_params must be smaller than lags");
    }
    if (is_constant(values)) throw Error(ErrorCode::degenerate_series, "ljung_box: series has zero variance");
    const double mean = mean_of(values);
    double denom = 0.0;
    for (const double v : values) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw Error(ErrorCode::degenerate_series, "ljung_box: series has zero variance");

    const double nd = double(n);
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) {
        double num = 0.0;
        for (std::size_t t = std::size_t(k); t < n; ++t) num += (values[t] - mean) * (values[t - k] - mean);
        const double r = num / denom;
        q += r * r / (nd - double(k));
    }
    q *= nd * (nd + 2.0);
    return {"LjungBox", lags, q, chi_square_sf(q, double(lags - fitted_params))};
}

TestStatistic arch_lm(std::span<const double> values, int lags) {
    const std::size_t n = values.size();
    if (lags < 1 || 2 * std::size_t(lags) >= n) {
        throw Error(ErrorCode::too_short, "arch_lm needs 1 <= lags < n/2 (lags=" + std::to_string(lags) +
                                              ", n=" + std::to_string(n) + ")");
    }
    const std::size_t q = std::size_t(lags);
    const std::size_t rows = n - q;
    Eigen::MatrixXd design(rows, q + 1);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + q;
        target(Eigen::Index(r)) = values[t] * values[t];
        design(Eigen::Index(r), 0) = 1.0;
        for (std::size_t k = 1; k <= q; ++k) design(Eigen::Index(r), Eigen::Index(k)) = values[t - k] * values[t - k];
    }
    if (is_constant(std::span<const double>(target.data(), rows))) {
        throw Error(ErrorCode::degenerate_series, "arch_lm: squared series is constant");
    }
    const double target_mean = target.mean();
    const double sst = (target.array() - target_mean).square().sum();
    if (sst == 0.0) throw Error(ErrorCode::degenerate_series, "arch_lm: squared series is constant");
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
    const double ssr = (target - design * coef).squaredNorm();
    const double r2 = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
    const double lm = double(rows) * r2;
    return {"ArchLM", lags, lm, chi_square_sf(lm, double(lags))};
}

}  // namespace ccovar
