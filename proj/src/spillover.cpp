#include "ccovar/spillover.hpp"

#include "ccovar/error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <utility>

namespace ccovar {

namespace {

constexpr double kMinAbsVar = 1e-8;

// Pooled sample sorted once; a statistic only depends on which sorted
// positions carry the G label, so permutations just shuffle labels.
struct Pool {
    std::vector<double> values;
    std::vector<std::size_t> group_end;  // one past the last index of each run of ties
    std::size_t m = 0;
    std::size_t n = 0;
};

Pool make_pool(std::span<const double> g, std::span<const double> h, std::vector<char>& labels) {
    Pool pool;
    pool.m = g.size();
    pool.n = h.size();
    std::vector<std::pair<double, char>> all;
    all.reserve(g.size() + h.size());
    for (double v : g) all.emplace_back(v, 1);
    for (double v : h) all.emplace_back(v, 0);
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    pool.values.reserve(all.size());
    labels.clear();
    labels.reserve(all.size());
    for (const auto& [v, is_g] : all) {
        pool.values.push_back(v);
        labels.push_back(is_g);
    }
    for (std::size_t i = 0; i < pool.values.size(); ++i) {
        if (i + 1 == pool.values.size() || pool.values[i + 1] != pool.values[i]) pool.group_end.push_back(i + 1);
    }
    return pool;
}

double statistic(const Pool& pool, const std::vector<char>& labels, KsDirection direction) {
    const double m = double(pool.m), n = double(pool.n);
    std::size_t count_g = 0, count_h = 0, i = 0;
    double sup = 0.0;
    for (const std::size_t end : pool.group_end) {
        for (; i < end; ++i) {
            if (labels[i]) {
                ++count_g;
            } else {
                ++count_h;
            }
        }
        const double diff = double(count_g) / m - double(count_h) / n;
        sup = std::max(sup, direction == KsDirection::greater ? diff : -diff);
    }
    return std::sqrt(m * n / (m + n)) * sup;
}

void check_samples(std::span<const double> g, std::span<const double> h) {
    if (g.size() < 2 || h.size() < 2) {
        throw Error(ErrorCode::too_short, "K-S test needs at least 2 observations per sample");
    }
    for (double v : g) {
        if (!std::isfinite(v)) throw Error(ErrorCode::invalid_params, "K-S samples must be finite");
    }
    for (double v : h) {
        if (!std::isfinite(v)) throw Error(ErrorCode::invalid_params, "K-S samples must be finite");
    }
}

SpilloverTest run_test(std::string panel, std::string period, std::string hypothesis, std::string lhs_name,
                       std::string rhs_name, std::vector<double> lhs, std::vector<double> rhs, KsDirection direction,
                       int n_bootstrap, std::uint64_t seed, std::size_t dropped) {
    SpilloverTest t;
    t.panel = std::move(panel);
    t.period = std::move(period);
    t.hypothesis = std::move(hypothesis);
    t.lhs_name = std::move(lhs_name);
    t.rhs_name = std::move(rhs_name);
    t.direction = direction;
    t.statistic = ks_one_sided(lhs, rhs, direction);
    t.p_value = bootstrap_pvalue(lhs, rhs, direction, n_bootstrap, seed);
    t.n_bootstrap = n_bootstrap;
    t.dropped = dropped;
    t.lhs_samples = std::move(lhs);
    t.rhs_samples = std::move(rhs);
    return t;
}

}  // namespace

const char* to_string(KsDirection direction) noexcept {
    return direction == KsDirection::greater ? "greater" : "less";
}

double ks_one_sided(std::span<const double> g, std::span<const double> h, KsDirection direction) {
    check_samples(g, h);
    std::vector<char> labels;
    const auto pool = make_pool(g, h, labels);
    return statistic(pool, labels, direction);
}

double bootstrap_pvalue(std::span<const double> g, std::span<const double> h, KsDirection direction,
                        int n_bootstrap, std::uint64_t seed) {
    check_samples(g, h);
    if (n_bootstrap < 100) throw Error(ErrorCode::invalid_params, "n_bootstrap must be at least 100");
    std::vector<char> labels;
    const auto pool = make_pool(g, h, labels);
    const double observed = statistic(pool, labels, direction);
    // Compare with a small relative slack so replicates that tie the observed
    // value up to rounding count as "at least as extreme".
    const double threshold = observed - 1e-12 * std::max(1.0, observed);

    const std::size_t total = labels.size();
    std::vector<char> permuted(total);
    int exceed = 0;
    for (int b = 0; b < n_bootstrap; ++b) {
        auto engine = rng::stream(seed, std::uint64_t(b));
        std::fill(permuted.begin(), permuted.end(), 0);
        std::fill(permuted.begin(), permuted.begin() + std::ptrdiff_t(pool.m), 1);
        // Fisher-Yates with a portable index draw.
        for (std::size_t i = total - 1; i > 0; --i) {
            const std::size_t j = std::size_t(engine() % (i + 1));
            std::swap(permuted[i], permuted[j]);
        }
        if (statistic(pool, permuted, direction) >= threshold) ++exceed;
    }
    return (1.0 + exceed) / (n_bootstrap + 1.0);
}

std::string significance_stars(double p_value) {
    if (p_value < 0.01) return "***";
    if (p_value < 0.05) return "**";
    if (p_value < 0.10) return "*";
    return "";
}

std::vector<double> ratio_series(std::span<const double> covar, std::span<const double> var, std::size_t& dropped) {
    if (covar.size() != var.size()) throw Error(ErrorCode::length_mismatch, "CoVaR and VaR series differ in length");
    std::vector<double> out;
    out.reserve(covar.size());
    dropped = 0;
    for (std::size_t t = 0; t < covar.size(); ++t) {
        if (std::abs(var[t]) < kMinAbsVar) {
            ++dropped;
            continue;
        }
        out.push_back(covar[t] / var[t]);
    }
    return out;
}

std::vector<SpilloverTest> table6_panels(const RiskSeries& pre, const RiskSeries& post, int n_bootstrap,
                                         std::uint64_t seed) {
    for (const RiskSeries* r : {&pre, &post}) {
        const std::size_t n = r->size();
        if (r->covar_down.size() != n || r->covar_up.size() != n || r->var_down_spot.size() != n ||
            r->var_up_spot.size() != n) {
            throw Error(ErrorCode::length_mismatch, "risk series columns differ in length");
        }
    }
    std::vector<SpilloverTest> tests;
    auto next_seed = [&]() { return rng::mix(seed ^ rng::mix(tests.size() + 1)); };
    using D = KsDirection;

    // Panels A and B: is CoVaR beyond VaR?
    for (const auto& [panel, r] : {std::pair<const char*, const RiskSeries*>{"A", &pre}, {"B", &post}}) {
        const std::string period = to_string(r->period);
        tests.push_back(run_test(panel, period, "CoVaR_down < VaR_down", "CoVaR_down", "VaR_down", r->covar_down,
                                 r->var_down_spot, D::greater, n_bootstrap, next_seed(), 0));
        tests.push_back(run_test(panel, period, "CoVaR_up > VaR_up", "CoVaR_up", "VaR_up", r->covar_up,
                                 r->var_up_spot, D::less, n_bootstrap, next_seed(), 0));
    }

    struct Ratios {
        std::vector<double> down, up;
        std::size_t dropped_down = 0, dropped_up = 0;
    };
    auto ratios = [](const RiskSeries& r) {
        Ratios x;
        x.down = ratio_series(r.covar_down, r.var_down_spot, x.dropped_down);
        x.up = ratio_series(r.covar_up, r.var_up_spot, x.dropped_up);
        return x;
    };
    const Ratios rp = ratios(pre), rq = ratios(post);

    // Panels C and D: downside versus upside spillover strength.
    for (const auto& [panel, r, x] : {std::tuple<const char*, const RiskSeries*, const Ratios*>{"C", &pre, &rp},
                                      {"D", &post, &rq}}) {
        const std::string period = to_string(r->period);
        const std::size_t dropped = x->dropped_down + x->dropped_up;
        tests.push_back(run_test(panel, period, "ratio_down > ratio_up", "ratio_down", "ratio_up", x->down, x->up,
                                 D::less, n_bootstrap, next_seed(), dropped));
        tests.push_back(run_test(panel, period, "ratio_down < ratio_up", "ratio_down", "ratio_up", x->down, x->up,
                                 D::greater, n_bootstrap, next_seed(), dropped));
    }

    // Panels E and F: before versus after the boundary date.
    const std::string span = std::string(to_string(pre.period)) + " vs " + to_string(post.period);
    tests.push_back(run_test("E", span, "ratio_down_pre > ratio_down_post", "ratio_down_pre", "ratio_down_post",
                             rp.down, rq.down, D::less, n_bootstrap, next_seed(), rp.dropped_down + rq.dropped_down));
    tests.push_back(run_test("E", span, "ratio_down_pre < ratio_down_post", "ratio_down_pre", "ratio_down_post",
                             rp.down, rq.down, D::greater, n_bootstrap, next_seed(),
                             rp.dropped_down + rq.dropped_down));
    tests.push_back(run_test("F", span, "ratio_up_pre > ratio_up_post", "ratio_up_pre", "ratio_up_post", rp.up, rq.up,
                             D::less, n_bootstrap, next_seed(), rp.dropped_up + rq.dropped_up));
    tests.push_back(run_test("F", span, "ratio_up_pre < ratio_up_post", "ratio_up_pre", "ratio_up_post", rp.up, rq.up,
                             D::greater, n_bootstrap, next_seed(), rp.dropped_up + rq.dropped_up));
    return tests;
}

}  // namespace ccovar
