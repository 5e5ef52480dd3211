#include "ccovar/distributions.hpp"
#include "ccovar/error.hpp"
#include "ccovar/marginal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace ccovar;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ok;
}

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> u(n);
    for (auto& v : u) {
        do v = d(rng);
        while (v <= 0.0);
    }
    return u;
}

MarginalParams arma11_garch11() {
    MarginalParams p;
    p.phi0 = 0.05;
    p.phi = {0.3};
    p.gamma = {-0.2};
    p.alpha0 = 0.1;
    p.alpha = {0.1};
    p.beta = {0.8};
    p.skewt = {6.0, 0.2};
    return p;
}

// ARMA(1,1)-GARCH(1,1) recursion written out by hand with the documented
// presample conventions: lagged return = sample mean, innovation = 0,
// lagged variance = sample variance (n divisor).
struct Reference {
    std::vector<double> mu, sigma, z;
    double nll = 0.0;
};

Reference reference_filter(const MarginalParams& p, const std::vector<double>& r) {
    const double n = double(r.size());
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double var0 = 0.0;
    for (double v : r) var0 += (v - mean) * (v - mean);
    var0 /= n;
    Reference out;
    double r_prev = mean, e_prev = 0.0, s2_prev = var0;
    for (double rt : r) {
        const double mu = p.phi0 + p.phi[0] * r_prev + p.gamma[0] * e_prev;
        const double s2 = p.alpha0 + p.alpha[0] * e_prev * e_prev + p.beta[0] * s2_prev;
        const double e = rt - mu;
        const double sigma = std::sqrt(s2);
        out.mu.push_back(mu);
        out.sigma.push_back(sigma);
        out.z.push_back(e / sigma);
        out.nll -= std::log(skewt_pdf(e / sigma, p.skewt)) - std::log(sigma);
        r_prev = rt;
        e_prev = e;
        s2_prev = s2;
    }
    return out;
}

}  // namespace

TEST(Orders, LabelsAndCounts) {
    const ArmaGarchOrders o{1, 0, 1, 1};
    EXPECT_EQ(o.label(), "ARMA(1,0)-GARCH(1,1)");
    EXPECT_EQ(o.parameter_count(), 7);
    EXPECT_EQ(MarginalParams::names({2, 1, 1, 2}),
              (std::vector<std::string>{"phi0", "phi1", "phi2", "gamma1", "alpha0", "alpha1", "beta1", "beta2", "nu",
                                        "eta"}));
    EXPECT_EQ(code_of([] { validate(ArmaGarchOrders{0, 0, 0, 0}); }), ErrorCode::invalid_params);
    EXPECT_EQ(code_of([] { validate(ArmaGarchOrders{4, 0, 1, 1}); }), ErrorCode::invalid_params);
}

TEST(Params, FlattenRoundTrip) {
    const auto p = arma11_garch11();
    const ArmaGarchOrders o{1, 1, 1, 1};
    const auto back = MarginalParams::unflatten(p.flatten(), o);
    EXPECT_EQ(back.flatten(), p.flatten());
}

TEST(Params, ValidationRejectsDomainViolations) {
    const ArmaGarchOrders o{1, 1, 1, 1};
    auto bad = arma11_garch11();
    bad.alpha = {0.3};
    bad.beta = {0.7};  // persistence 1
    EXPECT_EQ(code_of([&] { validate(bad, o); }), ErrorCode::invalid_params);
    bad = arma11_garch11();
    bad.alpha0 = 0.0;
    EXPECT_EQ(code_of([&] { validate(bad, o); }), ErrorCode::invalid_params);
    bad = arma11_garch11();
    bad.phi = {1.0};
    EXPECT_EQ(code_of([&] { validate(bad, o); }), ErrorCode::invalid_params);
    bad = arma11_garch11();
    bad.skewt.nu = 2.0;
    EXPECT_EQ(code_of([&] { validate(bad, o); }), ErrorCode::invalid_params);
    bad = arma11_garch11();
    bad.beta.clear();
    EXPECT_EQ(code_of([&] { validate(bad, o); }), ErrorCode::invalid_params);
}

TEST(Filter, MatchesHandRecursion) {
    const auto p = arma11_garch11();
    const ArmaGarchOrders o{1, 1, 1, 1};
    const auto r = simulate_returns(p, o, uniforms(300, 1));
    const auto got = filter(p, o, r);
    const auto ref = reference_filter(p, r);
    for (std::size_t t = 0; t < r.size(); ++t) {
        EXPECT_NEAR(got.mu[t], ref.mu[t], 1e-12);
        EXPECT_NEAR(got.sigma[t], ref.sigma[t], 1e-12);
        EXPECT_NEAR(got.z[t], ref.z[t], 1e-11);
    }
    EXPECT_NEAR(nll(p, o, r), ref.nll, 1e-8 * std::abs(ref.nll));
}

TEST(Simulate, FilterRecoversInnovationUniforms) {
    // After the presample effect dies out, the filter under the true
    // parameters maps returns back to the uniforms that generated them.
    MarginalParams p;
    p.phi0 = 0.02;
    p.phi = {0.1};
    p.alpha0 = 0.05;
    p.alpha = {0.08};
    p.beta = {0.9};
    p.skewt = {6.0, 0.2};
    const ArmaGarchOrders o{1, 0, 1, 1};
    const auto u = uniforms(2000, 2);
    const auto r = simulate_returns(p, o, u);
    const auto f = filter(p, o, r);
    for (std::size_t t = 500; t < r.size(); ++t) EXPECT_NEAR(skewt_cdf(f.z[t], p.skewt), u[t], 1e-6);
}

TEST(Pit, RanksOverTPlusOne) {
    const auto u = pit(std::vector<double>{0.3, -1.0, 2.0, 0.3});
    EXPECT_EQ(u, (std::vector<double>{2.5 / 5, 1.0 / 5, 4.0 / 5, 2.5 / 5}));
    for (double v : pit(std::vector<double>{5, 4, 3, 2, 1, 0})) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(Fit, RecoversParametersOnOneSeed) {
    MarginalParams truth;
    truth.phi0 = 0.02;
    truth.phi = {0.3};
    truth.alpha0 = 0.05;
    truth.alpha = {0.08};
    truth.beta = {0.9};
    truth.skewt = {6.0, 0.2};
    const ArmaGarchOrders o{1, 0, 1, 1};
    const auto r = simulate_returns(truth, o, uniforms(2000, 3));
    const auto result = fit(std::span<const double>(r), o);
    ASSERT_TRUE(result.has_std_errors());
    const auto est = result.params.flatten();
    const auto ref = truth.flatten();
    int within = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (std::abs(est[i] - ref[i]) <= 3.0 * result.std_errors[i]) ++within;
    }
    EXPECT_GE(within, int(est.size()) - 1);
    EXPECT_NEAR(result.aic, 2.0 * 7 - 2.0 * result.loglik, 1e-9);
    EXPECT_NEAR(result.loglik, -nll(result.params, o, r), 1e-6);
    EXPECT_EQ(result.u.size(), r.size());
    EXPECT_FALSE(result.boundary);
}

TEST(Fit, Preconditions) {
    const std::vector<double> short_series(50, 0.1);
    EXPECT_EQ(code_of([&] { fit(std::span<const double>(short_series), ArmaGarchOrders{}); }), ErrorCode::too_short);
    const std::vector<double> flat(300, 0.1);
    EXPECT_EQ(code_of([&] { fit(std::span<const double>(flat), ArmaGarchOrders{}); }),
              ErrorCode::degenerate_series);
}

TEST(SelectOrders, GridAndAic) {
    MarginalParams truth;
    truth.phi0 = 0.0;
    truth.alpha0 = 0.1;
    truth.alpha = {0.1};
    truth.beta = {0.85};
    truth.skewt = {7.0, 0.0};
    const auto r = simulate_returns(truth, {0, 0, 1, 1}, uniforms(800, 4));
    ReturnSeries series;
    series.returns = r;
    series.dates.resize(r.size());
    const auto search = select_orders(series, 1, {6000, 2});
    EXPECT_EQ(search.grid.size(), 12u);  // m, n in {0,1}; (p, q) in {(0,1), (1,0), (1,1)}
    double best_aic = std::numeric_limits<double>::infinity();
    for (const auto& e : search.grid) {
        if (e.ok) best_aic = std::min(best_aic, e.aic);
    }
    // The reported best is at least as good as every screened grid entry.
    EXPECT_LE(search.best.aic, best_aic + 1e-6);
    EXPECT_TRUE(search.best.orders.p + search.best.orders.q >= 1);
    EXPECT_EQ(code_of([&] { select_orders(series, 4); }), ErrorCode::invalid_params);
}

TEST(Diagnostics, DegreesOfFreedomFollowOrders) {
    MarginalParams truth = arma11_garch11();
    const ArmaGarchOrders o{1, 1, 1, 1};
    const auto r = simulate_returns(truth, o, uniforms(1500, 5));
    const auto result = fit(std::span<const double>(r), o, {6000, 2});
    const auto d = residual_diagnostics(result);
    EXPECT_EQ(d.q15.lags, 15);
    EXPECT_EQ(d.arch20.lags, 20);
    // Correctly specified fit: residuals show no remaining dependence.
    EXPECT_GT(d.q20.p_value, 0.001);
    EXPECT_GT(d.q2_20.p_value, 0.001);
}
