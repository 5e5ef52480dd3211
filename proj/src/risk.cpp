#include "ccovar/risk.hpp"

#include "ccovar/distributions.hpp"
#include "ccovar/error.hpp"

#include <cmath>
#include <functional>

namespace ccovar {

namespace {

constexpr double kLo = 1e-10;
constexpr double kHi = 1.0 - 1e-10;

// Root of an increasing function on [kLo, kHi] by bisection to 1e-12.
double bisect_increasing(const std::function<double(double)>& f, const char* what) {
    double lo = kLo, hi = kHi;
    const double f_lo = f(lo), f_hi = f(hi);
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
        throw Error(ErrorCode::root_not_bracketed, std::string(what) + " equation does not change sign on (0, 1)");
    }
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double value = f(mid);
        if (value == 0.0) return mid;
        if (value < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void check_same_dates(const MarginalFit& futures, const MarginalFit& spot) {
    if (futures.mu.size() != spot.mu.size() || futures.dates != spot.dates) {
        throw Error(ErrorCode::length_mismatch, "futures and spot fits must share the same dates");
    }
}

std::vector<double> map_level(const MarginalFit& spot, double v) {
    const double q = skewt_quantile(v, spot.params.skewt);
    std::vector<double> out(spot.mu.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = spot.mu[t] + spot.sigma[t] * q;
    return out;
}

}  // namespace

void validate(const RiskConfig& config) {
    if (!(config.alpha_down > 0.0 && config.alpha_down < 0.5)) {
        throw Error(ErrorCode::probability_out_of_range, "alpha_down must lie in (0, 0.5)");
    }
    if (!(config.alpha_up > 0.5 && config.alpha_up < 1.0)) {
        throw Error(ErrorCode::probability_out_of_range, "alpha_up must lie in (0.5, 1)");
    }
    if (config.median_state != 0.5) {
        throw Error(ErrorCode::invalid_params, "the median state is fixed at 0.5");
    }
}

const char* to_string(Direction direction) noexcept { return direction == Direction::down ? "down" : "up"; }

std::vector<double> var_series(const MarginalFit& fit, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::probability_out_of_range, "VaR level must lie in (0, 1)");
    return map_level(fit, alpha);
}

double covar_residual(const CopulaModel& copula, const RiskConfig& config, Direction direction, double v) {
    if (direction == Direction::down) {
        const double a = config.alpha_down;
        return copula_cdf(copula, a, v) - a * a;
    }
    // Pr(U1 > a, U2 > v) - (1 - a)^2; decreasing in v, so negate to keep the
    // residual increasing like the downside one.
    const double a = config.alpha_up;
    const double joint_survival = 1.0 - a - v + copula_cdf(copula, a, v);
    return (1.0 - a) * (1.0 - a) - joint_survival;
}

double covar_level(const CopulaModel& copula, const RiskConfig& config, Direction direction) {
    validate(config);
    validate(copula);
    return bisect_increasing([&](double v) { return covar_residual(copula, config, direction, v); }, "CoVaR");
}

double median_state_level(const CopulaModel& copula, const RiskConfig& config, Direction direction) {
    validate(config);
    validate(copula);
    const double alpha = direction == Direction::down ? config.alpha_down : config.alpha_up;
    // h(v | m) = dC(v, m)/dm is the conditional CDF of one leg given the other;
    // every supported family is exchangeable, so the leg order does not matter.
    return bisect_increasing(
        [&](double v) { return copula_hfunc(copula, v, config.median_state) - alpha; }, "median-state CoVaR");
}

std::vector<double> covar_series(const CopulaFit& copula, const MarginalFit& futures, const MarginalFit& spot,
                                 const RiskConfig& config, Direction direction) {
    check_same_dates(futures, spot);
    return map_level(spot, covar_level(copula.model, config, direction));
}

std::vector<double> covar_median_state(const CopulaFit& copula, const MarginalFit& futures, const MarginalFit& spot,
                                       const RiskConfig& config, Direction direction) {
    check_same_dates(futures, spot);
    return map_level(spot, median_state_level(copula.model, config, direction));
}

std::vector<double> delta_covar(std::span<const double> covar_extreme, std::span<const double> covar_median) {
    if (covar_extreme.size() != covar_median.size()) {
        throw Error(ErrorCode::length_mismatch, "CoVaR series must have equal length");
    }
    std::vector<double> out(covar_extreme.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = covar_extreme[t] - covar_median[t];
    return out;
}

RiskSeries compute_risk(const CopulaFit& copula, const MarginalFit& futures, const MarginalFit& spot,
                        const RiskConfig& config, Period period) {
    validate(config);
    check_same_dates(futures, spot);
    RiskSeries r;
    r.period = period;
    r.dates = spot.dates;
    r.var_down_futures = var_series(futures, config.alpha_down);
    r.var_up_futures = var_series(futures, config.alpha_up);
    r.var_down_spot = var_series(spot, config.alpha_down);
    r.var_up_spot = var_series(spot, config.alpha_up);
    r.level_down = covar_level(copula.model, config, Direction::down);
    r.level_up = covar_level(copula.model, config, Direction::up);
    r.median_level_down = median_state_level(copula.model, config, Direction::down);
    r.median_level_up = median_state_level(copula.model, config, Direction::up);
    r.covar_down = map_level(spot, r.level_down);
    r.covar_up = map_level(spot, r.level_up);
    r.covar_median_down = map_level(spot, r.median_level_down);
    r.covar_median_up = map_level(spot, r.median_level_up);
    r.delta_covar_down = delta_covar(r.covar_down, r.covar_median_down);
    r.delta_covar_up = delta_covar(r.covar_up, r.covar_median_up);
    return r;
}

}  // namespace ccovar
