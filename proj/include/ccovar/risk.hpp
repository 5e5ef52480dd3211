#pragma once

#include "ccovar/copula.hpp"
#include "ccovar/marginal.hpp"
#include "ccovar/timeseries.hpp"

#include <span>
#include <vector>

namespace ccovar {

/// Quantile levels of the return distribution for downside / upside risk.
struct RiskConfig {
    double alpha_down = 0.05;
    double alpha_up = 0.95;
    double median_state = 0.5;
};

/// Requires 0 < alpha_down < 0.5 < alpha_up < 1 and median_state = 0.5.
void validate(const RiskConfig& config);

enum class Direction { down, up };
const char* to_string(Direction direction) noexcept;

/// VaR_t = mu_t + sigma_t * skewt_quantile(alpha) on the fit's dates.
std::vector<double> var_series(const MarginalFit& fit, double alpha);

/**
 * Spot-leg probability level v of the CoVaR event, with the copula taken on
 * (futures, spot) uniforms. Downside: C(alpha_down, v) = alpha_down^2.
 * Upside: 1 - alpha_up - v + C(alpha_up, v) = (1 - alpha_up)^2, i.e. the
 * downside equation on the 180-degree rotated copula. Solved by bisection on
 * [1e-10, 1 - 1e-10] to 1e-12; throws Error(root_not_bracketed) if the
 * equation does not change sign there.
 */
double covar_level(const CopulaModel& copula, const RiskConfig& config, Direction direction);

/// Signed residual of the defining CoVaR equation at level v (0 at the solution).
double covar_residual(const CopulaModel& copula, const RiskConfig& config, Direction direction, double v);

/// Spot-leg level under the median state of futures: h(v | median_state) = alpha.
double median_state_level(const CopulaModel& copula, const RiskConfig& config, Direction direction);

/// CoVaR_t = mu_spot,t + sigma_spot,t * skewt_quantile(covar_level(...)).
std::vector<double> covar_series(const CopulaFit& copula, const MarginalFit& futures, const MarginalFit& spot,
                                 const RiskConfig& config, Direction direction);

/// Median-state CoVaR on the spot leg.
std::vector<double> covar_median_state(const CopulaFit& copula, const MarginalFit& futures, const MarginalFit& spot,
                                       const RiskConfig& config, Direction direction);

/// Pointwise covar_extreme - covar_median; Error(length_mismatch) on unequal lengths.
std::vector<double> delta_covar(std::span<const double> covar_extreme, std::span<const double> covar_median);

/// Per-date risk measures for one period, in percent log-return units.
struct RiskSeries {
    Period period = Period::whole;
    std::vector<Date> dates;
    std::vector<double> var_down_futures;
    std::vector<double> var_up_futures;
    std::vector<double> var_down_spot;
    std::vector<double> var_up_spot;
    std::vector<double> covar_down;
    std::vector<double> covar_up;
    std::vector<double> covar_median_down;
    std::vector<double> covar_median_up;
    std::vector<double> delta_covar_down;
    std::vector<double> delta_covar_up;
    /// Solved spot-leg probability levels (date-invariant).
    double level_down = 0.0;
    double level_up = 0.0;
    double median_level_down = 0.0;
    double median_level_up = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return dates.size(); }
};

RiskSeries compute_risk(const CopulaFit& copula, const MarginalFit& futures, const MarginalFit& spot,
                        const RiskConfig& config = {}, Period period = Period::whole);

}  // namespace ccovar
