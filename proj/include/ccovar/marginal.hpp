#pragma once

#include "ccovar/distributions.hpp"
#include "ccovar/timeseries.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ccovar {

/// ARMA(m, n) mean and GARCH(p, q) variance orders; p counts ARCH lags, q GARCH lags.
struct ArmaGarchOrders {
    int m = 0;
    int n = 0;
    int p = 1;
    int q = 1;

    /// Free parameters including the intercepts and both skewed-t shape parameters.
    [[nodiscard]] int parameter_count() const noexcept { return 1 + m + n + 1 + p + q + 2; }
    [[nodiscard]] std::string label() const;
    friend bool operator==(const ArmaGarchOrders&, const ArmaGarchOrders&) = default;
};

void validate(const ArmaGarchOrders& orders);

struct MarginalParams {
    double phi0 = 0.0;
    std::vector<double> phi;    // AR, size m
    std::vector<double> gamma;  // MA, size n
    double alpha0 = 0.1;
    std::vector<double> alpha;  // ARCH, size p
    std::vector<double> beta;   // GARCH, size q
    SkewTParams skewt;

    /// Flattened natural parameters: phi0, phi, gamma, alpha0, alpha, beta, nu, eta.
    [[nodiscard]] std::vector<double> flatten() const;
    static MarginalParams unflatten(std::span<const double> values, const ArmaGarchOrders& orders);
    /// Names matching flatten() order, e.g. "phi1", "alpha0", "nu".
    static std::vector<std::string> names(const ArmaGarchOrders& orders);
};

/// Throws Error(invalid_params) on a size mismatch, alpha0 <= 0, negative
/// ARCH/GARCH terms, sum(alpha) + sum(beta) >= 1, a non-stationary AR
/// polynomial or an invalid skewed-t shape.
void validate(const MarginalParams& params, const ArmaGarchOrders& orders);

struct FilterResult {
    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<double> z;
};

/**
 * Runs the ARMA mean and GARCH variance recursions over `returns`.
 * Presample innovations are 0, presample returns equal the sample mean and
 * presample variances equal the sample variance of `returns`.
 */
FilterResult filter(const MarginalParams& params, const ArmaGarchOrders& orders, std::span<const double> returns);

/// Negative log-likelihood: -sum_t [log f(z_t) - log sigma_t].
double nll(const MarginalParams& params, const ArmaGarchOrders& orders, std::span<const double> returns);

struct MarginalFit {
    ArmaGarchOrders orders;
    MarginalParams params;
    /// Per natural parameter, same order as MarginalParams::flatten(); empty when the Hessian was singular.
    std::vector<double> std_errors;
    std::vector<Date> dates;
    std::vector<double> returns;
    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<double> z;
    std::vector<double> u;
    double loglik = 0.0;
    double aic = 0.0;
    bool boundary = false;
    bool converged = false;
    int evaluations = 0;

    [[nodiscard]] bool has_std_errors() const noexcept { return !std_errors.empty(); }
};

struct MarginalFitOptions {
    /// Budget for each of the screening starts; the winning start is then polished with the same budget.
    int max_evaluations = 6000;
    int starts = 5;
};

/// Minimum series length accepted by fit and select_orders.
inline constexpr std::size_t kMinFitObservations = 100;

MarginalFit fit(const ReturnSeries& returns, const ArmaGarchOrders& orders, const MarginalFitOptions& options = {});
MarginalFit fit(std::span<const double> returns, const ArmaGarchOrders& orders, const MarginalFitOptions& options = {});

struct OrderSearchEntry {
    ArmaGarchOrders orders;
    bool ok = false;
    double loglik = 0.0;
    double aic = 0.0;
    std::string error;
};

struct OrderSearchResult {
    MarginalFit best;
    std::vector<OrderSearchEntry> grid;
};

/// Fits every (m, n, p, q) in [0, max_lag]^4 with p + q >= 1 and keeps the
/// minimum-AIC fit (ties: fewer parameters, then lexicographic order).
OrderSearchResult select_orders(const ReturnSeries& returns, int max_lag = 3,
                                const MarginalFitOptions& options = {});

/// Rescaled empirical CDF: u_j = rank(z_j) / (T + 1) with average ranks for ties.
std::vector<double> pit(std::span<const double> z);

struct ResidualDiagnostics {
    TestStatistic q15, q20;    // Ljung-Box on z
    TestStatistic q2_15, q2_20;  // Ljung-Box on z^2
    TestStatistic arch15, arch20;

    [[nodiscard]] std::vector<TestStatistic> all() const { return {q15, q20, q2_15, q2_20, arch15, arch20}; }
};

/// Ljung-Box on z uses m + n fitted parameters, on z^2 uses p + q.
ResidualDiagnostics residual_diagnostics(const MarginalFit& fit);

/// Generates returns from the model given innovation uniforms (one per date),
/// mapped through the skewed-t quantile. The recursion starts at the
/// unconditional mean and variance.
std::vector<double> simulate_returns(const MarginalParams& params, const ArmaGarchOrders& orders,
                                     std::span<const double> uniforms);

}  // namespace ccovar
