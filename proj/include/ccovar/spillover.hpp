#pragma once

#include "ccovar/risk.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ccovar {

/**
 * Which one-sided difference of empirical CDFs is maximised.
 * greater: sup (G_m - H_n), evidence that G is stochastically smaller than H.
 * less:    sup (H_n - G_m), evidence that G is stochastically larger than H.
 */
enum class KsDirection { less, greater };
const char* to_string(KsDirection direction) noexcept;

/// sqrt(mn / (m + n)) * sup over pooled points of the chosen difference,
/// floored at 0. Error(too_short) unless both samples have at least 2 points.
double ks_one_sided(std::span<const double> g, std::span<const double> h, KsDirection direction);

/// Permutation p-value (1 + #{replicates >= observed}) / (n_bootstrap + 1).
/// Replicate b draws from an RNG stream derived from (seed, b).
double bootstrap_pvalue(std::span<const double> g, std::span<const double> h, KsDirection direction,
                        int n_bootstrap, std::uint64_t seed);

inline constexpr int kDefaultBootstrap = 1000;

struct SpilloverTest {
    std::string panel;       // "A" ... "F"
    std::string period;      // "pre", "post" or "pre vs post"
    std::string hypothesis;  // alternative, e.g. "CoVaR_down < VaR_down"
    std::string lhs_name;
    std::string rhs_name;
    std::vector<double> lhs_samples;
    std::vector<double> rhs_samples;
    KsDirection direction = KsDirection::greater;
    double statistic = 0.0;
    double p_value = 1.0;
    int n_bootstrap = 0;
    /// Dates dropped from ratio series because |VaR| < 1e-8.
    std::size_t dropped = 0;
};

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.10, otherwise "".
std::string significance_stars(double p_value);

/// Pointwise covar / var, skipping dates with |var| < 1e-8; `dropped` receives the count.
std::vector<double> ratio_series(std::span<const double> covar, std::span<const double> var, std::size_t& dropped);

/// The twelve Table-6 style tests: A/B spillover significance (pre / post),
/// C/D downside-vs-upside ratio asymmetry (pre / post), E/F pre-vs-post ratio
/// comparisons for the downside / upside.
std::vector<SpilloverTest> table6_panels(const RiskSeries& pre, const RiskSeries& post,
                                         int n_bootstrap = kDefaultBootstrap, std::uint64_t seed = 0);

}  // namespace ccovar
