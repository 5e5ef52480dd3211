#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ccovar {

enum class CopulaFamily { normal, student_t, clayton, surv_clayton, gumbel, surv_gumbel };

const char* to_string(CopulaFamily family) noexcept;
/// Accepts the tags produced by to_string ("Normal", "StudentT", "Clayton", ...).
CopulaFamily parse_family(std::string_view tag);

/// One bivariate copula. `theta` is rho for Normal/StudentT and alpha for the
/// Archimedean families; `nu` is only used by StudentT.
struct CopulaSpec {
    CopulaFamily family = CopulaFamily::normal;
    double theta = 0.0;
    double nu = 0.0;

    static CopulaSpec normal(double rho) { return {CopulaFamily::normal, rho, 0.0}; }
    static CopulaSpec student_t(double rho, double nu) { return {CopulaFamily::student_t, rho, nu}; }
    static CopulaSpec clayton(double alpha) { return {CopulaFamily::clayton, alpha, 0.0}; }
    static CopulaSpec surv_clayton(double alpha) { return {CopulaFamily::surv_clayton, alpha, 0.0}; }
    static CopulaSpec gumbel(double alpha) { return {CopulaFamily::gumbel, alpha, 0.0}; }
    static CopulaSpec surv_gumbel(double alpha) { return {CopulaFamily::surv_gumbel, alpha, 0.0}; }

    [[nodiscard]] int parameter_count() const noexcept { return family == CopulaFamily::student_t ? 2 : 1; }
};

/// Convex combination of an upper-tail family (Gumbel or SurvClayton) and a
/// lower-tail family (Clayton or SurvGumbel). `weight` is the upper component's.
struct MixedCopulaSpec {
    CopulaSpec upper;
    CopulaSpec lower;
    double weight = 0.5;

    [[nodiscard]] double upper_weight() const noexcept { return weight; }
    [[nodiscard]] double lower_weight() const noexcept { return 1.0 - weight; }
    [[nodiscard]] int parameter_count() const noexcept { return 3; }
};

using CopulaModel = std::variant<CopulaSpec, MixedCopulaSpec>;

/// "Clayton", "Gumbel+SurvGumbel", ...
std::string label(const CopulaModel& model);
int parameter_count(const CopulaModel& model);

/// Throws Error(invalid_params) outside the family domains (rho in (-1,1),
/// StudentT nu > 2, Clayton alpha > 0, Gumbel alpha > 1) or for an invalid mixture.
void validate(const CopulaSpec& spec);
void validate(const MixedCopulaSpec& spec);
void validate(const CopulaModel& model);

// Evaluation. Arguments must lie strictly inside (0, 1), otherwise
// Error(argument_out_of_range).
double copula_cdf(const CopulaSpec& spec, double u1, double u2);
double copula_pdf(const CopulaSpec& spec, double u1, double u2);
double copula_log_pdf(const CopulaSpec& spec, double u1, double u2);
/// Pr(U1 <= u1 | U2 = u2) = dC/du2.
double copula_hfunc(const CopulaSpec& spec, double u1, double u2);

double copula_cdf(const MixedCopulaSpec& spec, double u1, double u2);
double copula_pdf(const MixedCopulaSpec& spec, double u1, double u2);
double copula_hfunc(const MixedCopulaSpec& spec, double u1, double u2);

double copula_cdf(const CopulaModel& model, double u1, double u2);
double copula_pdf(const CopulaModel& model, double u1, double u2);
double copula_hfunc(const CopulaModel& model, double u1, double u2);

/// Solves copula_hfunc(model, u1, u2) = w for u1 by bisection on [1e-10, 1 - 1e-10].
double copula_hfunc_inverse(const CopulaModel& model, double w, double u2);

struct TailDependence {
    double lower = 0.0;
    double upper = 0.0;
};

TailDependence tail_dependence(const CopulaSpec& spec);
TailDependence tail_dependence(const MixedCopulaSpec& spec);
TailDependence tail_dependence(const CopulaModel& model);

/// Closed forms for single families; mixtures by 128x128 Gauss-Legendre quadrature.
double kendall_tau(const CopulaSpec& spec);
double kendall_tau(const MixedCopulaSpec& spec);
double kendall_tau(const CopulaModel& model);
/// Quadrature value of 1 - 4 * integral of dC/du1 * dC/du2 over the unit square.
double kendall_tau_quadrature(const CopulaModel& model);

struct UniformPairs {
    std::vector<double> u1;
    std::vector<double> u2;

    [[nodiscard]] std::size_t size() const noexcept { return u1.size(); }
};

/// Conditional-inversion sampling, deterministic given the seed.
UniformPairs sample(const CopulaModel& model, std::size_t count, std::uint64_t seed);

struct CopulaFit {
    CopulaModel model;
    double loglik = 0.0;
    double aic = 0.0;
    TailDependence tail;
    double kendall_tau = 0.0;
    /// Natural-parameter standard errors (theta[, nu] or theta_upper, theta_lower, weight); empty if unavailable.
    std::vector<double> std_errors;
    /// Some parameter lies within max(1e-4, 2 standard errors) of the edge of its domain.
    bool boundary = false;
    bool converged = false;

    [[nodiscard]] int parameter_count() const { return ccovar::parameter_count(model); }
};

/// Minimum number of pairs accepted by the fitting routines.
inline constexpr std::size_t kMinCopulaPairs = 50;

CopulaFit fit_single(std::span<const double> u1, std::span<const double> u2, CopulaFamily family);
CopulaFit fit_mixed(std::span<const double> u1, std::span<const double> u2, CopulaFamily upper_family,
                    CopulaFamily lower_family);

/// Copula log-likelihood sum_t log c(u1_t, u2_t) with u clamped to [1e-10, 1 - 1e-10].
double copula_loglik(const CopulaModel& model, std::span<const double> u1, std::span<const double> u2);

struct CopulaCandidate {
    CopulaFamily first = CopulaFamily::normal;
    std::optional<CopulaFamily> second;  // set for mixtures: first = upper, second = lower

    [[nodiscard]] bool is_mixture() const noexcept { return second.has_value(); }
    [[nodiscard]] std::string label() const;
    static CopulaCandidate single(CopulaFamily f) { return {f, std::nullopt}; }
    static CopulaCandidate mixed(CopulaFamily upper, CopulaFamily lower) { return {upper, lower}; }
};

/// Parses "Clayton" or "Gumbel+SurvGumbel".
CopulaCandidate parse_candidate(std::string_view text);

/// Six single families followed by the four mixtures of Table-5 style grids.
std::vector<CopulaCandidate> default_candidates();

struct CandidateOutcome {
    CopulaCandidate candidate;
    std::optional<CopulaFit> fit;
    std::string error;
};

struct CopulaSelection {
    CopulaFit best;
    std::size_t best_index = 0;
    std::vector<CandidateOutcome> outcomes;
};

/// Minimum-AIC candidate among those that converged (ties: fewer parameters, then list order).
CopulaSelection select_copula(std::span<const double> u1, std::span<const double> u2,
                              const std::vector<CopulaCandidate>& candidates = default_candidates());

}  // namespace ccovar
