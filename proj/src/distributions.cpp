#include "ccovar/distributions.hpp"

#include "ccovar/error.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ccovar {

namespace {

bool valid_probability(double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; }

void require_probability(double p) {
    if (!valid_probability(p)) {
        throw Error(ErrorCode::probability_out_of_range,
                    "probability must lie strictly inside (0, 1), got " + std::to_string(p));
    }
}

void require_positive_nu(double nu) {
    if (!(std::isfinite(nu) && nu > 0.0)) {
        throw Error(ErrorCode::invalid_params, "Student-t degrees of freedom must be positive");
    }
}

// Lower-tail quantile guess (p < 0.5) from Hill's (1970) approximation;
// exact for nu = 1 and nu = 2.
double t_quantile_guess(double p, double nu) {
    if (nu == 1.0) return -1.0 / std::tan(std::numbers::pi * p);  // exact Cauchy, no cancellation near 0
    if (nu == 2.0) return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));
    const double two_sided = 2.0 * p;
    const double a = 1.0 / (nu - 0.5);
    const double b = 48.0 / (a * a);
    double c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36;
    const double d = ((94.5 / (b + c) - 3.0) / b + 1.0) * std::sqrt(a * std::numbers::pi / 2.0) * nu;
    double y = std::pow(d * two_sided, 2.0 / nu);
    if (y > 0.05 + a) {
        const double x = normal_quantile(p);
        y = x * x;
        if (nu < 5.0) c += 0.3 * (nu - 4.5) * (x + 0.6);
        c = (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b + c;
        y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x;
        y = std::expm1(a * y * y);
    } else {
        y = ((1.0 / (((nu + 6.0) / (nu * y) - 0.089 * d - 0.822) * (nu + 2.0) * 3.0) + 0.5 / (nu + 4.0)) * y - 1.0) *
                (nu + 1.0) / (nu + 2.0) +
            1.0 / y;
    }
    const double guess = -std::sqrt(nu * y);
    return std::isfinite(guess) && guess < 0.0 ? guess : normal_quantile(p);
}

}  // namespace

void validate(const SkewTParams& params) {
    if (!(std::isfinite(params.nu) && params.nu > 2.0)) {
        throw Error(ErrorCode::invalid_params, "skewed-t requires nu > 2, got " + std::to_string(params.nu));
    }
    if (!(std::isfinite(params.eta) && params.eta > -1.0 && params.eta < 1.0)) {
        throw Error(ErrorCode::invalid_params,
                    "skewed-t requires -1 < eta < 1, got " + std::to_string(params.eta));
    }
}

SkewTConstants skewt_constants(const SkewTParams& params) {
    validate(params);
    const double nu = params.nu;
    const double eta = params.eta;
    const double log_c = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                         0.5 * std::log(std::numbers::pi * (nu - 2.0));
    SkewTConstants k;
    k.c = std::exp(log_c);
    k.a = 4.0 * eta * k.c * (nu - 2.0) / (nu - 1.0);
    k.b = std::sqrt(1.0 + 3.0 * eta * eta - k.a * k.a);
    return k;
}

SkewT::SkewT(const SkewTParams& params) : params_(params), k_(skewt_constants(params)) {
    log_bc_ = std::log(k_.b * k_.c);
    half_nu_plus_one_ = (params_.nu + 1.0) / 2.0;
    inv_nu_minus_two_ = 1.0 / (params_.nu - 2.0);
    t_scale_ = std::sqrt(params_.nu / (params_.nu - 2.0));
}

double SkewT::log_pdf(double z) const {
    const double side = z < kink() ? 1.0 - params_.eta : 1.0 + params_.eta;
    const double y = (k_.b * z + k_.a) / side;
    return log_bc_ - half_nu_plus_one_ * std::log1p(y * y * inv_nu_minus_two_);
}

double SkewT::pdf(double z) const { return std::exp(log_pdf(z)); }

double SkewT::cdf(double z) const {
    if (std::isnan(z)) return z;
    const double eta = params_.eta;
    const double u = k_.b * z + k_.a;
    if (z < kink()) {
        return (1.0 - eta) * student_t_cdf(u / (1.0 - eta) * t_scale_, params_.nu);
    }
    const double upper = student_t_cdf(u / (1.0 + eta) * t_scale_, params_.nu) - 0.5;
    return (1.0 - eta) / 2.0 + (1.0 + eta) * upper;
}

double SkewT::quantile(double p) const {
    require_probability(p);
    const double eta = params_.eta;
    const double split = (1.0 - eta) / 2.0;
    double side = 0.0;
    double x = 0.0;
    if (p < split) {
        side = 1.0 - eta;
        x = student_t_quantile(p / side, params_.nu);
    } else {
        side = 1.0 + eta;
        const double q = 0.5 + (p - split) / side;
        x = q == 0.5 ? 0.0 : student_t_quantile(std::min(q, std::nextafter(1.0, 0.0)), params_.nu);
    }
    return (x / t_scale_ * side - k_.a) / k_.b;
}

double skewt_pdf(double z, const SkewTParams& params) { return SkewT(params).pdf(z); }
double skewt_cdf(double z, const SkewTParams& params) { return SkewT(params).cdf(z); }
double skewt_quantile(double p, const SkewTParams& params) { return SkewT(params).quantile(p); }

double student_t_log_pdf(double x, double nu) {
    require_positive_nu(nu);
    return std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi) -
           (nu + 1.0) / 2.0 * std::log1p(x * x / nu);
}

double student_t_pdf(double x, double nu) { return std::exp(student_t_log_pdf(x, nu)); }

double student_t_cdf(double x, double nu) {
    require_positive_nu(nu);
    if (std::isnan(x)) return x;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (x == 0.0) return 0.5;
    const double x2 = x * x;
    // Pick the ibeta argument away from 1 to keep full relative precision in the tails.
    double tail = 0.0;  // Pr(T < -|x|)
    if (nu < 2.0 * x2) {
        tail = 0.5 * boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + x2));
    } else {
        tail = 0.5 * boost::math::ibetac(0.5, nu / 2.0, x2 / (nu + x2));
    }
    return x < 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, double nu) {
    require_probability(p);
    require_positive_nu(nu);
    if (p == 0.5) return 0.0;
    // Solve in the lower tail, where the CDF carries full relative precision.
    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;

    double x = t_quantile_guess(target, nu);
    if (nu == 1.0 || nu == 2.0) return upper ? -x : x;

    // Halley iterations from the close starting guess; fall back to the
    // bracketed Newton solve below if they misbehave.
    const double log_norm =
        std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi);
    double fast = x;
    for (int iter = 0; iter < 6; ++iter) {
        const double dens = std::exp(log_norm - (nu + 1.0) / 2.0 * std::log1p(fast * fast / nu));
        const double ratio = (student_t_cdf(fast, nu) - target) / dens;
        const double step = ratio / (1.0 + 0.5 * ratio * (nu + 1.0) * fast / (nu + fast * fast));
        if (!std::isfinite(step)) break;
        const double next = fast - step;
        if (!(next < 0.0)) break;
        fast = next;
        if (std::abs(step) <= 4e-14 * std::max(1.0, std::abs(fast))) return upper ? -fast : fast;
    }

    // Bracket [lo, hi] with cdf(lo) <= target <= cdf(hi).
    double hi = 0.0;
    double lo = std::min(x, -1.0);
    double step = 1.0;
    while (student_t_cdf(lo, nu) > target) {
        hi = lo;
        step *= 2.0;
        lo -= step;
        if (!std::isfinite(lo)) {
            throw Error(ErrorCode::root_not_bracketed, "Student-t quantile bracket overflow");
        }
    }
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

    for (int iter = 0; iter < 200; ++iter) {
        const double f = student_t_cdf(x, nu) - target;
        if (f == 0.0) break;
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double dens = student_t_pdf(x, nu);
        double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double dx = std::abs(next - x);
        x = next;
        if (dx <= 4e-14 * std::max(1.0, std::abs(x)) || hi - lo <= 4e-14 * std::max(1.0, std::abs(x))) break;
    }
    return upper ? -x : x;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    require_probability(p);
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double chi_square_sf(double x, double df) {
    if (!(df > 0.0)) throw Error(ErrorCode::df_non_positive, "chi-square degrees of freedom must be positive");
    if (!(x > 0.0)) return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

}  // namespace ccovar
