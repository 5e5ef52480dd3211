#include "ccovar/copula.hpp"

#include "ccovar/distributions.hpp"
#include "ccovar/error.hpp"
#include "ccovar/optimize.hpp"
#include "ccovar/timeseries.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace ccovar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClampLo = 1e-10;
constexpr double kClampHi = 1.0 - 1e-10;
constexpr double kBoundaryTol = 1e-4;
constexpr double kMaxNu = 100.0;

double clamp_unit(double u) { return std::clamp(u, kClampLo, kClampHi); }

void check_unit(double u1, double u2) {
    if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0)) {
        throw Error(ErrorCode::argument_out_of_range, "copula arguments must lie strictly inside (0, 1)");
    }
}

bool valid_params(const CopulaSpec& s) noexcept {
    switch (s.family) {
        case CopulaFamily::normal: return std::abs(s.theta) < 1.0;
        case CopulaFamily::student_t: return std::abs(s.theta) < 1.0 && s.nu > 2.0 && std::isfinite(s.nu);
        case CopulaFamily::clayton:
        case CopulaFamily::surv_clayton: return s.theta > 0.0 && std::isfinite(s.theta);
        case CopulaFamily::gumbel:
        case CopulaFamily::surv_gumbel: return s.theta > 1.0 && std::isfinite(s.theta);
    }
    return false;
}

bool is_upper_family(CopulaFamily f) { return f == CopulaFamily::gumbel || f == CopulaFamily::surv_clayton; }
bool is_lower_family(CopulaFamily f) { return f == CopulaFamily::clayton || f == CopulaFamily::surv_gumbel; }

bool valid_params(const MixedCopulaSpec& m) noexcept {
    return is_upper_family(m.upper.family) && is_lower_family(m.lower.family) && valid_params(m.upper) &&
           valid_params(m.lower) && m.weight >= 0.0 && m.weight <= 1.0;
}

// ---------------------------------------------------------------------------
// Clayton, written in terms of a = -alpha log u, b = -alpha log v so that
// large alpha and alpha -> 0 stay accurate.

double clayton_log_a(double alpha, double lu, double lv) {
    const double a = -alpha * lu;
    const double b = -alpha * lv;
    const double hi = std::max(a, b);
    if (hi < 30.0) return std::log1p(std::expm1(a) + std::expm1(b));
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi) - std::exp(-hi));
}

// The Archimedean kernels take lu = log u, lv = log v so the rotated families
// can pass log1p(-u) and stay accurate when u is within rounding of 0.

double clayton_cdf(double alpha, double lu, double lv) { return std::exp(-clayton_log_a(alpha, lu, lv) / alpha); }

double clayton_h(double alpha, double lu, double lv) {
    return std::exp((-alpha - 1.0) * lv + (-1.0 / alpha - 1.0) * clayton_log_a(alpha, lu, lv));
}

double clayton_log_pdf(double alpha, double lu, double lv) {
    return std::log1p(alpha) + (-alpha - 1.0) * (lu + lv) + (-2.0 - 1.0 / alpha) * clayton_log_a(alpha, lu, lv);
}

// ---------------------------------------------------------------------------
// Gumbel with x = -log u, y = -log v, s = x^alpha + y^alpha, A = s^(1/alpha).

struct GumbelTerms {
    double lx, ly, log_s, a;
};

GumbelTerms gumbel_terms(double alpha, double lu, double lv) {
    GumbelTerms t{};
    t.lx = std::log(-lu);
    t.ly = std::log(-lv);
    const double p = alpha * t.lx, q = alpha * t.ly;
    const double hi = std::max(p, q);
    t.log_s = hi + std::log1p(std::exp(std::min(p, q) - hi));
    t.a = std::exp(t.log_s / alpha);
    return t;
}

double gumbel_cdf(double alpha, double lu, double lv) { return std::exp(-gumbel_terms(alpha, lu, lv).a); }

double gumbel_h(double alpha, double lu, double lv) {
    const auto t = gumbel_terms(alpha, lu, lv);
    return std::exp(-t.a + (1.0 / alpha - 1.0) * t.log_s + (alpha - 1.0) * t.ly - lv);
}

double gumbel_log_pdf(double alpha, double lu, double lv) {
    const auto t = gumbel_terms(alpha, lu, lv);
    return -t.a + (alpha - 1.0) * (t.lx + t.ly) - lu - lv + (1.0 / alpha - 2.0) * t.log_s +
           std::log(t.a + alpha - 1.0);
}

// ---------------------------------------------------------------------------
// Elliptical families: closed-form h-functions and densities, CDF by
// quadrature of the h-function over the conditioning margin.

double normal_h_x(double rho, double x, double y) {
    return normal_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double student_h_x(double rho, double nu, double x, double y) {
    const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
    return student_t_cdf((x - rho * y) / scale, nu + 1.0);
}

double normal_log_pdf(double rho, double u, double v) {
    const double x = normal_quantile(clamp_unit(u)), y = normal_quantile(clamp_unit(v));
    const double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double student_log_pdf_xy(double rho, double nu, double x, double y) {
    const double r2 = 1.0 - rho * rho;
    const double constant = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) - 2.0 * std::lgamma(0.5 * (nu + 1.0));
    const double quad = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2);
    return constant - 0.5 * std::log(r2) - 0.5 * (nu + 2.0) * std::log1p(quad) +
           0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double elliptical_cdf(const CopulaSpec& s, double u, double v) {
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
    const bool t = s.family == CopulaFamily::student_t;
    const double rho = s.theta, nu = s.nu;
    const double x = t ? student_t_quantile(clamp_unit(u), nu) : normal_quantile(clamp_unit(u));
    const double y = t ? student_t_quantile(clamp_unit(v), nu) : normal_quantile(clamp_unit(v));
    // Integrate over the shorter tail: the full-line integral equals u, so for
    // v > 1/2 the upper tail is subtracted instead, which keeps C(u, 1-) = u.
    const bool upper = v > 0.5;
    const double lo = upper ? y : -kInf, hi = upper ? kInf : y;
    // The tail integral is at most the tail mass; a relative tolerance scaled
    // by that mass keeps the absolute error near 1e-15 without driving tiny
    // tails to the maximum subdivision depth.
    const double mass = upper ? 1.0 - v : v;
    const double tol = std::clamp(1e-15 / mass, 1e-13, 1e-3);
    double tail = 0.0;
    if (t) {
        auto f = [&](double w) { return student_h_x(rho, nu, x, w) * student_t_pdf(w, nu); };
        tail = Integrator::integrate(f, lo, hi, 15, tol);
    } else {
        auto f = [&](double w) { return normal_h_x(rho, x, w) * normal_pdf(w); };
        tail = Integrator::integrate(f, lo, hi, 15, tol);
    }
    const double result = upper ? u - tail : tail;
    return std::clamp(result, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

// ---------------------------------------------------------------------------
// Unchecked evaluation on valid parameters and interior arguments.

double cdf_raw(const CopulaSpec& s, double u, double v) {
    switch (s.family) {
        case CopulaFamily::normal:
        case CopulaFamily::student_t: return elliptical_cdf(s, u, v);
        case CopulaFamily::clayton: return clayton_cdf(s.theta, std::log(u), std::log(v));
        case CopulaFamily::surv_clayton: return u + v - 1.0 + clayton_cdf(s.theta, std::log1p(-u), std::log1p(-v));
        case CopulaFamily::gumbel: return gumbel_cdf(s.theta, std::log(u), std::log(v));
        case CopulaFamily::surv_gumbel: return u + v - 1.0 + gumbel_cdf(s.theta, std::log1p(-u), std::log1p(-v));
    }
    return kNaN;
}

double log_pdf_raw(const CopulaSpec& s, double u, double v) {
    switch (s.family) {
        case CopulaFamily::normal: return normal_log_pdf(s.theta, u, v);
        case CopulaFamily::student_t: {
            const double x = student_t_quantile(clamp_unit(u), s.nu), y = student_t_quantile(clamp_unit(v), s.nu);
            return student_log_pdf_xy(s.theta, s.nu, x, y);
        }
        case CopulaFamily::clayton: return clayton_log_pdf(s.theta, std::log(u), std::log(v));
        case CopulaFamily::surv_clayton: return clayton_log_pdf(s.theta, std::log1p(-u), std::log1p(-v));
        case CopulaFamily::gumbel: return gumbel_log_pdf(s.theta, std::log(u), std::log(v));
        case CopulaFamily::surv_gumbel: return gumbel_log_pdf(s.theta, std::log1p(-u), std::log1p(-v));
    }
    return kNaN;
}

double h_raw(const CopulaSpec& s, double u, double v) {
    switch (s.family) {
        case CopulaFamily::normal:
            return normal_h_x(s.theta, normal_quantile(clamp_unit(u)), normal_quantile(clamp_unit(v)));
        case CopulaFamily::student_t:
            return student_h_x(s.theta, s.nu, student_t_quantile(clamp_unit(u), s.nu),
                               student_t_quantile(clamp_unit(v), s.nu));
        case CopulaFamily::clayton: return clayton_h(s.theta, std::log(u), std::log(v));
        case CopulaFamily::surv_clayton: return 1.0 - clayton_h(s.theta, std::log1p(-u), std::log1p(-v));
        case CopulaFamily::gumbel: return gumbel_h(s.theta, std::log(u), std::log(v));
        case CopulaFamily::surv_gumbel: return 1.0 - gumbel_h(s.theta, std::log1p(-u), std::log1p(-v));
    }
    return kNaN;
}

double mixed_pdf_raw(const MixedCopulaSpec& m, double u, double v) {
    double value = 0.0;
    if (m.weight > 0.0) value += m.weight * std::exp(log_pdf_raw(m.upper, u, v));
    if (m.weight < 1.0) value += (1.0 - m.weight) * std::exp(log_pdf_raw(m.lower, u, v));
    return value;
}

double mixed_h_raw(const MixedCopulaSpec& m, double u, double v) {
    double value = 0.0;
    if (m.weight > 0.0) value += m.weight * h_raw(m.upper, u, v);
    if (m.weight < 1.0) value += (1.0 - m.weight) * h_raw(m.lower, u, v);
    return value;
}

double model_h_raw(const CopulaModel& model, double u, double v) {
    return std::visit(
        [&](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CopulaSpec>) {
                return h_raw(s, u, v);
            } else {
                return mixed_h_raw(s, u, v);
            }
        },
        model);
}

double model_log_pdf_raw(const CopulaModel& model, double u, double v) {
    return std::visit(
        [&](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CopulaSpec>) {
                return log_pdf_raw(s, u, v);
            } else {
                return std::log(mixed_pdf_raw(s, u, v));
            }
        },
        model);
}

double bisect_h_inverse(const CopulaModel& model, double w, double u2) {
    double lo = kClampLo, hi = kClampHi;
    if (w <= model_h_raw(model, lo, u2)) return lo;
    if (w >= model_h_raw(model, hi, u2)) return hi;
    for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (model_h_raw(model, mid, u2) < w) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [0, 1] by Newton iteration on P_n.

struct LegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

LegendreRule legendre_rule(int n) {
    LegendreRule rule;
    rule.nodes.resize(std::size_t(n));
    rule.weights.resize(std::size_t(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[std::size_t(i)] = 0.5 * (1.0 - x);
        rule.nodes[std::size_t(n - 1 - i)] = 0.5 * (1.0 + x);
        rule.weights[std::size_t(i)] = 0.5 * w;
        rule.weights[std::size_t(n - 1 - i)] = 0.5 * w;
    }
    return rule;
}

const LegendreRule& legendre_128() {
    static const LegendreRule rule = legendre_rule(128);
    return rule;
}

// ---------------------------------------------------------------------------
// Fitting.

struct ParamMap {
    // Unconstrained coordinate -> natural value; returns NaN beyond the search wall.
    double (*to_natural)(double);
    double (*to_unconstrained)(double);
};

double tanh_map(double s) { return std::abs(s) <= 15.0 ? std::tanh(s) : kNaN; }
double atanh_map(double r) { return std::atanh(std::clamp(r, -0.999, 0.999)); }
double exp_map(double s) { return std::abs(s) <= 30.0 ? std::exp(s) : kNaN; }
double log_map(double a) { return std::log(std::max(a, 1e-6)); }
double exp1_map(double s) { return std::abs(s) <= 30.0 ? 1.0 + std::exp(s) : kNaN; }
double log1_map(double a) { return std::log(std::max(a - 1.0, 1e-6)); }
double nu_map(double s) { return s <= std::log(kMaxNu - 2.0) && s >= -30.0 ? 2.0 + std::exp(s) : kNaN; }
double lognu_map(double nu) { return std::log(std::clamp(nu, 2.0 + 1e-6, kMaxNu) - 2.0); }
double weight_map(double s) { return std::abs(s) <= 50.0 ? logistic(s) : kNaN; }

ParamMap theta_map(CopulaFamily f) {
    switch (f) {
        case CopulaFamily::normal:
        case CopulaFamily::student_t: return {tanh_map, atanh_map};
        case CopulaFamily::clayton:
        case CopulaFamily::surv_clayton: return {exp_map, log_map};
        case CopulaFamily::gumbel:
        case CopulaFamily::surv_gumbel: return {exp1_map, log1_map};
    }
    return {tanh_map, atanh_map};
}

struct Sample {
    std::vector<double> u1, u2;
};

Sample prepare(std::span<const double> u1, std::span<const double> u2) {
    if (u1.size() != u2.size()) throw Error(ErrorCode::length_mismatch, "copula samples must have equal length");
    if (u1.size() < kMinCopulaPairs) {
        throw Error(ErrorCode::too_short, "copula fit needs at least " + std::to_string(kMinCopulaPairs) +
                                              " pairs, got " + std::to_string(u1.size()));
    }
    Sample s;
    s.u1.reserve(u1.size());
    s.u2.reserve(u2.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        check_unit(u1[i], u2[i]);
        s.u1.push_back(clamp_unit(u1[i]));
        s.u2.push_back(clamp_unit(u2[i]));
    }
    return s;
}

double loglik_raw(const CopulaModel& model, const Sample& s) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.u1.size(); ++i) total += model_log_pdf_raw(model, s.u1[i], s.u2[i]);
    return total;
}

double safe_loglik(const CopulaModel& model, const Sample& s) {
    const bool ok = std::visit([](const auto& m) { return valid_params(m); }, model);
    if (!ok) return kNaN;
    const double ll = loglik_raw(model, s);
    return std::isfinite(ll) ? ll : kNaN;
}

double empirical_tau(const Sample& s) { return correlations(s.u1, s.u2).kendall; }

double theta_from_tau(CopulaFamily f, double tau) {
    switch (f) {
        case CopulaFamily::normal:
        case CopulaFamily::student_t: return std::clamp(std::sin(0.5 * std::numbers::pi * tau), -0.95, 0.95);
        case CopulaFamily::clayton:
        case CopulaFamily::surv_clayton: return tau > 0.02 ? 2.0 * tau / (1.0 - tau) : 0.05;
        case CopulaFamily::gumbel:
        case CopulaFamily::surv_gumbel: return tau > 0.02 ? 1.0 / (1.0 - tau) : 1.05;
    }
    return 0.0;
}

// Short screening run from every start, then two polishing rounds from the best one.
OptimizeResult multistart(const Objective& objective, const std::vector<std::vector<double>>& starts) {
    NelderMeadOptions screen;
    screen.max_evaluations = 400;
    screen.f_tolerance = 1e-7;
    screen.x_tolerance = 1e-3;
    screen.initial_step = 0.25;
    OptimizeResult best;
    best.value = kInf;
    for (const auto& start : starts) {
        const auto r = nelder_mead(objective, start, screen);
        if (r.value < best.value) best = r;
    }
    if (!std::isfinite(best.value)) return best;

    NelderMeadOptions polish;
    polish.max_evaluations = 4000;
    polish.f_tolerance = 1e-11;
    polish.x_tolerance = 1e-6;
    polish.initial_step = 0.1;
    bool converged = false;
    for (int round = 0; round < 2; ++round) {
        const auto r = nelder_mead(objective, best.x, polish);
        const double improvement = best.value - r.value;
        if (r.value <= best.value) best.x = r.x, best.value = r.value;
        converged = converged || r.converged;
        if (r.converged && improvement < 1e-7) break;
        polish.initial_step = 0.02;
    }
    best.converged = converged;
    return best;
}

// Distance of each natural parameter to the nearest edge of its search domain.
void bound_distances(const CopulaSpec& s, std::vector<double>& out) {
    switch (s.family) {
        case CopulaFamily::normal: out.push_back(1.0 - std::abs(s.theta)); break;
        case CopulaFamily::student_t:
            out.push_back(1.0 - std::abs(s.theta));
            out.push_back(std::min(s.nu - 2.0, kMaxNu - s.nu));
            break;
        case CopulaFamily::clayton:
        case CopulaFamily::surv_clayton: out.push_back(s.theta); break;
        case CopulaFamily::gumbel:
        case CopulaFamily::surv_gumbel: out.push_back(s.theta - 1.0); break;
    }
}

std::vector<double> bound_distances(const CopulaModel& model) {
    std::vector<double> out;
    if (const auto* s = std::get_if<CopulaSpec>(&model)) {
        bound_distances(*s, out);
    } else {
        const auto& m = std::get<MixedCopulaSpec>(model);
        bound_distances(m.upper, out);
        bound_distances(m.lower, out);
        out.push_back(std::min(m.weight, 1.0 - m.weight));
    }
    return out;
}

void finish_fit(CopulaFit& fit, const Sample& sample, const std::vector<double>& natural,
                CopulaModel (*build)(std::span<const double>, const void*), const void* ctx) {
    fit.aic = 2.0 * fit.parameter_count() - 2.0 * fit.loglik;
    fit.tail = tail_dependence(fit.model);
    fit.kendall_tau = kendall_tau(fit.model);
    const Objective natural_nll = [&](std::span<const double> x) { return -safe_loglik(build(x, ctx), sample); };
    const auto hess = numeric_hessian(natural_nll, natural, 1e-4);
    if (auto se = standard_errors_from_hessian(hess)) fit.std_errors = std::move(*se);

    // A fit is on the boundary when a parameter sits at the edge of its domain
    // or the edge is statistically indistinguishable from the estimate.
    const auto distances = bound_distances(fit.model);
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const double two_se = i < fit.std_errors.size() ? 2.0 * fit.std_errors[i] : 0.0;
        if (distances[i] < std::max(kBoundaryTol, two_se)) fit.boundary = true;
    }
}

CopulaModel build_single(std::span<const double> x, const void* ctx) {
    const auto family = *static_cast<const CopulaFamily*>(ctx);
    return CopulaSpec{family, x[0], x.size() > 1 ? x[1] : 0.0};
}

struct MixedContext {
    CopulaFamily upper, lower;
};

CopulaModel build_mixed(std::span<const double> x, const void* ctx) {
    const auto& c = *static_cast<const MixedContext*>(ctx);
    return MixedCopulaSpec{CopulaSpec{c.upper, x[0], 0.0}, CopulaSpec{c.lower, x[1], 0.0}, x[2]};
}

}  // namespace

const char* to_string(CopulaFamily family) noexcept {
    switch (family) {
        case CopulaFamily::normal: return "Normal";
        case CopulaFamily::student_t: return "StudentT";
        case CopulaFamily::clayton: return "Clayton";
        case CopulaFamily::surv_clayton: return "SurvClayton";
        case CopulaFamily::gumbel: return "Gumbel";
        case CopulaFamily::surv_gumbel: return "SurvGumbel";
    }
    return "Unknown";
}

CopulaFamily parse_family(std::string_view tag) {
    for (auto f : {CopulaFamily::normal, CopulaFamily::student_t, CopulaFamily::clayton, CopulaFamily::surv_clayton,
                   CopulaFamily::gumbel, CopulaFamily::surv_gumbel}) {
        if (tag == to_string(f)) return f;
    }
    throw Error(ErrorCode::invalid_params, "unknown copula family '" + std::string(tag) + "'");
}

std::string label(const CopulaModel& model) {
    if (const auto* s = std::get_if<CopulaSpec>(&model)) return to_string(s->family);
    const auto& m = std::get<MixedCopulaSpec>(model);
    return std::string(to_string(m.upper.family)) + "+" + to_string(m.lower.family);
}

int parameter_count(const CopulaModel& model) {
    return std::visit([](const auto& s) { return s.parameter_count(); }, model);
}

void validate(const CopulaSpec& spec) {
    if (!valid_params(spec)) {
        throw Error(ErrorCode::invalid_params, std::string("parameters outside the domain of the ") +
                                                   to_string(spec.family) + " copula");
    }
}

void validate(const MixedCopulaSpec& spec) {
    if (!is_upper_family(spec.upper.family) || !is_lower_family(spec.lower.family)) {
        throw Error(ErrorCode::invalid_params,
                    "mixtures combine Gumbel or SurvClayton (upper) with Clayton or SurvGumbel (lower)");
    }
    validate(spec.upper);
    validate(spec.lower);
    if (!(spec.weight >= 0.0 && spec.weight <= 1.0)) {
        throw Error(ErrorCode::invalid_params, "mixture weight must lie in [0, 1]");
    }
}

void validate(const CopulaModel& model) {
    std::visit([](const auto& s) { validate(s); }, model);
}

double copula_cdf(const CopulaSpec& spec, double u1, double u2) {
    validate(spec);
    check_unit(u1, u2);
    return std::clamp(cdf_raw(spec, u1, u2), std::max(u1 + u2 - 1.0, 0.0), std::min(u1, u2));
}

double copula_log_pdf(const CopulaSpec& spec, double u1, double u2) {
    validate(spec);
    check_unit(u1, u2);
    return log_pdf_raw(spec, u1, u2);
}

double copula_pdf(const CopulaSpec& spec, double u1, double u2) { return std::exp(copula_log_pdf(spec, u1, u2)); }

double copula_hfunc(const CopulaSpec& spec, double u1, double u2) {
    validate(spec);
    check_unit(u1, u2);
    return std::clamp(h_raw(spec, u1, u2), 0.0, 1.0);
}

double copula_cdf(const MixedCopulaSpec& spec, double u1, double u2) {
    validate(spec);
    check_unit(u1, u2);
    double value = 0.0;
    if (spec.weight > 0.0) value += spec.weight * cdf_raw(spec.upper, u1, u2);
    if (spec.weight < 1.0) value += (1.0 - spec.weight) * cdf_raw(spec.lower, u1, u2);
    return std::clamp(value, std::max(u1 + u2 - 1.0, 0.0), std::min(u1, u2));
}

double copula_pdf(const MixedCopulaSpec& spec, double u1, double u2) {
    validate(spec);
    check_unit(u1, u2);
    return mixed_pdf_raw(spec, u1, u2);
}

double copula_hfunc(const MixedCopulaSpec& spec, double u1, double u2) {
    validate(spec);
    check_unit(u1, u2);
    return std::clamp(mixed_h_raw(spec, u1, u2), 0.0, 1.0);
}

double copula_cdf(const CopulaModel& model, double u1, double u2) {
    return std::visit([&](const auto& s) { return copula_cdf(s, u1, u2); }, model);
}

double copula_pdf(const CopulaModel& model, double u1, double u2) {
    return std::visit([&](const auto& s) { return copula_pdf(s, u1, u2); }, model);
}

double copula_hfunc(const CopulaModel& model, double u1, double u2) {
    return std::visit([&](const auto& s) { return copula_hfunc(s, u1, u2); }, model);
}

double copula_hfunc_inverse(const CopulaModel& model, double w, double u2) {
    validate(model);
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::probability_out_of_range, "h-inverse level must lie in [0, 1]");
    if (!(u2 > 0.0 && u2 < 1.0)) {
        throw Error(ErrorCode::argument_out_of_range, "conditioning value must lie strictly inside (0, 1)");
    }
    return bisect_h_inverse(model, w, u2);
}

TailDependence tail_dependence(const CopulaSpec& spec) {
    validate(spec);
    const double a = spec.theta;
    switch (spec.family) {
        case CopulaFamily::normal: return {0.0, 0.0};
        case CopulaFamily::student_t: {
            const double arg = -std::sqrt(spec.nu + 1.0) * std::sqrt((1.0 - a) / (1.0 + a));
            const double lambda = 2.0 * student_t_cdf(arg, spec.nu + 1.0);
            return {lambda, lambda};
        }
        case CopulaFamily::clayton: return {std::pow(2.0, -1.0 / a), 0.0};
        case CopulaFamily::surv_clayton: return {0.0, std::pow(2.0, -1.0 / a)};
        case CopulaFamily::gumbel: return {0.0, 2.0 - std::pow(2.0, 1.0 / a)};
        case CopulaFamily::surv_gumbel: return {2.0 - std::pow(2.0, 1.0 / a), 0.0};
    }
    return {};
}

TailDependence tail_dependence(const MixedCopulaSpec& spec) {
    validate(spec);
    const auto up = tail_dependence(spec.upper);
    const auto lo = tail_dependence(spec.lower);
    const double w = spec.weight;
    return {w * up.lower + (1.0 - w) * lo.lower, w * up.upper + (1.0 - w) * lo.upper};
}

TailDependence tail_dependence(const CopulaModel& model) {
    return std::visit([](const auto& s) { return tail_dependence(s); }, model);
}

double kendall_tau(const CopulaSpec& spec) {
    validate(spec);
    switch (spec.family) {
        case CopulaFamily::normal:
        case CopulaFamily::student_t: return 2.0 / std::numbers::pi * std::asin(spec.theta);
        case CopulaFamily::clayton:
        case CopulaFamily::surv_clayton: return spec.theta / (spec.theta + 2.0);
        case CopulaFamily::gumbel:
        case CopulaFamily::surv_gumbel: return 1.0 - 1.0 / spec.theta;
    }
    return 0.0;
}

double kendall_tau(const MixedCopulaSpec& spec) { return kendall_tau_quadrature(spec); }

double kendall_tau(const CopulaModel& model) {
    return std::visit([](const auto& s) { return kendall_tau(s); }, model);
}

double kendall_tau_quadrature(const CopulaModel& model) {
    validate(model);
    // tau = 4 E[C(U1,U2)] - 1 = 1 - 4 * integral of (dC/du1)(dC/du2); the
    // second form integrates bounded h-functions instead of the density.
    const auto& rule = legendre_128();
    const std::size_t n = rule.nodes.size();
    std::vector<double> h(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) h[i * n + j] = model_h_raw(model, rule.nodes[i], rule.nodes[j]);
    }
    double integral = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // dC/du2 at (u_i, u_j) is h(u_i | u_j); dC/du1 there is h(u_j | u_i) by exchangeability.
            integral += rule.weights[i] * rule.weights[j] * h[i * n + j] * h[j * n + i];
        }
    }
    return 1.0 - 4.0 * integral;
}

UniformPairs sample(const CopulaModel& model, std::size_t count, std::uint64_t seed) {
    validate(model);
    if (count < 1) throw Error(ErrorCode::invalid_params, "sample count must be at least 1");
    rng::Engine engine(seed);
    UniformPairs out;
    out.u1.resize(count);
    out.u2.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = rng::uniform_open(engine);
        const double w = rng::uniform_open(engine);
        CopulaModel component = model;
        if (const auto* m = std::get_if<MixedCopulaSpec>(&model)) {
            const double pick = rng::uniform_open(engine);
            component = pick < m->weight ? m->upper : m->lower;
        }
        out.u2[i] = v;
        out.u1[i] = bisect_h_inverse(component, w, v);
    }
    return out;
}

double copula_loglik(const CopulaModel& model, std::span<const double> u1, std::span<const double> u2) {
    validate(model);
    if (u1.size() != u2.size()) throw Error(ErrorCode::length_mismatch, "copula samples must have equal length");
    Sample s;
    s.u1.reserve(u1.size());
    s.u2.reserve(u2.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        check_unit(u1[i], u2[i]);
        s.u1.push_back(clamp_unit(u1[i]));
        s.u2.push_back(clamp_unit(u2[i]));
    }
    return loglik_raw(model, s);
}

CopulaFit fit_single(std::span<const double> u1, std::span<const double> u2, CopulaFamily family) {
    const auto sample = prepare(u1, u2);
    const auto map = theta_map(family);
    const bool has_nu = family == CopulaFamily::student_t;

    auto natural_of = [&](std::span<const double> s) {
        std::vector<double> x{map.to_natural(s[0])};
        if (has_nu) x.push_back(nu_map(s[1]));
        return x;
    };
    const Objective objective = [&](std::span<const double> s) {
        const auto x = natural_of(s);
        for (double v : x) {
            if (std::isnan(v)) return kNaN;
        }
        return -safe_loglik(CopulaSpec{family, x[0], has_nu ? x[1] : 0.0}, sample);
    };

    const double tau = empirical_tau(sample);
    std::vector<std::vector<double>> starts;
    const double s0 = map.to_unconstrained(theta_from_tau(family, tau));
    if (has_nu) {
        starts.push_back({s0, lognu_map(4.0)});
        starts.push_back({s0, lognu_map(15.0)});
    } else {
        starts.push_back({s0});
        starts.push_back({s0 - 1.0});
    }

    const auto best = multistart(objective, starts);
    if (!std::isfinite(best.value) || !best.converged) {
        throw Error(ErrorCode::optimizer_failed, std::string("copula fit did not converge for ") + to_string(family));
    }

    CopulaFit fit;
    const auto natural = natural_of(best.x);
    fit.model = CopulaSpec{family, natural[0], has_nu ? natural[1] : 0.0};
    fit.loglik = -best.value;
    fit.converged = true;
    finish_fit(fit, sample, natural, build_single, &family);
    return fit;
}

CopulaFit fit_mixed(std::span<const double> u1, std::span<const double> u2, CopulaFamily upper_family,
                    CopulaFamily lower_family) {
    if (!is_upper_family(upper_family) || !is_lower_family(lower_family)) {
        throw Error(ErrorCode::invalid_params,
                    "mixtures combine Gumbel or SurvClayton (upper) with Clayton or SurvGumbel (lower)");
    }
    const auto sample = prepare(u1, u2);
    const auto up_map = theta_map(upper_family);
    const auto lo_map = theta_map(lower_family);

    auto natural_of = [&](std::span<const double> s) {
        return std::vector<double>{up_map.to_natural(s[0]), lo_map.to_natural(s[1]), weight_map(s[2])};
    };
    const Objective objective = [&](std::span<const double> s) {
        const auto x = natural_of(s);
        for (double v : x) {
            if (std::isnan(v)) return kNaN;
        }
        return -safe_loglik(MixedCopulaSpec{CopulaSpec{upper_family, x[0], 0.0}, CopulaSpec{lower_family, x[1], 0.0},
                                            x[2]},
                            sample);
    };

    const double tau = empirical_tau(sample);
    const double s_up = up_map.to_unconstrained(theta_from_tau(upper_family, tau));
    const double s_lo = lo_map.to_unconstrained(theta_from_tau(lower_family, tau));
    std::vector<std::vector<double>> starts;
    for (double w : {0.25, 0.5, 0.75}) starts.push_back({s_up, s_lo, logit(w)});
    // Degenerate starts at the single-family optima guarantee the mixture
    // never does worse than either of its components on its own.
    try {
        const auto single = fit_single(u1, u2, upper_family);
        starts.push_back({up_map.to_unconstrained(std::get<CopulaSpec>(single.model).theta), s_lo, 45.0});
    } catch (const Error&) {
    }
    try {
        const auto single = fit_single(u1, u2, lower_family);
        starts.push_back({s_up, lo_map.to_unconstrained(std::get<CopulaSpec>(single.model).theta), -45.0});
    } catch (const Error&) {
    }

    const auto best = multistart(objective, starts);
    if (!std::isfinite(best.value) || !best.converged) {
        throw Error(ErrorCode::optimizer_failed, std::string("mixture fit did not converge for ") +
                                                     to_string(upper_family) + "+" + to_string(lower_family));
    }

    CopulaFit fit;
    const auto natural = natural_of(best.x);
    MixedCopulaSpec spec{CopulaSpec{upper_family, natural[0], 0.0}, CopulaSpec{lower_family, natural[1], 0.0},
                         natural[2]};
    fit.model = spec;
    fit.loglik = -best.value;
    fit.converged = true;
    const MixedContext ctx{upper_family, lower_family};
    finish_fit(fit, sample, natural, build_mixed, &ctx);
    return fit;
}

std::string CopulaCandidate::label() const {
    if (!second) return to_string(first);
    return std::string(to_string(first)) + "+" + to_string(*second);
}

CopulaCandidate parse_candidate(std::string_view text) {
    const auto plus = text.find('+');
    if (plus == std::string_view::npos) return CopulaCandidate::single(parse_family(text));
    const auto upper = parse_family(text.substr(0, plus));
    const auto lower = parse_family(text.substr(plus + 1));
    if (!is_upper_family(upper) || !is_lower_family(lower)) {
        throw Error(ErrorCode::invalid_params, "invalid mixture candidate '" + std::string(text) + "'");
    }
    return CopulaCandidate::mixed(upper, lower);
}

std::vector<CopulaCandidate> default_candidates() {
    using F = CopulaFamily;
    return {
        CopulaCandidate::single(F::normal),
        CopulaCandidate::single(F::student_t),
        CopulaCandidate::single(F::clayton),
        CopulaCandidate::single(F::surv_clayton),
        CopulaCandidate::single(F::gumbel),
        CopulaCandidate::single(F::surv_gumbel),
        CopulaCandidate::mixed(F::gumbel, F::surv_gumbel),
        CopulaCandidate::mixed(F::surv_clayton, F::clayton),
        CopulaCandidate::mixed(F::gumbel, F::clayton),
        CopulaCandidate::mixed(F::surv_clayton, F::surv_gumbel),
    };
}

CopulaSelection select_copula(std::span<const double> u1, std::span<const double> u2,
                              const std::vector<CopulaCandidate>& candidates) {
    if (candidates.empty()) throw Error(ErrorCode::invalid_params, "candidate list is empty");
    CopulaSelection selection;
    selection.outcomes.resize(candidates.size());
    parallel::for_each_index(candidates.size(), [&](std::size_t i) {
        const auto& c = candidates[i];
        auto& outcome = selection.outcomes[i];
        outcome.candidate = c;
        try {
            outcome.fit = c.is_mixture() ? fit_mixed(u1, u2, c.first, *c.second) : fit_single(u1, u2, c.first);
        } catch (const Error& e) {
            // Input problems apply to every candidate; report them directly.
            if (e.code() == ErrorCode::too_short || e.code() == ErrorCode::argument_out_of_range ||
                e.code() == ErrorCode::length_mismatch) {
                throw;
            }
            outcome.error = e.what();
        }
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < selection.outcomes.size(); ++i) {
        const auto& outcome = selection.outcomes[i];
        if (!outcome.fit) continue;
        const auto& f = *outcome.fit;
        bool better = !best;
        if (best) {
            const auto& b = *selection.outcomes[*best].fit;
            better = f.aic < b.aic || (f.aic == b.aic && f.parameter_count() < b.parameter_count());
        }
        if (better) best = i;
    }
    if (!best) throw Error(ErrorCode::all_fits_failed, "every copula candidate failed to fit");
    selection.best_index = *best;
    selection.best = *selection.outcomes[*best].fit;
    return selection;
}

}  // namespace ccovar
