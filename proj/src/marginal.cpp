#include "ccovar/marginal.hpp"

#include "ccovar/error.hpp"
#include "ccovar/optimize.hpp"
#include "parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace ccovar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBoundaryTolerance = 1e-4;

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;
};

SampleStats sample_stats(std::span<const double> r) {
    SampleStats s;
    s.mean = std::accumulate(r.begin(), r.end(), 0.0) / double(r.size());
    for (const double x : r) s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= double(r.size());
    return s;
}

// Durbin-Levinson step-down: the AR polynomial 1 - phi_1 z - ... - phi_m z^m has
// all roots outside the unit circle iff every partial autocorrelation is inside (-1, 1).
bool ar_stationary(std::span<const double> phi) {
    std::vector<double> a(phi.begin(), phi.end());
    for (std::size_t k = a.size(); k > 0; --k) {
        const double kappa = a[k - 1];
        if (!(std::abs(kappa) < 1.0)) return false;
        const double denom = 1.0 - kappa * kappa;
        std::vector<double> next(k - 1);
        for (std::size_t j = 0; j + 1 < k; ++j) next[j] = (a[j] + kappa * a[k - 2 - j]) / denom;
        a.swap(next);
    }
    return true;
}

// Views into a flattened natural-parameter vector.
struct NaturalView {
    const double* v;
    const ArmaGarchOrders& o;
    double phi0() const { return v[0]; }
    const double* phi() const { return v + 1; }
    const double* gamma() const { return v + 1 + o.m; }
    double alpha0() const { return v[1 + o.m + o.n]; }
    const double* alpha() const { return v + 2 + o.m + o.n; }
    const double* beta() const { return v + 2 + o.m + o.n + o.p; }
    double nu() const { return v[2 + o.m + o.n + o.p + o.q]; }
    double eta() const { return v[3 + o.m + o.n + o.p + o.q]; }
};

/**
 * Core recursion shared by filter(), nll() and the optimizer. Returns the
 * negative log-likelihood, or NaN when the variance turns non-positive or
 * the skewed-t shape is invalid. Writes mu/sigma/z when the pointers are set.
 */
double run_recursion(const NaturalView& p, std::span<const double> r, const SampleStats& stats,
                     std::vector<double>& eps, std::vector<double>& var, double* mu_out, double* sigma_out,
                     double* z_out) {
    if (!(p.nu() > 2.0) || !(std::abs(p.eta()) < 1.0) || !std::isfinite(p.nu())) return kNaN;
    const SkewT dist(SkewTParams{p.nu(), p.eta()});
    const std::size_t T = r.size();
    eps.resize(T);
    var.resize(T);
    const auto& o = p.o;
    const double* phi = p.phi();
    const double* gamma = p.gamma();
    const double* alpha = p.alpha();
    const double* beta = p.beta();

    double total = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        double mu = p.phi0();
        for (int j = 1; j <= o.m; ++j) mu += phi[j - 1] * (t >= std::size_t(j) ? r[t - j] : stats.mean);
        for (int j = 1; j <= o.n; ++j) {
            if (t >= std::size_t(j)) mu += gamma[j - 1] * eps[t - j];
        }
        double s2 = p.alpha0();
        for (int j = 1; j <= o.p; ++j) {
            if (t >= std::size_t(j)) s2 += alpha[j - 1] * eps[t - j] * eps[t - j];
        }
        for (int j = 1; j <= o.q; ++j) s2 += beta[j - 1] * (t >= std::size_t(j) ? var[t - j] : stats.variance);
        if (!(s2 > 0.0) || !std::isfinite(s2) || !std::isfinite(mu)) return kNaN;

        const double e = r[t] - mu;
        eps[t] = e;
        var[t] = s2;
        const double sigma = std::sqrt(s2);
        const double z = e / sigma;
        total += dist.log_pdf(z) - std::log(sigma);
        if (mu_out) {
            mu_out[t] = mu;
            sigma_out[t] = sigma;
            z_out[t] = z;
        }
    }
    return std::isfinite(total) ? -total : kNaN;
}

// Unconstrained coordinates: phi0, phi, gamma, log alpha0, logit lambda,
// K-1 softmax logits (K = p + q), log(nu - 2), atanh eta.
std::vector<double> to_natural(std::span<const double> theta, const ArmaGarchOrders& o) {
    const int k = o.parameter_count();
    std::vector<double> out(std::size_t(k), 0.0);
    std::size_t i = 0;
    out[0] = theta[0];
    for (int j = 0; j < o.m + o.n; ++j) out[std::size_t(1 + j)] = theta[std::size_t(1 + j)];
    i = std::size_t(1 + o.m + o.n);
    out[i] = std::exp(theta[i]);
    const double lambda = logistic(theta[i + 1]);
    const int K = o.p + o.q;
    double max_logit = 0.0;
    for (int j = 1; j < K; ++j) max_logit = std::max(max_logit, theta[i + 1 + std::size_t(j)]);
    std::vector<double> w(static_cast<std::size_t>(K));
    double sum = 0.0;
    for (int j = 0; j < K; ++j) {
        const double logit_j = j == 0 ? 0.0 : theta[i + 1 + std::size_t(j)];
        w[std::size_t(j)] = std::exp(logit_j - max_logit);
        sum += w[std::size_t(j)];
    }
    for (int j = 0; j < K; ++j) out[i + 1 + std::size_t(j)] = lambda * w[std::size_t(j)] / sum;
    const std::size_t tail = i + 1 + std::size_t(K);
    out[tail] = 2.0 + std::exp(theta[tail]);
    out[tail + 1] = std::tanh(theta[tail + 1]);
    return out;
}

std::vector<double> to_unconstrained(std::span<const double> natural, const ArmaGarchOrders& o) {
    std::vector<double> theta(natural.begin(), natural.end());
    const std::size_t i = std::size_t(1 + o.m + o.n);
    theta[i] = std::log(natural[i]);
    const int K = o.p + o.q;
    double lambda = 0.0;
    for (int j = 0; j < K; ++j) lambda += natural[i + 1 + std::size_t(j)];
    theta[i + 1] = logit(std::clamp(lambda, 1e-8, 1.0 - 1e-8));
    const double w0 = std::max(natural[i + 1], 1e-12);
    for (int j = 1; j < K; ++j) theta[i + 1 + std::size_t(j)] = std::log(std::max(natural[i + 1 + std::size_t(j)], 1e-12) / w0);
    const std::size_t tail = i + 1 + std::size_t(K);
    theta[tail] = std::log(natural[tail] - 2.0);
    theta[tail + 1] = std::atanh(natural[tail + 1]);
    return theta;
}

// OLS via Eigen; returns coefficients or empty on failure.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return x.colPivHouseholderQr().solve(y);
}

// Hannan-Rissanen: long AR for innovations, then regress on lagged returns and innovations.
void arma_initial_guess(std::span<const double> r, const ArmaGarchOrders& o, double& phi0, std::vector<double>& phi,
                        std::vector<double>& gamma) {
    const std::size_t T = r.size();
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / double(T);
    phi.assign(std::size_t(o.m), 0.0);
    gamma.assign(std::size_t(o.n), 0.0);
    phi0 = mean;
    if (o.m == 0 && o.n == 0) return;

    std::vector<double> innov(T, 0.0);
    std::size_t start = 0;
    if (o.n > 0) {
        const std::size_t L = std::min<std::size_t>(10, T / 10);
        const std::size_t rows = T - L;
        Eigen::MatrixXd x(rows, L + 1);
        Eigen::VectorXd y(rows);
        for (std::size_t t = L; t < T; ++t) {
            const auto row = Eigen::Index(t - L);
            y(row) = r[t];
            x(row, 0) = 1.0;
            for (std::size_t j = 1; j <= L; ++j) x(row, Eigen::Index(j)) = r[t - j];
        }
        const Eigen::VectorXd c = least_squares(x, y);
        for (std::size_t t = L; t < T; ++t) innov[t] = y(Eigen::Index(t - L)) - x.row(Eigen::Index(t - L)).dot(c);
        start = L;
    }
    start += std::size_t(std::max(o.m, o.n));
    if (start + 20 >= T) return;
    const std::size_t rows = T - start;
    Eigen::MatrixXd x(rows, 1 + o.m + o.n);
    Eigen::VectorXd y(rows);
    for (std::size_t t = start; t < T; ++t) {
        const auto row = Eigen::Index(t - start);
        y(row) = r[t];
        x(row, 0) = 1.0;
        for (int j = 1; j <= o.m; ++j) x(row, j) = r[t - std::size_t(j)];
        for (int j = 1; j <= o.n; ++j) x(row, o.m + j) = innov[t - std::size_t(j)];
    }
    const Eigen::VectorXd c = least_squares(x, y);
    if (!c.allFinite()) return;
    for (int j = 0; j < o.m; ++j) phi[std::size_t(j)] = c(1 + j);
    for (int j = 0; j < o.n; ++j) gamma[std::size_t(j)] = c(1 + o.m + j);
    while (!ar_stationary(phi)) {
        for (double& v : phi) v *= 0.5;
    }
    double ma_mass = 0.0;
    for (const double g : gamma) ma_mass += std::abs(g);
    if (ma_mass > 0.9) {
        for (double& g : gamma) g *= 0.9 / ma_mass;
    }
    // Intercept consistent with the sample mean under the shrunk AR part.
    double ar_sum = 0.0;
    for (const double v : phi) ar_sum += v;
    phi0 = mean * (1.0 - ar_sum);
}

bool near_boundary(const MarginalParams& p) {
    auto close = [](double v, double bound) { return std::abs(v - bound) < kBoundaryTolerance; };
    double persistence = 0.0;
    for (const double a : p.alpha) {
        if (close(a, 0.0)) return true;
        persistence += a;
    }
    for (const double b : p.beta) {
        if (close(b, 0.0)) return true;
        persistence += b;
    }
    return close(persistence, 1.0) || close(p.alpha0, 0.0) || close(p.skewt.nu, 2.0) ||
           close(std::abs(p.skewt.eta), 1.0);
}

}  // namespace

std::string ArmaGarchOrders::label() const {
    return "ARMA(" + std::to_string(m) + "," + std::to_string(n) + ")-GARCH(" + std::to_string(p) + "," +
           std::to_string(q) + ")";
}

void validate(const ArmaGarchOrders& orders) {
    for (const int v : {orders.m, orders.n, orders.p, orders.q}) {
        if (v < 0 || v > 3) throw Error(ErrorCode::invalid_params, "lag orders must lie in [0, 3]: " + orders.label());
    }
    if (orders.p + orders.q < 1) throw Error(ErrorCode::invalid_params, "GARCH part needs p + q >= 1");
}

std::vector<double> MarginalParams::flatten() const {
    std::vector<double> out;
    out.reserve(4 + phi.size() + gamma.size() + alpha.size() + beta.size());
    out.push_back(phi0);
    out.insert(out.end(), phi.begin(), phi.end());
    out.insert(out.end(), gamma.begin(), gamma.end());
    out.push_back(alpha0);
    out.insert(out.end(), alpha.begin(), alpha.end());
    out.insert(out.end(), beta.begin(), beta.end());
    out.push_back(skewt.nu);
    out.push_back(skewt.eta);
    return out;
}

MarginalParams MarginalParams::unflatten(std::span<const double> values, const ArmaGarchOrders& o) {
    if (values.size() != std::size_t(o.parameter_count())) {
        throw Error(ErrorCode::invalid_params, "parameter vector length does not match " + o.label());
    }
    const NaturalView v{values.data(), o};
    MarginalParams p;
    p.phi0 = v.phi0();
    p.phi.assign(v.phi(), v.phi() + o.m);
    p.gamma.assign(v.gamma(), v.gamma() + o.n);
    p.alpha0 = v.alpha0();
    p.alpha.assign(v.alpha(), v.alpha() + o.p);
    p.beta.assign(v.beta(), v.beta() + o.q);
    p.skewt = {v.nu(), v.eta()};
    return p;
}

std::vector<std::string> MarginalParams::names(const ArmaGarchOrders& o) {
    std::vector<std::string> out{"phi0"};
    for (int j = 1; j <= o.m; ++j) out.push_back("phi" + std::to_string(j));
    for (int j = 1; j <= o.n; ++j) out.push_back("gamma" + std::to_string(j));
    out.push_back("alpha0");
    for (int j = 1; j <= o.p; ++j) out.push_back("alpha" + std::to_string(j));
    for (int j = 1; j <= o.q; ++j) out.push_back("beta" + std::to_string(j));
    out.push_back("nu");
    out.push_back("eta");
    return out;
}

void validate(const MarginalParams& params, const ArmaGarchOrders& orders) {
    validate(orders);
    if (params.phi.size() != std::size_t(orders.m) || params.gamma.size() != std::size_t(orders.n) ||
        params.alpha.size() != std::size_t(orders.p) || params.beta.size() != std::size_t(orders.q)) {
        throw Error(ErrorCode::invalid_params, "coefficient counts do not match " + orders.label());
    }
    if (!(params.alpha0 > 0.0) || !std::isfinite(params.alpha0)) {
        throw Error(ErrorCode::invalid_params, "alpha0 must be positive");
    }
    double persistence = 0.0;
    for (const double v : params.alpha) {
        if (!(v >= 0.0)) throw Error(ErrorCode::invalid_params, "ARCH coefficients must be non-negative");
        persistence += v;
    }
    for (const double v : params.beta) {
        if (!(v >= 0.0)) throw Error(ErrorCode::invalid_params, "GARCH coefficients must be non-negative");
        persistence += v;
    }
    if (!(persistence < 1.0)) {
        throw Error(ErrorCode::invalid_params, "sum(alpha) + sum(beta) must be below 1 for covariance stationarity");
    }
    if (!ar_stationary(params.phi)) throw Error(ErrorCode::invalid_params, "AR polynomial is not stationary");
    validate(params.skewt);
}

FilterResult filter(const MarginalParams& params, const ArmaGarchOrders& orders, std::span<const double> returns) {
    validate(params, orders);
    const std::size_t need = std::size_t(std::max({orders.m, orders.n, orders.p, orders.q})) + 10;
    if (returns.size() <= need) {
        throw Error(ErrorCode::too_short, "filter needs more than " + std::to_string(need) + " observations");
    }
    const auto flat = params.flatten();
    const auto stats = sample_stats(returns);
    FilterResult out;
    out.mu.resize(returns.size());
    out.sigma.resize(returns.size());
    out.z.resize(returns.size());
    std::vector<double> eps, var;
    const double value = run_recursion(NaturalView{flat.data(), orders}, returns, stats, eps, var, out.mu.data(),
                                       out.sigma.data(), out.z.data());
    if (std::isnan(value)) throw Error(ErrorCode::invalid_params, "variance recursion left the positive domain");
    return out;
}

double nll(const MarginalParams& params, const ArmaGarchOrders& orders, std::span<const double> returns) {
    validate(params, orders);
    const auto flat = params.flatten();
    std::vector<double> eps, var;
    const double value = run_recursion(NaturalView{flat.data(), orders}, returns, sample_stats(returns), eps, var,
                                       nullptr, nullptr, nullptr);
    if (std::isnan(value)) throw Error(ErrorCode::invalid_params, "negative log-likelihood is not finite");
    return value;
}

namespace {

MarginalFit fit_impl(std::span<const double> returns, const ArmaGarchOrders& orders, const MarginalFitOptions& options,
                     bool with_std_errors) {
    validate(orders);
    if (returns.size() < kMinFitObservations) {
        throw Error(ErrorCode::too_short, "marginal fit needs at least " + std::to_string(kMinFitObservations) +
                                              " observations, got " + std::to_string(returns.size()));
    }
    const auto stats = sample_stats(returns);
    const bool constant =
        std::all_of(returns.begin(), returns.end(), [&](double r) { return r == returns.front(); });
    if (constant || !(stats.variance > 0.0)) throw Error(ErrorCode::degenerate_series, "returns have zero variance");

    std::vector<double> eps, var;
    const Objective objective = [&](std::span<const double> theta) {
        const auto natural = to_natural(theta, orders);
        const NaturalView view{natural.data(), orders};
        if (!ar_stationary(std::span<const double>(view.phi(), std::size_t(orders.m)))) return kNaN;
        return run_recursion(view, returns, stats, eps, var, nullptr, nullptr, nullptr);
    };

    // Moment-based guess: least-squares ARMA, ARCH mass 0.05, GARCH mass 0.90, nu = 8, eta = 0.
    MarginalParams guess;
    arma_initial_guess(returns, orders, guess.phi0, guess.phi, guess.gamma);
    const double arch_mass = orders.q == 0 ? 0.3 : 0.05;
    const double garch_mass = 0.90;
    guess.alpha.assign(std::size_t(orders.p), orders.p ? arch_mass / orders.p : 0.0);
    guess.beta.assign(std::size_t(orders.q), orders.q ? garch_mass / orders.q : 0.0);
    const double persistence = (orders.p ? arch_mass : 0.0) + (orders.q ? garch_mass : 0.0);
    guess.alpha0 = stats.variance * (1.0 - persistence);
    guess.skewt = {8.0, 0.0};
    const auto base = to_unconstrained(guess.flatten(), orders);

    const std::size_t arma_end = std::size_t(1 + orders.m + orders.n);
    const std::size_t lambda_idx = arma_end + 1;
    const std::size_t nu_idx = lambda_idx + std::size_t(orders.p + orders.q);
    const std::size_t eta_idx = nu_idx + 1;
    std::vector<std::vector<double>> starts;
    for (int s = 0; s < std::max(1, options.starts); ++s) {
        auto theta = base;
        switch (s % 5) {
            case 0: break;
            case 1:
                theta[lambda_idx] -= 1.0;
                theta[nu_idx] = std::log(5.0 - 2.0);
                break;
            case 2:
                theta[eta_idx] = std::atanh(0.2);
                theta[lambda_idx] += 0.5;
                break;
            case 3:
                theta[eta_idx] = std::atanh(-0.2);
                theta[nu_idx] = std::log(20.0 - 2.0);
                break;
            case 4:
                for (std::size_t j = 1; j < arma_end; ++j) theta[j] *= 0.5;
                theta[lambda_idx + 1 < nu_idx ? lambda_idx + 1 : lambda_idx] += 1.0;
                break;
        }
        starts.push_back(std::move(theta));
    }

    // Short screening run per start, then polish the best start to full tolerance.
    const int k = orders.parameter_count();
    NelderMeadOptions screen;
    screen.max_evaluations = std::min(options.max_evaluations, 150 * k + 300);
    screen.f_tolerance = 1e-6;
    screen.x_tolerance = 1e-3;
    screen.initial_step = 0.25;

    int evaluations = 0;
    OptimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        const auto r = nelder_mead(objective, start, screen);
        evaluations += r.evaluations;
        if (r.value < best.value) best = r;
    }

    NelderMeadOptions polish;
    polish.max_evaluations = options.max_evaluations;
    polish.f_tolerance = 1e-10;
    polish.x_tolerance = 1e-5;
    polish.initial_step = 0.1;
    bool converged = false;
    if (std::isfinite(best.value)) {
        for (int round = 0; round < 3; ++round) {
            const auto r = nelder_mead(objective, best.x, polish);
            evaluations += r.evaluations;
            const double improvement = best.value - r.value;
            if (r.value <= best.value) best = r;
            converged = converged || r.converged;
            if (r.converged && improvement < 1e-6) break;
            polish.initial_step = 0.05;
        }
    }
    if (!std::isfinite(best.value) || !converged) {
        throw Error(ErrorCode::optimizer_failed, "optimizer did not converge for " + orders.label());
    }

    MarginalFit result;
    result.orders = orders;
    const auto natural = to_natural(best.x, orders);
    result.params = MarginalParams::unflatten(natural, orders);
    result.converged = converged;
    result.evaluations = evaluations;
    result.returns.assign(returns.begin(), returns.end());
    result.mu.resize(returns.size());
    result.sigma.resize(returns.size());
    result.z.resize(returns.size());
    const double value = run_recursion(NaturalView{natural.data(), orders}, returns, stats, eps, var,
                                       result.mu.data(), result.sigma.data(), result.z.data());
    result.loglik = -value;
    result.aic = 2.0 * orders.parameter_count() - 2.0 * result.loglik;
    result.u = pit(result.z);
    result.boundary = near_boundary(result.params);

    if (!with_std_errors) return result;
    const Objective natural_objective = [&](std::span<const double> x) {
        return run_recursion(NaturalView{x.data(), orders}, returns, stats, eps, var, nullptr, nullptr, nullptr);
    };
    const auto hess = numeric_hessian(natural_objective, natural, 1e-4);
    if (auto se = standard_errors_from_hessian(hess)) result.std_errors = std::move(*se);
    return result;
}

}  // namespace

MarginalFit fit(std::span<const double> returns, const ArmaGarchOrders& orders, const MarginalFitOptions& options) {
    return fit_impl(returns, orders, options, true);
}

MarginalFit fit(const ReturnSeries& returns, const ArmaGarchOrders& orders, const MarginalFitOptions& options) {
    auto result = fit(std::span<const double>(returns.returns), orders, options);
    result.dates = returns.dates;
    return result;
}

OrderSearchResult select_orders(const ReturnSeries& returns, int max_lag, const MarginalFitOptions& options) {
    if (max_lag < 0 || max_lag > 3) throw Error(ErrorCode::invalid_params, "max_lag must lie in [0, 3]");
    if (returns.size() < kMinFitObservations) {
        throw Error(ErrorCode::too_short, "order search needs at least " + std::to_string(kMinFitObservations) +
                                              " observations");
    }
    // Grid candidates are screened with fewer starts and no Hessian; the
    // winner is refitted with the caller's full options.
    MarginalFitOptions grid_options = options;
    grid_options.starts = std::min(options.starts, 2);
    std::vector<ArmaGarchOrders> grid;
    for (int m = 0; m <= max_lag; ++m) {
        for (int n = 0; n <= max_lag; ++n) {
            for (int p = 0; p <= max_lag; ++p) {
                for (int q = 0; q <= max_lag; ++q) {
                    if (p + q >= 1) grid.push_back({m, n, p, q});
                }
            }
        }
    }
    OrderSearchResult out;
    out.grid.resize(grid.size());
    std::vector<std::optional<MarginalFit>> fits(grid.size());
    parallel::for_each_index(grid.size(), [&](std::size_t i) {
        auto& entry = out.grid[i];
        entry.orders = grid[i];
        try {
            fits[i] = fit_impl(returns.returns, grid[i], grid_options, false);
            entry.ok = true;
            entry.loglik = fits[i]->loglik;
            entry.aic = fits[i]->aic;
        } catch (const Error& e) {
            entry.error = e.what();
        }
    });
    // Reduction in grid order keeps the choice independent of scheduling.
    std::optional<MarginalFit> best;
    for (auto& candidate : fits) {
        if (!candidate) continue;
        const bool better = !best || candidate->aic < best->aic ||
                            (candidate->aic == best->aic &&
                             candidate->orders.parameter_count() < best->orders.parameter_count());
        if (better) best = std::move(candidate);
    }
    if (!best) throw Error(ErrorCode::all_fits_failed, "every ARMA-GARCH order combination failed to fit");
    try {
        out.best = fit(returns, best->orders, options);
        if (out.best.loglik < best->loglik) {
            out.best = fit_impl(returns.returns, best->orders, grid_options, true);
            out.best.dates = returns.dates;
        }
    } catch (const Error&) {
        out.best = std::move(*best);
        out.best.dates = returns.dates;
    }
    return out;
}

std::vector<double> pit(std::span<const double> z) {
    if (z.empty()) throw Error(ErrorCode::too_short, "pit needs at least one residual");
    auto u = average_ranks(z);
    const double denom = double(z.size()) + 1.0;
    for (double& v : u) v /= denom;
    return u;
}

ResidualDiagnostics residual_diagnostics(const MarginalFit& fit) {
    const auto& o = fit.orders;
    std::vector<double> z2(fit.z.size());
    std::transform(fit.z.begin(), fit.z.end(), z2.begin(), [](double v) { return v * v; });
    ResidualDiagnostics d;
    d.q15 = ljung_box(fit.z, 15, o.m + o.n);
    d.q20 = ljung_box(fit.z, 20, o.m + o.n);
    d.q2_15 = ljung_box(z2, 15, o.p + o.q);
    d.q2_20 = ljung_box(z2, 20, o.p + o.q);
    d.arch15 = arch_lm(fit.z, 15);
    d.arch20 = arch_lm(fit.z, 20);
    d.q15.test = d.q20.test = "Q";
    d.q2_15.test = d.q2_20.test = "Q2";
    return d;
}

std::vector<double> simulate_returns(const MarginalParams& params, const ArmaGarchOrders& orders,
                                     std::span<const double> uniforms) {
    validate(params, orders);
    const SkewT dist(params.skewt);
    double persistence = 0.0;
    for (const double a : params.alpha) persistence += a;
    for (const double b : params.beta) persistence += b;
    double ar_sum = 0.0;
    for (const double v : params.phi) ar_sum += v;
    const double uncond_var = params.alpha0 / (1.0 - persistence);
    const double uncond_mean = params.phi0 / (1.0 - ar_sum);

    const std::size_t T = uniforms.size();
    std::vector<double> r(T), eps(T), var(T);
    for (std::size_t t = 0; t < T; ++t) {
        double mu = params.phi0;
        for (int j = 1; j <= orders.m; ++j) mu += params.phi[j - 1] * (t >= std::size_t(j) ? r[t - j] : uncond_mean);
        for (int j = 1; j <= orders.n; ++j) {
            if (t >= std::size_t(j)) mu += params.gamma[j - 1] * eps[t - j];
        }
        double s2 = params.alpha0;
        for (int j = 1; j <= orders.p; ++j) {
            s2 += params.alpha[j - 1] * (t >= std::size_t(j) ? eps[t - j] * eps[t - j] : uncond_var);
        }
        for (int j = 1; j <= orders.q; ++j) s2 += params.beta[j - 1] * (t >= std::size_t(j) ? var[t - j] : uncond_var);
        var[t] = s2;
        eps[t] = std::sqrt(s2) * dist.quantile(uniforms[t]);
        r[t] = mu + eps[t];
    }
    return r;
}

}  // namespace ccovar
