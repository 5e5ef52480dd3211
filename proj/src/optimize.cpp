#include "ccovar/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ccovar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

OptimizeResult nelder_mead(const Objective& objective, std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    OptimizeResult result;
    result.x = start;
    result.value = kInf;
    if (options.max_evaluations <= 0 || n == 0) return result;

    int evaluations = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : kInf;
    };

    const double dim = double(n);
    const double reflect = 1.0;
    const double expand = 1.0 + 2.0 / dim;
    const double contract = 0.75 - 1.0 / (2.0 * dim);
    const double shrink = 1.0 - 1.0 / dim;

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    values[0] = eval(start);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = start[i] != 0.0 ? options.initial_step * std::max(std::abs(start[i]), 1.0)
                                            : options.initial_step;
        simplex[i + 1][i] += step;
        values[i + 1] = eval(simplex[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    bool converged = false;

    while (evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        if (std::isfinite(values[worst])) {
            const double spread = values[worst] - values[best];
            double diameter = 0.0;
            for (std::size_t v = 0; v <= n; ++v) {
                for (std::size_t i = 0; i < n; ++i) {
                    diameter = std::max(diameter, std::abs(simplex[v][i] - simplex[best][i]));
                }
            }
            if (spread <= options.f_tolerance * (1.0 + std::abs(values[best])) && diameter <= options.x_tolerance) {
                converged = true;
                break;
            }
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v <= n; ++v) {
            if (v == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i];
        }
        for (double& c : centroid) c /= dim;

        for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + reflect * (centroid[i] - simplex[worst][i]);
        const double f_reflect = eval(trial);

        if (f_reflect < values[best]) {
            for (std::size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + expand * (trial[i] - centroid[i]);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }

        const bool outside = f_reflect < values[worst];
        for (std::size_t i = 0; i < n; ++i) {
            trial2[i] = outside ? centroid[i] + contract * (trial[i] - centroid[i])
                                : centroid[i] - contract * (centroid[i] - simplex[worst][i]);
        }
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }

        for (std::size_t v = 0; v <= n; ++v) {
            if (v == best) continue;
            for (std::size_t i = 0; i < n; ++i) {
                simplex[v][i] = simplex[best][i] + shrink * (simplex[v][i] - simplex[best][i]);
            }
            values[v] = eval(simplex[v]);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    result.x = simplex[std::size_t(best_it - values.begin())];
    result.value = *best_it;
    result.evaluations = evaluations;
    result.converged = converged && std::isfinite(result.value);
    return result;
}

Eigen::MatrixXd numeric_hessian(const Objective& objective, std::span<const double> x, double relative_step) {
    const std::size_t n = x.size();
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = relative_step * std::max(std::abs(x[i]), 1e-2);

    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        point[i] += di;
        point[j] += dj;
        const double v = objective(point);
        point[i] -= di;
        point[j] -= dj;
        return v;
    };

    Eigen::MatrixXd hess(n, n);
    const double f0 = objective(point);
    for (std::size_t i = 0; i < n; ++i) {
        const double fp = at(i, h[i], i, 0.0);
        const double fm = at(i, -h[i], i, 0.0);
        hess(Eigen::Index(i), Eigen::Index(i)) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            const double fpp = at(i, h[i], j, h[j]);
            const double fpm = at(i, h[i], j, -h[j]);
            const double fmp = at(i, -h[i], j, h[j]);
            const double fmm = at(i, -h[i], j, -h[j]);
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess(Eigen::Index(i), Eigen::Index(j)) = v;
            hess(Eigen::Index(j), Eigen::Index(i)) = v;
        }
    }
    return hess;
}

std::optional<std::vector<double>> standard_errors_from_hessian(const Eigen::MatrixXd& hessian) {
    if (hessian.size() == 0 || !hessian.allFinite()) return std::nullopt;
    const Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(hessian.rows(), hessian.cols()));
    std::vector<double> se(std::size_t(hessian.rows()));
    for (Eigen::Index i = 0; i < hessian.rows(); ++i) {
        const double var = cov(i, i);
        if (!(std::isfinite(var) && var > 0.0)) return std::nullopt;
        se[std::size_t(i)] = std::sqrt(var);
    }
    return se;
}

double logistic(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace ccovar
