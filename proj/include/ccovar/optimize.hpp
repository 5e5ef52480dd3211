#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ccovar {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    int max_evaluations = 20000;
    /// Stop when the simplex values agree to f_tolerance * (1 + |f_best|) ...
    double f_tolerance = 1e-10;
    /// ... and every vertex is within x_tolerance of the best one (infinity norm).
    double x_tolerance = 1e-7;
    double initial_step = 0.25;
};

struct OptimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/**
 * Derivative-free simplex minimization with the dimension-adaptive
 * coefficients of Gao and Han (2012). Non-finite objective values are treated
 * as +infinity, which lets callers signal infeasible points by returning NaN.
 */
OptimizeResult nelder_mead(const Objective& objective, std::vector<double> start,
                           const NelderMeadOptions& options = {});

/// Central finite-difference Hessian with per-coordinate step relative_step * max(|x_i|, 1e-2).
Eigen::MatrixXd numeric_hessian(const Objective& objective, std::span<const double> x, double relative_step = 1e-4);

/// Square roots of the diagonal of the inverse Hessian; nullopt if the Hessian
/// is not positive definite or any variance is non-finite.
std::optional<std::vector<double>> standard_errors_from_hessian(const Eigen::MatrixXd& hessian);

double logistic(double s);
double logit(double p);

}  // namespace ccovar
