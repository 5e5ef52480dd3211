#pragma once

namespace ccovar {

/// Shape of Hansen's skewed Student-t: nu > 2 degrees of freedom,
/// eta in (-1, 1) asymmetry. The distribution has mean 0 and variance 1.
struct SkewTParams {
    double nu = 8.0;
    double eta = 0.0;
};

struct SkewTConstants {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;
};

/// Throws Error(invalid_params) unless nu > 2 and |eta| < 1 (both finite).
void validate(const SkewTParams& params);

SkewTConstants skewt_constants(const SkewTParams& params);

/**
 * Precomputed skewed Student-t. Construction validates the parameters and
 * caches a, b, c and the branch point -a/b, so the per-observation cost in
 * likelihood loops is one log.
 */
class SkewT {
public:
    explicit SkewT(const SkewTParams& params);

    [[nodiscard]] const SkewTParams& params() const noexcept { return params_; }
    [[nodiscard]] const SkewTConstants& constants() const noexcept { return k_; }
    /// z where the density switches branch.
    [[nodiscard]] double kink() const noexcept { return -k_.a / k_.b; }

    [[nodiscard]] double pdf(double z) const;
    [[nodiscard]] double log_pdf(double z) const;
    [[nodiscard]] double cdf(double z) const;
    /// Throws Error(probability_out_of_range) unless 0 < p < 1.
    [[nodiscard]] double quantile(double p) const;

private:
    SkewTParams params_;
    SkewTConstants k_;
    double log_bc_ = 0.0;
    double half_nu_plus_one_ = 0.0;
    double inv_nu_minus_two_ = 0.0;
    double t_scale_ = 0.0;  // sqrt(nu / (nu - 2)), maps Hansen's y to a standard t variate
};

double skewt_pdf(double z, const SkewTParams& params);
double skewt_cdf(double z, const SkewTParams& params);
double skewt_quantile(double p, const SkewTParams& params);

// Standard Student-t with real nu > 0.
double student_t_pdf(double x, double nu);
double student_t_log_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
/// Safeguarded Newton solve on student_t_cdf; inverse of it to ~1e-12.
double student_t_quantile(double p, double nu);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

/// Upper tail Pr(X > x) of a chi-square with df degrees of freedom.
double chi_square_sf(double x, double df);

}  // namespace ccovar
