#include "ccovar/ccovar.h"

#include "ccovar/copula.hpp"
#include "ccovar/distributions.hpp"
#include "ccovar/error.hpp"
#include "ccovar/pipeline.hpp"
#include "ccovar/risk.hpp"
#include "ccovar/spillover.hpp"
#include "ccovar/version.hpp"
#include "serialize.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <span>
#include <string>

struct ccovar_config {
    ccovar::PipelineConfig config;
};

struct ccovar_copula {
    ccovar::CopulaModel model;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_last_row = 0;

ccovar_status fail(ccovar_status status, std::string message, std::size_t row = 0) {
    g_last_error = std::move(message);
    g_last_row = row;
    return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
ccovar_status guarded(F&& body) {
    g_last_error.clear();
    g_last_row = 0;
    try {
        body();
        return CCOVAR_OK;
    } catch (const ccovar::Error& e) {
        return fail(static_cast<ccovar_status>(e.code()), e.what(), e.row().value_or(0));
    } catch (const std::bad_alloc&) {
        return fail(CCOVAR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CCOVAR_INTERNAL, e.what());
    } catch (...) {
        return fail(CCOVAR_INTERNAL, "unknown exception");
    }
}

template <typename... Ptrs>
bool any_null(const Ptrs*... ptrs) {
    return ((ptrs == nullptr) || ...);
}

ccovar_status null_argument() { return fail(CCOVAR_NULL_ARGUMENT, "required pointer argument is NULL"); }

char* duplicate(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

char* join_paths(const std::vector<std::filesystem::path>& paths) {
    std::string text;
    for (const auto& p : paths) text += p.string() + "\n";
    return duplicate(text);
}

ccovar::KsDirection ks_direction(ccovar_ks_direction d) {
    if (d == CCOVAR_KS_GREATER) return ccovar::KsDirection::greater;
    if (d == CCOVAR_KS_LESS) return ccovar::KsDirection::less;
    throw ccovar::Error(ccovar::ErrorCode::invalid_params, "unknown K-S direction");
}

ccovar::CopulaModel model_from(const char* label, const double* params, std::size_t n) {
    using namespace ccovar;
    const auto candidate = parse_candidate(label);
    auto need = [&](std::size_t k) {
        if (n != k) {
            throw Error(ErrorCode::invalid_params, candidate.label() + " takes " + std::to_string(k) +
                                                       " parameters, got " + std::to_string(n));
        }
    };
    CopulaModel model;
    if (candidate.is_mixture()) {
        need(3);
        model = MixedCopulaSpec{CopulaSpec{candidate.first, params[0], 0.0},
                                CopulaSpec{*candidate.second, params[1], 0.0}, params[2]};
    } else if (candidate.first == CopulaFamily::student_t) {
        need(2);
        model = CopulaSpec{candidate.first, params[0], params[1]};
    } else {
        need(1);
        model = CopulaSpec{candidate.first, params[0], 0.0};
    }
    validate(model);
    return model;
}

}  // namespace

extern "C" {

const char* ccovar_version(void) { return ccovar::kVersion; }

const char* ccovar_status_name(int status) {
    if (status == CCOVAR_NULL_ARGUMENT) return "NullArgument";
    switch (static_cast<ccovar::ErrorCode>(status)) {
        case ccovar::ErrorCode::ok:
        case ccovar::ErrorCode::file_missing:
        case ccovar::ErrorCode::parse_error:
        case ccovar::ErrorCode::non_positive_price:
        case ccovar::ErrorCode::duplicate_date:
        case ccovar::ErrorCode::too_short:
        case ccovar::ErrorCode::empty_intersection:
        case ccovar::ErrorCode::empty_sub_period:
        case ccovar::ErrorCode::degenerate_series:
        case ccovar::ErrorCode::df_non_positive:
        case ccovar::ErrorCode::invalid_params:
        case ccovar::ErrorCode::probability_out_of_range:
        case ccovar::ErrorCode::argument_out_of_range:
        case ccovar::ErrorCode::optimizer_failed:
        case ccovar::ErrorCode::all_fits_failed:
        case ccovar::ErrorCode::root_not_bracketed:
        case ccovar::ErrorCode::length_mismatch:
        case ccovar::ErrorCode::manifest_incomplete:
        case ccovar::ErrorCode::config_error:
        case ccovar::ErrorCode::io_error:
        case ccovar::ErrorCode::internal:
            return ccovar::to_string(static_cast<ccovar::ErrorCode>(status));
    }
    return "unknown";
}

const char* ccovar_last_error(void) { return g_last_error.c_str(); }

size_t ccovar_last_error_row(void) { return g_last_row; }

void ccovar_string_free(char* text) { std::free(text); }

void ccovar_set_verbose(int verbose) { ccovar::set_verbose(verbose != 0); }

// ---- configuration and pipeline -------------------------------------------

ccovar_status ccovar_config_default(ccovar_config** out) {
    if (any_null(out)) return null_argument();
    return guarded([&] { *out = new ccovar_config{}; });
}

ccovar_status ccovar_config_load(const char* path, ccovar_config** out) {
    if (any_null(path, out)) return null_argument();
    return guarded([&] { *out = new ccovar_config{ccovar::load_config(path)}; });
}

ccovar_status ccovar_config_set(ccovar_config* config, const char* key, const char* value) {
    if (any_null(config, key, value)) return null_argument();
    return guarded([&] { ccovar::set_config_value(config->config, key, value); });
}

ccovar_status ccovar_config_apply_env(ccovar_config* config) {
    if (any_null(config)) return null_argument();
    return guarded([&] { ccovar::apply_env_overrides(config->config); });
}

ccovar_status ccovar_config_render(const ccovar_config* config, char** text) {
    if (any_null(config, text)) return null_argument();
    return guarded([&] { *text = duplicate(ccovar::render_config(config->config)); });
}

ccovar_status ccovar_config_get(const ccovar_config* config, const char* key, char** value) {
    if (any_null(config, key, value)) return null_argument();
    return guarded([&] {
        const std::string text = "\n" + ccovar::render_config(config->config);
        const std::string needle = "\n" + std::string(key) + " = ";
        const auto pos = text.find(needle);
        if (pos == std::string::npos) {
            throw ccovar::Error(ccovar::ErrorCode::config_error, "unknown config key '" + std::string(key) + "'");
        }
        const auto start = pos + needle.size();
        *value = duplicate(text.substr(start, text.find('\n', start) - start));
    });
}

void ccovar_config_free(ccovar_config* config) { delete config; }

ccovar_status ccovar_run_stage(const ccovar_config* config, const char* stage, char** paths) {
    if (any_null(config, stage, paths)) return null_argument();
    return guarded([&] { *paths = join_paths(ccovar::run_stage(config->config, stage)); });
}

ccovar_status ccovar_run_pipeline(const ccovar_config* config, char** manifest_path) {
    if (any_null(config, manifest_path)) return null_argument();
    return guarded([&] { *manifest_path = duplicate(ccovar::run_pipeline(config->config).string()); });
}

ccovar_status ccovar_simulate(const ccovar_config* config, char** paths) {
    if (any_null(config, paths)) return null_argument();
    return guarded([&] { *paths = join_paths(ccovar::simulate(config->config)); });
}

ccovar_status ccovar_report(const char* out_dir, char** text) {
    if (any_null(out_dir, text)) return null_argument();
    return guarded([&] { *text = duplicate(ccovar::report(out_dir)); });
}

// ---- skewed Student-t -------------------------------------------------------

ccovar_status ccovar_skewt_pdf(double z, double nu, double eta, double* out) {
    if (any_null(out)) return null_argument();
    return guarded([&] { *out = ccovar::skewt_pdf(z, {nu, eta}); });
}

ccovar_status ccovar_skewt_cdf(double z, double nu, double eta, double* out) {
    if (any_null(out)) return null_argument();
    return guarded([&] { *out = ccovar::skewt_cdf(z, {nu, eta}); });
}

ccovar_status ccovar_skewt_quantile(double p, double nu, double eta, double* out) {
    if (any_null(out)) return null_argument();
    return guarded([&] { *out = ccovar::skewt_quantile(p, {nu, eta}); });
}

// ---- copulas ----------------------------------------------------------------

ccovar_status ccovar_copula_create(const char* label, const double* params, size_t n_params, ccovar_copula** out) {
    if (any_null(label, out) || (n_params > 0 && params == nullptr)) return null_argument();
    return guarded([&] { *out = new ccovar_copula{model_from(label, params, n_params)}; });
}

ccovar_status ccovar_copula_fit(const char* label, const double* u1, const double* u2, size_t n, ccovar_copula** out,
                                double* loglik, double* aic) {
    if (any_null(label, u1, u2, out)) return null_argument();
    return guarded([&] {
        const auto candidate = ccovar::parse_candidate(label);
        const std::span<const double> a(u1, n), b(u2, n);
        const auto fit = candidate.is_mixture() ? ccovar::fit_mixed(a, b, candidate.first, *candidate.second)
                                                : ccovar::fit_single(a, b, candidate.first);
        *out = new ccovar_copula{fit.model};
        if (loglik) *loglik = fit.loglik;
        if (aic) *aic = fit.aic;
    });
}

ccovar_status ccovar_copula_select(const double* u1, const double* u2, size_t n, ccovar_copula** out) {
    if (any_null(u1, u2, out)) return null_argument();
    return guarded([&] {
        const auto selection = ccovar::select_copula(std::span<const double>(u1, n), std::span<const double>(u2, n));
        *out = new ccovar_copula{selection.best.model};
    });
}

void ccovar_copula_free(ccovar_copula* copula) { delete copula; }

ccovar_status ccovar_copula_label(const ccovar_copula* copula, char** label) {
    if (any_null(copula, label)) return null_argument();
    return guarded([&] { *label = duplicate(ccovar::label(copula->model)); });
}

ccovar_status ccovar_copula_params(const ccovar_copula* copula, double* params, size_t capacity, size_t* count) {
    if (any_null(copula, count)) return null_argument();
    return guarded([&] {
        const auto values = ccovar::serialize::parameter_values(copula->model);
        *count = values.size();
        if (capacity < values.size() || params == nullptr) {
            throw ccovar::Error(ccovar::ErrorCode::invalid_params,
                                "parameter buffer needs room for " + std::to_string(values.size()) + " values");
        }
        std::copy(values.begin(), values.end(), params);
    });
}

ccovar_status ccovar_copula_cdf(const ccovar_copula* copula, double u1, double u2, double* out) {
    if (any_null(copula, out)) return null_argument();
    return guarded([&] { *out = ccovar::copula_cdf(copula->model, u1, u2); });
}

ccovar_status ccovar_copula_pdf(const ccovar_copula* copula, double u1, double u2, double* out) {
    if (any_null(copula, out)) return null_argument();
    return guarded([&] { *out = ccovar::copula_pdf(copula->model, u1, u2); });
}

ccovar_status ccovar_copula_hfunc(const ccovar_copula* copula, double u1, double u2, double* out) {
    if (any_null(copula, out)) return null_argument();
    return guarded([&] { *out = ccovar::copula_hfunc(copula->model, u1, u2); });
}

ccovar_status ccovar_copula_tail(const ccovar_copula* copula, double* lower, double* upper) {
    if (any_null(copula, lower, upper)) return null_argument();
    return guarded([&] {
        const auto tail = ccovar::tail_dependence(copula->model);
        *lower = tail.lower;
        *upper = tail.upper;
    });
}

ccovar_status ccovar_copula_kendall_tau(const ccovar_copula* copula, double* out) {
    if (any_null(copula, out)) return null_argument();
    return guarded([&] { *out = ccovar::kendall_tau(copula->model); });
}

ccovar_status ccovar_copula_sample(const ccovar_copula* copula, size_t n, uint64_t seed, double* u1, double* u2) {
    if (any_null(copula) || (n > 0 && any_null(u1, u2))) return null_argument();
    return guarded([&] {
        const auto pairs = ccovar::sample(copula->model, n, seed);
        std::copy(pairs.u1.begin(), pairs.u1.end(), u1);
        std::copy(pairs.u2.begin(), pairs.u2.end(), u2);
    });
}

// ---- risk -------------------------------------------------------------------

ccovar_status ccovar_covar_level(const ccovar_copula* copula, double alpha, ccovar_direction direction, double* out) {
    if (any_null(copula, out)) return null_argument();
    return guarded([&] {
        ccovar::RiskConfig config;
        ccovar::Direction d = ccovar::Direction::down;
        if (direction == CCOVAR_DOWN) {
            config.alpha_down = alpha;
        } else if (direction == CCOVAR_UP) {
            config.alpha_up = alpha;
            d = ccovar::Direction::up;
        } else {
            throw ccovar::Error(ccovar::ErrorCode::invalid_params, "unknown direction");
        }
        ccovar::validate(config);
        *out = ccovar::covar_level(copula->model, config, d);
    });
}

ccovar_status ccovar_median_state_level(const ccovar_copula* copula, double alpha, double* out) {
    if (any_null(copula, out)) return null_argument();
    return guarded([&] {
        ccovar::RiskConfig config;
        ccovar::Direction d = ccovar::Direction::down;
        if (alpha < 0.5) {
            config.alpha_down = alpha;
        } else {
            config.alpha_up = alpha;
            d = ccovar::Direction::up;
        }
        ccovar::validate(config);
        *out = ccovar::median_state_level(copula->model, config, d);
    });
}

// ---- spillover tests --------------------------------------------------------

ccovar_status ccovar_ks_statistic(const double* g, size_t m, const double* h, size_t n, ccovar_ks_direction direction,
                                  double* out) {
    if (any_null(g, h, out)) return null_argument();
    return guarded([&] {
        *out = ccovar::ks_one_sided(std::span<const double>(g, m), std::span<const double>(h, n),
                                    ks_direction(direction));
    });
}

ccovar_status ccovar_ks_pvalue(const double* g, size_t m, const double* h, size_t n, ccovar_ks_direction direction,
                               int n_bootstrap, uint64_t seed, double* out) {
    if (any_null(g, h, out)) return null_argument();
    return guarded([&] {
        *out = ccovar::bootstrap_pvalue(std::span<const double>(g, m), std::span<const double>(h, n),
                                        ks_direction(direction), n_bootstrap, seed);
    });
}

}  // extern "C"
