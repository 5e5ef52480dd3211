// Acceptance run: evaluates each numbered criterion and prints one PASS/FAIL
// line per criterion. Usage: acceptance <path-to-ccovar-cli>
#include "ccovar/copula.hpp"
#include "ccovar/distributions.hpp"
#include "ccovar/error.hpp"
#include "ccovar/marginal.hpp"
#include "ccovar/pipeline.hpp"
#include "ccovar/risk.hpp"
#include "ccovar/spillover.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace ccovar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;
};

Outcome timed(double budget, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.budget = budget;
    return o;
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> u(n);
    for (auto& v : u) {
        do v = d(rng);
        while (v <= 0.0);
    }
    return u;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

std::vector<CopulaSpec> representative_settings() {
    return {CopulaSpec::normal(-0.4),      CopulaSpec::normal(0.3),         CopulaSpec::normal(0.85),
            CopulaSpec::student_t(-0.3, 5), CopulaSpec::student_t(0.5, 3),  CopulaSpec::student_t(0.85, 12),
            CopulaSpec::clayton(0.3),       CopulaSpec::clayton(2.0),       CopulaSpec::clayton(6.0),
            CopulaSpec::surv_clayton(0.3),  CopulaSpec::surv_clayton(2.0),  CopulaSpec::surv_clayton(6.0),
            CopulaSpec::gumbel(1.1),        CopulaSpec::gumbel(2.0),        CopulaSpec::gumbel(4.0),
            CopulaSpec::surv_gumbel(1.1),   CopulaSpec::surv_gumbel(2.0),   CopulaSpec::surv_gumbel(4.0)};
}

// Un-rotated partner: C_surv(u, v) = u + v - 1 + C(1 - u, 1 - v). Elliptical
// copulas are radially symmetric and are their own partner.
CopulaSpec rotation_partner(const CopulaSpec& s) {
    switch (s.family) {
        case CopulaFamily::surv_clayton: return CopulaSpec::clayton(s.theta);
        case CopulaFamily::clayton: return CopulaSpec::surv_clayton(s.theta);
        case CopulaFamily::surv_gumbel: return CopulaSpec::gumbel(s.theta);
        case CopulaFamily::gumbel: return CopulaSpec::surv_gumbel(s.theta);
        default: return s;
    }
}

// ---------------------------------------------------------------------------

Outcome copula_identities() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> family(0, 5);
    std::uniform_real_distribution<double> unit(1e-3, 1 - 1e-3), rho(-0.95, 0.95), nu(2.5, 30.0),
        clayton(0.05, 10.0), gumbel(1.05, 8.0);
    const double top = 1.0 - 1e-12;
    double worst_exact = 0.0, worst_limit = 0.0;
    int failures = 0;
    for (int i = 0; i < 10000; ++i) {
        CopulaSpec s;
        switch (family(rng)) {
            case 0: s = CopulaSpec::normal(rho(rng)); break;
            case 1: s = CopulaSpec::student_t(rho(rng), nu(rng)); break;
            case 2: s = CopulaSpec::clayton(clayton(rng)); break;
            case 3: s = CopulaSpec::surv_clayton(clayton(rng)); break;
            case 4: s = CopulaSpec::gumbel(gumbel(rng)); break;
            default: s = CopulaSpec::surv_gumbel(gumbel(rng)); break;
        }
        const double u = unit(rng), v = unit(rng);
        const double c = copula_cdf(s, u, v);
        const double exact[] = {
            copula_cdf(s, u, top) - u,
            copula_cdf(s, top, v) - v,
            std::max(0.0, std::max(u + v - 1.0, 0.0) - c),  // lower Frechet bound violation
            std::max(0.0, c - std::min(u, v)),              // upper Frechet bound violation
            c - (u + v - 1.0 + copula_cdf(rotation_partner(s), 1 - u, 1 - v)),
            copula_cdf(CopulaSpec::normal(0.0), u, v) - u * v,
        };
        const double limit[] = {
            copula_cdf(CopulaSpec::gumbel(1.0 + 1e-6), u, v) - u * v,
            copula_cdf(CopulaSpec::clayton(1e-6), u, v) - u * v,
        };
        bool ok = true;
        for (double e : exact) {
            worst_exact = std::max(worst_exact, std::abs(e));
            ok = ok && std::abs(e) <= 1e-8;
        }
        for (double e : limit) {
            worst_limit = std::max(worst_limit, std::abs(e));
            ok = ok && std::abs(e) <= 1e-4;
        }
        if (!ok) ++failures;
    }
    return {failures == 0,
            fmt("10000 cases, %d failing; max exact error %.2e, max limit error %.2e", failures, worst_exact,
                worst_limit)};
}

Outcome density_normalisation() {
    // Nested adaptive Gauss-Kronrod; the inner integral is split at the
    // conditional median u = h^-1(1/2 | v), where the density ridge lies.
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
    double worst = 0.0;
    std::string worst_name;
    for (const auto& s : representative_settings()) {
        auto inner = [&](double v) {
            auto f = [&](double u) { return copula_pdf(s, u, v); };
            const double ridge = copula_hfunc_inverse(CopulaModel(s), 0.5, v);
            return Integrator::integrate(f, 0.0, ridge, 15, 1e-9) + Integrator::integrate(f, ridge, 1.0, 15, 1e-9);
        };
        const double mass = Integrator::integrate(inner, 0.0, 1.0, 15, 1e-9);
        if (std::abs(mass - 1.0) >= worst) {
            worst = std::abs(mass - 1.0);
            worst_name = label(CopulaModel(s)) + fmt("(%g)", s.theta);
        }
    }
    return {worst <= 1e-6, fmt("18 settings, max |mass - 1| = %.2e at %s", worst, worst_name.c_str())};
}

Outcome hfunction_derivative() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> d(0.02, 0.98);
    const double step = 1e-6;
    const auto settings = representative_settings();
    double worst = 0.0;
    int points = 0;
    for (std::size_t f = 0; f < 6; ++f) {
        for (int i = 0; i < 100; ++i, ++points) {
            const auto& s = settings[3 * f + std::size_t(i % 3)];
            const double u1 = d(rng), u2 = d(rng);
            const double fd = (copula_cdf(s, u1, u2 + step) - copula_cdf(s, u1, u2 - step)) / (2 * step);
            worst = std::max(worst, std::abs(copula_hfunc(s, u1, u2) - fd));
        }
    }
    return {worst <= 1e-5, fmt("%d points over 6 families, max |h - FD| = %.2e", points, worst)};
}

Outcome tail_dependence_values() {
    const MixedCopulaSpec mix{CopulaSpec::gumbel(3.5740), CopulaSpec::surv_gumbel(3.2474), 0.5136};
    const auto t = tail_dependence(CopulaModel(mix));
    const auto c = tail_dependence(CopulaModel(CopulaSpec::clayton(1.0)));
    const bool ok = std::abs(t.upper - 0.4037) <= 5e-4 && std::abs(t.lower - 0.3707) <= 5e-4 && c.lower == 0.5;
    return {ok, fmt("mixture (upper, lower) = (%.5f, %.5f); Clayton(1) lower = %.17g", t.upper, t.lower, c.lower)};
}

Outcome skewt_checks() {
    const double q = skewt_quantile(0.05, {5.0, 0.0});
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double inf = std::numeric_limits<double>::infinity();
    double worst_moment = 0.0;
    for (double nu : {3.0, 5.0, 10.0, 30.0}) {
        for (double eta : {-0.5, 0.0, 0.5}) {
            const SkewTParams p{nu, eta};
            const double mean = integrator.integrate([&](double z) { return z * skewt_pdf(z, p); }, -inf, inf);
            const double second =
                integrator.integrate([&](double z) { return z * z * skewt_pdf(z, p); }, -inf, inf);
            worst_moment = std::max({worst_moment, std::abs(mean), std::abs(second - mean * mean - 1.0)});
        }
    }
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> nu_d(2.1, 40.0), eta_d(-0.95, 0.95), p_d(1e-6, 1 - 1e-6);
    double worst_round_trip = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const SkewTParams params{nu_d(rng), eta_d(rng)};
        const double p = p_d(rng);
        worst_round_trip = std::max(worst_round_trip, std::abs(skewt_cdf(skewt_quantile(p, params), params) - p));
    }
    const bool ok = std::abs(q + 1.5608) <= 1e-3 && worst_moment <= 1e-6 && worst_round_trip <= 1e-8;
    return {ok, fmt("q(0.05; nu=5) = %.5f; max moment error %.2e; max round-trip error %.2e", q, worst_moment,
                    worst_round_trip)};
}

MarginalParams recovery_truth() {
    MarginalParams p;
    p.phi0 = 0.02;
    p.phi = {0.5};
    p.alpha0 = 0.05;
    p.alpha = {0.1};
    p.beta = {0.85};
    p.skewt = {6.0, 0.2};
    return p;
}

Outcome marginal_recovery() {
    const ArmaGarchOrders orders{1, 0, 1, 1};
    const auto truth = recovery_truth().flatten();
    const auto names = MarginalParams::names(orders);
    std::vector<int> covered(truth.size(), 0);
    const int seeds = 50;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto r = simulate_returns(recovery_truth(), orders, uniforms(2000, 6000 + std::uint64_t(seed)));
        const auto f = fit(std::span<const double>(r), orders);
        if (!f.has_std_errors()) continue;
        const auto est = f.params.flatten();
        for (std::size_t i = 0; i < est.size(); ++i) {
            if (std::abs(est[i] - truth[i]) <= 3.0 * f.std_errors[i]) ++covered[i];
        }
    }
    bool ok = true;
    std::string detail = "coverage over 50 seeds:";
    for (std::size_t i = 0; i < covered.size(); ++i) {
        ok = ok && covered[i] >= 45;
        detail += fmt(" %s %d%%", names[i].c_str(), 2 * covered[i]);
    }
    return {ok, detail};
}

Outcome copula_recovery() {
    int clayton_hits = 0;
    for (int seed = 0; seed < 50; ++seed) {
        const auto p = sample(CopulaSpec::clayton(2.0), 2000, 7000 + std::uint64_t(seed));
        const auto f = fit_single(p.u1, p.u2, CopulaFamily::clayton);
        if (std::abs(std::get<CopulaSpec>(f.model).theta - 2.0) <= 0.2) ++clayton_hits;
    }
    int student_hits = 0;
    std::map<std::string, int> picks;
    for (int seed = 0; seed < 30; ++seed) {
        const auto p = sample(CopulaSpec::student_t(0.85, 4.0), 2000, 8000 + std::uint64_t(seed));
        const auto selection = select_copula(p.u1, p.u2, default_candidates());
        const auto chosen = label(selection.best.model);
        ++picks[chosen];
        if (chosen == "StudentT") ++student_hits;
    }
    std::string others;
    for (const auto& [name, n] : picks) others += fmt(" %s=%d", name.c_str(), n);
    return {clayton_hits >= 45 && student_hits >= 21,
            fmt("Clayton within 0.2 in %d/50; StudentT selected in %d/30 (", clayton_hits, student_hits) + others.substr(1) +
                ")"};
}

// Marginal paths from the true recursion on simulated data, standing in for fitted legs.
MarginalFit leg(std::uint64_t seed, SkewTParams skewt) {
    auto params = recovery_truth();
    params.skewt = skewt;
    const ArmaGarchOrders orders{1, 0, 1, 1};
    const auto r = simulate_returns(params, orders, uniforms(1000, seed));
    const auto f = filter(params, orders, r);
    MarginalFit m;
    m.orders = orders;
    m.params = params;
    m.returns = r;
    m.mu = f.mu;
    m.sigma = f.sigma;
    m.z = f.z;
    Date d = parse_date("2020-01-01");
    for (std::size_t t = 0; t < r.size(); ++t) {
        m.dates.push_back(d);
        d = std::chrono::sys_days(d) + std::chrono::days(1);
    }
    return m;
}

CopulaFit as_fit(const CopulaModel& model) {
    CopulaFit f;
    f.model = model;
    return f;
}

Outcome covar_checks() {
    const RiskConfig config;
    const auto futures = leg(11, {6.0, 0.1}), spot = leg(12, {7.0, -0.1});
    double worst_indep = 0.0;
    const CopulaModel independence = CopulaSpec::normal(0.0);
    for (Direction d : {Direction::down, Direction::up}) {
        const auto covar = covar_series(as_fit(independence), futures, spot, config, d);
        const auto var = var_series(spot, d == Direction::down ? config.alpha_down : config.alpha_up);
        for (std::size_t t = 0; t < covar.size(); ++t) worst_indep = std::max(worst_indep, std::abs(covar[t] - var[t]));
    }
    const double v = covar_level(CopulaSpec::clayton(2.0), config, Direction::down);
    const double clayton_error = std::abs(v - 1.0 / std::sqrt(159601.0));

    const CopulaModel models[] = {CopulaSpec::normal(0.6),        CopulaSpec::normal(-0.5),
                                  CopulaSpec::student_t(0.85, 4), CopulaSpec::clayton(2.0),
                                  CopulaSpec::surv_clayton(0.7),  CopulaSpec::gumbel(1.8),
                                  CopulaSpec::surv_gumbel(3.0),
                                  MixedCopulaSpec{CopulaSpec::gumbel(3.5740), CopulaSpec::surv_gumbel(3.2474), 0.5136},
                                  MixedCopulaSpec{CopulaSpec::surv_clayton(1.5), CopulaSpec::clayton(2.5), 0.4}};
    double worst_residual = 0.0;
    for (const RiskConfig c : {RiskConfig{}, RiskConfig{0.01, 0.99, 0.5}, RiskConfig{0.1, 0.9, 0.5}}) {
        for (const auto& m : models) {
            for (Direction d : {Direction::down, Direction::up}) {
                worst_residual = std::max(worst_residual, std::abs(covar_residual(m, c, d, covar_level(m, c, d))));
            }
        }
    }
    bool monotone = true;
    std::vector<double> prev_down, prev_up;
    for (double rho : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        const auto down = covar_series(as_fit(CopulaSpec::normal(rho)), futures, spot, config, Direction::down);
        const auto up = covar_series(as_fit(CopulaSpec::normal(rho)), futures, spot, config, Direction::up);
        for (std::size_t t = 0; t < prev_down.size(); ++t) {
            monotone = monotone && down[t] < prev_down[t] && up[t] > prev_up[t];
        }
        prev_down = down;
        prev_up = up;
    }
    const bool ok = worst_indep <= 1e-8 && clayton_error <= 1e-9 && worst_residual <= 1e-10 && monotone;
    return {ok, fmt("independence max |CoVaR - VaR| %.2e; Clayton level error %.2e; max residual %.2e; "
                    "normal monotone on 5-point grid: %s",
                    worst_indep, clayton_error, worst_residual, monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct PipelineRuns {
    fs::path first, second;
    double seconds_first = 0.0, seconds_second = 0.0;
    bool ok = false;
    std::string error;
};

double run_cli(const std::string& cli, const fs::path& config, const fs::path& out, std::string& error) {
    const std::string cmd = "\"" + cli + "\" --config \"" + config.string() + "\" --out \"" + out.string() +
                            "\" --set cache=false run > \"" + out.string() + ".log\" 2>&1";
    const auto start = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.c_str());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rc != 0) error = "run exited with status " + std::to_string(rc) + ": " + read_file(out.string() + ".log");
    return seconds;
}

PipelineRuns pipeline_runs(const std::string& cli, const fs::path& work) {
    PipelineRuns r;
    PipelineConfig sim;
    sim.out = work / "data";
    simulate(sim);  // default: T = 2000 returns, half in each period
    r.first = work / "run-a";
    r.second = work / "run-b";
    r.seconds_first = run_cli(cli, sim.out / "pipeline.conf", r.first, r.error);
    if (r.error.empty()) r.seconds_second = run_cli(cli, sim.out / "pipeline.conf", r.second, r.error);
    r.ok = r.error.empty();
    return r;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

Outcome delta_covar_checks(const PipelineRuns& runs) {
    const RiskConfig config;
    const auto futures = leg(21, {6.0, 0.1}), spot = leg(22, {7.0, -0.1});
    const auto r = compute_risk(as_fit(CopulaSpec::normal(0.0)), futures, spot, config, Period::pre);
    double worst = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        worst = std::max({worst, std::abs(r.delta_covar_down[t]), std::abs(r.delta_covar_up[t])});
    }
    if (!runs.ok) return {false, fmt("independence max |dCoVaR| %.2e; pipeline failed: ", worst) + runs.error};
    const auto rows = read_csv(runs.first / "figure2_risk.csv");
    const auto& header = rows.at(0);
    const auto col = [&](const std::string& name) {
        return std::size_t(std::find(header.begin(), header.end(), name) - header.begin());
    };
    const std::size_t down = col("delta_covar_down"), up = col("delta_covar_up");
    std::size_t bad = 0;
    double max_down = -std::numeric_limits<double>::infinity(), min_up = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double d = std::stod(rows[i].at(down)), u = std::stod(rows[i].at(up));
        max_down = std::max(max_down, d);
        min_up = std::min(min_up, u);
        if (!(d < 0.0 && u > 0.0)) ++bad;
    }
    return {worst <= 1e-8 && bad == 0 && rows.size() > 1,
            fmt("independence max |dCoVaR| %.2e; pipeline %zu dates, max downside %.4f, min upside %.4f, "
                "%zu sign violations",
                worst, rows.size() - 1, max_down, min_up, bad)};
}

double stage_seconds(const fs::path& timings, const std::string& stage) {
    std::istringstream in(read_file(timings));
    std::string name;
    double seconds = 0.0;
    while (in >> name >> seconds) {
        if (name == stage) return seconds;
    }
    return 0.0;
}

Outcome ks_checks(const PipelineRuns& runs, double& stage_time) {
    const std::vector<double> same{0.3, -1.0, 2.5, 0.3}, g{1, 2}, h{3, 4};
    const bool hand = ks_one_sided(same, same, KsDirection::greater) == 0.0 &&
                      ks_one_sided(same, same, KsDirection::less) == 0.0 &&
                      ks_one_sided(g, h, KsDirection::greater) == 1.0;
    int rejections = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto a = normals(200, 10000 + seed), b = normals(150, 20000 + seed);
        if (bootstrap_pvalue(a, b, KsDirection::greater, 1000, seed) < 0.05) ++rejections;
    }
    const double size = rejections / 100.0;
    std::string detail = fmt("hand values %s; null size %.2f over 100 seeds (B=1000)", hand ? "ok" : "wrong", size);
    if (!runs.ok) return {false, detail + "; pipeline failed: " + runs.error};
    stage_time = stage_seconds(runs.first / "timings.txt", "test-spillover");
    const auto table = nlohmann::json::parse(read_file(runs.first / "table6_spillover.json"));
    int ab = 0, ab_significant = 0;
    double worst_p = 0.0;
    for (const auto& t : table) {
        const auto panel = t.at("panel").get<std::string>();
        if (panel != "A" && panel != "B") continue;
        ++ab;
        const double p = t.at("p_value").get<double>();
        worst_p = std::max(worst_p, p);
        if (p < 0.01 && t.at("n_bootstrap").get<int>() == 1000) ++ab_significant;
    }
    detail += fmt("; pipeline Panel A/B %d/%d significant at 1%% (max p %.4f)", ab_significant, ab, worst_p);
    return {hand && size >= 0.02 && size <= 0.09 && ab > 0 && ab_significant == ab, detail};
}

std::map<std::string, std::string> output_files(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "timings.txt") continue;
        files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
    }
    return files;
}

Outcome determinism(const PipelineRuns& runs) {
    if (!runs.ok) return {false, "pipeline failed: " + runs.error};
    const auto a = output_files(runs.first), b = output_files(runs.second);
    std::size_t differing = 0;
    for (const auto& [name, bytes] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes) ++differing;
    }
    differing += b.size() > a.size() ? b.size() - a.size() : 0;
    const bool identical = differing == 0 && !a.empty();
    const bool fast = runs.seconds_first < 600.0 && runs.seconds_second < 600.0;
    return {identical && fast, fmt("%zu files compared, %zu differ; run times %.1f s and %.1f s (limit 600 s each)",
                                   a.size(), differing, runs.seconds_first, runs.seconds_second)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <ccovar-cli> [criterion ...]\n", argv[0]);
        return 2;
    }
    const std::string cli = fs::absolute(argv[1]).lexically_normal().string();
    std::vector<bool> wanted(12, argc == 2);
    for (int i = 2; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k >= 1 && k <= 11) wanted[std::size_t(k)] = true;
    }
    const fs::path work = fs::temp_directory_path() / ("ccovar-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);

    // Criteria 9-11 share one pair of full pipeline runs.
    PipelineRuns runs;
    bool runs_done = false;
    auto shared_runs = [&]() -> const PipelineRuns& {
        if (!runs_done) {
            runs_done = true;
            try {
                runs = pipeline_runs(cli, work);
            } catch (const std::exception& e) {
                runs.error = e.what();
            }
        }
        return runs;
    };
    double spillover_stage = 0.0;

    struct Criterion {
        const char* name;
        double budget;
        std::function<Outcome()> body;
    };
    const std::vector<Criterion> criteria = {
        {"copula identities", 10, copula_identities},
        {"density normalisation", 60, density_normalisation},
        {"h-function vs finite difference", 10, hfunction_derivative},
        {"tail dependence values", 0, tail_dependence_values},
        {"skewed-t quantiles, moments, round trip", 0, skewt_checks},
        {"marginal parameter recovery", 300, marginal_recovery},
        {"copula recovery and selection", 300, copula_recovery},
        {"CoVaR correctness", 0, covar_checks},
        {"delta-CoVaR signs", 0, [&] { return delta_covar_checks(shared_runs()); }},
        {"K-S suite", 180, [&] { return ks_checks(shared_runs(), spillover_stage); }},
        {"end-to-end determinism and runtime", 0, [&] { return determinism(shared_runs()); }},
    };

    std::vector<std::pair<std::size_t, Outcome>> results;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!wanted[i + 1]) continue;
        if (i + 1 >= 9) shared_runs();  // keep the pipeline runs out of the per-criterion timings
        spillover_stage = 0.0;
        auto o = timed(criteria[i].budget, criteria[i].body);
        o.seconds += spillover_stage;
        results.emplace_back(i, o);
    }

    // The lines also go to acceptance_report.txt in the working directory,
    // since ctest only shows the output of failing tests.
    int failed = 0;
    std::ofstream report("acceptance_report.txt");
    for (const auto& [i, o] : results) {
        const bool in_time = o.budget <= 0.0 || o.seconds < o.budget;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::string timing = fmt("%.1f s", o.seconds);
        if (o.budget > 0.0) timing += fmt(", limit %.0f s", o.budget);
        const auto line = fmt("criterion %zu: %s - %s: ", i + 1, pass ? "PASS" : "FAIL", criteria[i].name) +
                          o.detail + " [" + timing + "]";
        std::printf("%s\n", line.c_str());
        report << line << '\n';
    }
    std::fflush(stdout);
    fs::remove_all(work);
    return failed == 0 ? 0 : 1;
}
