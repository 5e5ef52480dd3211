#include "ccovar/pipeline.hpp"

#include "ccovar/error.hpp"
#include "ccovar/spillover.hpp"
#include "ccovar/version.hpp"
#include "csv.hpp"
#include "serialize.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace ccovar {

namespace fs = std::filesystem;
using serialize::Json;

namespace {

bool g_verbose = false;

void log(const std::string& message) {
    if (g_verbose) std::fprintf(stderr, "[ccovar] %s\n", message.c_str());
}

// ---------------------------------------------------------------------------
// Small parsing helpers for the config file.

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
    throw Error(ErrorCode::config_error,
                "config key '" + std::string(key) + "': expected " + expected + ", got '" + std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view value) {
    value = trim(value);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) bad_value(key, value, "a number");
    return out;
}

template <typename Int>
Int to_integer(std::string_view key, std::string_view value) {
    value = trim(value);
    Int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
    return out;
}

bool to_bool(std::string_view key, std::string_view value) {
    value = trim(value);
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value, "true or false");
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    if (trim(text).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(trim(text.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<double> to_doubles(std::string_view key, std::string_view value) {
    std::vector<double> out;
    for (auto item : split(value, ',')) out.push_back(to_double(key, item));
    return out;
}

fs::path resolve(const fs::path& base_dir, std::string_view value) {
    fs::path p{std::string(trim(value))};
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p.lexically_normal();
}

CopulaModel model_from(const CopulaCandidate& c, const std::vector<double>& params) {
    auto need = [&](std::size_t n) {
        if (params.size() != n) {
            throw Error(ErrorCode::config_error, "sim.copula_params for " + c.label() + " needs " + std::to_string(n) +
                                                     " values, got " + std::to_string(params.size()));
        }
    };
    if (c.is_mixture()) {
        need(3);
        return MixedCopulaSpec{CopulaSpec{c.first, params[0], 0.0}, CopulaSpec{*c.second, params[1], 0.0}, params[2]};
    }
    if (c.first == CopulaFamily::student_t) {
        need(2);
        return CopulaSpec{c.first, params[0], params[1]};
    }
    need(1);
    return CopulaSpec{c.first, params[0], 0.0};
}

CopulaCandidate candidate_of(const CopulaModel& model) {
    if (const auto* s = std::get_if<CopulaSpec>(&model)) return CopulaCandidate::single(s->family);
    const auto& m = std::get<MixedCopulaSpec>(model);
    return CopulaCandidate::mixed(m.upper.family, m.lower.family);
}

void set_leg_param(SimulatedLeg& leg, std::string_view key, std::string_view field, std::string_view value) {
    if (field == "orders") {
        const auto v = to_doubles(key, value);
        if (v.size() != 4) bad_value(key, value, "four orders m, n, p, q");
        ArmaGarchOrders o{int(v[0]), int(v[1]), int(v[2]), int(v[3])};
        leg.orders = o;
        leg.params.phi.resize(std::size_t(o.m), 0.0);
        leg.params.gamma.resize(std::size_t(o.n), 0.0);
        leg.params.alpha.resize(std::size_t(o.p), 0.0);
        leg.params.beta.resize(std::size_t(o.q), 0.0);
    } else if (field == "phi0") {
        leg.params.phi0 = to_double(key, value);
    } else if (field == "phi") {
        leg.params.phi = to_doubles(key, value);
    } else if (field == "gamma") {
        leg.params.gamma = to_doubles(key, value);
    } else if (field == "alpha0") {
        leg.params.alpha0 = to_double(key, value);
    } else if (field == "alpha") {
        leg.params.alpha = to_doubles(key, value);
    } else if (field == "beta") {
        leg.params.beta = to_doubles(key, value);
    } else if (field == "nu") {
        leg.params.skewt.nu = to_double(key, value);
    } else if (field == "eta") {
        leg.params.skewt.eta = to_double(key, value);
    } else {
        throw Error(ErrorCode::config_error, "unknown config key '" + std::string(key) + "'");
    }
}

// ---------------------------------------------------------------------------
// Files and hashing.

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::file_missing, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Table renderers shared by the stages.

std::string num(double v) { return csv::number(v); }

std::string correlations_csv(const SplitPairs& data) {
    std::string out = "period,n,pearson,pearson_p,kendall,kendall_p,spearman,spearman_p\n";
    for (const auto* pair : {&data.whole, &data.pre, &data.post}) {
        const auto c = correlations(*pair);
        out += std::string(to_string(pair->period)) + "," + std::to_string(pair->size()) + "," + num(c.pearson) + "," +
               num(c.pearson_p) + "," + num(c.kendall) + "," + num(c.kendall_p) + "," + num(c.spearman) + "," +
               num(c.spearman_p) + "\n";
    }
    return out;
}

std::string descriptive_csv(const SplitPairs& data) {
    std::string out =
        "period,leg,n,max,min,mean,std,skewness,kurtosis,jb,jb_p,q20,q20_p,q2_20,q2_20_p,arch20,arch20_p,adf,pp\n";
    for (const auto* pair : {&data.whole, &data.pre, &data.post}) {
        for (const auto* leg : {&pair->futures, &pair->spot}) {
            const auto& r = leg->returns;
            const auto d = describe(r);
            const auto jb = jarque_bera(r);
            std::vector<double> sq(r.size());
            std::transform(r.begin(), r.end(), sq.begin(), [](double v) { return v * v; });
            const auto q = ljung_box(r, 20);
            const auto q2 = ljung_box(sq, 20);
            const auto arch = arch_lm(r, 20);
            out += std::string(to_string(pair->period)) + "," + leg->instrument_id + "," + std::to_string(r.size()) +
                   "," + num(d.max) + "," + num(d.min) + "," + num(d.mean) + "," + num(d.std) + "," +
                   num(d.skewness) + "," + num(d.kurtosis) + "," + num(jb.statistic) + "," + num(jb.p_value) + "," +
                   num(q.statistic) + "," + num(q.p_value) + "," + num(q2.statistic) + "," + num(q2.p_value) + "," +
                   num(arch.statistic) + "," + num(arch.p_value) + ",not computed,not computed\n";
        }
    }
    return out;
}

std::string risk_summary_csv(const RiskSeries& pre, const RiskSeries& post) {
    std::string out = "period,measure,max,min,mean,std\n";
    for (const auto* r : {&pre, &post}) {
        const std::pair<const char*, const std::vector<double>*> cols[] = {
            {"var_down_futures", &r->var_down_futures}, {"var_up_futures", &r->var_up_futures},
            {"var_down_spot", &r->var_down_spot},       {"var_up_spot", &r->var_up_spot},
            {"covar_down", &r->covar_down},             {"covar_up", &r->covar_up},
            {"covar_median_down", &r->covar_median_down}, {"covar_median_up", &r->covar_median_up},
            {"delta_covar_down", &r->delta_covar_down}, {"delta_covar_up", &r->delta_covar_up},
        };
        for (const auto& [name, values] : cols) {
            const auto d = describe(*values);
            out += std::string(to_string(r->period)) + "," + name + "," + num(d.max) + "," + num(d.min) + "," +
                   num(d.mean) + "," + num(d.std) + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// A pipeline session: lazily computed, disk-cached stage results.

struct MarginalResult {
    MarginalFit fit;
    std::vector<OrderSearchEntry> grid;
};

struct PeriodMarginals {
    MarginalResult futures;
    MarginalResult spot;
};

class Session {
public:
    explicit Session(PipelineConfig config) : config_(std::move(config)) {}

    const PipelineConfig& config() const { return config_; }

    const SplitPairs& data() {
        if (!data_) {
            log("loading " + config_.futures.path.string() + " and " + config_.spot.path.string());
            const auto fp = load_prices(config_.futures.path, config_.futures.columns, config_.futures.id);
            const auto sp = load_prices(config_.spot.path, config_.spot.columns, config_.spot.id);
            data_ = align_and_split(log_returns(fp), log_returns(sp), config_.boundary);
        }
        return *data_;
    }

    const PeriodMarginals& marginals(Period period) {
        if (!marginals_) load_or_fit_marginals();
        return period == Period::pre ? marginals_->first : marginals_->second;
    }

    const CopulaSelection& copula(Period period) {
        if (!copulas_) load_or_fit_copulas();
        return period == Period::pre ? copulas_->first : copulas_->second;
    }

    const RiskSeries& risk(Period period) {
        if (!risk_) load_or_compute_risk();
        return period == Period::pre ? risk_->first : risk_->second;
    }

    const std::vector<SpilloverTest>& spillover() {
        if (!spillover_) {
            log("running " + std::to_string(config_.n_bootstrap) + "-replicate K-S permutation tests");
            spillover_ = table6_panels(risk(Period::pre), risk(Period::post), config_.n_bootstrap, config_.seed);
        }
        return *spillover_;
    }

private:
    std::string marginal_key() {
        std::string text = std::string("ccovar ") + kVersion + "\n";
        text += hex(fnv1a(read_file(config_.futures.path))) + " " + config_.futures.columns.date + " " +
                config_.futures.columns.price + "\n";
        text += hex(fnv1a(read_file(config_.spot.path))) + " " + config_.spot.columns.date + " " +
                config_.spot.columns.price + "\n";
        text += format_date(config_.boundary) + " " + std::to_string(config_.max_lag) + " " +
                std::to_string(config_.marginal.max_evaluations) + " " + std::to_string(config_.marginal.starts);
        return hex(fnv1a(text));
    }

    std::string copula_key() {
        std::string text = marginal_key();
        for (const auto& c : config_.candidates) text += " " + c.label();
        return hex(fnv1a(text));
    }

    std::string risk_key() {
        return hex(fnv1a(copula_key() + " " + num(config_.risk.alpha_down) + " " + num(config_.risk.alpha_up)));
    }

    fs::path cache_path(const std::string& stage, const std::string& key) const {
        return config_.out / ".cache" / (stage + "-" + key + ".json");
    }

    std::optional<Json> read_cache(const fs::path& path) const {
        if (!config_.use_cache || !fs::exists(path)) return std::nullopt;
        try {
            return Json::parse(read_file(path));
        } catch (const std::exception&) {
            return std::nullopt;  // unreadable cache entries are recomputed
        }
    }

    void write_cache(const fs::path& path, const Json& j) const {
        if (config_.use_cache) write_file(path, j.dump() + "\n");
    }

    static Json marginal_result_json(const MarginalResult& r) {
        Json grid = Json::array();
        for (const auto& e : r.grid) {
            Json g{{"orders", Json{{"m", e.orders.m}, {"n", e.orders.n}, {"p", e.orders.p}, {"q", e.orders.q}}},
                   {"ok", e.ok},
                   {"loglik", e.loglik},
                   {"aic", e.aic},
                   {"error", e.error}};
            grid.push_back(std::move(g));
        }
        return Json{{"fit", serialize::to_json(r.fit, true)}, {"grid", std::move(grid)}};
    }

    static MarginalResult marginal_result_from_json(const Json& j) {
        MarginalResult r;
        r.fit = serialize::marginal_from_json(j.at("fit"));
        for (const auto& g : j.at("grid")) {
            OrderSearchEntry e;
            const auto& o = g.at("orders");
            e.orders = {o.at("m").get<int>(), o.at("n").get<int>(), o.at("p").get<int>(), o.at("q").get<int>()};
            e.ok = g.at("ok").get<bool>();
            e.loglik = g.at("loglik").get<double>();
            e.aic = g.at("aic").get<double>();
            e.error = g.at("error").get<std::string>();
            r.grid.push_back(std::move(e));
        }
        return r;
    }

    MarginalResult fit_leg(const ReturnSeries& returns, const char* what) {
        const auto start = std::chrono::steady_clock::now();
        auto search = select_orders(returns, config_.max_lag, config_.marginal);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log(std::string(what) + ": " + search.best.orders.label() + " in " + std::to_string(secs) + " s");
        return {std::move(search.best), std::move(search.grid)};
    }

    void load_or_fit_marginals() {
        const auto path = cache_path("marginal", marginal_key());
        if (auto cached = read_cache(path)) {
            log("marginal fits loaded from cache");
            marginals_.emplace();
            marginals_->first = {marginal_result_from_json(cached->at("pre").at("futures")),
                                 marginal_result_from_json(cached->at("pre").at("spot"))};
            marginals_->second = {marginal_result_from_json(cached->at("post").at("futures")),
                                  marginal_result_from_json(cached->at("post").at("spot"))};
            return;
        }
        const auto& d = data();
        marginals_.emplace();
        marginals_->first = {fit_leg(d.pre.futures, "pre futures"), fit_leg(d.pre.spot, "pre spot")};
        marginals_->second = {fit_leg(d.post.futures, "post futures"), fit_leg(d.post.spot, "post spot")};
        Json j;
        j["pre"] = Json{{"futures", marginal_result_json(marginals_->first.futures)},
                        {"spot", marginal_result_json(marginals_->first.spot)}};
        j["post"] = Json{{"futures", marginal_result_json(marginals_->second.futures)},
                         {"spot", marginal_result_json(marginals_->second.spot)}};
        write_cache(path, j);
    }

    static CopulaSelection selection_from_json(const Json& j) {
        CopulaSelection s;
        s.best = serialize::copula_fit_from_json(j.at("selected"));
        const auto& candidates = j.at("candidates");
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto& c = candidates[i];
            CandidateOutcome o;
            o.candidate = parse_candidate(c.at("candidate").get<std::string>());
            if (c.at("ok").get<bool>()) {
                o.fit = serialize::copula_fit_from_json(c.at("fit"));
            } else {
                o.error = c.at("error").get<std::string>();
            }
            if (c.at("selected").get<bool>()) s.best_index = i;
            s.outcomes.push_back(std::move(o));
        }
        return s;
    }

    void load_or_fit_copulas() {
        const auto path = cache_path("copula", copula_key());
        if (auto cached = read_cache(path)) {
            log("copula fits loaded from cache");
            copulas_.emplace(selection_from_json(cached->at("pre")), selection_from_json(cached->at("post")));
            return;
        }
        auto fit_period = [&](Period p) {
            const auto& m = marginals(p);
            auto sel = select_copula(m.futures.fit.u, m.spot.fit.u, config_.candidates);
            log(std::string(to_string(p)) + " copula: " + label(sel.best.model));
            return sel;
        };
        auto pre = fit_period(Period::pre);
        auto post = fit_period(Period::post);
        copulas_.emplace(std::move(pre), std::move(post));
        write_cache(path, Json{{"pre", serialize::to_json(copulas_->first)},
                               {"post", serialize::to_json(copulas_->second)}});
    }

    void load_or_compute_risk() {
        const auto path = cache_path("risk", risk_key());
        if (auto cached = read_cache(path)) {
            log("risk series loaded from cache");
            risk_.emplace(serialize::risk_from_json(cached->at("pre")), serialize::risk_from_json(cached->at("post")));
            return;
        }
        auto compute = [&](Period p) {
            const auto& m = marginals(p);
            return compute_risk(copula(p).best, m.futures.fit, m.spot.fit, config_.risk, p);
        };
        auto pre = compute(Period::pre);
        auto post = compute(Period::post);
        risk_.emplace(std::move(pre), std::move(post));
        write_cache(path, Json{{"pre", serialize::to_json(risk_->first)}, {"post", serialize::to_json(risk_->second)}});
    }

    PipelineConfig config_;
    std::optional<SplitPairs> data_;
    std::optional<std::pair<PeriodMarginals, PeriodMarginals>> marginals_;
    std::optional<std::pair<CopulaSelection, CopulaSelection>> copulas_;
    std::optional<std::pair<RiskSeries, RiskSeries>> risk_;
    std::optional<std::vector<SpilloverTest>> spillover_;
};

// ---------------------------------------------------------------------------
// Stage bodies. Each returns the files it wrote and fills a manifest entry.

constexpr const char* kFigure1 = "figure1_returns.csv";
constexpr const char* kTable1 = "table1_correlations.csv";
constexpr const char* kTable2 = "table2_descriptive.csv";
constexpr const char* kTable3 = "table3_marginals.json";
constexpr const char* kTable45 = "table45_copulas.json";
constexpr const char* kFigure2 = "figure2_risk.csv";
constexpr const char* kRiskSummary = "risk_summary.csv";
constexpr const char* kTable6 = "table6_spillover.json";
constexpr const char* kManifest = "manifest.json";

struct StageOutput {
    std::vector<std::pair<std::string, std::string>> files;  // name, kind
    Json summary = Json::object();
};

StageOutput stage_ingest(Session& s) {
    const auto& d = s.data();
    std::string csv_text = "date,period," + csv::quote(d.whole.futures.instrument_id) + "," +
                           csv::quote(d.whole.spot.instrument_id) + "\n";
    for (const auto* pair : {&d.pre, &d.post}) {
        for (std::size_t t = 0; t < pair->size(); ++t) {
            csv_text += format_date(pair->dates()[t]) + "," + to_string(pair->period) + "," +
                        num(pair->futures.returns[t]) + "," + num(pair->spot.returns[t]) + "\n";
        }
    }
    write_file(s.config().out / kFigure1, csv_text);
    StageOutput out;
    out.files.push_back({kFigure1, "plot-data"});
    out.summary["observations"] = Json{{"whole", d.whole.size()}, {"pre", d.pre.size()}, {"post", d.post.size()}};
    out.summary["first_date"] = format_date(d.whole.dates().front());
    out.summary["last_date"] = format_date(d.whole.dates().back());
    return out;
}

StageOutput stage_diagnose(Session& s) {
    const auto& d = s.data();
    write_file(s.config().out / kTable1, correlations_csv(d));
    write_file(s.config().out / kTable2, descriptive_csv(d));
    StageOutput out;
    out.files = {{kTable1, "table"}, {kTable2, "table"}};
    out.summary["unit_root_tests"] = "not computed";
    return out;
}

StageOutput stage_fit_marginal(Session& s) {
    Json table;
    StageOutput out;
    for (Period p : {Period::pre, Period::post}) {
        const auto& m = s.marginals(p);
        Json period;
        for (const auto& [name, r] : {std::pair<const char*, const MarginalResult*>{"futures", &m.futures},
                                      {"spot", &m.spot}}) {
            Json leg = serialize::to_json(r->fit, false);
            leg["diagnostics"] = serialize::to_json(residual_diagnostics(r->fit));
            Json grid = Json::array();
            for (const auto& e : r->grid) grid.push_back(serialize::to_json(e));
            leg["order_search"] = std::move(grid);
            period[name] = std::move(leg);
            out.summary[to_string(p)][name] = r->fit.orders.label();
        }
        table[to_string(p)] = std::move(period);
    }
    write_file(s.config().out / kTable3, dump(table));
    out.files.push_back({kTable3, "table"});
    return out;
}

StageOutput stage_fit_copula(Session& s) {
    Json table;
    StageOutput out;
    for (Period p : {Period::pre, Period::post}) {
        const auto& sel = s.copula(p);
        table[to_string(p)] = serialize::to_json(sel);
        out.summary[to_string(p)] = label(sel.best.model);
    }
    write_file(s.config().out / kTable45, dump(table));
    out.files.push_back({kTable45, "table"});
    return out;
}

StageOutput stage_risk(Session& s) {
    const auto& pre = s.risk(Period::pre);
    const auto& post = s.risk(Period::post);
    write_file(s.config().out / kFigure2,
               serialize::risk_csv_header() + serialize::risk_csv_rows(pre) + serialize::risk_csv_rows(post));
    write_file(s.config().out / kRiskSummary, risk_summary_csv(pre, post));
    StageOutput out;
    out.files = {{kRiskSummary, "table"}, {kFigure2, "plot-data"}};
    for (const auto* r : {&pre, &post}) {
        out.summary[to_string(r->period)] = Json{{"covar_level_down", r->level_down},
                                                 {"covar_level_up", r->level_up},
                                                 {"median_level_down", r->median_level_down},
                                                 {"median_level_up", r->median_level_up}};
    }
    return out;
}

StageOutput stage_spillover(Session& s) {
    const auto& tests = s.spillover();
    Json table = Json::array();
    int significant = 0;
    for (const auto& t : tests) {
        table.push_back(serialize::to_json(t));
        if (t.p_value < 0.01) ++significant;
    }
    write_file(s.config().out / kTable6, dump(table));
    StageOutput out;
    out.files.push_back({kTable6, "table"});
    out.summary = Json{{"tests", tests.size()}, {"significant_at_1pct", significant}};
    return out;
}

StageOutput run_named_stage(Session& s, std::string_view stage) {
    try {
        if (stage == "ingest") return stage_ingest(s);
        if (stage == "diagnose") return stage_diagnose(s);
        if (stage == "fit-marginal") return stage_fit_marginal(s);
        if (stage == "fit-copula") return stage_fit_copula(s);
        if (stage == "risk") return stage_risk(s);
        if (stage == "test-spillover") return stage_spillover(s);
    } catch (const Error& e) {
        throw Error(e.code(), "stage '" + std::string(stage) + "': " + e.what(), e.row());
    }
    throw Error(ErrorCode::config_error, "unknown stage '" + std::string(stage) + "'");
}

Json config_json(const PipelineConfig& c) {
    Json candidates = Json::array();
    for (const auto& k : c.candidates) candidates.push_back(k.label());
    return Json{{"futures", Json{{"path", c.futures.path.generic_string()},
                                 {"date_column", c.futures.columns.date},
                                 {"price_column", c.futures.columns.price},
                                 {"id", c.futures.id}}},
                {"spot", Json{{"path", c.spot.path.generic_string()},
                              {"date_column", c.spot.columns.date},
                              {"price_column", c.spot.columns.price},
                              {"id", c.spot.id}}},
                {"boundary", format_date(c.boundary)},
                {"alpha_down", c.risk.alpha_down},
                {"alpha_up", c.risk.alpha_up},
                {"max_lag", c.max_lag},
                {"marginal_starts", c.marginal.starts},
                {"marginal_max_evaluations", c.marginal.max_evaluations},
                {"copulas", std::move(candidates)},
                {"n_bootstrap", c.n_bootstrap},
                {"seed", c.seed}};
}

std::vector<Date> weekdays(Date start, std::size_t count) {
    std::vector<Date> out;
    std::chrono::sys_days day{start};
    while (out.size() < count) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
        day += std::chrono::days{1};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report rendering.

std::string pad(const std::string& s, std::size_t width, bool left) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// Numeric cells get four decimals except in count columns.
std::string format_cell(const std::string& header, const std::string& cell) {
    if (header == "n") return cell;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec == std::errc() && ptr == cell.data() + cell.size()) return fixed(v);
    return cell;
}

std::string render_rows(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::string out;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::string line;
        for (std::size_t i = 0; i < rows[k].size(); ++i) {
            if (i) line += "  ";
            const auto& cell = rows[k][i];
            const bool numeric = !cell.empty() && (std::isdigit(static_cast<unsigned char>(cell[0])) ||
                                                   cell[0] == '-' || cell[0] == '(' || cell[0] == '[');
            line += pad(cell, width[i], k == 0 || !numeric);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += "  " + line + "\n";
    }
    return out;
}

std::string render_csv(const std::string& text) {
    auto rows = csv::parse(text);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        for (std::size_t i = 0; i < rows[k].size() && i < rows[0].size(); ++i) {
            rows[k][i] = format_cell(rows[0][i], rows[k][i]);
        }
    }
    return render_rows(rows);
}

std::string render_marginals(const Json& table) {
    std::string out;
    for (const auto& [period, legs] : table.items()) {
        for (const auto& [leg, fit] : legs.items()) {
            out += "  [" + period + " / " + leg + "] " + fit.at("model").get<std::string>() + "\n";
            std::vector<std::vector<std::string>> rows{{"parameter", "estimate", "std.error"}};
            for (const auto& [name, value] : fit.at("params").items()) {
                const auto& se = fit.at("std_errors");
                rows.push_back({name, fixed(value.get<double>()),
                                se.is_null() ? "n/a" : "(" + fixed(se.at(name).get<double>()) + ")"});
            }
            rows.push_back({"loglik", fixed(fit.at("loglik").get<double>()), ""});
            rows.push_back({"AIC", fixed(fit.at("aic").get<double>()), ""});
            for (const auto& t : fit.at("diagnostics")) {
                rows.push_back({t.at("test").get<std::string>() + "(" + std::to_string(t.at("lags").get<int>()) + ")",
                                fixed(t.at("statistic").get<double>()), "[" + fixed(t.at("p_value").get<double>()) + "]"});
            }
            out += render_rows(rows);
        }
    }
    return out;
}

std::string render_copulas(const Json& table) {
    std::string out;
    for (const auto& [period, sel] : table.items()) {
        out += "  [" + period + "]\n";
        std::vector<std::vector<std::string>> rows{{"candidate", "parameters", "loglik", "AIC", "lambda_low", "lambda_up",
                                                    "tau"}};
        for (const auto& c : sel.at("candidates")) {
            std::vector<std::string> row{c.at("candidate").get<std::string>() +
                                         (c.at("selected").get<bool>() ? " #" : "")};
            if (!c.at("ok").get<bool>()) {
                row.insert(row.end(), {"failed", "-", "-", "-", "-", "-"});
            } else {
                const auto& f = c.at("fit");
                std::string params;
                for (const auto& [name, value] : f.at("params").items()) {
                    if (!params.empty()) params += ", ";
                    params += name + "=" + fixed(value.get<double>());
                }
                row.push_back(params);
                row.push_back(fixed(f.at("loglik").get<double>()));
                row.push_back(fixed(f.at("aic").get<double>()));
                row.push_back(fixed(f.at("tail").at("lower").get<double>()));
                row.push_back(fixed(f.at("tail").at("upper").get<double>()));
                row.push_back(fixed(f.at("kendall_tau").get<double>()));
            }
            rows.push_back(std::move(row));
        }
        out += render_rows(rows);
    }
    out += "  # marks the smallest AIC\n";
    return out;
}

std::string render_spillover(const Json& table) {
    std::vector<std::vector<std::string>> rows{{"panel", "period", "H1", "KS", "p-value", "n_lhs", "n_rhs"}};
    for (const auto& t : table) {
        rows.push_back({t.at("panel").get<std::string>(), t.at("period").get<std::string>(),
                        t.at("hypothesis").get<std::string>(),
                        fixed(t.at("statistic").get<double>()) + t.at("stars").get<std::string>(),
                        fixed(t.at("p_value").get<double>()), std::to_string(t.at("n_lhs").get<std::size_t>()),
                        std::to_string(t.at("n_rhs").get<std::size_t>())});
    }
    return render_rows(rows) + "  ***, ** and * denote significance at the 1%, 5% and 10% levels\n";
}

}  // namespace

// ---------------------------------------------------------------------------

SimulationConfig::SimulationConfig() {
    futures.orders = {1, 0, 1, 1};
    futures.params.phi0 = 0.02;
    futures.params.phi = {0.05};
    futures.params.alpha0 = 0.05;
    futures.params.alpha = {0.08};
    futures.params.beta = {0.90};
    futures.params.skewt = {6.0, 0.1};
    spot.orders = {1, 0, 1, 1};
    spot.params.phi0 = 0.01;
    spot.params.phi = {0.10};
    spot.params.alpha0 = 0.04;
    spot.params.alpha = {0.10};
    spot.params.beta = {0.85};
    spot.params.skewt = {7.0, -0.1};
    copula = MixedCopulaSpec{CopulaSpec::gumbel(3.5740), CopulaSpec::surv_gumbel(3.2474), 0.5136};
}

void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value, const fs::path& base_dir) {
    key = trim(key);
    value = trim(value);
    auto leg_key = [&](LegInput& leg, std::string_view field) {
        if (field == "path") {
            leg.path = resolve(base_dir, value);
        } else if (field == "date_column") {
            leg.columns.date = std::string(value);
        } else if (field == "price_column") {
            leg.columns.price = std::string(value);
        } else if (field == "id") {
            leg.id = std::string(value);
        } else {
            throw Error(ErrorCode::config_error, "unknown config key '" + std::string(key) + "'");
        }
    };
    try {
        if (key.starts_with("futures.")) {
            leg_key(c.futures, key.substr(8));
        } else if (key.starts_with("spot.")) {
            leg_key(c.spot, key.substr(5));
        } else if (key == "boundary") {
            c.boundary = parse_date(value);
        } else if (key == "alpha_down") {
            c.risk.alpha_down = to_double(key, value);
        } else if (key == "alpha_up") {
            c.risk.alpha_up = to_double(key, value);
        } else if (key == "max_lag") {
            c.max_lag = to_integer<int>(key, value);
        } else if (key == "marginal.starts") {
            c.marginal.starts = to_integer<int>(key, value);
        } else if (key == "marginal.max_evaluations") {
            c.marginal.max_evaluations = to_integer<int>(key, value);
        } else if (key == "copulas") {
            c.candidates.clear();
            for (auto item : split(value, ',')) c.candidates.push_back(parse_candidate(item));
        } else if (key == "n_bootstrap") {
            c.n_bootstrap = to_integer<int>(key, value);
        } else if (key == "seed") {
            c.seed = to_integer<std::uint64_t>(key, value);
        } else if (key == "out") {
            c.out = resolve(base_dir, value);
        } else if (key == "cache") {
            c.use_cache = to_bool(key, value);
        } else if (key == "sim.T") {
            c.simulation.T = to_integer<std::size_t>(key, value);
        } else if (key == "sim.boundary_fraction") {
            c.simulation.boundary_fraction = to_double(key, value);
        } else if (key == "sim.start_date") {
            c.simulation.start_date = parse_date(value);
        } else if (key == "sim.copula") {
            // Keep the parameters when only the family changes and the count still fits.
            const auto candidate = parse_candidate(value);
            const auto previous = serialize::parameter_values(c.simulation.copula);
            try {
                c.simulation.copula = model_from(candidate, previous);
            } catch (const Error&) {
                c.simulation.copula = candidate.is_mixture() ? CopulaModel{MixedCopulaSpec{
                                                                   CopulaSpec{candidate.first, 2.0, 0.0},
                                                                   CopulaSpec{*candidate.second, 2.0, 0.0}, 0.5}}
                                      : candidate.first == CopulaFamily::student_t
                                          ? CopulaModel{CopulaSpec::student_t(0.5, 5.0)}
                                          : CopulaModel{CopulaSpec{candidate.first,
                                                                   candidate.first == CopulaFamily::normal ? 0.5 : 2.0,
                                                                   0.0}};
            }
        } else if (key == "sim.copula_params") {
            c.simulation.copula = model_from(candidate_of(c.simulation.copula), to_doubles(key, value));
        } else if (key.starts_with("sim.futures.")) {
            set_leg_param(c.simulation.futures, key, key.substr(12), value);
        } else if (key.starts_with("sim.spot.")) {
            set_leg_param(c.simulation.spot, key, key.substr(9), value);
        } else {
            throw Error(ErrorCode::config_error, "unknown config key '" + std::string(key) + "'");
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config_error) throw;
        throw Error(ErrorCode::config_error, "config key '" + std::string(key) + "': " + e.what());
    }
}

PipelineConfig load_config(const fs::path& path) {
    const auto text = read_file(path);
    PipelineConfig config;
    const auto base_dir = path.parent_path();
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::config_error,
                        path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'", line_no);
        }
        try {
            set_config_value(config, view.substr(0, eq), view.substr(eq + 1), base_dir);
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return config;
}

void apply_env_overrides(PipelineConfig& config) {
    if (const char* seed = std::getenv("CCOVAR_SEED"); seed && *seed) {
        set_config_value(config, "seed", seed);
    }
    if (const char* out = std::getenv("CCOVAR_OUT"); out && *out) {
        config.out = fs::path(out);
    }
}

void validate(const PipelineConfig& c) {
    for (const auto* leg : {&c.futures, &c.spot}) {
        if (leg->path.empty()) throw Error(ErrorCode::config_error, leg->id + ".path is not set");
        if (!fs::exists(leg->path)) throw Error(ErrorCode::file_missing, "price file not found: " + leg->path.string());
    }
    validate(c.risk);
    if (c.max_lag < 0 || c.max_lag > 3) throw Error(ErrorCode::config_error, "max_lag must lie in [0, 3]");
    if (c.marginal.starts < 1 || c.marginal.max_evaluations < 100) {
        throw Error(ErrorCode::config_error, "marginal.starts must be >= 1 and marginal.max_evaluations >= 100");
    }
    if (c.candidates.empty()) throw Error(ErrorCode::config_error, "copulas must list at least one candidate");
    if (c.n_bootstrap < 100) throw Error(ErrorCode::config_error, "n_bootstrap must be at least 100");
}

std::string render_config(const PipelineConfig& c) {
    std::string out;
    auto line = [&](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
    for (const auto& [name, leg] : {std::pair<const char*, const LegInput*>{"futures", &c.futures}, {"spot", &c.spot}}) {
        line(std::string(name) + ".path", leg->path.generic_string());
        line(std::string(name) + ".date_column", leg->columns.date);
        line(std::string(name) + ".price_column", leg->columns.price);
        line(std::string(name) + ".id", leg->id);
    }
    line("boundary", format_date(c.boundary));
    line("alpha_down", num(c.risk.alpha_down));
    line("alpha_up", num(c.risk.alpha_up));
    line("max_lag", std::to_string(c.max_lag));
    line("marginal.starts", std::to_string(c.marginal.starts));
    line("marginal.max_evaluations", std::to_string(c.marginal.max_evaluations));
    std::string candidates;
    for (const auto& k : c.candidates) candidates += (candidates.empty() ? "" : ", ") + k.label();
    line("copulas", candidates);
    line("n_bootstrap", std::to_string(c.n_bootstrap));
    line("seed", std::to_string(c.seed));
    line("out", c.out.generic_string());
    line("cache", c.use_cache ? "true" : "false");
    return out;
}

void set_verbose(bool verbose) { g_verbose = verbose; }

std::vector<fs::path> run_stage(const PipelineConfig& config, std::string_view stage) {
    validate(config);
    Session session(config);
    const auto output = run_named_stage(session, stage);
    std::vector<fs::path> paths;
    for (const auto& [name, kind] : output.files) paths.push_back(config.out / name);
    return paths;
}

fs::path run_pipeline(const PipelineConfig& config) {
    validate(config);
    Session session(config);
    Json stages = Json::object();
    Json files = Json::array();
    std::string timings;
    const auto begin = std::chrono::steady_clock::now();
    for (const auto stage : kStages) {
        const auto start = std::chrono::steady_clock::now();
        log("stage " + std::string(stage));
        const auto output = run_named_stage(session, stage);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        timings += std::string(stage) + " " + fixed(secs, 3) + "\n";
        stages[std::string(stage)] = output.summary;
        for (const auto& [name, kind] : output.files) {
            const auto path = config.out / name;
            std::error_code ec;
            const auto size = fs::file_size(path, ec);
            if (ec || size == 0) throw Error(ErrorCode::io_error, "stage output missing or empty: " + path.string());
            files.push_back(Json{{"name", name}, {"kind", kind}, {"stage", std::string(stage)}, {"bytes", size}});
        }
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    timings += "total " + fixed(total, 3) + "\n";

    Json manifest;
    manifest["library"] = "ccovar";
    manifest["version"] = kVersion;
    manifest["config"] = config_json(config);
    manifest["stages"] = std::move(stages);
    manifest["files"] = std::move(files);
    manifest["timings_file"] = "timings.txt";
    const auto path = config.out / kManifest;
    write_file(path, dump(manifest));
    write_file(config.out / "timings.txt", timings);
    return path;
}

std::vector<fs::path> simulate(const PipelineConfig& config) {
    const auto& sim = config.simulation;
    if (sim.T < 200) {
        throw Error(ErrorCode::too_short, "simulation needs T >= 200 returns, got " + std::to_string(sim.T));
    }
    if (!(sim.boundary_fraction > 0.0 && sim.boundary_fraction < 1.0)) {
        throw Error(ErrorCode::invalid_params, "sim.boundary_fraction must lie in (0, 1)");
    }
    validate(sim.futures.orders);
    validate(sim.futures.params, sim.futures.orders);
    validate(sim.spot.orders);
    validate(sim.spot.params, sim.spot.orders);
    validate(sim.copula);

    const auto pairs = sample(sim.copula, sim.T, config.seed);
    const auto rf = simulate_returns(sim.futures.params, sim.futures.orders, pairs.u1);
    const auto rs = simulate_returns(sim.spot.params, sim.spot.orders, pairs.u2);
    const auto dates = weekdays(sim.start_date, sim.T + 1);
    const auto k = static_cast<std::size_t>(std::llround(double(sim.T) * sim.boundary_fraction));
    if (k < 1 || k >= sim.T) throw Error(ErrorCode::invalid_params, "boundary fraction leaves an empty period");
    const Date boundary = dates[k + 1];  // return t is dated at dates[t + 1]

    auto prices_csv = [&](const std::vector<double>& returns) {
        std::string text = "date,price\n";
        double price = 100.0;
        text += format_date(dates[0]) + "," + num(price) + "\n";
        for (std::size_t t = 0; t < returns.size(); ++t) {
            price *= std::exp(returns[t] / 100.0);
            text += format_date(dates[t + 1]) + "," + num(price) + "\n";
        }
        return text;
    };

    auto leg_json = [](const SimulatedLeg& leg) {
        const auto names = MarginalParams::names(leg.orders);
        const auto values = leg.params.flatten();
        Json params = Json::object();
        for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = values[i];
        return Json{{"model", leg.orders.label()},
                    {"orders", Json{{"m", leg.orders.m}, {"n", leg.orders.n}, {"p", leg.orders.p}, {"q", leg.orders.q}}},
                    {"params", std::move(params)}};
    };
    const auto tail = tail_dependence(sim.copula);
    Json copula = serialize::to_json(sim.copula);
    copula["tail"] = Json{{"lower", tail.lower}, {"upper", tail.upper}};
    copula["kendall_tau"] = kendall_tau(sim.copula);
    Json truth{{"T", sim.T},
               {"seed", config.seed},
               {"boundary", format_date(boundary)},
               {"pre_observations", k},
               {"post_observations", sim.T - k},
               {"futures", leg_json(sim.futures)},
               {"spot", leg_json(sim.spot)},
               {"copula", std::move(copula)}};

    PipelineConfig run = config;
    run.futures = {"futures.csv", CsvColumns{}, "futures"};
    run.spot = {"spot.csv", CsvColumns{}, "spot"};
    run.boundary = boundary;
    run.out = "run";

    const std::vector<std::pair<fs::path, std::string>> files = {
        {config.out / "futures.csv", prices_csv(rf)},
        {config.out / "spot.csv", prices_csv(rs)},
        {config.out / "truth.json", dump(truth)},
        {config.out / "pipeline.conf",
         "# Generated by ccovar simulate; relative paths resolve against this file.\n" + render_config(run)},
    };
    std::vector<fs::path> written;
    for (const auto& [path, content] : files) {
        write_file(path, content);
        written.push_back(path);
    }
    log("simulated " + std::to_string(sim.T) + " returns; boundary " + format_date(boundary));
    return written;
}

std::string report(const fs::path& out_dir) {
    const auto manifest_path = out_dir / kManifest;
    if (!fs::exists(manifest_path)) {
        throw Error(ErrorCode::manifest_incomplete, "no manifest.json in " + out_dir.string());
    }
    Json manifest;
    try {
        manifest = Json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::manifest_incomplete, std::string("manifest.json is not valid JSON: ") + e.what());
    }
    const auto& stages = manifest.contains("stages") ? manifest.at("stages") : Json::object();
    for (const auto stage : kStages) {
        if (!stages.contains(std::string(stage))) {
            throw Error(ErrorCode::manifest_incomplete, "manifest is missing stage '" + std::string(stage) + "'");
        }
    }
    std::map<std::string, std::string> content;
    for (const auto& f : manifest.value("files", Json::array())) {
        const auto name = f.at("name").get<std::string>();
        const auto path = out_dir / name;
        if (!fs::exists(path) || fs::file_size(path) == 0) {
            throw Error(ErrorCode::manifest_incomplete,
                        "stage '" + f.value("stage", std::string("?")) + "' output missing: " + name);
        }
        content[name] = read_file(path);
    }
    for (const char* name : {kTable1, kTable2, kTable3, kTable45, kRiskSummary, kTable6}) {
        if (!content.count(name)) {
            throw Error(ErrorCode::manifest_incomplete, std::string("manifest does not list ") + name);
        }
    }

    const auto& cfg = manifest.at("config");
    std::string out;
    out += "ccovar " + manifest.at("version").get<std::string>() + " report\n";
    out += "futures: " + cfg.at("futures").at("path").get<std::string>() + "\n";
    out += "spot:    " + cfg.at("spot").at("path").get<std::string>() + "\n";
    out += "boundary date: " + cfg.at("boundary").get<std::string>() + " (first post-period date)\n";
    const auto& obs = stages.at("ingest").at("observations");
    out += "observations: whole " + std::to_string(obs.at("whole").get<std::size_t>()) + ", pre " +
           std::to_string(obs.at("pre").get<std::size_t>()) + ", post " +
           std::to_string(obs.at("post").get<std::size_t>()) + "\n\n";

    out += "Table 1. Correlations between futures and spot returns (p-values)\n";
    out += render_csv(content[kTable1]) + "\n";
    out += "Table 2. Descriptive statistics and diagnostics of returns\n";
    out += render_csv(content[kTable2]);
    out += "  Unit-root tests (ADF, PP): not computed\n\n";
    out += "Table 3. ARMA-GARCH-skewed-t marginal estimates (std. errors), residual diagnostics [p-values]\n";
    out += render_marginals(Json::parse(content[kTable3])) + "\n";
    out += "Tables 4-5. Copula candidates\n";
    out += render_copulas(Json::parse(content[kTable45])) + "\n";
    out += "Summary statistics of the risk measures\n";
    out += render_csv(content[kRiskSummary]) + "\n";
    out += "Table 6. One-sided K-S tests of risk spillover\n";
    out += render_spillover(Json::parse(content[kTable6]));
    return out;
}

}  // namespace ccovar
