#include "serialize.hpp"

#include "ccovar/error.hpp"
#include "csv.hpp"

namespace ccovar::serialize {

namespace {

Json dates_json(const std::vector<Date>& dates) {
    Json out = Json::array();
    for (const auto& d : dates) out.push_back(format_date(d));
    return out;
}

std::vector<Date> dates_from_json(const Json& j) {
    std::vector<Date> out;
    for (const auto& d : j) out.push_back(parse_date(d.get<std::string>()));
    return out;
}

Json named(const std::vector<std::string>& names, const std::vector<double>& values) {
    Json out = Json::object();
    for (std::size_t i = 0; i < names.size() && i < values.size(); ++i) out[names[i]] = values[i];
    return out;
}

Json orders_json(const ArmaGarchOrders& o) { return Json{{"m", o.m}, {"n", o.n}, {"p", o.p}, {"q", o.q}}; }

ArmaGarchOrders orders_from_json(const Json& j) {
    return {j.at("m").get<int>(), j.at("n").get<int>(), j.at("p").get<int>(), j.at("q").get<int>()};
}

Json spec_json(const CopulaSpec& s) {
    Json out{{"family", to_string(s.family)}};
    if (s.family == CopulaFamily::normal || s.family == CopulaFamily::student_t) {
        out["rho"] = s.theta;
    } else {
        out["alpha"] = s.theta;
    }
    if (s.family == CopulaFamily::student_t) out["nu"] = s.nu;
    return out;
}

CopulaSpec spec_from_json(const Json& j) {
    CopulaSpec s;
    s.family = parse_family(j.at("family").get<std::string>());
    s.theta = j.contains("rho") ? j.at("rho").get<double>() : j.at("alpha").get<double>();
    if (j.contains("nu")) s.nu = j.at("nu").get<double>();
    return s;
}

}  // namespace

Json to_json(const TestStatistic& t) {
    return Json{{"test", t.test}, {"lags", t.lags}, {"statistic", t.statistic}, {"p_value", t.p_value}};
}

Json to_json(const MarginalFit& fit, bool include_series) {
    const auto names = MarginalParams::names(fit.orders);
    Json j;
    j["model"] = fit.orders.label();
    j["orders"] = orders_json(fit.orders);
    j["params"] = named(names, fit.params.flatten());
    j["std_errors"] = fit.has_std_errors() ? named(names, fit.std_errors) : Json(nullptr);
    j["loglik"] = fit.loglik;
    j["aic"] = fit.aic;
    j["n_obs"] = fit.returns.size();
    j["boundary"] = fit.boundary;
    j["converged"] = fit.converged;
    j["evaluations"] = fit.evaluations;
    if (include_series) {
        j["series"] = Json{{"dates", dates_json(fit.dates)}, {"returns", fit.returns}, {"mu", fit.mu},
                           {"sigma", fit.sigma},         {"z", fit.z},             {"u", fit.u}};
    }
    return j;
}

MarginalFit marginal_from_json(const Json& j) {
    MarginalFit fit;
    fit.orders = orders_from_json(j.at("orders"));
    const auto names = MarginalParams::names(fit.orders);
    std::vector<double> values;
    for (const auto& n : names) values.push_back(j.at("params").at(n).get<double>());
    fit.params = MarginalParams::unflatten(values, fit.orders);
    if (!j.at("std_errors").is_null()) {
        for (const auto& n : names) fit.std_errors.push_back(j.at("std_errors").at(n).get<double>());
    }
    fit.loglik = j.at("loglik").get<double>();
    fit.aic = j.at("aic").get<double>();
    fit.boundary = j.at("boundary").get<bool>();
    fit.converged = j.at("converged").get<bool>();
    fit.evaluations = j.at("evaluations").get<int>();
    const auto& s = j.at("series");
    fit.dates = dates_from_json(s.at("dates"));
    fit.returns = s.at("returns").get<std::vector<double>>();
    fit.mu = s.at("mu").get<std::vector<double>>();
    fit.sigma = s.at("sigma").get<std::vector<double>>();
    fit.z = s.at("z").get<std::vector<double>>();
    fit.u = s.at("u").get<std::vector<double>>();
    return fit;
}

Json to_json(const ResidualDiagnostics& d) {
    Json out = Json::array();
    for (const auto& t : d.all()) out.push_back(to_json(t));
    return out;
}

Json to_json(const OrderSearchEntry& e) {
    Json j{{"model", e.orders.label()}, {"ok", e.ok}};
    if (e.ok) {
        j["loglik"] = e.loglik;
        j["aic"] = e.aic;
    } else {
        j["error"] = e.error;
    }
    return j;
}

std::vector<std::string> parameter_names(const CopulaModel& model) {
    if (const auto* s = std::get_if<CopulaSpec>(&model)) {
        switch (s->family) {
            case CopulaFamily::normal: return {"rho"};
            case CopulaFamily::student_t: return {"rho", "nu"};
            default: return {"alpha"};
        }
    }
    return {"theta1", "theta2", "omega1"};
}

std::vector<double> parameter_values(const CopulaModel& model) {
    if (const auto* s = std::get_if<CopulaSpec>(&model)) {
        if (s->family == CopulaFamily::student_t) return {s->theta, s->nu};
        return {s->theta};
    }
    const auto& m = std::get<MixedCopulaSpec>(model);
    return {m.upper.theta, m.lower.theta, m.weight};
}

Json to_json(const CopulaModel& model) {
    Json j;
    j["label"] = label(model);
    if (const auto* s = std::get_if<CopulaSpec>(&model)) {
        j["kind"] = "single";
        j["components"] = Json::array({spec_json(*s)});
        j["weights"] = Json::array({1.0});
    } else {
        const auto& m = std::get<MixedCopulaSpec>(model);
        j["kind"] = "mixture";
        j["components"] = Json::array({spec_json(m.upper), spec_json(m.lower)});
        j["weights"] = Json::array({m.upper_weight(), m.lower_weight()});
    }
    return j;
}

CopulaModel copula_model_from_json(const Json& j) {
    const auto& comps = j.at("components");
    if (j.at("kind").get<std::string>() == "single") return spec_from_json(comps.at(0));
    MixedCopulaSpec m;
    m.upper = spec_from_json(comps.at(0));
    m.lower = spec_from_json(comps.at(1));
    m.weight = j.at("weights").at(0).get<double>();
    return m;
}

Json to_json(const CopulaFit& fit) {
    Json j = to_json(fit.model);
    const auto names = parameter_names(fit.model);
    j["params"] = named(names, parameter_values(fit.model));
    j["std_errors"] = fit.std_errors.empty() ? Json(nullptr) : named(names, fit.std_errors);
    j["k"] = fit.parameter_count();
    j["loglik"] = fit.loglik;
    j["aic"] = fit.aic;
    j["tail"] = Json{{"lower", fit.tail.lower}, {"upper", fit.tail.upper}};
    j["kendall_tau"] = fit.kendall_tau;
    j["boundary"] = fit.boundary;
    j["converged"] = fit.converged;
    return j;
}

CopulaFit copula_fit_from_json(const Json& j) {
    CopulaFit fit;
    fit.model = copula_model_from_json(j);
    if (!j.at("std_errors").is_null()) {
        for (const auto& n : parameter_names(fit.model)) fit.std_errors.push_back(j.at("std_errors").at(n).get<double>());
    }
    fit.loglik = j.at("loglik").get<double>();
    fit.aic = j.at("aic").get<double>();
    fit.tail.lower = j.at("tail").at("lower").get<double>();
    fit.tail.upper = j.at("tail").at("upper").get<double>();
    fit.kendall_tau = j.at("kendall_tau").get<double>();
    fit.boundary = j.at("boundary").get<bool>();
    fit.converged = j.at("converged").get<bool>();
    return fit;
}

Json to_json(const CopulaSelection& selection) {
    Json candidates = Json::array();
    for (std::size_t i = 0; i < selection.outcomes.size(); ++i) {
        const auto& o = selection.outcomes[i];
        Json c;
        c["candidate"] = o.candidate.label();
        c["ok"] = o.fit.has_value();
        c["selected"] = i == selection.best_index;
        if (o.fit) {
            c["fit"] = to_json(*o.fit);
        } else {
            c["error"] = o.error;
        }
        candidates.push_back(std::move(c));
    }
    return Json{{"selected", to_json(selection.best)}, {"candidates", std::move(candidates)}};
}

Json to_json(const RiskSeries& r) {
    Json j;
    j["period"] = to_string(r.period);
    j["levels"] = Json{{"covar_down", r.level_down},
                       {"covar_up", r.level_up},
                       {"median_down", r.median_level_down},
                       {"median_up", r.median_level_up}};
    j["dates"] = dates_json(r.dates);
    j["var_down_futures"] = r.var_down_futures;
    j["var_up_futures"] = r.var_up_futures;
    j["var_down_spot"] = r.var_down_spot;
    j["var_up_spot"] = r.var_up_spot;
    j["covar_down"] = r.covar_down;
    j["covar_up"] = r.covar_up;
    j["covar_median_down"] = r.covar_median_down;
    j["covar_median_up"] = r.covar_median_up;
    j["delta_covar_down"] = r.delta_covar_down;
    j["delta_covar_up"] = r.delta_covar_up;
    return j;
}

RiskSeries risk_from_json(const Json& j) {
    RiskSeries r;
    const auto period = j.at("period").get<std::string>();
    r.period = period == "pre" ? Period::pre : period == "post" ? Period::post : Period::whole;
    const auto& levels = j.at("levels");
    r.level_down = levels.at("covar_down").get<double>();
    r.level_up = levels.at("covar_up").get<double>();
    r.median_level_down = levels.at("median_down").get<double>();
    r.median_level_up = levels.at("median_up").get<double>();
    r.dates = dates_from_json(j.at("dates"));
    auto vec = [&](const char* key) { return j.at(key).get<std::vector<double>>(); };
    r.var_down_futures = vec("var_down_futures");
    r.var_up_futures = vec("var_up_futures");
    r.var_down_spot = vec("var_down_spot");
    r.var_up_spot = vec("var_up_spot");
    r.covar_down = vec("covar_down");
    r.covar_up = vec("covar_up");
    r.covar_median_down = vec("covar_median_down");
    r.covar_median_up = vec("covar_median_up");
    r.delta_covar_down = vec("delta_covar_down");
    r.delta_covar_up = vec("delta_covar_up");
    return r;
}

std::string risk_csv_header() {
    return "date,period,var_down_futures,var_up_futures,var_down_spot,var_up_spot,covar_down,covar_up,"
           "covar_median_down,covar_median_up,delta_covar_down,delta_covar_up\n";
}

std::string risk_csv_rows(const RiskSeries& r) {
    std::string out;
    for (std::size_t t = 0; t < r.size(); ++t) {
        out += format_date(r.dates[t]);
        out += ',';
        out += to_string(r.period);
        for (const auto* col : {&r.var_down_futures, &r.var_up_futures, &r.var_down_spot, &r.var_up_spot,
                                &r.covar_down, &r.covar_up, &r.covar_median_down, &r.covar_median_up,
                                &r.delta_covar_down, &r.delta_covar_up}) {
            out += ',';
            out += csv::number((*col)[t]);
        }
        out += '\n';
    }
    return out;
}

Json to_json(const SpilloverTest& t) {
    return Json{{"panel", t.panel},
                {"period", t.period},
                {"hypothesis", t.hypothesis},
                {"lhs", t.lhs_name},
                {"rhs", t.rhs_name},
                {"direction", to_string(t.direction)},
                {"n_lhs", t.lhs_samples.size()},
                {"n_rhs", t.rhs_samples.size()},
                {"dropped", t.dropped},
                {"statistic", t.statistic},
                {"p_value", t.p_value},
                {"stars", significance_stars(t.p_value)},
                {"n_bootstrap", t.n_bootstrap}};
}

}  // namespace ccovar::serialize
