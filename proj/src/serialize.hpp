#pragma once

// JSON and CSV encodings of the pipeline's results. Key order is fixed
// (ordered_json) so equal results always serialize to equal bytes.

#include "ccovar/copula.hpp"
#include "ccovar/marginal.hpp"
#include "ccovar/risk.hpp"
#include "ccovar/spillover.hpp"
#include "ccovar/timeseries.hpp"

#include <json.hpp>

#include <string>

namespace ccovar::serialize {

using Json = nlohmann::ordered_json;

Json to_json(const TestStatistic& t);

/// With `include_series` the per-date vectors are written too, which makes
/// the result loadable again by marginal_from_json.
Json to_json(const MarginalFit& fit, bool include_series);
MarginalFit marginal_from_json(const Json& j);

Json to_json(const ResidualDiagnostics& d);
Json to_json(const OrderSearchEntry& e);

/// Natural parameter names of a copula model, in std_errors order.
std::vector<std::string> parameter_names(const CopulaModel& model);
std::vector<double> parameter_values(const CopulaModel& model);

Json to_json(const CopulaModel& model);
CopulaModel copula_model_from_json(const Json& j);
Json to_json(const CopulaFit& fit);
CopulaFit copula_fit_from_json(const Json& j);
Json to_json(const CopulaSelection& selection);

Json to_json(const RiskSeries& risk);
RiskSeries risk_from_json(const Json& j);

/// One row per date: date, period and every risk measure.
std::string risk_csv_header();
std::string risk_csv_rows(const RiskSeries& risk);

Json to_json(const SpilloverTest& test);

}  // namespace ccovar::serialize
