#include "ccovar/error.hpp"

namespace ccovar {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ok: return "Ok";
        case ErrorCode::file_missing: return "FileMissing";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::non_positive_price: return "NonPositivePrice";
        case ErrorCode::duplicate_date: return "DuplicateDate";
        case ErrorCode::too_short: return "TooShort";
        case ErrorCode::empty_intersection: return "EmptyIntersection";
        case ErrorCode::empty_sub_period: return "EmptySubPeriod";
        case ErrorCode::degenerate_series: return "DegenerateSeries";
        case ErrorCode::df_non_positive: return "DfNonPositive";
        case ErrorCode::invalid_params: return "InvalidParams";
        case ErrorCode::probability_out_of_range: return "ProbabilityOutOfRange";
        case ErrorCode::argument_out_of_range: return "ArgumentOutOfRange";
        case ErrorCode::optimizer_failed: return "OptimizerFailed";
        case ErrorCode::all_fits_failed: return "AllFitsFailed";
        case ErrorCode::root_not_bracketed: return "RootNotBracketed";
        case ErrorCode::length_mismatch: return "LengthMismatch";
        case ErrorCode::manifest_incomplete: return "ManifestIncomplete";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace ccovar
