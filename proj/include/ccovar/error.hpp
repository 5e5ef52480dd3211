#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ccovar {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see ccovar.h) and must not be reordered.
enum class ErrorCode : int {
    ok = 0,
    file_missing = 1,
    parse_error = 2,
    non_positive_price = 3,
    duplicate_date = 4,
    too_short = 5,
    empty_intersection = 6,
    empty_sub_period = 7,
    degenerate_series = 8,
    df_non_positive = 9,
    invalid_params = 10,
    probability_out_of_range = 11,
    argument_out_of_range = 12,
    optimizer_failed = 13,
    all_fits_failed = 14,
    root_not_bracketed = 15,
    length_mismatch = 16,
    manifest_incomplete = 17,
    config_error = 18,
    io_error = 19,
    internal = 99,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row = std::nullopt)
        : std::runtime_error(message), code_(code), row_(row) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// 1-based data row for ingestion errors.
    [[nodiscard]] std::optional<std::size_t> row() const noexcept { return row_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> row_;
};

}  // namespace ccovar
