#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ccovar::csv {

/// Splits RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. A trailing empty line is ignored.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Quotes a field only when it needs it.
std::string quote(std::string_view field);

/// Shortest round-trippable rendering of a double.
std::string number(double value);

}  // namespace ccovar::csv
