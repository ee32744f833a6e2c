#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace sumer {

/// Parses the TOML subset used by experiment configs into a JSON object:
/// comments, [table] and [dotted.table] headers, bare or quoted keys,
/// basic strings, integers, floats, booleans, (nested, multi-line) arrays
/// and inline tables. Throws ValidationError with a line number.
nlohmann::json parse_toml(const std::string& text);

}  // namespace sumer
