#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace hamidx {

using Json = nlohmann::ordered_json;

/// Canonical text form: keys in insertion order, two-space indentation,
/// doubles printed with 17 significant digits.
std::string dump_json(const Json& value, int indent = 2);

/// One-line variant used for diagnostics.
std::string dump_json_line(const Json& value);

}  // namespace hamidx
