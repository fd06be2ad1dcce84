#pragma once

#include <string>

#include "json_out.hpp"
#include "systems.hpp"

namespace hamidx {

/// Parses a system definition document; schema problems raise config errors
/// naming the offending field, (L1) violations raise invalid-argument.
SymmetricField parse_system(const std::string& text);
SymmetricField parse_system_file(const std::string& path);
SymmetricField system_from_json(const Json& doc);

/// Canonical document for a term-backed field; evaluator-backed fields raise
/// a config error.
Json system_to_json(const SymmetricField& field);
std::string serialize_system(const SymmetricField& field);

}  // namespace hamidx
