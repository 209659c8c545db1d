#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace cgs::test {

/// Small JSON Schema subset: type, enum, const, required, properties,
/// additionalProperties (bool), items, minimum, pattern, $ref into $defs.
std::vector<std::string> validate_schema(const nlohmann::json& schema, const nlohmann::json& doc);

}  // namespace cgs::test
