#pragma once

#include "ifcmcp/json_util.hpp"

#include <string>
#include <vector>

namespace ifcmcp {

struct SchemaViolation {
    std::string path; // JSON pointer into the instance
    std::string message;
};

/// Validates against the subset used by the tool descriptors: type,
/// properties, required, items, enum, minimum, maximum, exclusiveMinimum,
/// exclusiveMaximum, minItems, maxItems, minLength. Unknown properties are
/// accepted. Never throws; no coercion.
std::vector<SchemaViolation> validate_args(const Json& schema, const Json& instance);

Json violations_json(const std::vector<SchemaViolation>& violations);

} // namespace ifcmcp
