#pragma once

#include "ifcmcp/geometry.hpp"
#include "ifcmcp/step.hpp"

#include <json.hpp>

namespace ifcmcp {

/// Field order matters for the tool output contract, so every payload uses
/// the insertion-ordered variant.
using Json = nlohmann::ordered_json;

/// Rounds away floating-point noise (1e-9 m grid) and negative zero.
double clean_number(double v);
Json to_json(Vec3 v);
Json to_json(Vec2 v);

/// Scalar StepValue as JSON (refs become "#id", unset becomes null).
Json step_value_to_json(const StepValue& v);

} // namespace ifcmcp
