#include "ifcmcp/json_util.hpp"

#include <cmath>

namespace ifcmcp {

double clean_number(double v)
{
    if (!std::isfinite(v))
        return v;
    double r = std::round(v * 1e9) / 1e9;
    if (std::abs(r - v) > 1e-9 * std::max(1.0, std::abs(v)))
        r = v;
    return r == 0.0 ? 0.0 : r;
}

Json to_json(Vec3 v) { return Json::array({clean_number(v.x), clean_number(v.y), clean_number(v.z)}); }
Json to_json(Vec2 v) { return Json::array({clean_number(v.x), clean_number(v.y)}); }

Json step_value_to_json(const StepValue& v)
{
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, StepValue::Unset> || std::is_same_v<T, StepValue::Derived>)
                return nullptr;
            else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                               std::is_same_v<T, std::string>)
                return x;
            else if constexpr (std::is_same_v<T, double>)
                return clean_number(x);
            else if constexpr (std::is_same_v<T, StepValue::Enum>)
                return x.name;
            else if constexpr (std::is_same_v<T, StepValue::Ref>)
                return "#" + std::to_string(x.id);
            else if constexpr (std::is_same_v<T, StepValue::Typed>)
                return x.inner.empty() ? Json(nullptr) : step_value_to_json(x.inner.front());
            else {
                Json arr = Json::array();
                for (const auto& item : x)
                    arr.push_back(step_value_to_json(item));
                return arr;
            }
        },
        v.storage());
}

} // namespace ifcmcp
