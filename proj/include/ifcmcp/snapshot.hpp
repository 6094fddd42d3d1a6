#pragma once

#include "ifcmcp/model.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace ifcmcp {

inline constexpr double kPixelsPerMetre = 50.0;
inline constexpr double kViewMargin = 1.0;
inline constexpr double kDefaultCutHeight = 1.2;

/// Top-down section of one storey (default: the lowest) cut at
/// elevation + cut_height. Drawn: products spanning the cut, plus those
/// lying between the storey floor and the cut (slabs). Walls are <rect>
/// elements; doors and windows are <g> groups with gap and swing glyphs.
/// The viewBox is fitted to wall axes and product footprints plus 1 m.
///
/// Throws EmptyModel, UnknownGuid, InvalidParams (not a storey).
std::string render_plan(const IfcModel& model, const std::optional<std::string>& storey = std::nullopt,
                        double cut_height = kDefaultCutHeight);

enum class ElevationView { North, South, East, West };
std::optional<ElevationView> parse_elevation_view(std::string_view text);

/// Orthographic view from the named side, farthest products first.
/// Throws EmptyModel.
std::string render_elevation(const IfcModel& model, ElevationView view);

} // namespace ifcmcp
