#pragma once

#include "ifcmcp/geometry.hpp"
#include "ifcmcp/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ifcmcp {

struct WallParams {
    Point2 start;
    Point2 end;
    double height = 0.0;
    double thickness = 0.0;
    std::optional<std::string> storey; // storey GUID; default is the lowest storey
    std::optional<std::string> name;
};

std::string create_wall(IfcModel& model, const WallParams& p);

/// One wall per segment, plus the closing segment when `close` is set.
std::vector<std::string> create_wall_chain(IfcModel& model, const std::vector<Point2>& points,
                                           double height, double thickness, bool close,
                                           const std::optional<std::string>& storey = std::nullopt);

/// Top face at `elevation`, extruded downward by `thickness`.
std::string create_slab(IfcModel& model, const Polygon2& outline, double thickness,
                        double elevation, const std::optional<std::string>& name = std::nullopt);

enum class RoofStyle { Hip, Gable, Flat };
std::optional<RoofStyle> parse_roof_style(std::string_view text);

inline constexpr double kFlatRoofThickness = 0.2;

struct RoofResult {
    std::string guid;
    double base_z = 0.0;
    std::vector<Point2> outline;
    std::vector<std::string> warnings;
};

/// Hip and gable roofs are faceted breps from the straight skeleton; flat
/// roofs (and the fallback when the skeleton fails) are 0.2 m extrusions.
RoofResult create_roof(IfcModel& model, const Polygon2& outline, RoofStyle style, double slope_deg,
                       double base_z, const std::optional<std::string>& name = std::nullopt);

/// Outline from the wall axes, base at the highest wall top.
RoofResult create_roof_over_walls(IfcModel& model, const std::vector<std::string>& wall_guids,
                                  RoofStyle style, double slope_deg);

inline constexpr double kDoorWidth = 0.9;
inline constexpr double kDoorHeight = 2.1;
inline constexpr double kWindowWidth = 1.2;
inline constexpr double kWindowHeight = 1.4;
inline constexpr double kWindowSill = 0.9;

struct OpeningParams {
    std::optional<std::string> wall_guid;
    /// Used when no wall is named: projected onto the nearest wall axis.
    std::optional<Point3> position;
    /// Distance from the wall start to the opening centre.
    std::optional<double> position_along_axis;
    std::optional<double> sill_height;
    std::optional<double> width;
    std::optional<double> height;
    std::optional<std::string> name;
};

struct OpeningResult {
    std::string element;
    std::string opening;
    std::string wall;
    double position_along_axis = 0.0;
    double width = 0.0;
    double height = 0.0;
    double sill_height = 0.0;
};

OpeningResult create_door(IfcModel& model, const OpeningParams& p);
OpeningResult create_window(IfcModel& model, const OpeningParams& p);

struct StairParams {
    Point3 origin;
    double direction_deg = 0.0;
    double total_rise = 0.0;
    double total_run = 0.0;
    int step_count = 0;
    double width = 0.0;
    std::optional<std::string> name;
    std::optional<std::string> storey;
};

struct StairResult {
    std::string guid;
    double riser = 0.0;
    double tread = 0.0;
};

StairResult create_stairs(IfcModel& model, const StairParams& p);

/// Closed staircase solid in stair-local coordinates (x along the run).
TriMesh stair_mesh(double total_rise, double total_run, int step_count, double width);

bool is_mesh_class_allowed(std::string_view upper);

std::string create_mesh_element(IfcModel& model, std::string_view ifc_class, const TriMesh& mesh,
                                const std::optional<std::string>& name,
                                const std::optional<std::string>& storey = std::nullopt);

/// Wall type object, hidden in the session. Optionally typed onto walls.
std::string create_wall_type(IfcModel& model, const std::string& name,
                             const std::vector<std::string>& walls = {});

std::string create_storey(IfcModel& model, const std::string& name, double elevation);

} // namespace ifcmcp
