#pragma once

#include "ifcmcp/geometry.hpp"
#include "ifcmcp/model.hpp"

#include <optional>
#include <vector>

namespace ifcmcp {

/// Emits profile + IFCEXTRUDEDAREASOLID + 'Body'/'SweptSolid' shape
/// representation and returns the IFCPRODUCTDEFINITIONSHAPE id. The solid
/// sits at `position` inside the product's placement and extrudes along its
/// local +Z. Axis-aligned rectangles use IFCRECTANGLEPROFILEDEF.
///
/// Throws NonPositiveDepth.
EntityId extrude_profile(IfcModel& model, const Polygon2& profile, double depth,
                         const Placement& position = {});

/// Faceted brep of triangular faces; vertices closer than 1e-9 m are shared.
/// Validates first, so a failing mesh leaves the model untouched.
EntityId mesh_to_brep(IfcModel& model, const TriMesh& mesh);

struct ExtrusionBody {
    Polygon2 profile;
    bool rectangle = false;
    Transform position; // solid frame inside the product frame
    Vec3 direction{0, 0, 1};
    double depth = 0.0;
};

struct BodyGeometry {
    std::vector<ExtrusionBody> extrusions;
    TriMesh brep; // product coordinates
};

/// True when the product has a representation with body items.
bool has_body(const IfcModel& model, EntityId product);

/// Reads the supported body items (extrusions, faceted breps). Items of
/// other kinds are skipped.
std::optional<BodyGeometry> read_body(const IfcModel& model, EntityId product);

/// Tessellated body in product coordinates.
TriMesh body_mesh_local(const BodyGeometry& body);

/// Tessellated body in world coordinates; empty when nothing is readable.
TriMesh world_mesh(const IfcModel& model, EntityId product);

/// Straight wall read back from its first extrusion: profile x-extent along
/// the axis, y-extent across it.
struct WallAxis {
    Vec3 start;
    Vec3 end;
    double length = 0.0;
    double thickness = 0.0;
    double height = 0.0;
    Transform frame; // world frame, x along the axis, origin at start
};
std::optional<WallAxis> wall_axis(const IfcModel& model, EntityId wall);

/// Extrusion depth of the first extrusion item.
std::optional<double> extrusion_depth(const IfcModel& model, EntityId product);

/// Area of the first extrusion's profile.
std::optional<double> profile_area(const IfcModel& model, EntityId product);

} // namespace ifcmcp
