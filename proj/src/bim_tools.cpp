#include "ifcmcp/bim_tools.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/representation.hpp"
#include "ifcmcp/roof.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ifcmcp {

namespace {

void require_positive(const char* what, double v)
{
    if (!std::isfinite(v) || v <= 0)
        throw Error(ErrorCode::InvalidParams, std::string(what) + " must be a positive number");
}

void require_finite(const char* what, double v)
{
    if (!std::isfinite(v))
        throw Error(ErrorCode::InvalidParams, std::string(what) + " must be finite");
}

EntityId resolve_storey(const IfcModel& model, const std::optional<std::string>& guid)
{
    if (!guid)
        return model.default_storey();
    auto id = model.id_of(*guid);
    if (!id || model.get(*id).class_name != "IFCBUILDINGSTOREY")
        throw Error(ErrorCode::UnknownStorey, "no building storey with GUID '" + *guid + "'");
    return *id;
}

/// Highest storey whose elevation does not exceed `z`, else the lowest one.
EntityId storey_for_elevation(const IfcModel& model, double z)
{
    auto storeys = model.storeys();
    if (storeys.empty())
        throw Error(ErrorCode::UnknownStorey, "model has no building storey");
    EntityId best = storeys.front();
    for (EntityId s : storeys)
        if (model.storey_elevation(s).value_or(0.0) <= z + kLengthTolerance)
            best = s;
    return best;
}

StepValue S(std::string s) { return StepValue::string(std::move(s)); }
StepValue E(std::string s) { return StepValue::enumeration(std::move(s)); }
const StepValue U = StepValue::unset();

/// GlobalId, OwnerHistory, Name, Description, ObjectType, ObjectPlacement,
/// Representation, Tag, then class-specific tail.
EntityId add_product(IfcModel& model, const std::string& cls, const std::string& guid,
                     const std::string& name, EntityId placement, EntityId shape,
                     std::vector<StepValue> tail)
{
    std::vector<StepValue> attrs{S(guid), U, S(name), U, U, StepValue::ref(placement),
                                 StepValue::ref(shape), U};
    for (auto& t : tail)
        attrs.push_back(std::move(t));
    return model.add(cls, std::move(attrs));
}

std::vector<StepValue> predefined_tail(std::string_view cls)
{
    if (cls == "IFCFURNISHINGELEMENT")
        return {};
    if (cls == "IFCWALL")
        return {E("STANDARD")};
    if (cls == "IFCSLAB")
        return {E("FLOOR")};
    if (cls == "IFCSTAIR")
        return {E("STRAIGHT_RUN_STAIR")};
    return {E("NOTDEFINED")};
}

std::string name_or_auto(const IfcModel& model, const std::optional<std::string>& name,
                         std::string_view cls)
{
    if (name && !name->empty())
        return *name;
    return model.next_auto_name(cls);
}

} // namespace

std::string create_wall(IfcModel& model, const WallParams& p)
{
    require_positive("height", p.height);
    require_positive("thickness", p.thickness);
    WallProfile wp = wall_axis_to_profile(p.start, p.end, p.thickness);
    EntityId storey = resolve_storey(model, p.storey);
    double base = model.storey_elevation(storey).value_or(0.0);

    Placement world = wp.placement;
    world.origin.z = base;
    std::string name = name_or_auto(model, p.name, "IFCWALL");
    EntityId placement = model.add_local_placement(world, model.object_placement(storey));
    EntityId shape = extrude_profile(model, wp.profile, p.height);
    std::string guid = model.fresh_guid();
    EntityId wall = add_product(model, "IFCWALL", guid, name, placement, shape, predefined_tail("IFCWALL"));
    model.contain_in(wall, storey);
    return guid;
}

std::vector<std::string> create_wall_chain(IfcModel& model, const std::vector<Point2>& points,
                                           double height, double thickness, bool close,
                                           const std::optional<std::string>& storey)
{
    if (points.size() < 2)
        throw Error(ErrorCode::InvalidParams, "a wall chain needs at least 2 points");
    require_positive("height", height);
    require_positive("thickness", thickness);
    std::vector<std::pair<Point2, Point2>> segments;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        segments.emplace_back(points[i], points[i + 1]);
    if (close && points.size() >= 3 && length(points.back() - points.front()) >= kLengthTolerance)
        segments.emplace_back(points.back(), points.front());
    // Validate every segment before the first wall is emitted.
    for (const auto& [a, b] : segments) {
        if (!is_finite(a) || !is_finite(b))
            throw Error(ErrorCode::InvalidParams, "chain points must be finite");
        if (length(b - a) < kLengthTolerance)
            throw Error(ErrorCode::InvalidParams, "consecutive chain points must be distinct");
    }
    resolve_storey(model, storey);
    std::vector<std::string> guids;
    for (const auto& [a, b] : segments)
        guids.push_back(create_wall(model, WallParams{a, b, height, thickness, storey, std::nullopt}));
    return guids;
}

std::string create_slab(IfcModel& model, const Polygon2& outline, double thickness,
                        double elevation, const std::optional<std::string>& name)
{
    require_positive("thickness", thickness);
    require_finite("elevation", elevation);
    EntityId storey = storey_for_elevation(model, elevation);
    std::string slab_name = name_or_auto(model, name, "IFCSLAB");
    EntityId placement = model.add_local_placement(Placement{{0, 0, elevation}, {0, 0, 1}, {1, 0, 0}},
                                                   model.object_placement(storey));
    EntityId shape = extrude_profile(model, outline, thickness,
                                     Placement{{0, 0, -thickness}, {0, 0, 1}, {1, 0, 0}});
    std::string guid = model.fresh_guid();
    EntityId slab = add_product(model, "IFCSLAB", guid, slab_name, placement, shape, predefined_tail("IFCSLAB"));
    model.contain_in(slab, storey);
    return guid;
}

std::optional<RoofStyle> parse_roof_style(std::string_view text)
{
    if (text == "hip")
        return RoofStyle::Hip;
    if (text == "gable")
        return RoofStyle::Gable;
    if (text == "flat")
        return RoofStyle::Flat;
    return std::nullopt;
}

RoofResult create_roof(IfcModel& model, const Polygon2& outline, RoofStyle style, double slope_deg,
                       double base_z, const std::optional<std::string>& name)
{
    require_finite("base_z", base_z);
    RoofResult result;
    result.base_z = base_z;
    result.outline = outline.vertices();

    std::optional<TriMesh> mesh;
    if (style != RoofStyle::Flat) {
        try {
            if (style == RoofStyle::Hip)
                mesh = hip_roof_solid(outline, slope_deg, 0.0);
            else
                mesh = weighted_roof_solid(outline, gable_edge_weights(outline), slope_deg, 0.0);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SkeletonFailure)
                throw;
            result.warnings.push_back(std::string("straight skeleton failed (") + e.what() +
                                      "); flat roof of 0.2 m used instead");
        }
    }

    EntityId storey = storey_for_elevation(model, base_z);
    std::string roof_name = name_or_auto(model, name, "IFCROOF");
    EntityId placement = model.add_local_placement(Placement{{0, 0, base_z}, {0, 0, 1}, {1, 0, 0}},
                                                   model.object_placement(storey));
    EntityId shape = mesh ? mesh_to_brep(model, *mesh) : extrude_profile(model, outline, kFlatRoofThickness);
    const char* predefined = !mesh ? "FLAT_ROOF" : style == RoofStyle::Hip ? "HIP_ROOF" : "GABLE_ROOF";
    result.guid = model.fresh_guid();
    EntityId roof = add_product(model, "IFCROOF", result.guid, roof_name, placement, shape, {E(predefined)});
    model.contain_in(roof, storey);
    return result;
}

RoofResult create_roof_over_walls(IfcModel& model, const std::vector<std::string>& wall_guids,
                                  RoofStyle style, double slope_deg)
{
    struct Segment {
        Point2 a, b;
    };
    std::vector<Segment> segments;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& g : wall_guids) {
        EntityId id = model.require(g);
        auto axis = wall_axis(model, id);
        if (!axis)
            throw Error(ErrorCode::InvalidParams, "element '" + g + "' has no readable wall axis");
        segments.push_back({{axis->start.x, axis->start.y}, {axis->end.x, axis->end.y}});
        top = std::max(top, std::max(axis->start.z, axis->end.z) + axis->height);
    }
    if (segments.size() < 3)
        throw Error(ErrorCode::WallsNotClosed, "at least 3 walls are needed to close an outline");

    // Walk the circuit, accepting segments in either direction.
    std::vector<bool> used(segments.size(), false);
    std::vector<Point2> outline{segments[0].a};
    Point2 cursor = segments[0].b;
    used[0] = true;
    for (std::size_t step = 1; step < segments.size(); ++step) {
        bool found = false;
        for (std::size_t i = 0; i < segments.size() && !found; ++i) {
            if (used[i])
                continue;
            if (length(segments[i].a - cursor) < kLengthTolerance) {
                outline.push_back(cursor);
                cursor = segments[i].b;
                found = used[i] = true;
            } else if (length(segments[i].b - cursor) < kLengthTolerance) {
                outline.push_back(cursor);
                cursor = segments[i].a;
                found = used[i] = true;
            }
        }
        if (!found)
            throw Error(ErrorCode::WallsNotClosed, "wall axes do not form a single closed circuit");
    }
    if (length(cursor - outline.front()) >= kLengthTolerance)
        throw Error(ErrorCode::WallsNotClosed, "wall axes do not return to the first wall");
    return create_roof(model, Polygon2(std::move(outline)), style, slope_deg, top);
}

namespace {

OpeningResult create_opening_filler(IfcModel& model, const OpeningParams& p, bool door)
{
    const std::string cls = door ? "IFCDOOR" : "IFCWINDOW";
    double width = p.width.value_or(door ? kDoorWidth : kWindowWidth);
    double height = p.height.value_or(door ? kDoorHeight : kWindowHeight);
    double sill = door ? 0.0 : p.sill_height.value_or(kWindowSill);
    require_positive("width", width);
    require_positive("height", height);
    require_finite("sill_height", sill);

    // Host wall: named, or the wall whose axis passes closest to `position`.
    std::optional<EntityId> wall;
    std::optional<WallAxis> axis;
    if (p.wall_guid) {
        wall = model.require(*p.wall_guid);
        const auto& c = model.get(*wall).class_name;
        if (c != "IFCWALL" && c != "IFCWALLSTANDARDCASE")
            throw Error(ErrorCode::InvalidParams, "host '" + *p.wall_guid + "' is not a wall");
        axis = wall_axis(model, *wall);
        if (!axis)
            throw Error(ErrorCode::InvalidParams, "host wall has no readable axis");
    } else if (p.position) {
        double best = std::numeric_limits<double>::infinity();
        for (const char* c : {"IFCWALL", "IFCWALLSTANDARDCASE"})
            for (EntityId id : model.ids_of_class(c))
                if (auto a = wall_axis(model, id)) {
                    double d = point_segment_distance({p.position->x, p.position->y},
                                                      {a->start.x, a->start.y}, {a->end.x, a->end.y});
                    if (d < best - 1e-12) {
                        best = d;
                        wall = id;
                        axis = a;
                    }
                }
        if (!wall)
            throw Error(ErrorCode::InvalidParams, "model has no wall to host the opening");
    } else {
        throw Error(ErrorCode::InvalidParams, "either wall_guid or position is required");
    }

    double along = 0.0;
    if (p.position_along_axis) {
        along = *p.position_along_axis;
    } else if (p.position) {
        double t = 0.0;
        point_segment_distance({p.position->x, p.position->y}, {axis->start.x, axis->start.y},
                               {axis->end.x, axis->end.y}, &t);
        along = t * axis->length;
    } else {
        throw Error(ErrorCode::InvalidParams, "position_along_axis or position is required");
    }
    require_finite("position_along_axis", along);

    const double tol = kLengthTolerance;
    if (along - width / 2 < -tol || along + width / 2 > axis->length + tol)
        throw Error(ErrorCode::OpeningOutOfBounds, "opening of width " + format_step_real(width) +
                                                       " at " + format_step_real(along) +
                                                       " m exceeds the wall length " +
                                                       format_step_real(axis->length));
    if (sill < -tol || sill + height > axis->height + tol)
        throw Error(ErrorCode::OpeningOutOfBounds,
                    "opening from " + format_step_real(sill) + " to " + format_step_real(sill + height) +
                        " m exceeds the wall height " + format_step_real(axis->height));

    std::string name = name_or_auto(model, p.name, cls);
    Transform frame = axis->frame;
    Placement world{frame.apply({along - width / 2, 0.0, sill}), frame.z, frame.x};
    Polygon2 profile({{0.0, -axis->thickness / 2}, {width, -axis->thickness / 2},
                      {width, axis->thickness / 2}, {0.0, axis->thickness / 2}});

    EntityId opening_pl = model.add_local_placement(world, model.object_placement(*wall));
    EntityId opening_shape = extrude_profile(model, profile, height);
    std::string opening_guid = model.fresh_guid();
    EntityId opening = add_product(model, "IFCOPENINGELEMENT", opening_guid,
                                   model.next_auto_name("IFCOPENINGELEMENT"), opening_pl, opening_shape,
                                   {E("OPENING")});
    model.add("IFCRELVOIDSELEMENT", {S(model.fresh_guid()), U, U, U, StepValue::ref(*wall),
                                     StepValue::ref(opening)});

    EntityId filler_pl = model.add_local_placement(world, opening_pl);
    EntityId filler_shape = extrude_profile(model, profile, height);
    std::string guid = model.fresh_guid();
    std::vector<StepValue> tail{StepValue::real(height), StepValue::real(width)};
    if (door) {
        tail.push_back(E("DOOR"));
        tail.push_back(E("SINGLE_SWING_LEFT"));
    } else {
        tail.push_back(E("WINDOW"));
        tail.push_back(E("SINGLE_PANEL"));
    }
    tail.push_back(U);
    EntityId filler = add_product(model, cls, guid, name, filler_pl, filler_shape, std::move(tail));
    model.add("IFCRELFILLSELEMENT", {S(model.fresh_guid()), U, U, U, StepValue::ref(opening),
                                     StepValue::ref(filler)});
    if (auto storey = model.container_of(*wall))
        model.contain_in(filler, *storey);
    else
        model.contain_in(filler, model.default_storey());

    return OpeningResult{guid, opening_guid, model.guid_of(*wall), along, width, height, sill};
}

} // namespace

OpeningResult create_door(IfcModel& model, const OpeningParams& p)
{
    return create_opening_filler(model, p, true);
}

OpeningResult create_window(IfcModel& model, const OpeningParams& p)
{
    return create_opening_filler(model, p, false);
}

TriMesh stair_mesh(double total_rise, double total_run, int step_count, double width)
{
    double riser = total_rise / step_count;
    double tread = total_run / step_count;
    // Side profile in (run, rise), swept across the width.
    std::vector<Vec2> ring{{0.0, 0.0}};
    for (int i = 0; i < step_count; ++i) {
        ring.push_back({i * tread, (i + 1) * riser});
        ring.push_back({(i + 1) * tread, (i + 1) * riser});
    }
    ring.push_back({total_run, 0.0});
    TriMesh side = extrusion_mesh(Polygon2(std::move(ring)), {0, 0, 1}, width);
    Transform to_stair{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}, {0, width / 2, 0}};
    return transformed(side, to_stair);
}

StairResult create_stairs(IfcModel& model, const StairParams& p)
{
    if (p.step_count < 2)
        throw Error(ErrorCode::InvalidParams, "step_count must be at least 2");
    require_positive("total_rise", p.total_rise);
    require_positive("total_run", p.total_run);
    require_positive("width", p.width);
    require_finite("direction_deg", p.direction_deg);
    if (!is_finite(p.origin))
        throw Error(ErrorCode::InvalidParams, "origin must be finite");
    EntityId storey = p.storey ? resolve_storey(model, p.storey) : storey_for_elevation(model, p.origin.z);
    TriMesh mesh = stair_mesh(p.total_rise, p.total_run, p.step_count, p.width);
    mesh.validate();

    double rad = p.direction_deg * std::numbers::pi / 180.0;
    std::string name = name_or_auto(model, p.name, "IFCSTAIR");
    EntityId placement = model.add_local_placement(
        Placement{p.origin, {0, 0, 1}, {std::cos(rad), std::sin(rad), 0}}, model.object_placement(storey));
    EntityId shape = mesh_to_brep(model, mesh);
    StairResult r{model.fresh_guid(), p.total_rise / p.step_count, p.total_run / p.step_count};
    EntityId stair = add_product(model, "IFCSTAIR", r.guid, name, placement, shape, predefined_tail("IFCSTAIR"));
    model.contain_in(stair, storey);
    return r;
}

bool is_mesh_class_allowed(std::string_view upper)
{
    static const std::vector<std::string_view> allowed{
        "IFCBUILDINGELEMENTPROXY", "IFCFURNISHINGELEMENT", "IFCROOF", "IFCSTAIR", "IFCWALL",
        "IFCSLAB", "IFCCOLUMN", "IFCBEAM", "IFCMEMBER"};
    return std::find(allowed.begin(), allowed.end(), upper) != allowed.end();
}

std::string create_mesh_element(IfcModel& model, std::string_view ifc_class, const TriMesh& mesh,
                                const std::optional<std::string>& name,
                                const std::optional<std::string>& storey)
{
    std::string cls = step_class_name(ifc_class);
    if (!is_mesh_class_allowed(cls))
        throw Error(ErrorCode::ClassNotAllowed,
                    "class '" + std::string(ifc_class) + "' is not allowed for mesh elements");
    EntityId st = resolve_storey(model, storey);
    mesh.validate();
    std::string element_name = name_or_auto(model, name, cls);
    EntityId placement = model.add_local_placement(Placement{}, model.object_placement(st));
    EntityId shape = mesh_to_brep(model, mesh);
    std::string guid = model.fresh_guid();
    EntityId id = add_product(model, cls, guid, element_name, placement, shape, predefined_tail(cls));
    model.contain_in(id, st);
    return guid;
}

std::string create_wall_type(IfcModel& model, const std::string& name,
                             const std::vector<std::string>& walls)
{
    std::vector<EntityId> targets;
    for (const auto& g : walls) {
        EntityId id = model.require(g);
        const auto& c = model.get(id).class_name;
        if (c != "IFCWALL" && c != "IFCWALLSTANDARDCASE")
            throw Error(ErrorCode::InvalidParams, "'" + g + "' is not a wall");
        targets.push_back(id);
    }
    std::string guid = model.fresh_guid();
    EntityId type = model.add("IFCWALLTYPE", {S(guid), U, S(name.empty() ? "wall" : name), U, U, U, U,
                                              U, U, E("STANDARD")});
    model.set_visible(type, false);
    if (!targets.empty())
        model.add("IFCRELDEFINESBYTYPE", {S(model.fresh_guid()), U, U, U, StepValue::refs(targets),
                                          StepValue::ref(type)});
    return guid;
}

std::string create_storey(IfcModel& model, const std::string& name, double elevation)
{
    require_finite("elevation", elevation);
    auto building = model.building();
    if (!building)
        throw Error(ErrorCode::InvalidParams, "model has no building to hold the storey");
    std::string storey_name = name_or_auto(model, name.empty() ? std::nullopt : std::optional(name),
                                           "IFCBUILDINGSTOREY");
    EntityId placement = model.add_local_placement(Placement{{0, 0, elevation}, {0, 0, 1}, {1, 0, 0}},
                                                   model.object_placement(*building));
    std::string guid = model.fresh_guid();
    EntityId storey = model.add("IFCBUILDINGSTOREY", {S(guid), U, S(storey_name), U, U,
                                                      StepValue::ref(placement), U, U, E("ELEMENT"),
                                                      StepValue::real(elevation)});
    model.aggregate(*building, storey);
    return guid;
}

} // namespace ifcmcp
