#include "ifcmcp/bim_tools.hpp"
#include "ifcmcp/error.hpp"
#include "ifcmcp/mcp_server.hpp"
#include "ifcmcp/query_dsl.hpp"
#include "ifcmcp/scene_query.hpp"
#include "ifcmcp/snapshot.hpp"

#include <chrono>
#include <cmath>

namespace ifcmcp {

namespace {

// --- schema fragments -------------------------------------------------------

Json number(const std::string& description)
{
    return Json{{"type", "number"}, {"description", description}};
}

Json positive(const std::string& description)
{
    return Json{{"type", "number"}, {"exclusiveMinimum", 0}, {"description", description}};
}

Json text(const std::string& description)
{
    return Json{{"type", "string"}, {"description", description}};
}

Json guid_field(const std::string& description)
{
    return Json{{"type", "string"}, {"minLength", 22}, {"description", description}};
}

Json guid_list(const std::string& description, int min_items = 1)
{
    return Json{{"type", "array"},
                {"items", {{"type", "string"}}},
                {"minItems", min_items},
                {"description", description}};
}

Json point(int dims, const std::string& description)
{
    return Json{{"type", "array"},
                {"items", {{"type", "number"}}},
                {"minItems", dims},
                {"maxItems", dims},
                {"description", description}};
}

Json point_list(int min_items, const std::string& description)
{
    return Json{{"type", "array"}, {"items", point(2, "[x, y] in metres")}, {"minItems", min_items},
                {"description", description}};
}

Json object(Json properties, std::vector<std::string> required = {})
{
    return Json{{"type", "object"}, {"properties", std::move(properties)}, {"required", required}};
}

// --- argument readers ---------------------------------------------------------

std::optional<std::string> opt_string(const Json& args, const char* key)
{
    if (auto it = args.find(key); it != args.end() && it->is_string())
        return it->get<std::string>();
    return std::nullopt;
}

std::optional<double> opt_number(const Json& args, const char* key)
{
    if (auto it = args.find(key); it != args.end() && it->is_number())
        return it->get<double>();
    return std::nullopt;
}

Point2 to_point2(const Json& v)
{
    return {v[0].get<double>(), v[1].get<double>()};
}

Point3 to_point3(const Json& v)
{
    return {v[0].get<double>(), v[1].get<double>(), v.size() > 2 ? v[2].get<double>() : 0.0};
}

std::vector<Point2> to_points(const Json& v)
{
    std::vector<Point2> out;
    for (const auto& p : v)
        out.push_back(to_point2(p));
    return out;
}

std::vector<std::string> to_strings(const Json& v)
{
    std::vector<std::string> out;
    for (const auto& s : v)
        out.push_back(s.get<std::string>());
    return out;
}

std::vector<EntityId> require_all(const IfcModel& model, const std::vector<std::string>& guids)
{
    std::vector<EntityId> ids;
    for (const auto& g : guids)
        ids.push_back(model.require(g));
    return ids;
}

StepValue json_scalar(const Json& v)
{
    if (v.is_null())
        return StepValue::unset();
    if (v.is_boolean())
        return StepValue::boolean(v.get<bool>());
    if (v.is_number_integer())
        return StepValue::integer(v.get<std::int64_t>());
    if (v.is_number())
        return StepValue::real(v.get<double>());
    if (v.is_string())
        return StepValue::string(v.get<std::string>());
    throw Error(ErrorCode::TypeMismatch, "expected a scalar value, got " + std::string(v.type_name()));
}

Json opening_json(const OpeningResult& r, const char* key)
{
    return Json{{key, r.element},
                {"guid", r.element},
                {"opening", r.opening},
                {"wall", r.wall},
                {"position_along_axis", clean_number(r.position_along_axis)},
                {"width", clean_number(r.width)},
                {"height", clean_number(r.height)},
                {"sill_height", clean_number(r.sill_height)}};
}

Json roof_json(const RoofResult& r)
{
    Json outline = Json::array();
    for (auto p : r.outline)
        outline.push_back(to_json(p));
    return Json{{"guid", r.guid}, {"base_z", clean_number(r.base_z)}, {"outline", outline}, {"warnings", r.warnings}};
}

RoofStyle roof_style(const Json& args)
{
    auto s = parse_roof_style(opt_string(args, "style").value_or("hip"));
    if (!s)
        throw Error(ErrorCode::InvalidParams, "style must be hip, gable or flat");
    return *s;
}

OpeningParams opening_params(const Json& args)
{
    OpeningParams p;
    p.wall_guid = opt_string(args, "wall_guid");
    if (auto it = args.find("position"); it != args.end())
        p.position = to_point3(*it);
    p.position_along_axis = opt_number(args, "position_along_axis");
    p.sill_height = opt_number(args, "sill_height");
    p.width = opt_number(args, "width");
    p.height = opt_number(args, "height");
    p.name = opt_string(args, "name");
    return p;
}

// Mutating tools run on a copy so that a failure leaves the model as it was.
template <class F>
Json transact(Session& s, F&& f)
{
    IfcModel backup = s.model();
    try {
        Json out = f(s.model());
        s.model().mark_dirty();
        return out;
    } catch (...) {
        s.model() = std::move(backup);
        throw;
    }
}

void add(ToolRegistry& r, ToolGroup group, std::string name, std::string description, Json schema,
         ToolAnnotations annotations, ToolHandler handler)
{
    r.add(ToolDef{ToolDescriptor{std::move(name), std::move(description), std::move(schema), annotations, group},
                  std::move(handler)});
}

constexpr ToolAnnotations kRead{true, false};
constexpr ToolAnnotations kWrite{false, false};
constexpr ToolAnnotations kDestroy{false, true};

void register_query(ToolRegistry& r)
{
    add(r, ToolGroup::Query, "get_scene_info",
        "List the objects of the model (project, site, building, storeys, products, types) with name, type, "
        "location, visibility, selection, GUID and IFC class. Paged by offset and limit.",
        object({{"offset", {{"type", "integer"}, {"minimum", 0}, {"description", "First object index (default 0)"}}},
                {"limit", {{"type", "integer"}, {"minimum", 1}, {"description", "Page size (default 200)"}}}}),
        kRead, [](Session& s, const Json& a) {
            return get_scene_info(s.model(), a.value("offset", std::int64_t{0}),
                                  a.value("limit", kDefaultSceneLimit));
        });

    add(r, ToolGroup::Query, "get_object_info",
        "Detailed record of one entity by GUID: attributes, placement, bounding box, dimensions, openings, "
        "property sets, classifications, container, type and owner history.",
        object({{"guid", guid_field("GlobalId of the entity")}}, {"guid"}), kRead,
        [](Session& s, const Json& a) { return get_object_info(s.model(), a["guid"].get<std::string>()); });

    add(r, ToolGroup::Query, "get_ifc_scene_overview",
        "Summary of the model: element counts per class, storeys with elevations, total floor area and "
        "overall bounding box.",
        object(Json::object()), kRead, [](Session& s, const Json&) { return get_ifc_scene_overview(s.model()); });

    add(r, ToolGroup::Query, "get_door_properties",
        "Door dimensions, host wall, opening, position along the wall axis, swing and storey.",
        object({{"guid", guid_field("GlobalId of an IfcDoor")}}, {"guid"}), kRead,
        [](Session& s, const Json& a) { return get_door_properties(s.model(), a["guid"].get<std::string>()); });

    add(r, ToolGroup::Query, "execute_ifc_query",
        "Run a pipeline query over the model. Syntax: selector | stage | ... | terminal. Selectors: walls, "
        "slabs, roofs, doors, windows, stairs, spaces, storeys, products, types, all, or an IFC class name. "
        "Stages: filter(expr), then one of count, sum(expr), min(expr), max(expr), avg(expr), list(expr), "
        "select(expr, ...), set(.Attr | pset(\"Set\").Prop, expr), rename(\"template {name}\"). Fields: area, "
        "length, height, thickness, width, elevation, storey, name, guid, class, selected, visible; attributes "
        "as .Name, .Description, .ObjectType, .Tag, .LongName; properties as pset(\"Set\").Prop. "
        "Example: walls | filter(height > 3) | sum(length).",
        object({{"query", {{"type", "string"}, {"minLength", 1}, {"description", "Query text"}}}}, {"query"}),
        kWrite, [](Session& s, const Json& a) {
            QueryProgram program = parse_query(a["query"].get<std::string>());
            if (program.is_mutation() && !s.group_enabled(ToolGroup::Edit))
                throw Error(ErrorCode::GroupDisabled, "set() and rename() need the edit tool group");
            QueryResult q = run_query(s.model(), program);
            Json out{{"result", q.result}, {"log", q.log}};
            if (program.is_mutation()) {
                out["changed"] = q.changed;
                if (!q.changed.empty())
                    s.model().mark_dirty();
            }
            return out;
        });
}

void register_create(ToolRegistry& r)
{
    add(r, ToolGroup::Create, "create_wall",
        "Create a straight wall from start to end (metres, plan coordinates) with the given height and "
        "thickness. The wall is placed on the storey (default: the lowest) and returns its GUID.",
        object({{"start", point(2, "[x, y] of the axis start")},
                {"end", point(2, "[x, y] of the axis end")},
                {"height", positive("Wall height in metres")},
                {"thickness", positive("Wall thickness in metres")},
                {"storey", guid_field("Storey GUID (optional)")},
                {"name", text("Wall name (optional)")}},
               {"start", "end", "height", "thickness"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                WallParams p{to_point2(a["start"]), to_point2(a["end"]), a["height"].get<double>(),
                             a["thickness"].get<double>(), opt_string(a, "storey"), opt_string(a, "name")};
                return Json{{"guid", create_wall(m, p)}};
            });
        });

    add(r, ToolGroup::Create, "create_wall_chain",
        "Create one wall per consecutive pair of points; with close=true a final wall returns to the first "
        "point. Returns the wall GUIDs in order.",
        object({{"points", point_list(2, "Axis points")},
                {"height", positive("Wall height in metres")},
                {"thickness", positive("Wall thickness in metres")},
                {"close", {{"type", "boolean"}, {"description", "Close the loop (default false)"}}},
                {"storey", guid_field("Storey GUID (optional)")}},
               {"points", "height", "thickness"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                auto guids = create_wall_chain(m, to_points(a["points"]), a["height"].get<double>(),
                                               a["thickness"].get<double>(), a.value("close", false),
                                               opt_string(a, "storey"));
                return Json{{"guids", guids}, {"count", guids.size()}};
            });
        });

    add(r, ToolGroup::Create, "create_slab",
        "Create a slab from a closed outline (at least 3 points); the top face sits at the elevation and the "
        "slab extends downward by its thickness.",
        object({{"outline", point_list(3, "Outline vertices")},
                {"thickness", positive("Slab thickness in metres")},
                {"elevation", number("Top face elevation in metres (default 0)")},
                {"name", text("Slab name (optional)")}},
               {"outline", "thickness"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                Polygon2 outline(to_points(a["outline"]));
                double area = polygon_area(outline);
                std::string guid = create_slab(m, outline, a["thickness"].get<double>(),
                                               opt_number(a, "elevation").value_or(0.0), opt_string(a, "name"));
                return Json{{"guid", guid}, {"area", clean_number(area)}};
            });
        });

    Json style{{"type", "string"}, {"enum", {"hip", "gable", "flat"}}, {"description", "Roof style (default hip)"}};
    Json slope{{"type", "number"},
               {"exclusiveMinimum", 0},
               {"exclusiveMaximum", 90},
               {"description", "Roof pitch in degrees (default 30)"}};

    add(r, ToolGroup::Create, "create_roof",
        "Create a roof over an outline at base height base_z. Hip and gable roofs are generated from the "
        "straight skeleton of the outline; flat roofs are 0.2 m thick.",
        object({{"outline", point_list(3, "Roof outline")},
                {"style", style},
                {"slope_deg", slope},
                {"base_z", number("Eave height in metres")},
                {"name", text("Roof name (optional)")}},
               {"outline", "base_z"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                return roof_json(create_roof(m, Polygon2(to_points(a["outline"])), roof_style(a),
                                             opt_number(a, "slope_deg").value_or(30.0), a["base_z"].get<double>(),
                                             opt_string(a, "name")));
            });
        });

    add(r, ToolGroup::Create, "create_roof_over_walls",
        "Create a roof whose outline follows the axes of a closed loop of walls, based at the highest wall "
        "top.",
        object({{"walls", guid_list("Wall GUIDs forming a closed loop", 3)}, {"style", style}, {"slope_deg", slope}},
               {"walls"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                return roof_json(create_roof_over_walls(m, to_strings(a["walls"]), roof_style(a),
                                                        opt_number(a, "slope_deg").value_or(30.0)));
            });
        });

    Json opening_props{{"wall_guid", guid_field("Host wall GUID; omitted: nearest wall to position")},
                       {"position", point(3, "[x, y, z] near the host wall axis")},
                       {"position_along_axis", number("Distance from the wall start to the opening centre")},
                       {"width", positive("Opening width in metres")},
                       {"height", positive("Opening height in metres")},
                       {"name", text("Element name (optional)")}};

    add(r, ToolGroup::Create, "create_door",
        "Insert a door into a wall: an opening voids the wall and the door fills it. Defaults: width 0.9 m, "
        "height 2.1 m. Give wall_guid with position_along_axis, or a position near the wall.",
        object(opening_props), kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) { return opening_json(create_door(m, opening_params(a)), "door"); });
        });

    Json window_props = opening_props;
    window_props["sill_height"] = Json{{"type", "number"}, {"minimum", 0}, {"description", "Sill height (default 0.9)"}};
    add(r, ToolGroup::Create, "create_window",
        "Insert a window into a wall. Defaults: width 1.2 m, height 1.4 m, sill 0.9 m.", object(window_props),
        kWrite, [](Session& s, const Json& a) {
            return transact(s,
                            [&](IfcModel& m) { return opening_json(create_window(m, opening_params(a)), "window"); });
        });

    add(r, ToolGroup::Create, "create_stairs",
        "Create a straight flight of stairs rising total_rise over total_run in step_count steps, starting at "
        "origin and running in direction_deg (0 = +x).",
        object({{"origin", point(3, "[x, y, z] of the first step")},
                {"direction_deg", number("Run direction in degrees (default 0)")},
                {"total_rise", positive("Total rise in metres")},
                {"total_run", positive("Total run in metres")},
                {"step_count", {{"type", "integer"}, {"minimum", 2}, {"description", "Number of steps"}}},
                {"width", positive("Flight width in metres")},
                {"name", text("Stair name (optional)")},
                {"storey", guid_field("Storey GUID (optional)")}},
               {"origin", "total_rise", "total_run", "step_count", "width"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                StairParams p;
                p.origin = to_point3(a["origin"]);
                p.direction_deg = opt_number(a, "direction_deg").value_or(0.0);
                p.total_rise = a["total_rise"].get<double>();
                p.total_run = a["total_run"].get<double>();
                p.step_count = a["step_count"].get<int>();
                p.width = a["width"].get<double>();
                p.name = opt_string(a, "name");
                p.storey = opt_string(a, "storey");
                StairResult res = create_stairs(m, p);
                return Json{{"guid", res.guid}, {"riser", clean_number(res.riser)}, {"tread", clean_number(res.tread)}};
            });
        });

    add(r, ToolGroup::Create, "create_mesh_element",
        "Create an element of a given IFC class (IfcBuildingElementProxy, IfcFurnishingElement, IfcColumn, "
        "IfcBeam, IfcMember, IfcPlate, IfcRailing, IfcCovering, IfcFooting) from a closed triangle mesh in world "
        "coordinates.",
        object({{"ifc_class", text("IFC class name")},
                {"vertices", {{"type", "array"}, {"items", point(3, "[x, y, z]")}, {"minItems", 4}}},
                {"faces",
                 {{"type", "array"},
                  {"items",
                   {{"type", "array"}, {"items", {{"type", "integer"}, {"minimum", 0}}}, {"minItems", 3}, {"maxItems", 3}}},
                  {"minItems", 4}}},
                {"name", text("Element name (optional)")},
                {"storey", guid_field("Storey GUID (optional)")}},
               {"ifc_class", "vertices", "faces"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                TriMesh mesh;
                for (const auto& v : a["vertices"])
                    mesh.vertices.push_back(to_point3(v));
                for (const auto& f : a["faces"])
                    mesh.faces.push_back({f[0].get<std::size_t>(), f[1].get<std::size_t>(), f[2].get<std::size_t>()});
                return Json{{"guid", create_mesh_element(m, a["ifc_class"].get<std::string>(), mesh,
                                                         opt_string(a, "name"), opt_string(a, "storey"))}};
            });
        });

    add(r, ToolGroup::Create, "create_wall_type",
        "Create an IfcWallType and optionally assign it to walls.",
        object({{"name", text("Type name")}, {"walls", guid_list("Walls to type (optional)", 0)}}, {"name"}), kWrite,
        [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                std::vector<std::string> walls;
                if (a.contains("walls"))
                    walls = to_strings(a["walls"]);
                return Json{{"guid", create_wall_type(m, a["name"].get<std::string>(), walls)}};
            });
        });

    add(r, ToolGroup::Create, "create_storey", "Add a building storey at an elevation.",
        object({{"name", text("Storey name")}, {"elevation", number("Elevation in metres")}}, {"name", "elevation"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                return Json{{"guid", create_storey(m, a["name"].get<std::string>(), a["elevation"].get<double>())}};
            });
        });
}

void register_edit(ToolRegistry& r)
{
    add(r, ToolGroup::Edit, "edit_attributes",
        "Change Name, Description, ObjectType, LongName or Tag of an entity. Values are strings, or null to "
        "clear.",
        object({{"guid", guid_field("Entity GUID")},
                {"attributes", {{"type", "object"}, {"description", "Attribute name to new value"}}}},
               {"guid", "attributes"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                std::vector<std::pair<std::string, StepValue>> updates;
                for (const auto& [k, v] : a["attributes"].items())
                    updates.emplace_back(k, json_scalar(v));
                if (updates.empty())
                    throw Error(ErrorCode::InvalidParams, "attributes is empty");
                Json changes = Json::array();
                for (const auto& c : m.edit_attributes(a["guid"].get<std::string>(), updates))
                    changes.push_back(Json{{"attribute", c.name},
                                           {"old", step_value_to_json(c.old_value)},
                                           {"new", step_value_to_json(c.new_value)}});
                return Json{{"guid", a["guid"]}, {"changes", changes}};
            });
        });

    add(r, ToolGroup::Edit, "add_property_set",
        "Attach a property set to an element. properties maps names to values (string, number, boolean) or "
        "to {\"value\": v, \"unit\": \"...\"}. An existing set of the same name is extended.",
        object({{"guid", guid_field("Element GUID")},
                {"pset_name", {{"type", "string"}, {"minLength", 1}, {"description", "Property set name"}}},
                {"properties", {{"type", "object"}, {"description", "Property name to value"}}}},
               {"guid", "pset_name", "properties"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                PropertySpec spec{a["pset_name"].get<std::string>(), {}};
                for (const auto& [k, v] : a["properties"].items()) {
                    if (v.is_object()) {
                        if (!v.contains("value"))
                            throw Error(ErrorCode::InvalidParams, "property '" + k + "' has no value");
                        std::optional<std::string> unit;
                        if (v.contains("unit") && v["unit"].is_string())
                            unit = v["unit"].get<std::string>();
                        spec.properties.push_back({k, json_scalar(v["value"]), unit});
                    } else {
                        if (v.is_null())
                            throw Error(ErrorCode::TypeMismatch, "property '" + k + "' is null");
                        spec.properties.push_back({k, json_scalar(v), std::nullopt});
                    }
                }
                return Json{{"pset_guid", m.add_property_set(a["guid"].get<std::string>(), spec)},
                            {"count", spec.properties.size()}};
            });
        });

    add(r, ToolGroup::Edit, "add_classification",
        "Associate an element with a classification reference (system, code, optional name).",
        object({{"guid", guid_field("Element GUID")},
                {"system", {{"type", "string"}, {"minLength", 1}, {"description", "Classification system"}}},
                {"code", {{"type", "string"}, {"minLength", 1}, {"description", "Item code"}}},
                {"name", text("Item name (optional)")}},
               {"guid", "system", "code"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                return Json{{"relation_guid",
                             m.add_classification(a["guid"].get<std::string>(), a["system"].get<std::string>(),
                                                  a["code"].get<std::string>(), opt_string(a, "name").value_or(""))}};
            });
        });

    add(r, ToolGroup::Edit, "delete_element",
        "Delete an element together with its openings, fillers and anything only it referenced. Spatial "
        "elements cannot be deleted.",
        object({{"guid", guid_field("Element GUID")}}, {"guid"}), kDestroy, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                return Json{{"guid", a["guid"]}, {"removed", m.delete_element(a["guid"].get<std::string>())}};
            });
        });

    add(r, ToolGroup::Edit, "set_owner_history",
        "Record the user and time (unix seconds, default now) of a modification on the listed elements.",
        object({{"guids", guid_list("Element GUIDs")},
                {"user", {{"type", "string"}, {"minLength", 1}, {"description", "User name"}}},
                {"timestamp", {{"type", "integer"}, {"minimum", 0}, {"description", "Unix seconds"}}}},
               {"guids", "user"}),
        kWrite, [](Session& s, const Json& a) {
            return transact(s, [&](IfcModel& m) {
                std::int64_t ts = a.contains("timestamp")
                                      ? a["timestamp"].get<std::int64_t>()
                                      : std::chrono::duration_cast<std::chrono::seconds>(
                                            std::chrono::system_clock::now().time_since_epoch())
                                            .count();
                return Json{{"updated", m.set_owner_history(to_strings(a["guids"]), a["user"].get<std::string>(), ts)},
                            {"timestamp", ts}};
            });
        });

    add(r, ToolGroup::Edit, "set_selection",
        "Select or deselect elements in the session; with exclusive=true everything else is deselected.",
        object({{"guids", guid_list("Element GUIDs", 0)},
                {"selected", {{"type", "boolean"}, {"description", "Default true"}}},
                {"exclusive", {{"type", "boolean"}, {"description", "Default false"}}}},
               {"guids"}),
        kWrite, [](Session& s, const Json& a) {
            IfcModel& m = s.model();
            auto ids = require_all(m, to_strings(a["guids"]));
            if (a.value("exclusive", false))
                for (EntityId id : m.selection())
                    m.set_selected(id, false);
            for (EntityId id : ids)
                m.set_selected(id, a.value("selected", true));
            Json sel = Json::array();
            for (EntityId id : m.selection())
                sel.push_back(m.guid_of(id));
            return Json{{"selected", sel}};
        });

    add(r, ToolGroup::Edit, "set_visibility", "Show or hide elements in the session.",
        object({{"guids", guid_list("Element GUIDs")}, {"visible", {{"type", "boolean"}}}}, {"guids", "visible"}),
        kWrite, [](Session& s, const Json& a) {
            IfcModel& m = s.model();
            auto ids = require_all(m, to_strings(a["guids"]));
            for (EntityId id : ids)
                m.set_visible(id, a["visible"].get<bool>());
            return Json{{"updated", ids.size()}, {"visible", a["visible"]}};
        });

    add(r, ToolGroup::Edit, "save_model", "Write the model to an IFC file.",
        object({{"path", {{"type", "string"}, {"minLength", 1}, {"description", "Target .ifc path"}}}}, {"path"}),
        kWrite, [](Session& s, const Json& a) {
            std::string path = a["path"].get<std::string>();
            save_ifc_file(s.model(), path);
            return Json{{"path", path}, {"entities", s.model().size()}};
        });

    add(r, ToolGroup::Edit, "open_model", "Replace the session model with an IFC file.",
        object({{"path", {{"type", "string"}, {"minLength", 1}, {"description", "Source .ifc path"}}}}, {"path"}),
        kDestroy, [](Session& s, const Json& a) {
            std::string path = a["path"].get<std::string>();
            s.replace_model(load_ifc_file(path, s.make_guid_generator()));
            return Json{{"path", path}, {"entities", s.model().size()}, {"products", s.model().products().size()}};
        });

    add(r, ToolGroup::Edit, "new_model", "Replace the session model with an empty project.",
        object({{"project_name", text("Project name (default \"My Project\")")}}), kDestroy,
        [](Session& s, const Json& a) {
            s.replace_model(IfcModel::create(opt_string(a, "project_name").value_or("My Project"),
                                             s.make_guid_generator()));
            return Json{{"project", s.model().guid_of(s.model().project())}};
        });
}

void register_knowledge(ToolRegistry& r)
{
    add(r, ToolGroup::Knowledge, "search_ifc_knowledge",
        "Search the local IFC documentation corpus (schema notes, API reference, examples) and return the "
        "best-matching passages.",
        object({{"query", {{"type", "string"}, {"minLength", 1}, {"description", "Search text"}}},
                {"k", {{"type", "integer"}, {"minimum", 1}, {"maximum", 50}, {"description", "Results (default 5)"}}}},
               {"query"}),
        kRead, [](Session& s, const Json& a) {
            auto index = s.knowledge();
            Json results = Json::array();
            for (const auto& h : index->search(a["query"].get<std::string>(), a.value("k", std::size_t{5})))
                results.push_back(Json{{"doc_id", h.chunk.doc_id},
                                       {"chunk_index", h.chunk.chunk_index},
                                       {"score", std::round(h.score * 1e6) / 1e6},
                                       {"tags", h.chunk.tags},
                                       {"text", h.chunk.text}});
            return Json{{"query", a["query"]}, {"results", results}};
        });
}

void register_snapshot(ToolRegistry& r)
{
    add(r, ToolGroup::Snapshot, "capture_plan_view",
        "Render a storey as an SVG floor plan cut at cut_height above the floor (default 1.2 m). Element ids "
        "are ifc-<GUID>.",
        object({{"storey", guid_field("Storey GUID (default: lowest)")},
                {"cut_height", {{"type", "number"}, {"exclusiveMinimum", 0}, {"description", "Metres"}}}}),
        kRead, [](Session& s, const Json& a) {
            return Json{{"svg", render_plan(s.model(), opt_string(a, "storey"),
                                            opt_number(a, "cut_height").value_or(kDefaultCutHeight))}};
        });

    add(r, ToolGroup::Snapshot, "capture_elevation_view",
        "Render an orthographic SVG elevation seen from north, south, east or west.",
        object({{"view", {{"type", "string"}, {"enum", {"north", "south", "east", "west"}}}}}, {"view"}), kRead,
        [](Session& s, const Json& a) {
            return Json{{"svg", render_elevation(s.model(), *parse_elevation_view(a["view"].get<std::string>()))}};
        });
}

} // namespace

ToolRegistry builtin_registry()
{
    ToolRegistry r;
    register_query(r);
    register_create(r);
    register_edit(r);
    register_knowledge(r);
    register_snapshot(r);
    return r;
}

} // namespace ifcmcp
