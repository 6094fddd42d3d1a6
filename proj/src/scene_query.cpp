#include "ifcmcp/scene_query.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/representation.hpp"

#include <algorithm>

namespace ifcmcp {

namespace {

Json nullable_text(const IfcModel& model, EntityId id, std::size_t index)
{
    const auto* e = model.find(id);
    if (!e || index >= e->attributes.size() || !e->attributes[index].is_string())
        return nullptr;
    return *e->attributes[index].as_string();
}

Json bounds_json(const Bounds3& b)
{
    if (b.empty)
        return nullptr;
    return Json{{"min", to_json(b.min)}, {"max", to_json(b.max)}, {"size", to_json(b.size())}};
}

Json entity_ref(const IfcModel& model, EntityId id)
{
    return Json{{"guid", model.guid_of(id)},
                {"name", model.name_of(id)},
                {"ifc_class", display_class_name(model.get(id).class_name)}};
}

} // namespace

std::vector<EntityId> scene_order(const IfcModel& model)
{
    std::vector<EntityId> out;
    for (const char* cls : {"IFCPROJECT", "IFCSITE", "IFCBUILDING"})
        for (EntityId id : model.ids_of_class(cls))
            if (model.is_rooted(id))
                out.push_back(id);
    for (EntityId id : model.storeys())
        if (model.is_rooted(id))
            out.push_back(id);
    for (EntityId id : model.products())
        out.push_back(id);
    for (EntityId id : model.type_objects())
        out.push_back(id);
    return out;
}

Json object_summary(const IfcModel& model, EntityId id)
{
    const auto& e = model.get(id);
    std::string cls = display_class_name(e.class_name);
    SessionFlags f = model.flags(id);
    Json o;
    o["name"] = cls + "/" + model.name_of(id);
    o["type"] = has_body(model, id) ? "MESH" : "EMPTY";
    o["location"] = to_json(model.world_transform(id).t);
    o["visible"] = f.visible;
    o["selected"] = f.selected;
    o["guid"] = model.guid_of(id);
    o["ifc_class"] = cls;
    return o;
}

Json get_scene_info(const IfcModel& model, std::int64_t offset, std::int64_t limit)
{
    if (offset < 0)
        throw Error(ErrorCode::InvalidParams, "offset must be >= 0");
    if (limit < 1)
        throw Error(ErrorCode::InvalidParams, "limit must be >= 1");
    auto order = scene_order(model);
    auto total = static_cast<std::int64_t>(order.size());
    Json objects = Json::array();
    for (std::int64_t i = offset; i < total && i < offset + limit; ++i)
        objects.push_back(object_summary(model, order[static_cast<std::size_t>(i)]));
    Json out;
    out["count"] = objects.size();
    out["total"] = total;
    out["offset"] = offset;
    out["limit"] = limit;
    out["objects"] = std::move(objects);
    return out;
}

Bounds3 product_bounds(const IfcModel& model, EntityId id)
{
    Bounds3 b;
    TriMesh mesh = world_mesh(model, id);
    for (const auto& v : mesh.vertices)
        b.expand(v);
    if (b.empty && model.object_placement(id))
        b.expand(model.world_transform(id).t);
    return b;
}

std::vector<HostedElement> hosted_openings(const IfcModel& model, EntityId wall)
{
    std::vector<HostedElement> out;
    for (EntityId r : model.referrers(wall)) {
        const auto& rel = model.get(r);
        if (rel.class_name != "IFCRELVOIDSELEMENT" || rel.attr(4).as_ref() != wall)
            continue;
        auto opening = rel.attr(5).as_ref();
        if (!opening || !model.contains(*opening))
            continue;
        HostedElement h{*opening, std::nullopt};
        for (EntityId f : model.referrers(*opening)) {
            const auto& fill = model.get(f);
            if (fill.class_name == "IFCRELFILLSELEMENT" && fill.attr(4).as_ref() == opening)
                h.filler = fill.attr(5).as_ref();
        }
        out.push_back(h);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.opening < b.opening; });
    return out;
}

std::optional<EntityId> opening_of(const IfcModel& model, EntityId filler)
{
    for (EntityId r : model.referrers(filler)) {
        const auto& rel = model.get(r);
        if (rel.class_name == "IFCRELFILLSELEMENT" && rel.attr(5).as_ref() == filler)
            return rel.attr(4).as_ref();
    }
    return std::nullopt;
}

std::optional<EntityId> host_of(const IfcModel& model, EntityId filler)
{
    auto opening = opening_of(model, filler);
    if (!opening)
        return std::nullopt;
    for (EntityId r : model.referrers(*opening)) {
        const auto& rel = model.get(r);
        if (rel.class_name == "IFCRELVOIDSELEMENT" && rel.attr(5).as_ref() == opening)
            return rel.attr(4).as_ref();
    }
    return std::nullopt;
}

Json get_object_info(const IfcModel& model, std::string_view guid)
{
    EntityId id = model.require(guid);
    const auto& e = model.get(id);
    SessionFlags f = model.flags(id);
    Json o;
    o["guid"] = model.guid_of(id);
    o["ifc_class"] = display_class_name(e.class_name);
    o["name"] = model.name_of(id);
    o["description"] = nullable_text(model, id, 3);
    if (!is_relationship_class(e.class_name) && !is_type_class(e.class_name) &&
        e.class_name != "IFCPROPERTYSET")
        o["object_type"] = nullable_text(model, id, 4);
    if (e.class_name == "IFCPROJECT")
        o["long_name"] = nullable_text(model, id, 5);
    else if (is_spatial_class(e.class_name))
        o["long_name"] = nullable_text(model, id, 7);
    else if (model.is_product(id) || is_type_class(e.class_name))
        o["tag"] = nullable_text(model, id, 7);
    if (e.class_name == "IFCBUILDINGSTOREY")
        o["elevation"] = clean_number(model.storey_elevation(id).value_or(0.0));
    o["visible"] = f.visible;
    o["selected"] = f.selected;

    if (model.object_placement(id)) {
        Transform t = model.world_transform(id);
        o["placement"] = Json{{"location", to_json(t.t)}, {"x_axis", to_json(t.x)}, {"z_axis", to_json(t.z)}};
    } else {
        o["placement"] = nullptr;
    }
    o["representation"] = has_body(model, id) ? "MESH" : "EMPTY";
    o["bounding_box"] = model.is_product(id) || e.class_name == "IFCOPENINGELEMENT"
                            ? bounds_json(product_bounds(model, id))
                            : Json(nullptr);

    if (e.class_name == "IFCWALL" || e.class_name == "IFCWALLSTANDARDCASE") {
        if (auto axis = wall_axis(model, id))
            o["dimensions"] = Json{{"length", clean_number(axis->length)},
                                   {"height", clean_number(axis->height)},
                                   {"thickness", clean_number(axis->thickness)},
                                   {"start", to_json(axis->start)},
                                   {"end", to_json(axis->end)}};
        Json openings = Json::array();
        for (const auto& h : hosted_openings(model, id)) {
            Json item{{"opening", model.guid_of(h.opening)}};
            item["filled_by"] = h.filler ? Json(model.guid_of(*h.filler)) : Json(nullptr);
            openings.push_back(std::move(item));
        }
        o["openings"] = std::move(openings);
    } else if (e.class_name == "IFCSLAB") {
        if (auto area = profile_area(model, id))
            o["dimensions"] = Json{{"area", clean_number(*area)},
                                   {"thickness", clean_number(extrusion_depth(model, id).value_or(0.0))}};
    }
    if (auto host = host_of(model, id))
        o["host_wall"] = model.guid_of(*host);
    if (auto opening = opening_of(model, id))
        o["fills"] = model.guid_of(*opening);

    Json psets = Json::array();
    for (const auto& p : model.property_sets(id)) {
        Json props = Json::array();
        for (const auto& v : p.properties) {
            Json item{{"name", v.name}, {"value", step_value_to_json(v.value)}, {"type", v.value_type}};
            item["unit"] = v.unit ? Json(*v.unit) : Json(nullptr);
            props.push_back(std::move(item));
        }
        psets.push_back(Json{{"name", p.name}, {"guid", p.guid}, {"properties", std::move(props)}});
    }
    o["property_sets"] = std::move(psets);

    Json classes = Json::array();
    for (const auto& c : model.classifications(id))
        classes.push_back(Json{{"system", c.system}, {"code", c.code}, {"name", c.name}});
    o["classifications"] = std::move(classes);

    if (auto storey = model.container_of(id))
        o["container"] = entity_ref(model, *storey);
    else
        o["container"] = nullptr;

    o["type_object"] = nullptr;
    for (EntityId r : model.referrers(id)) {
        const auto& rel = model.get(r);
        if (rel.class_name == "IFCRELDEFINESBYTYPE")
            if (auto t = rel.attr(5).as_ref(); t && model.contains(*t) && *t != id)
                o["type_object"] = entity_ref(model, *t);
    }

    o["owner_history"] = nullptr;
    if (e.attributes.size() > 1)
        if (auto h = e.attributes[1].as_ref(); h && model.contains(*h)) {
            const auto& hist = model.get(*h);
            Json hj;
            hj["user"] = nullptr;
            if (auto pao = hist.attr(0).as_ref(); pao && model.contains(*pao))
                if (auto person = model.get(*pao).attr(0).as_ref(); person && model.contains(*person))
                    hj["user"] = nullable_text(model, *person, 1);
            hj["creation_date"] = step_value_to_json(hist.attr(7));
            hj["change_action"] = step_value_to_json(hist.attr(3));
            o["owner_history"] = std::move(hj);
        }
    return o;
}

Json get_ifc_scene_overview(const IfcModel& model)
{
    Json o;
    o["project"] = model.project() ? Json(model.name_of(model.project())) : Json(nullptr);

    std::map<std::string, std::size_t> counts;
    for (const char* cls : {"IFCWALL", "IFCSLAB", "IFCROOF", "IFCDOOR", "IFCWINDOW", "IFCSTAIR",
                            "IFCCOLUMN", "IFCBEAM", "IFCMEMBER", "IFCBUILDINGELEMENTPROXY",
                            "IFCFURNISHINGELEMENT"})
        counts[display_class_name(cls)] = 0;
    auto products = model.products();
    for (EntityId id : products)
        ++counts[display_class_name(model.get(id).class_name)];
    Json product_counts;
    for (const auto& [cls, n] : counts)
        product_counts[cls] = n;
    o["product_counts"] = std::move(product_counts);
    o["product_total"] = products.size();

    std::map<std::string, std::size_t> all;
    for (const auto& [cls, ids] : model.class_index())
        for (EntityId id : ids)
            if (model.is_rooted(id))
                ++all[display_class_name(cls)];
    Json class_counts;
    for (const auto& [cls, n] : all)
        class_counts[cls] = n;
    o["class_counts"] = std::move(class_counts);

    Json storeys = Json::array();
    for (EntityId s : model.storeys()) {
        std::size_t contained = 0;
        for (EntityId id : products)
            if (model.container_of(id) == s)
                ++contained;
        storeys.push_back(Json{{"guid", model.guid_of(s)},
                               {"name", model.name_of(s)},
                               {"elevation", clean_number(model.storey_elevation(s).value_or(0.0))},
                               {"element_count", contained}});
    }
    o["storeys"] = std::move(storeys);
    o["guid_count"] = model.guid_count();

    double floor_area = 0.0;
    for (EntityId id : model.ids_of_class("IFCSLAB"))
        floor_area += profile_area(model, id).value_or(0.0);
    o["total_floor_area"] = clean_number(floor_area);

    Bounds3 all_bounds;
    for (EntityId id : products)
        all_bounds.expand(product_bounds(model, id));
    o["bounding_box"] = bounds_json(all_bounds);
    return o;
}

Json get_door_properties(const IfcModel& model, std::string_view guid)
{
    EntityId id = model.require(guid);
    const auto& e = model.get(id);
    if (e.class_name != "IFCDOOR")
        throw Error(ErrorCode::NotADoor, display_class_name(e.class_name) + " '" + std::string(guid) +
                                             "' is not a door");
    double width = e.attr(9).as_number().value_or(0.0);
    double height = e.attr(8).as_number().value_or(0.0);
    if (auto body = read_body(model, id); body && !body->extrusions.empty()) {
        const auto& x = body->extrusions.front();
        double lo = x.profile[0].x, hi = lo;
        for (const auto& v : x.profile.vertices()) {
            lo = std::min(lo, v.x);
            hi = std::max(hi, v.x);
        }
        width = hi - lo;
        height = x.depth;
    }
    Json o;
    o["guid"] = model.guid_of(id);
    o["name"] = model.name_of(id);
    o["width"] = clean_number(width);
    o["height"] = clean_number(height);
    auto host = host_of(model, id);
    auto opening = opening_of(model, id);
    o["host_wall"] = host ? Json(model.guid_of(*host)) : Json(nullptr);
    o["opening"] = opening ? Json(model.guid_of(*opening)) : Json(nullptr);
    o["position_along_axis"] = nullptr;
    o["sill_height"] = nullptr;
    if (host)
        if (auto axis = wall_axis(model, *host)) {
            Vec3 origin = model.world_transform(id).t;
            Vec3 rel = origin - axis->start;
            o["position_along_axis"] = clean_number(dot(rel, axis->frame.x) + width / 2);
            o["sill_height"] = clean_number(dot(rel, axis->frame.z));
        }
    o["swing"] = e.attr(11).is_enum() ? Json(e.attr(11).as_enum()->name) : Json(nullptr);
    auto storey = model.container_of(id);
    o["storey"] = storey ? Json(model.name_of(*storey)) : Json(nullptr);
    return o;
}

} // namespace ifcmcp
