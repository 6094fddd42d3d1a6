#include "ifcmcp/representation.hpp"

#include "ifcmcp/error.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace ifcmcp {

namespace {

std::optional<Vec3> read_coords(const IfcModel& m, std::optional<EntityId> id)
{
    if (!id || !m.contains(*id))
        return std::nullopt;
    const auto* coords = m.get(*id).attr(0).as_list();
    if (!coords)
        return std::nullopt;
    double c[3] = {0, 0, 0};
    for (std::size_t i = 0; i < coords->size() && i < 3; ++i)
        c[i] = (*coords)[i].as_number().value_or(0.0);
    return Vec3{c[0], c[1], c[2]};
}

Transform read_axis3d(const IfcModel& m, std::optional<EntityId> id)
{
    if (!id || !m.contains(*id))
        return {};
    const auto& a = m.get(*id);
    Vec3 origin = read_coords(m, a.attr(0).as_ref()).value_or(Vec3{});
    if (a.class_name != "IFCAXIS2PLACEMENT3D") {
        Transform t;
        t.t = origin;
        return t;
    }
    Vec3 z = read_coords(m, a.attr(1).as_ref()).value_or(Vec3{0, 0, 1});
    Vec3 x = read_coords(m, a.attr(2).as_ref()).value_or(Vec3{1, 0, 0});
    try {
        return Transform::from(Placement::from_axes(origin, z, x));
    } catch (const Error&) {
        Transform t;
        t.t = origin;
        return t;
    }
}

std::optional<Polygon2> read_profile(const IfcModel& m, EntityId id, bool& rectangle)
{
    const auto& p = m.get(id);
    rectangle = false;
    try {
        if (p.class_name == "IFCRECTANGLEPROFILEDEF") {
            double xd = p.attr(3).as_number().value_or(0.0);
            double yd = p.attr(4).as_number().value_or(0.0);
            Vec2 c{}, xdir{1, 0};
            if (auto pos = p.attr(2).as_ref(); pos && m.contains(*pos)) {
                const auto& a = m.get(*pos);
                Vec3 o = read_coords(m, a.attr(0).as_ref()).value_or(Vec3{});
                c = {o.x, o.y};
                if (auto d = read_coords(m, a.attr(1).as_ref()))
                    xdir = normalized(Vec2{d->x, d->y});
            }
            Vec2 ydir{-xdir.y, xdir.x};
            rectangle = true;
            Vec2 hx = xdir * (xd / 2), hy = ydir * (yd / 2);
            return Polygon2({c - hx - hy, c + hx - hy, c + hx + hy, c - hx + hy});
        }
        if (p.class_name == "IFCARBITRARYCLOSEDPROFILEDEF") {
            auto curve = p.attr(2).as_ref();
            if (!curve || !m.contains(*curve))
                return std::nullopt;
            const auto& c = m.get(*curve);
            if (c.class_name != "IFCPOLYLINE")
                return std::nullopt;
            std::vector<Vec2> pts;
            if (const auto* items = c.attr(0).as_list())
                for (const auto& item : *items)
                    if (auto v = read_coords(m, item.as_ref()))
                        pts.push_back({v->x, v->y});
            return Polygon2(std::move(pts));
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<TriMesh> read_brep(const IfcModel& m, EntityId id)
{
    const auto& b = m.get(id);
    auto shell = b.attr(0).as_ref();
    if (!shell || !m.contains(*shell))
        return std::nullopt;
    TriMesh mesh;
    std::map<EntityId, std::size_t> index;
    auto vertex = [&](EntityId pid) -> std::optional<std::size_t> {
        if (auto it = index.find(pid); it != index.end())
            return it->second;
        auto v = read_coords(m, pid);
        if (!v)
            return std::nullopt;
        mesh.vertices.push_back(*v);
        index.emplace(pid, mesh.vertices.size() - 1);
        return mesh.vertices.size() - 1;
    };
    const auto* faces = m.get(*shell).attr(0).as_list();
    if (!faces)
        return std::nullopt;
    for (const auto& f : *faces) {
        auto fid = f.as_ref();
        if (!fid || !m.contains(*fid))
            continue;
        const auto* bounds = m.get(*fid).attr(0).as_list();
        if (!bounds || bounds->empty())
            continue;
        // Outer bound only; faces with holes are not produced by this library.
        auto bound = bounds->front().as_ref();
        if (!bound || !m.contains(*bound))
            continue;
        const auto& fb = m.get(*bound);
        auto loop = fb.attr(0).as_ref();
        if (!loop || !m.contains(*loop))
            continue;
        bool forward = !(fb.attr(1).storage() == StepValue::Storage{false});
        std::vector<std::size_t> ring;
        if (const auto* pts = m.get(*loop).attr(0).as_list())
            for (const auto& p : *pts)
                if (auto pid = p.as_ref())
                    if (auto vi = vertex(*pid))
                        ring.push_back(*vi);
        if (!forward)
            std::reverse(ring.begin(), ring.end());
        for (std::size_t i = 1; i + 1 < ring.size(); ++i)
            mesh.faces.push_back({ring[0], ring[i], ring[i + 1]});
    }
    if (mesh.faces.empty())
        return std::nullopt;
    return mesh;
}

std::vector<EntityId> body_items(const IfcModel& m, EntityId product)
{
    std::vector<EntityId> items;
    const auto* e = m.find(product);
    if (!e || e->attributes.size() < 7)
        return items;
    auto shape = e->attributes[6].as_ref();
    if (!shape || !m.contains(*shape))
        return items;
    const auto* reps = m.get(*shape).attr(2).as_list();
    if (!reps)
        return items;
    for (const auto& r : *reps) {
        auto rid = r.as_ref();
        if (!rid || !m.contains(*rid))
            continue;
        const auto& rep = m.get(*rid);
        const auto* ident = rep.attr(1).as_string();
        if (ident && *ident != "Body")
            continue;
        if (const auto* list = rep.attr(3).as_list())
            for (const auto& item : *list)
                if (auto iid = item.as_ref(); iid && m.contains(*iid))
                    items.push_back(*iid);
    }
    return items;
}

EntityId wrap_shape(IfcModel& model, EntityId item, const char* kind)
{
    EntityId ctx = model.body_context();
    EntityId rep = model.add("IFCSHAPEREPRESENTATION",
                             {StepValue::ref(ctx), StepValue::string("Body"), StepValue::string(kind),
                              StepValue::refs({item})});
    return model.add("IFCPRODUCTDEFINITIONSHAPE",
                     {StepValue::unset(), StepValue::unset(), StepValue::refs({rep})});
}

} // namespace

EntityId extrude_profile(IfcModel& model, const Polygon2& profile, double depth,
                         const Placement& position)
{
    if (!(depth > 0) || !std::isfinite(depth))
        throw Error(ErrorCode::NonPositiveDepth, "extrusion depth must be positive");
    EntityId profile_id;
    if (profile.is_axis_aligned_rectangle()) {
        Vec2 lo = profile[0], hi = profile[0];
        for (const auto& v : profile.vertices()) {
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
        }
        EntityId pos = model.add_axis2_placement_2d((lo + hi) * 0.5);
        profile_id = model.add("IFCRECTANGLEPROFILEDEF",
                               {StepValue::enumeration("AREA"), StepValue::unset(), StepValue::ref(pos),
                                StepValue::real(hi.x - lo.x), StepValue::real(hi.y - lo.y)});
    } else {
        std::vector<EntityId> pts;
        for (const auto& v : profile.vertices())
            pts.push_back(model.add_point2(v));
        pts.push_back(pts.front());
        EntityId polyline = model.add("IFCPOLYLINE", {StepValue::refs(pts)});
        profile_id = model.add("IFCARBITRARYCLOSEDPROFILEDEF",
                               {StepValue::enumeration("AREA"), StepValue::unset(), StepValue::ref(polyline)});
    }
    EntityId axis = model.add_axis2_placement_3d(position);
    EntityId dir = model.add_direction({0, 0, 1});
    EntityId solid = model.add("IFCEXTRUDEDAREASOLID", {StepValue::ref(profile_id), StepValue::ref(axis),
                                                        StepValue::ref(dir), StepValue::real(depth)});
    return wrap_shape(model, solid, "SweptSolid");
}

EntityId mesh_to_brep(IfcModel& model, const TriMesh& mesh)
{
    mesh.validate();
    // Exact-coordinate sharing first, then a 1e-9 tolerance pass.
    TriMesh welded = weld_vertices(mesh, 1e-9);
    if (welded.faces.size() != mesh.faces.size())
        throw Error(ErrorCode::DegenerateFace, "mesh faces collapse when vertices are merged");
    std::vector<EntityId> points;
    for (const auto& v : welded.vertices)
        points.push_back(model.add_point(v));
    std::vector<EntityId> faces;
    for (const auto& f : welded.faces) {
        EntityId loop = model.add("IFCPOLYLOOP",
                                  {StepValue::refs({points[f[0]], points[f[1]], points[f[2]]})});
        EntityId bound = model.add("IFCFACEOUTERBOUND", {StepValue::ref(loop), StepValue::boolean(true)});
        faces.push_back(model.add("IFCFACE", {StepValue::refs({bound})}));
    }
    EntityId shell = model.add("IFCCLOSEDSHELL", {StepValue::refs(faces)});
    EntityId brep = model.add("IFCFACETEDBREP", {StepValue::ref(shell)});
    return wrap_shape(model, brep, "Brep");
}

bool has_body(const IfcModel& model, EntityId product) { return !body_items(model, product).empty(); }

std::optional<BodyGeometry> read_body(const IfcModel& model, EntityId product)
{
    auto items = body_items(model, product);
    if (items.empty())
        return std::nullopt;
    BodyGeometry body;
    bool any = false;
    for (EntityId id : items) {
        const auto& item = model.get(id);
        if (item.class_name == "IFCEXTRUDEDAREASOLID") {
            auto pid = item.attr(0).as_ref();
            if (!pid || !model.contains(*pid))
                continue;
            bool rectangle = false;
            auto profile = read_profile(model, *pid, rectangle);
            double depth = item.attr(3).as_number().value_or(0.0);
            if (!profile || !(depth > 0))
                continue;
            Vec3 dir = read_coords(model, item.attr(2).as_ref()).value_or(Vec3{0, 0, 1});
            if (length(dir) < 1e-12)
                continue;
            body.extrusions.push_back(
                {*profile, rectangle, read_axis3d(model, item.attr(1).as_ref()), normalized(dir), depth});
            any = true;
        } else if (item.class_name == "IFCFACETEDBREP") {
            if (auto mesh = read_brep(model, id)) {
                body.brep.append(*mesh);
                any = true;
            }
        }
    }
    if (!any)
        return std::nullopt;
    return body;
}

TriMesh body_mesh_local(const BodyGeometry& body)
{
    TriMesh out = body.brep;
    for (const auto& e : body.extrusions)
        out.append(transformed(extrusion_mesh(e.profile, e.direction, e.depth), e.position));
    return out;
}

TriMesh world_mesh(const IfcModel& model, EntityId product)
{
    auto body = read_body(model, product);
    if (!body)
        return {};
    return transformed(body_mesh_local(*body), model.world_transform(product));
}

std::optional<WallAxis> wall_axis(const IfcModel& model, EntityId wall)
{
    auto body = read_body(model, wall);
    if (!body || body->extrusions.empty())
        return std::nullopt;
    const auto& e = body->extrusions.front();
    double x0 = e.profile[0].x, x1 = x0, y0 = e.profile[0].y, y1 = y0;
    for (const auto& v : e.profile.vertices()) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    Transform solid = model.world_transform(wall).compose(e.position);
    double yc = (y0 + y1) / 2;
    WallAxis axis;
    axis.start = solid.apply({x0, yc, 0});
    axis.end = solid.apply({x1, yc, 0});
    axis.length = x1 - x0;
    axis.thickness = y1 - y0;
    axis.height = e.depth * std::abs(e.direction.z);
    axis.frame = solid;
    axis.frame.t = axis.start;
    return axis;
}

std::optional<double> extrusion_depth(const IfcModel& model, EntityId product)
{
    auto body = read_body(model, product);
    if (!body || body->extrusions.empty())
        return std::nullopt;
    return body->extrusions.front().depth;
}

std::optional<double> profile_area(const IfcModel& model, EntityId product)
{
    auto body = read_body(model, product);
    if (!body || body->extrusions.empty())
        return std::nullopt;
    return polygon_area(body->extrusions.front().profile);
}

} // namespace ifcmcp
