#include "ifcmcp/snapshot.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/representation.hpp"
#include "ifcmcp/scene_query.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ifcmcp {

namespace {

std::string num(double v)
{
    double r = std::round(v * 100.0) / 100.0;
    if (r == 0.0)
        r = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", r);
    std::string s = buf;
    while (s.back() == '0')
        s.pop_back();
    if (s.back() == '.')
        s.pop_back();
    return s;
}

std::string escape_xml(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

bool is_wall(const std::string& cls)
{
    return cls == "IFCWALL" || cls == "IFCWALLSTANDARDCASE";
}

bool is_filler(const std::string& cls)
{
    return cls == "IFCDOOR" || cls == "IFCWINDOW";
}

std::string css_class(const std::string& upper)
{
    std::string name = display_class_name(upper).substr(3);
    std::string out;
    for (char c : name)
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Maps metres to pixels: u to the right, v up (flipped to SVG y).
struct Frame {
    double u0 = 0, v1 = 0, width = 0, height = 0;

    static Frame fit(double umin, double vmin, double umax, double vmax)
    {
        Frame f;
        f.u0 = umin - kViewMargin;
        f.v1 = vmax + kViewMargin;
        f.width = (umax - umin + 2 * kViewMargin) * kPixelsPerMetre;
        f.height = (vmax - vmin + 2 * kViewMargin) * kPixelsPerMetre;
        return f;
    }
    double x(double u) const { return (u - u0) * kPixelsPerMetre; }
    double y(double v) const { return (v1 - v) * kPixelsPerMetre; }
    std::string pt(double u, double v) const { return num(x(u)) + "," + num(y(v)); }
};

std::string svg_open(const Frame& f)
{
    std::string w = num(f.width), h = num(f.height);
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
}

std::string title(const IfcModel& model, EntityId id)
{
    return "<title>" + escape_xml(display_class_name(model.get(id).class_name) + "/" + model.name_of(id)) +
           "</title>";
}

std::string polygon_path(const Frame& f, const std::vector<Vec2>& pts)
{
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i)
        d += (i == 0 ? "M" : " L") + f.pt(pts[i].x, pts[i].y);
    return d + " Z";
}

struct Footprint {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    bool empty = true;
    void add(double x, double y)
    {
        if (empty) {
            xmin = xmax = x;
            ymin = ymax = y;
            empty = false;
            return;
        }
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
};

// Filler extent from its first extrusion: along-axis width and depth across.
struct FillerShape {
    Vec3 origin, ax, ay;
    double width = 0, depth = 0;
};

std::optional<FillerShape> filler_shape(const IfcModel& model, EntityId id)
{
    auto body = read_body(model, id);
    if (!body || body->extrusions.empty())
        return std::nullopt;
    const auto& x = body->extrusions.front();
    double x0 = x.profile[0].x, x1 = x0, y0 = x.profile[0].y, y1 = y0;
    for (const auto& v : x.profile.vertices()) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    Transform t = model.world_transform(id).compose(x.position);
    FillerShape s;
    s.ax = t.x;
    s.ay = t.y;
    s.origin = t.apply({x0, y0, 0.0});
    s.width = x1 - x0;
    s.depth = y1 - y0;
    return s;
}

} // namespace

std::string render_plan(const IfcModel& model, const std::optional<std::string>& storey, double cut_height)
{
    auto products = model.products();
    if (products.empty())
        throw Error(ErrorCode::EmptyModel, "model has no products to draw");
    EntityId level = 0;
    if (storey) {
        level = model.require(*storey);
        if (model.get(level).class_name != "IFCBUILDINGSTOREY")
            throw Error(ErrorCode::InvalidParams, "'" + *storey + "' is not a building storey");
    } else {
        level = model.default_storey();
    }
    const double floor_z = model.storey_elevation(level).value_or(0.0);
    const double cut_z = floor_z + cut_height;
    const double tol = kLengthTolerance;

    struct Item {
        EntityId id;
        std::string cls;
        TriMesh mesh;
    };
    std::vector<Item> items;
    Footprint extent;
    for (EntityId id : products) {
        TriMesh mesh = world_mesh(model, id);
        if (mesh.vertices.empty())
            continue;
        Bounds3 b = mesh_bounds(mesh);
        if (b.min.z > cut_z + tol || b.max.z < floor_z - tol)
            continue;
        const auto& cls = model.get(id).class_name;
        if (is_wall(cls)) {
            if (auto axis = wall_axis(model, id)) {
                extent.add(axis->start.x, axis->start.y);
                extent.add(axis->end.x, axis->end.y);
            }
        } else if (!is_filler(cls)) {
            for (const auto& v : mesh.vertices)
                extent.add(v.x, v.y);
        }
        items.push_back({id, cls, std::move(mesh)});
    }
    if (extent.empty)
        for (const auto& it : items)
            for (const auto& v : it.mesh.vertices)
                extent.add(v.x, v.y);
    if (extent.empty)
        extent.add(0, 0);

    Frame f = Frame::fit(extent.xmin, extent.ymin, extent.xmax, extent.ymax);
    std::ostringstream out;
    out << svg_open(f);

    // Slabs and other footprints first, walls over them, openings last.
    auto rank = [](const std::string& cls) { return is_filler(cls) ? 2 : is_wall(cls) ? 1 : 0; };
    std::stable_sort(items.begin(), items.end(),
                     [&](const Item& a, const Item& b) { return rank(a.cls) < rank(b.cls); });

    for (const auto& it : items) {
        std::string id = "ifc-" + model.guid_of(it.id);
        if (is_wall(it.cls)) {
            if (auto axis = wall_axis(model, it.id)) {
                double deg = std::atan2(-(axis->end.y - axis->start.y), axis->end.x - axis->start.x) * 180.0 /
                             M_PI;
                double px = axis->length * kPixelsPerMetre;
                double pt = axis->thickness * kPixelsPerMetre;
                out << "<rect id=\"" << id << "\" class=\"wall\" x=\"0\" y=\"" << num(-pt / 2) << "\" width=\""
                    << num(px) << "\" height=\"" << num(pt) << "\" transform=\"translate("
                    << f.pt(axis->start.x, axis->start.y) << ") rotate(" << num(deg)
                    << ")\" fill=\"#404040\" stroke=\"#000000\" stroke-width=\"1\">" << title(model, it.id)
                    << "</rect>\n";
                continue;
            }
        }
        if (is_filler(it.cls)) {
            if (auto s = filler_shape(model, it.id)) {
                Vec3 o = s->origin;
                Vec3 along = s->ax * s->width;
                Vec3 across = s->ay * s->depth;
                std::vector<Vec2> gap{{o.x, o.y},
                                      {o.x + along.x, o.y + along.y},
                                      {o.x + along.x + across.x, o.y + along.y + across.y},
                                      {o.x + across.x, o.y + across.y}};
                out << "<g id=\"" << id << "\" class=\"" << css_class(it.cls) << "\">" << title(model, it.id)
                    << "<path class=\"gap\" d=\"" << polygon_path(f, gap)
                    << "\" fill=\"#ffffff\" stroke=\"none\"/>";
                if (it.cls == "IFCDOOR") {
                    Vec3 hinge = o + across;
                    Vec3 leaf = hinge + s->ay * s->width;
                    Vec3 strike = hinge + along;
                    out << "<path class=\"swing\" d=\"M" << f.pt(hinge.x, hinge.y) << " L" << f.pt(leaf.x, leaf.y)
                        << " A" << num(s->width * kPixelsPerMetre) << "," << num(s->width * kPixelsPerMetre)
                        << " 0 0 0 " << f.pt(strike.x, strike.y)
                        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>";
                } else {
                    Vec3 a = o + across * 0.5;
                    Vec3 b = a + along;
                    out << "<line class=\"glazing\" x1=\"" << num(f.x(a.x)) << "\" y1=\"" << num(f.y(a.y))
                        << "\" x2=\"" << num(f.x(b.x)) << "\" y2=\"" << num(f.y(b.y))
                        << "\" stroke=\"#000000\" stroke-width=\"1\"/>";
                }
                out << "</g>\n";
                continue;
            }
        }
        std::vector<Vec2> pts;
        if (it.cls == "IFCSLAB") {
            if (auto body = read_body(model, it.id); body && !body->extrusions.empty()) {
                const auto& x = body->extrusions.front();
                Transform t = model.world_transform(it.id).compose(x.position);
                for (const auto& v : x.profile.vertices()) {
                    Vec3 w = t.apply({v.x, v.y, 0.0});
                    pts.push_back({w.x, w.y});
                }
            }
        }
        if (pts.empty()) {
            std::vector<Vec2> flat;
            for (const auto& v : it.mesh.vertices)
                flat.push_back({v.x, v.y});
            pts = convex_hull(std::move(flat));
        }
        if (pts.size() < 3)
            continue;
        out << "<path id=\"" << id << "\" class=\"" << css_class(it.cls) << "\" d=\"" << polygon_path(f, pts)
            << "\" fill=\"none\" stroke=\"#808080\" stroke-width=\"1\">" << title(model, it.id) << "</path>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::optional<ElevationView> parse_elevation_view(std::string_view text)
{
    if (text == "north")
        return ElevationView::North;
    if (text == "south")
        return ElevationView::South;
    if (text == "east")
        return ElevationView::East;
    if (text == "west")
        return ElevationView::West;
    return std::nullopt;
}

std::string render_elevation(const IfcModel& model, ElevationView view)
{
    auto products = model.products();
    if (products.empty())
        throw Error(ErrorCode::EmptyModel, "model has no products to draw");

    // (u, depth) for a world point as seen from the named side.
    auto project = [view](Vec3 p) -> Vec2 {
        switch (view) {
        case ElevationView::South: return {p.x, p.y};
        case ElevationView::North: return {-p.x, -p.y};
        case ElevationView::East: return {p.y, -p.x};
        case ElevationView::West: return {-p.y, p.x};
        }
        return {p.x, p.y};
    };

    struct Item {
        EntityId id;
        std::string cls;
        TriMesh mesh;
        double depth = 0;
    };
    std::vector<Item> items;
    Footprint extent;
    for (EntityId id : products) {
        TriMesh mesh = world_mesh(model, id);
        if (mesh.vertices.empty())
            continue;
        double depth = 0;
        for (const auto& v : mesh.vertices) {
            Vec2 p = project(v);
            extent.add(p.x, v.z);
            depth += p.y;
        }
        depth /= static_cast<double>(mesh.vertices.size());
        items.push_back({id, model.get(id).class_name, std::move(mesh), depth});
    }
    if (extent.empty)
        extent.add(0, 0);
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (std::abs(a.depth - b.depth) > 1e-9)
            return a.depth > b.depth;
        return a.id < b.id;
    });

    Frame f = Frame::fit(extent.xmin, extent.ymin, extent.xmax, extent.ymax);
    std::ostringstream out;
    out << svg_open(f);
    for (const auto& it : items) {
        std::string id = "ifc-" + model.guid_of(it.id);
        std::vector<Vec2> all;
        for (const auto& v : it.mesh.vertices)
            all.push_back({project(v).x, v.z});
        auto hull = convex_hull(all);
        if (hull.size() < 3)
            continue;
        bool box = hull.size() == 4 && std::all_of(hull.begin(), hull.end(), [&](Vec2 p) {
                       auto on = [](double a, double b) { return std::abs(a - b) < 1e-9; };
                       Vec2 lo = hull[0], hi = hull[0];
                       for (auto q : hull) {
                           lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
                           hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
                       }
                       return (on(p.x, lo.x) || on(p.x, hi.x)) && (on(p.y, lo.y) || on(p.y, hi.y));
                   });
        std::string fill = is_filler(it.cls) ? "#d0e0f0" : it.cls == "IFCROOF" ? "#a05030" : "#c0c0c0";
        if (box) {
            Vec2 lo = hull[0], hi = hull[0];
            for (auto q : hull) {
                lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
                hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
            }
            out << "<rect id=\"" << id << "\" class=\"" << css_class(it.cls) << "\" x=\"" << num(f.x(lo.x))
                << "\" y=\"" << num(f.y(hi.y)) << "\" width=\"" << num((hi.x - lo.x) * kPixelsPerMetre)
                << "\" height=\"" << num((hi.y - lo.y) * kPixelsPerMetre) << "\" fill=\"" << fill
                << "\" stroke=\"#000000\" stroke-width=\"1\">" << title(model, it.id) << "</rect>\n";
            continue;
        }
        // Silhouette: one subpath per face that is not edge-on.
        std::string d;
        for (const auto& face : it.mesh.faces) {
            std::vector<Vec2> tri;
            for (auto i : face)
                tri.push_back({project(it.mesh.vertices[i]).x, it.mesh.vertices[i].z});
            if (std::abs(cross(tri[1] - tri[0], tri[2] - tri[0])) < 1e-12)
                continue;
            if (!d.empty())
                d += " ";
            d += polygon_path(f, tri);
        }
        if (d.empty())
            d = polygon_path(f, hull);
        out << "<path id=\"" << id << "\" class=\"" << css_class(it.cls) << "\" d=\"" << d << "\" fill=\""
            << fill << "\" stroke=\"#000000\" stroke-width=\"0.5\">" << title(model, it.id) << "</path>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace ifcmcp
