#include "ifcmcp/geometry.hpp"

#include "ifcmcp/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace ifcmcp {

Vec2 normalized(Vec2 a)
{
    double len = length(a);
    return len > 0 ? a * (1.0 / len) : a;
}

Vec3 normalized(Vec3 a)
{
    double len = length(a);
    return len > 0 ? a * (1.0 / len) : a;
}

bool is_finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }
bool is_finite(Vec3 p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

double signed_area(std::span<const Vec2> ring)
{
    double twice = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice / 2.0;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b, double* t_out)
{
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    if (t_out)
        *t_out = t;
    return length(p - (a + ab * t));
}

namespace {

[[noreturn]] void degenerate(const std::string& why)
{
    throw Error(ErrorCode::DegeneratePolygon, why);
}

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
    double d1 = orient(c, d, a), d2 = orient(c, d, b);
    double d3 = orient(a, b, c), d4 = orient(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return point_segment_distance(a, c, d) < kLengthTolerance ||
           point_segment_distance(b, c, d) < kLengthTolerance ||
           point_segment_distance(c, a, b) < kLengthTolerance ||
           point_segment_distance(d, a, b) < kLengthTolerance;
}

} // namespace

Polygon2::Polygon2(std::vector<Vec2> vertices)
{
    for (const auto& v : vertices)
        if (!is_finite(v))
            degenerate("polygon vertex is not finite");
    if (vertices.size() >= 2 && length(vertices.front() - vertices.back()) < kLengthTolerance)
        vertices.pop_back();
    if (vertices.size() < 3)
        degenerate("polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (length(vertices[(i + 1) % vertices.size()] - vertices[i]) < kLengthTolerance)
            degenerate("consecutive polygon vertices closer than 1e-6 m");

    // Drop vertices that lie on the straight line through their neighbours.
    bool changed = true;
    while (changed && vertices.size() >= 3) {
        changed = false;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            std::size_t n = vertices.size();
            Vec2 prev = vertices[(i + n - 1) % n];
            Vec2 next = vertices[(i + 1) % n];
            Vec2 d1 = vertices[i] - prev;
            Vec2 d2 = next - vertices[i];
            if (std::abs(cross(d1, d2)) <= 1e-12 * length(d1) * length(d2)) {
                if (dot(d1, d2) < 0)
                    degenerate("polygon folds back on itself");
                vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    if (vertices.size() < 3)
        degenerate("polygon has no area");

    std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1))
                continue;
            if (segments_touch(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
                degenerate("polygon is self-intersecting");
        }
    }
    double area = signed_area(vertices);
    if (std::abs(area) < 1e-12)
        degenerate("polygon has no area");
    if (area < 0)
        std::reverse(vertices.begin(), vertices.end());
    vertices_ = std::move(vertices);
}

double Polygon2::perimeter() const
{
    double p = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        p += length(vertices_[(i + 1) % vertices_.size()] - vertices_[i]);
    return p;
}

bool Polygon2::is_axis_aligned_rectangle() const
{
    if (vertices_.size() != 4)
        return false;
    for (std::size_t i = 0; i < 4; ++i) {
        Vec2 d = vertices_[(i + 1) % 4] - vertices_[i];
        bool horizontal = std::abs(d.y) < 1e-12 * std::max(1.0, std::abs(d.x));
        bool vertical = std::abs(d.x) < 1e-12 * std::max(1.0, std::abs(d.y));
        if (!horizontal && !vertical)
            return false;
    }
    return true;
}

Polygon2 Polygon2::reversed() const
{
    std::vector<Vec2> r(vertices_.rbegin(), vertices_.rend());
    return Polygon2(std::move(r));
}

double polygon_area(const Polygon2& poly)
{
    return std::abs(signed_area(poly.vertices()));
}

Placement Placement::from_axes(Point3 origin, Vec3 z_axis, Vec3 x_axis)
{
    if (!is_finite(origin) || !is_finite(z_axis) || !is_finite(x_axis))
        throw Error(ErrorCode::InvalidParams, "placement contains non-finite values");
    Vec3 z = normalized(z_axis);
    Vec3 x = x_axis - z * dot(x_axis, z);
    if (length(z) < 1e-12 || length(x) < 1e-12)
        throw Error(ErrorCode::InvalidParams, "placement axes are degenerate");
    return Placement{origin, z, normalized(x)};
}

Transform Transform::from(const Placement& p)
{
    return Transform{p.x_axis, p.y_axis(), p.z_axis, p.origin};
}

Transform Transform::compose(const Transform& inner) const
{
    return Transform{apply_direction(inner.x), apply_direction(inner.y), apply_direction(inner.z),
                     apply(inner.t)};
}

// ---------------------------------------------------------------------------
// Meshes

namespace {

double triangle_area(Vec3 a, Vec3 b, Vec3 c)
{
    return 0.5 * length(cross(b - a, c - a));
}

} // namespace

void TriMesh::validate() const
{
    if (vertices.empty() || faces.empty())
        throw Error(ErrorCode::EmptyMesh, "mesh has no vertices or faces");
    for (const auto& v : vertices)
        if (!is_finite(v))
            throw Error(ErrorCode::InvalidParams, "mesh vertex is not finite");
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (std::size_t idx : faces[f])
            if (idx >= vertices.size())
                throw Error(ErrorCode::InvalidParams,
                            "face " + std::to_string(f) + " references vertex " +
                                std::to_string(idx) + " out of range");
        const auto& face = faces[f];
        if (triangle_area(vertices[face[0]], vertices[face[1]], vertices[face[2]]) <= 1e-12)
            throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " is degenerate");
    }
}

void TriMesh::append(const TriMesh& other)
{
    std::size_t base = vertices.size();
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (auto f : other.faces)
        faces.push_back({f[0] + base, f[1] + base, f[2] + base});
}

void Bounds3::expand(Vec3 p)
{
    if (empty) {
        min = max = p;
        empty = false;
        return;
    }
    min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
    max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
}

void Bounds3::expand(const Bounds3& other)
{
    if (other.empty)
        return;
    expand(other.min);
    expand(other.max);
}

Bounds3 mesh_bounds(const TriMesh& mesh)
{
    Bounds3 b;
    for (const auto& v : mesh.vertices)
        b.expand(v);
    return b;
}

TriMesh transformed(const TriMesh& mesh, const Transform& t)
{
    TriMesh out = mesh;
    for (auto& v : out.vertices)
        v = t.apply(v);
    return out;
}

double mesh_signed_volume(const TriMesh& mesh)
{
    double six = 0.0;
    for (const auto& f : mesh.faces)
        six += dot(mesh.vertices[f[0]], cross(mesh.vertices[f[1]], mesh.vertices[f[2]]));
    return six / 6.0;
}

bool is_watertight(const TriMesh& mesh)
{
    if (mesh.faces.empty())
        return false;
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            std::size_t a = f[static_cast<std::size_t>(k)];
            std::size_t b = f[static_cast<std::size_t>((k + 1) % 3)];
            if (a == b)
                return false;
            if (++directed[{a, b}] > 1)
                return false;
        }
    }
    for (const auto& [edge, count] : directed)
        if (!directed.contains({edge.second, edge.first}))
            return false;
    return true;
}

TriMesh weld_vertices(const TriMesh& mesh, double tolerance)
{
    const double cell = std::max(tolerance * 4.0, 1e-9);
    using Key = std::tuple<long long, long long, long long>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept
        {
            auto [a, b, c] = k;
            return std::hash<long long>()(a * 73856093LL ^ b * 19349663LL ^ c * 83492791LL);
        }
    };
    std::unordered_map<Key, std::vector<std::size_t>, KeyHash> grid;
    TriMesh out;
    std::vector<std::size_t> remap(mesh.vertices.size());
    auto key_of = [&](Vec3 p) {
        return Key{static_cast<long long>(std::floor(p.x / cell)),
                   static_cast<long long>(std::floor(p.y / cell)),
                   static_cast<long long>(std::floor(p.z / cell))};
    };
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        Vec3 p = mesh.vertices[i];
        auto [kx, ky, kz] = key_of(p);
        std::optional<std::size_t> found;
        for (long long dx = -1; dx <= 1 && !found; ++dx)
            for (long long dy = -1; dy <= 1 && !found; ++dy)
                for (long long dz = -1; dz <= 1 && !found; ++dz) {
                    auto it = grid.find(Key{kx + dx, ky + dy, kz + dz});
                    if (it == grid.end())
                        continue;
                    for (std::size_t candidate : it->second)
                        if (length(out.vertices[candidate] - p) <= tolerance) {
                            found = candidate;
                            break;
                        }
                }
        if (!found) {
            found = out.vertices.size();
            out.vertices.push_back(p);
            grid[key_of(p)].push_back(*found);
        }
        remap[i] = *found;
    }
    for (const auto& f : mesh.faces) {
        std::array<std::size_t, 3> g{remap[f[0]], remap[f[1]], remap[f[2]]};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2])
            continue;
        out.faces.push_back(g);
    }
    return out;
}

TriMesh remove_t_junctions(const TriMesh& input, double tolerance)
{
    TriMesh mesh = input;
    for (int pass = 0; pass < 8; ++pass) {
        bool changed = false;
        std::vector<std::array<std::size_t, 3>> faces;
        faces.reserve(mesh.faces.size());
        for (const auto& f : mesh.faces) {
            std::array<std::vector<std::pair<double, std::size_t>>, 3> on_edge;
            bool any = false;
            for (int k = 0; k < 3; ++k) {
                std::size_t a = f[static_cast<std::size_t>(k)];
                std::size_t b = f[static_cast<std::size_t>((k + 1) % 3)];
                Vec3 pa = mesh.vertices[a], pb = mesh.vertices[b];
                Vec3 ab = pb - pa;
                double len2 = dot(ab, ab);
                if (len2 == 0)
                    continue;
                for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
                    if (v == f[0] || v == f[1] || v == f[2])
                        continue;
                    Vec3 p = mesh.vertices[v];
                    double t = dot(p - pa, ab) / len2;
                    if (t <= 1e-9 || t >= 1 - 1e-9)
                        continue;
                    if (length(p - (pa + ab * t)) <= tolerance) {
                        on_edge[static_cast<std::size_t>(k)].push_back({t, v});
                        any = true;
                    }
                }
                std::sort(on_edge[static_cast<std::size_t>(k)].begin(),
                          on_edge[static_cast<std::size_t>(k)].end());
            }
            if (!any) {
                faces.push_back(f);
                continue;
            }
            changed = true;
            int split_edges = 0;
            int split_edge = 0;
            for (int k = 0; k < 3; ++k)
                if (!on_edge[static_cast<std::size_t>(k)].empty()) {
                    ++split_edges;
                    split_edge = k;
                }
            if (split_edges == 1) {
                // Fan from the vertex opposite the split edge.
                std::size_t a = f[static_cast<std::size_t>(split_edge)];
                std::size_t b = f[static_cast<std::size_t>((split_edge + 1) % 3)];
                std::size_t apex = f[static_cast<std::size_t>((split_edge + 2) % 3)];
                std::vector<std::size_t> chain{a};
                for (auto& [t, v] : on_edge[static_cast<std::size_t>(split_edge)])
                    chain.push_back(v);
                chain.push_back(b);
                for (std::size_t i = 0; i + 1 < chain.size(); ++i)
                    faces.push_back({chain[i], chain[i + 1], apex});
            } else {
                std::vector<std::size_t> ring;
                for (int k = 0; k < 3; ++k) {
                    ring.push_back(f[static_cast<std::size_t>(k)]);
                    for (auto& [t, v] : on_edge[static_cast<std::size_t>(k)])
                        ring.push_back(v);
                }
                Vec3 c = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) * (1.0 / 3.0);
                std::size_t ci = mesh.vertices.size();
                mesh.vertices.push_back(c);
                for (std::size_t i = 0; i < ring.size(); ++i)
                    faces.push_back({ring[i], ring[(i + 1) % ring.size()], ci});
            }
        }
        mesh.faces = std::move(faces);
        if (!changed)
            break;
    }
    return mesh;
}

std::vector<std::array<std::size_t, 3>> triangulate_ring(std::span<const Vec2> ring)
{
    std::vector<std::array<std::size_t, 3>> out;
    const std::size_t n = ring.size();
    if (n < 3)
        return out;
    const double orientation = signed_area(ring) >= 0 ? 1.0 : -1.0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    auto inside = [&](Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
        double c1 = cross(b - a, p - a) * orientation;
        double c2 = cross(c - b, p - b) * orientation;
        double c3 = cross(a - c, p - c) * orientation;
        return c1 >= -1e-12 && c2 >= -1e-12 && c3 >= -1e-12;
    };

    std::size_t guard = 0;
    while (idx.size() > 3 && guard < n * n + 10) {
        ++guard;
        bool clipped = false;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::size_t ip = idx[(i + idx.size() - 1) % idx.size()];
            std::size_t ic = idx[i];
            std::size_t in = idx[(i + 1) % idx.size()];
            Vec2 a = ring[ip], b = ring[ic], c = ring[in];
            double turn = cross(b - a, c - b) * orientation;
            if (turn <= 1e-14)
                continue;
            bool blocked = false;
            for (std::size_t other : idx) {
                if (other == ip || other == ic || other == in)
                    continue;
                Vec2 q = ring[other];
                if (q == a || q == b || q == c)
                    continue;
                if (inside(ring[other], a, b, c)) {
                    blocked = true;
                    break;
                }
            }
            if (blocked)
                continue;
            out.push_back({ip, ic, in});
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
            clipped = true;
            break;
        }
        if (!clipped)
            break;
    }
    // Numerical leftovers are fanned; valid simple rings never reach this.
    for (std::size_t i = 1; i + 1 < idx.size(); ++i)
        out.push_back({idx[0], idx[i], idx[i + 1]});
    return out;
}

TriMesh extrusion_mesh(const Polygon2& profile, Vec3 direction, double depth)
{
    TriMesh mesh;
    const auto& ring = profile.vertices();
    const std::size_t n = ring.size();
    Vec3 offset = normalized(direction) * depth;
    for (const auto& p : ring)
        mesh.vertices.push_back({p.x, p.y, 0.0});
    for (const auto& p : ring)
        mesh.vertices.push_back(Vec3{p.x, p.y, 0.0} + offset);
    for (const auto& tri : triangulate_ring(ring)) {
        mesh.faces.push_back({tri[2], tri[1], tri[0]});
        mesh.faces.push_back({tri[0] + n, tri[1] + n, tri[2] + n});
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        mesh.faces.push_back({i, j, j + n});
        mesh.faces.push_back({i, j + n, i + n});
    }
    if (mesh_signed_volume(mesh) < 0)
        for (auto& f : mesh.faces)
            std::swap(f[1], f[2]);
    return mesh;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> points)
{
    std::sort(points.begin(), points.end(),
              [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 3)
        return points;
    std::vector<Vec2> hull(points.size() * 2);
    std::size_t k = 0;
    for (const auto& p : points) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0)
            --k;
        hull[k++] = p;
    }
    for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
        const auto& p = points[i];
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0)
            --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return hull;
}

WallProfile wall_axis_to_profile(Point2 start, Point2 end, double thickness)
{
    if (!is_finite(start) || !is_finite(end) || !std::isfinite(thickness))
        throw Error(ErrorCode::InvalidParams, "wall axis contains non-finite values");
    Vec2 axis = end - start;
    double len = length(axis);
    if (len < kLengthTolerance)
        throw Error(ErrorCode::ZeroLengthAxis, "wall axis is shorter than 1e-6 m");
    if (thickness <= 0)
        throw Error(ErrorCode::InvalidParams, "wall thickness must be positive");
    double half = thickness / 2.0;
    Polygon2 profile({{0.0, -half}, {len, -half}, {len, half}, {0.0, half}});
    Vec2 dir = axis * (1.0 / len);
    Placement placement{{start.x, start.y, 0.0}, {0, 0, 1}, {dir.x, dir.y, 0.0}};
    return WallProfile{std::move(profile), placement, len};
}

} // namespace ifcmcp
