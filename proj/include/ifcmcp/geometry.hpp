#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ifcmcp {

/// Point-equality tolerance in metres.
inline constexpr double kLengthTolerance = 1e-6;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    bool operator==(const Vec2&) const = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend Vec3 operator*(double s, Vec3 a) { return {a.x * s, a.y * s, a.z * s}; }
    bool operator==(const Vec3&) const = default;
};

using Point2 = Vec2;
using Point3 = Vec3;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(Vec3 a) { return std::sqrt(dot(a, a)); }
Vec2 normalized(Vec2 a);
Vec3 normalized(Vec3 a);

double signed_area(std::span<const Vec2> ring);

/// Simple polygon, stored counter-clockwise.
class Polygon2 {
public:
    /// Validates and normalizes; a repeated closing vertex is dropped.
    /// Throws Error(DegeneratePolygon).
    explicit Polygon2(std::vector<Vec2> vertices);

    const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    const Vec2& operator[](std::size_t i) const { return vertices_[i]; }

    double perimeter() const;
    /// Axis-aligned rectangle in its own coordinate frame.
    bool is_axis_aligned_rectangle() const;
    Polygon2 reversed() const;

private:
    std::vector<Vec2> vertices_;
};

/// Shoelace area; positive for any valid polygon.
double polygon_area(const Polygon2& poly);

/// Right-handed frame: x_axis and z_axis unit and orthogonal.
struct Placement {
    Point3 origin{};
    Vec3 z_axis{0, 0, 1};
    Vec3 x_axis{1, 0, 0};

    /// Orthonormalizes the given directions; throws InvalidParams when they
    /// are parallel or zero.
    static Placement from_axes(Point3 origin, Vec3 z_axis, Vec3 x_axis);
    Vec3 y_axis() const { return cross(z_axis, x_axis); }
};

/// Rigid transform (rotation columns + translation).
struct Transform {
    Vec3 x{1, 0, 0};
    Vec3 y{0, 1, 0};
    Vec3 z{0, 0, 1};
    Vec3 t{};

    static Transform from(const Placement& p);
    Vec3 apply(Vec3 p) const { return t + x * p.x + y * p.y + z * p.z; }
    Vec3 apply_direction(Vec3 d) const { return x * d.x + y * d.y + z * d.z; }
    /// this ∘ inner: inner is applied first.
    Transform compose(const Transform& inner) const;
};

struct TriMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<std::size_t, 3>> faces;

    /// Throws EmptyMesh, InvalidParams (index out of range) or
    /// DegenerateFace(index) for area <= 1e-12.
    void validate() const;
    void append(const TriMesh& other);
};

struct Bounds3 {
    Vec3 min{};
    Vec3 max{};
    bool empty = true;

    void expand(Vec3 p);
    void expand(const Bounds3& other);
    Vec3 size() const { return empty ? Vec3{} : max - min; }
};

Bounds3 mesh_bounds(const TriMesh& mesh);
TriMesh transformed(const TriMesh& mesh, const Transform& t);

/// Signed volume by the divergence theorem (positive for outward faces).
double mesh_signed_volume(const TriMesh& mesh);

/// Every undirected edge is used by exactly two triangles, once in each
/// direction. Vertices are compared by index.
bool is_watertight(const TriMesh& mesh);

/// Merges vertices closer than `tolerance` and drops faces that collapse.
TriMesh weld_vertices(const TriMesh& mesh, double tolerance);

/// Splits triangles whose edges pass through other mesh vertices so the mesh
/// has no T-junctions.
TriMesh remove_t_junctions(const TriMesh& mesh, double tolerance);

/// Ear-clipping triangulation of a simple ring (either orientation).
/// Returned triangles follow the ring's own winding.
std::vector<std::array<std::size_t, 3>> triangulate_ring(std::span<const Vec2> ring);

/// Closed prism: `profile` in the XY plane swept along `direction * depth`.
/// Faces are oriented outward.
TriMesh extrusion_mesh(const Polygon2& profile, Vec3 direction, double depth);

std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Axis rectangle centred on the segment start→end, in the wall's local frame
/// (x along the axis, origin at start), with the matching placement.
struct WallProfile {
    Polygon2 profile;
    Placement placement;
    double length;
};
WallProfile wall_axis_to_profile(Point2 start, Point2 end, double thickness);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b, double* t_out = nullptr);

bool is_finite(Vec2 p);
bool is_finite(Vec3 p);

} // namespace ifcmcp
