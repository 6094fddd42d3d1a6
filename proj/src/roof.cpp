#include "ifcmcp/roof.hpp"

#include "ifcmcp/error.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <optional>

namespace ifcmcp {

namespace {

// One closed wavefront polygon. Entry k describes vertex k and the edge that
// leaves it towards vertex k+1.
struct Wavefront {
    std::vector<Vec2> pos;
    std::vector<Vec2> normal; // inward unit normal of edge k
    std::vector<double> weight;
    double time = 0.0;

    std::size_t size() const { return pos.size(); }
    std::size_t next(std::size_t k) const { return (k + 1) % pos.size(); }
    std::size_t prev(std::size_t k) const { return (k + pos.size() - 1) % pos.size(); }

    void erase(std::size_t k)
    {
        pos.erase(pos.begin() + static_cast<std::ptrdiff_t>(k));
        normal.erase(normal.begin() + static_cast<std::ptrdiff_t>(k));
        weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(k));
    }
};

struct Tolerances {
    double geometric;
    double time;
};

Vec2 vertex_velocity(const Wavefront& w, std::size_t k)
{
    std::size_t p = w.prev(k);
    Vec2 na = w.normal[p], nb = w.normal[k];
    double wa = w.weight[p], wb = w.weight[k];
    double det = cross(na, nb);
    if (std::abs(det) < 1e-12)
        return na * ((wa + wb) / 2.0);
    return {(wa * nb.y - wb * na.y) / det, (na.x * wb - nb.x * wa) / det};
}

bool is_reflex(const Wavefront& w, std::size_t k)
{
    Vec2 d_in = w.pos[k] - w.pos[w.prev(k)];
    Vec2 d_out = w.pos[w.next(k)] - w.pos[k];
    return cross(normalized(d_in), normalized(d_out)) < -1e-9;
}

// Merges collapsed edges, removes spikes and straight-through vertices.
void clean(Wavefront& w, const Tolerances& tol)
{
    bool changed = true;
    while (changed && w.size() >= 2) {
        changed = false;
        for (std::size_t k = 0; k < w.size() && w.size() >= 2; ++k) {
            if (length(w.pos[w.next(k)] - w.pos[k]) < tol.geometric) {
                w.erase(k);
                changed = true;
                break;
            }
        }
        if (changed || w.size() < 3)
            continue;
        for (std::size_t k = 0; k < w.size(); ++k) {
            std::size_t p = w.prev(k), n = w.next(k);
            Vec2 d_in = w.pos[k] - w.pos[p];
            Vec2 d_out = w.pos[n] - w.pos[k];
            Vec2 u_in = normalized(d_in), u_out = normalized(d_out);
            if (std::abs(cross(u_in, u_out)) > 1e-9)
                continue;
            if (dot(u_in, u_out) < 0) {
                // Spike P -> Q -> R: P keeps whichever edge still points at R.
                if (length(d_out) > length(d_in)) {
                    w.normal[p] = w.normal[k];
                    w.weight[p] = w.weight[k];
                }
                w.erase(k);
                changed = true;
                break;
            }
            if (std::abs(w.weight[p] - w.weight[k]) < 1e-12) {
                w.erase(k);
                changed = true;
                break;
            }
        }
    }
}

double wavefront_area(const Wavefront& w)
{
    return signed_area(w.pos);
}

struct RoofBuilder {
    double rise_per_unit;
    double base_z;
    TriMesh mesh;

    Vec3 lift(Vec2 p, double t) const { return {p.x, p.y, base_z + t * rise_per_unit}; }

    void add_triangle(Vec3 a, Vec3 b, Vec3 c)
    {
        if (length(cross(b - a, c - a)) <= 2e-12)
            return;
        std::size_t base = mesh.vertices.size();
        mesh.vertices.push_back(a);
        mesh.vertices.push_back(b);
        mesh.vertices.push_back(c);
        mesh.faces.push_back({base, base + 1, base + 2});
    }

    // Strip swept by one wavefront edge between t0 and t1.
    void add_strip(Vec2 a0, Vec2 b0, Vec2 a1, Vec2 b1, double t0, double t1)
    {
        Vec3 A0 = lift(a0, t0), B0 = lift(b0, t0), A1 = lift(a1, t1), B1 = lift(b1, t1);
        add_triangle(A0, B0, B1);
        add_triangle(A0, B1, A1);
    }
};

struct SplitCandidate {
    std::size_t vertex;
    std::size_t edge;
};

std::optional<SplitCandidate> touching_split(const Wavefront& w, const Tolerances& tol)
{
    const std::size_t n = w.size();
    for (std::size_t r = 0; r < n; ++r) {
        if (!is_reflex(w, r))
            continue;
        for (std::size_t e = 0; e < n; ++e) {
            if (e == r || e == w.prev(r))
                continue;
            if (point_segment_distance(w.pos[r], w.pos[e], w.pos[w.next(e)]) < tol.geometric)
                return SplitCandidate{r, e};
        }
    }
    return std::nullopt;
}

// Splits at reflex vertex r touching edge e into two wavefronts.
std::pair<Wavefront, Wavefront> split(const Wavefront& w, SplitCandidate c)
{
    Wavefront a, b;
    a.time = b.time = w.time;
    auto push = [](Wavefront& dst, Vec2 p, Vec2 normal, double weight) {
        dst.pos.push_back(p);
        dst.normal.push_back(normal);
        dst.weight.push_back(weight);
    };
    // a: r, r+1, ..., e (e's edge now closes back to r)
    for (std::size_t k = c.vertex;; k = w.next(k)) {
        push(a, w.pos[k], w.normal[k], w.weight[k]);
        if (k == c.edge)
            break;
    }
    // b: r' (carrying edge e), e+1, ..., r-1
    push(b, w.pos[c.vertex], w.normal[c.edge], w.weight[c.edge]);
    for (std::size_t k = w.next(c.edge); k != c.vertex; k = w.next(k))
        push(b, w.pos[k], w.normal[k], w.weight[k]);
    return {std::move(a), std::move(b)};
}

// Time until the next edge collapse or split, or nullopt if nothing happens.
std::optional<double> next_event(const Wavefront& w, const std::vector<Vec2>& vel,
                                 const Tolerances& tol)
{
    const std::size_t n = w.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = w.next(k);
        Vec2 d = w.pos[j] - w.pos[k];
        double len = length(d);
        if (len == 0)
            continue;
        double rate = dot(vel[j] - vel[k], d * (1.0 / len));
        if (rate < -1e-12)
            best = std::min(best, -len / rate);
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (!is_reflex(w, r))
            continue;
        for (std::size_t e = 0; e < n; ++e) {
            if (e == r || e == w.prev(r))
                continue;
            std::size_t f = w.next(e);
            double dist = dot(w.pos[r] - w.pos[e], w.normal[e]);
            double closing = w.weight[e] - dot(vel[r], w.normal[e]);
            if (dist < -tol.geometric || closing <= 1e-12)
                continue;
            double t = std::max(dist, 0.0) / closing;
            if (t <= tol.time)
                continue;
            Vec2 hit = w.pos[r] + vel[r] * t;
            Vec2 a = w.pos[e] + vel[e] * t;
            Vec2 b = w.pos[f] + vel[f] * t;
            Vec2 ab = b - a;
            double len2 = dot(ab, ab);
            double s = len2 > 0 ? dot(hit - a, ab) / len2 : 0.0;
            double slack = tol.geometric / std::max(std::sqrt(len2), tol.geometric);
            if (s < -slack || s > 1 + slack)
                continue;
            best = std::min(best, t);
        }
    }
    if (!std::isfinite(best))
        return std::nullopt;
    return best;
}

[[noreturn]] void skeleton_failure(const std::string& why)
{
    throw Error(ErrorCode::SkeletonFailure, "straight skeleton failed: " + why);
}

void check_slope(double slope_deg)
{
    if (!(slope_deg >= 5.0 && slope_deg <= 85.0))
        throw Error(ErrorCode::SlopeOutOfRange, "roof slope must lie between 5 and 85 degrees");
}

} // namespace

TriMesh weighted_roof_solid(const Polygon2& outline, std::span<const double> edge_weights,
                            double slope_deg, double base_z)
{
    check_slope(slope_deg);
    const auto& ring = outline.vertices();
    const std::size_t n = ring.size();
    if (edge_weights.size() != n)
        throw Error(ErrorCode::InvalidParams, "one weight per outline edge is required");

    Bounds3 bounds;
    for (const auto& p : ring)
        bounds.expand(Vec3{p.x, p.y, 0.0});
    double extent = std::max({1.0, bounds.size().x, bounds.size().y});
    Tolerances tol{1e-9 * extent, 1e-12 * extent};

    Wavefront initial;
    for (std::size_t k = 0; k < n; ++k) {
        Vec2 d = normalized(ring[(k + 1) % n] - ring[k]);
        initial.pos.push_back(ring[k]);
        initial.normal.push_back({-d.y, d.x});
        initial.weight.push_back(edge_weights[k]);
    }

    RoofBuilder builder{std::tan(slope_deg * std::numbers::pi / 180.0), base_z, {}};
    std::vector<Wavefront> pending{std::move(initial)};
    const std::size_t step_limit = 40 * n + 200;
    std::size_t steps = 0;

    while (!pending.empty()) {
        Wavefront w = std::move(pending.back());
        pending.pop_back();
        while (true) {
            if (++steps > step_limit)
                skeleton_failure("event limit exceeded");
            clean(w, tol);
            if (w.size() < 3 || std::abs(wavefront_area(w)) < tol.geometric * extent)
                break;
            if (wavefront_area(w) < 0)
                skeleton_failure("wavefront inverted");
            if (auto c = touching_split(w, tol)) {
                auto [a, b] = split(w, *c);
                pending.push_back(std::move(a));
                pending.push_back(std::move(b));
                break;
            }
            std::vector<Vec2> vel(w.size());
            for (std::size_t k = 0; k < w.size(); ++k)
                vel[k] = vertex_velocity(w, k);
            auto dt = next_event(w, vel, tol);
            if (!dt)
                skeleton_failure("wavefront never collapses");
            double t0 = w.time, t1 = w.time + *dt;
            std::vector<Vec2> moved(w.size());
            for (std::size_t k = 0; k < w.size(); ++k)
                moved[k] = w.pos[k] + vel[k] * *dt;
            for (std::size_t k = 0; k < w.size(); ++k) {
                std::size_t j = w.next(k);
                builder.add_strip(w.pos[k], w.pos[j], moved[k], moved[j], t0, t1);
            }
            w.pos = std::move(moved);
            w.time = t1;
        }
    }

    // Base face, facing down.
    for (const auto& tri : triangulate_ring(ring))
        builder.add_triangle({ring[tri[2]].x, ring[tri[2]].y, base_z},
                             {ring[tri[1]].x, ring[tri[1]].y, base_z},
                             {ring[tri[0]].x, ring[tri[0]].y, base_z});

    TriMesh mesh = weld_vertices(builder.mesh, tol.geometric * 10);
    std::erase_if(mesh.faces, [&](const std::array<std::size_t, 3>& f) {
        Vec3 a = mesh.vertices[f[0]], b = mesh.vertices[f[1]], c = mesh.vertices[f[2]];
        return length(cross(b - a, c - a)) <= 2e-12;
    });
    mesh = remove_t_junctions(mesh, tol.geometric * 10);
    if (!is_watertight(mesh))
        skeleton_failure("roof surface is not closed");
    return mesh;
}

TriMesh hip_roof_solid(const Polygon2& outline, double slope_deg, double base_z)
{
    std::vector<double> weights(outline.size(), 1.0);
    return weighted_roof_solid(outline, weights, slope_deg, base_z);
}

std::vector<double> gable_edge_weights(const Polygon2& outline)
{
    const auto& ring = outline.vertices();
    const std::size_t n = ring.size();
    std::size_t longest = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (length(ring[(k + 1) % n] - ring[k]) >
            length(ring[(longest + 1) % n] - ring[longest]) + kLengthTolerance)
            longest = k;
    Vec2 axis = normalized(ring[(longest + 1) % n] - ring[longest]);
    std::vector<double> weights(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        Vec2 d = normalized(ring[(k + 1) % n] - ring[k]);
        if (std::abs(dot(d, axis)) < 1e-9)
            weights[k] = 0.0;
    }
    return weights;
}

TriMesh flat_roof_solid(const Polygon2& outline, double base_z, double thickness)
{
    TriMesh mesh = extrusion_mesh(outline, {0, 0, 1}, thickness);
    for (auto& v : mesh.vertices)
        v.z += base_z;
    return mesh;
}

} // namespace ifcmcp
