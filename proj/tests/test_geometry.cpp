#include "ifcmcp/error.hpp"
#include "ifcmcp/geometry.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace ifcmcp;

TEST_CASE("geometry: shoelace area and orientation")
{
    Polygon2 l({{0, 0}, {10, 0}, {10, 5}, {5, 5}, {5, 10}, {0, 10}});
    CHECK(polygon_area(l) == doctest::Approx(75.0));
    Polygon2 cw({{0, 0}, {0, 4}, {3, 4}, {3, 0}});
    CHECK(signed_area(cw.vertices()) > 0); // stored counter-clockwise
    CHECK(polygon_area(cw) == doctest::Approx(12.0));
    CHECK(Polygon2({{0, 0}, {1, 0}, {1, 1}, {0, 0}}).size() == 3);
}

TEST_CASE("geometry: degenerate polygons throw")
{
    auto code_of = [](std::vector<Vec2> v) {
        try {
            Polygon2 p(std::move(v));
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::StepFailed;
    };
    CHECK(code_of({{0, 0}, {1, 0}}) == ErrorCode::DegeneratePolygon);
    CHECK(code_of({{0, 0}, {1, 0}, {2, 0}}) == ErrorCode::DegeneratePolygon);
    CHECK(code_of({{0, 0}, {2, 2}, {2, 0}, {0, 2}}) == ErrorCode::DegeneratePolygon); // bow tie
}

TEST_CASE("geometry: extrusions are closed with the expected volume")
{
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.5, 10.0);
    for (int i = 0; i < 50; ++i) {
        double w = u(rng), h = u(rng), d = u(rng);
        Polygon2 rect({{0, 0}, {w, 0}, {w, h}, {0, h}});
        TriMesh m = extrusion_mesh(rect, {0, 0, 1}, d);
        m.validate();
        CHECK(is_watertight(m));
        CHECK(mesh_signed_volume(m) == doctest::Approx(w * h * d));
    }
    Polygon2 l({{0, 0}, {10, 0}, {10, 5}, {5, 5}, {5, 10}, {0, 10}});
    TriMesh m = extrusion_mesh(l, {0, 0, -1}, 0.25);
    CHECK(is_watertight(m));
    CHECK(std::abs(mesh_signed_volume(m)) == doctest::Approx(75.0 * 0.25));
}

TEST_CASE("geometry: triangulation covers the ring area")
{
    std::vector<Vec2> ring{{0, 0}, {10, 0}, {10, 5}, {5, 5}, {5, 10}, {0, 10}};
    auto tris = triangulate_ring(ring);
    CHECK(tris.size() == ring.size() - 2);
    double sum = 0;
    for (auto t : tris)
        sum += cross(ring[t[1]] - ring[t[0]], ring[t[2]] - ring[t[0]]) / 2;
    CHECK(sum == doctest::Approx(75.0));
}

TEST_CASE("geometry: transforms compose")
{
    Placement p = Placement::from_axes({1, 2, 3}, {0, 0, 1}, {0, 1, 0});
    Transform t = Transform::from(p);
    Vec3 q = t.apply({1, 0, 0});
    CHECK(q.x == doctest::Approx(1));
    CHECK(q.y == doctest::Approx(3));
    Transform back = t.compose(t);
    Vec3 r = back.apply({1, 0, 0});
    CHECK(r.x == doctest::Approx(-2));
    CHECK(r.y == doctest::Approx(3));
    CHECK(r.z == doctest::Approx(6));
    CHECK_THROWS_AS(Placement::from_axes({}, {0, 0, 1}, {0, 0, 2}), Error);
}

TEST_CASE("geometry: wall profile follows the axis")
{
    auto w = wall_axis_to_profile({0, 0}, {3, 4}, 0.2);
    CHECK(w.length == doctest::Approx(5));
    CHECK(polygon_area(w.profile) == doctest::Approx(1.0));
    Vec3 end = Transform::from(w.placement).apply({5, 0, 0});
    CHECK(end.x == doctest::Approx(3));
    CHECK(end.y == doctest::Approx(4));
}

TEST_CASE("geometry: convex hull and welding")
{
    auto hull = convex_hull({{0, 0}, {1, 1}, {2, 0}, {2, 2}, {0, 2}, {1, 0.5}});
    CHECK(hull.size() == 4);
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1e-9, 0, 0}};
    m.faces = {{0, 1, 2}};
    CHECK(weld_vertices(m, 1e-6).vertices.size() == 3);
    TriMesh bad;
    bad.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    bad.faces = {{0, 1, 2}};
    CHECK_THROWS_AS(bad.validate(), Error);
}
