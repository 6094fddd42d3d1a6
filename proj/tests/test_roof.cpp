#include "ifcmcp/error.hpp"
#include "ifcmcp/roof.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace ifcmcp;

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

double top_z(const TriMesh& m)
{
    double z = -1e300;
    for (auto v : m.vertices)
        z = std::max(z, v.z);
    return z;
}

/// Extent of the vertices at the top height.
double ridge_length(const TriMesh& m)
{
    double z = top_z(m);
    double lo = 1e300, hi = -1e300;
    for (auto v : m.vertices)
        if (std::abs(v.z - z) < 1e-9) {
            lo = std::min(lo, v.x);
            hi = std::max(hi, v.x);
        }
    return hi - lo;
}

} // namespace

TEST_CASE("roof: square hip rises to the inradius apex")
{
    Polygon2 sq({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
    TriMesh m = hip_roof_solid(sq, 30, 3.0);
    CHECK(std::abs(top_z(m) - 3.0 - 5 * std::tan(deg(30))) < 1e-9);
    CHECK(is_watertight(m));
    // pyramid volume
    CHECK(mesh_signed_volume(m) == doctest::Approx(100 * 5 * std::tan(deg(30)) / 3));
}

TEST_CASE("roof: 10x4 rectangle at 45 degrees")
{
    Polygon2 r({{0, 0}, {10, 0}, {10, 4}, {0, 4}});
    TriMesh m = hip_roof_solid(r, 45, 0);
    CHECK(std::abs(top_z(m) - 2.0) < 1e-9);
    CHECK(std::abs(ridge_length(m) - 6.0) < 1e-9);
    CHECK(is_watertight(m));
}

TEST_CASE("roof: L outline peaks at the widest wing")
{
    Polygon2 l({{0, 0}, {10, 0}, {10, 5}, {5, 5}, {5, 10}, {0, 10}});
    TriMesh m = hip_roof_solid(l, 30, 3.5);
    CHECK(std::abs(top_z(m) - 3.5 - 2.5 * std::tan(deg(30))) < 1e-9);
    CHECK(is_watertight(m));
    CHECK(mesh_signed_volume(m) > 0);
}

TEST_CASE("roof: apex height is half the short side times tan(slope) for rectangles")
{
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> side(2, 20), slope(10, 60);
    for (int i = 0; i < 40; ++i) {
        double w = side(rng), h = side(rng), s = slope(rng);
        TriMesh m = hip_roof_solid(Polygon2({{0, 0}, {w, 0}, {w, h}, {0, h}}), s, 0);
        CHECK(std::abs(top_z(m) - std::min(w, h) / 2 * std::tan(deg(s))) < 1e-9);
        CHECK(is_watertight(m));
        CHECK(mesh_signed_volume(m) > 0);
    }
}

TEST_CASE("roof: gable ends are vertical")
{
    Polygon2 r({{0, 0}, {10, 0}, {10, 4}, {0, 4}});
    auto w = gable_edge_weights(r);
    REQUIRE(w.size() == 4);
    CHECK(std::count(w.begin(), w.end(), 0.0) == 2);
    TriMesh m = weighted_roof_solid(r, w, 45, 0);
    CHECK(std::abs(top_z(m) - 2.0) < 1e-9);
    CHECK(std::abs(ridge_length(m) - 10.0) < 1e-9);
    CHECK(is_watertight(m));
    CHECK(mesh_signed_volume(m) == doctest::Approx(10 * 4 * 2 / 2.0));
}

TEST_CASE("roof: slope limits and flat roofs")
{
    Polygon2 sq({{0, 0}, {4, 0}, {4, 4}, {0, 4}});
    auto code = [&](double s) {
        try {
            hip_roof_solid(sq, s, 0);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::StepFailed;
    };
    CHECK(code(4.9) == ErrorCode::SlopeOutOfRange);
    CHECK(code(85.1) == ErrorCode::SlopeOutOfRange);
    TriMesh flat = flat_roof_solid(sq, 3, 0.2);
    CHECK(is_watertight(flat));
    CHECK(mesh_signed_volume(flat) == doctest::Approx(16 * 0.2));
}
