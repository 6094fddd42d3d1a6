#include "ifcmcp/bim_tools.hpp"
#include "ifcmcp/error.hpp"
#include "ifcmcp/query_dsl.hpp"
#include "ifcmcp/representation.hpp"
#include "ifcmcp/scene_query.hpp"

#include <doctest.h>

#include <functional>

#include <cmath>
#include <numbers>

using namespace ifcmcp;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::StepFailed;
}

IfcModel fresh() { return IfcModel::create("P", GuidGenerator::seeded(21)); }

} // namespace

TEST_CASE("bim: walls read back with their axis")
{
    IfcModel m = fresh();
    std::string g = create_wall(m, {{1, 2}, {4, 6}, 2.8, 0.3});
    auto axis = wall_axis(m, m.require(g));
    REQUIRE(axis);
    CHECK(axis->length == doctest::Approx(5));
    CHECK(axis->thickness == doctest::Approx(0.3));
    CHECK(axis->height == doctest::Approx(2.8));
    CHECK(axis->start.x == doctest::Approx(1));
    CHECK(axis->end.y == doctest::Approx(6));
    TriMesh mesh = world_mesh(m, m.require(g));
    CHECK(std::abs(mesh_signed_volume(mesh)) == doctest::Approx(5 * 0.3 * 2.8));
    CHECK(code_of([&] { create_wall(m, {{1, 1}, {1, 1}, 3, 0.2}); }) == ErrorCode::ZeroLengthAxis);
    CHECK(code_of([&] { create_wall(m, {{0, 0}, {1, 0}, 0, 0.2}); }) == ErrorCode::InvalidParams);
}

TEST_CASE("bim: wall chain closes the loop")
{
    IfcModel m = fresh();
    auto g = create_wall_chain(m, {{0, 0}, {10, 0}, {10, 5}, {5, 5}, {5, 10}, {0, 10}}, 3.5, 0.25, true);
    CHECK(g.size() == 6);
    double sum = 0;
    for (const auto& w : g)
        sum += *derived_length(m, m.require(w));
    CHECK(sum == doctest::Approx(40));
}

TEST_CASE("bim: slabs extrude down from the elevation")
{
    IfcModel m = fresh();
    Polygon2 l({{0, 0}, {10, 0}, {10, 5}, {5, 5}, {5, 10}, {0, 10}});
    std::string s = create_slab(m, l, 0.25, 3.5);
    Bounds3 b = product_bounds(m, m.require(s));
    CHECK(b.max.z == doctest::Approx(3.5));
    CHECK(b.min.z == doctest::Approx(3.25));
    CHECK(*derived_area(m, m.require(s)) == doctest::Approx(75));
}

TEST_CASE("bim: hip roof over walls sits on the wall tops")
{
    IfcModel m = fresh();
    auto walls = create_wall_chain(m, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 3, 0.2, true);
    RoofResult r = create_roof_over_walls(m, walls, RoofStyle::Hip, 30);
    CHECK(r.base_z == doctest::Approx(3));
    CHECK(r.warnings.empty());
    TriMesh mesh = world_mesh(m, m.require(r.guid));
    CHECK(is_watertight(weld_vertices(mesh, 1e-9)));
    Bounds3 b = mesh_bounds(mesh);
    CHECK(std::abs(b.max.z - 3 - 5 * std::tan(std::numbers::pi / 6)) < 1e-9);
    CHECK(parse_roof_style("gable") == RoofStyle::Gable);
    CHECK_FALSE(parse_roof_style("mansard"));
}

TEST_CASE("bim: doors cut openings into the nearest wall")
{
    IfcModel m = fresh();
    auto walls = create_wall_chain(m, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 3, 0.2, true);
    OpeningParams p;
    p.position = Point3{2, 0.05, 0};
    OpeningResult d = create_door(m, p);
    CHECK(d.wall == walls[0]);
    CHECK(d.position_along_axis == doctest::Approx(2));
    CHECK(d.width == kDoorWidth);
    CHECK(d.sill_height == 0);
    CHECK(host_of(m, m.require(d.element)) == m.require(walls[0]));
    CHECK(opening_of(m, m.require(d.element)) == m.require(d.opening));

    OpeningParams w;
    w.wall_guid = walls[1];
    w.position_along_axis = 5;
    OpeningResult win = create_window(m, w);
    CHECK(win.sill_height == kWindowSill);
    CHECK(hosted_openings(m, m.require(walls[1])).size() == 1);

    OpeningParams bad;
    bad.wall_guid = walls[0];
    bad.position_along_axis = 9.9;
    CHECK(code_of([&] { create_door(m, bad); }) == ErrorCode::OpeningOutOfBounds);
}

TEST_CASE("bim: stairs, mesh elements, types and storeys")
{
    IfcModel m = fresh();
    StairParams sp;
    sp.total_rise = 3;
    sp.total_run = 4.5;
    sp.step_count = 18;
    sp.width = 1.0;
    StairResult st = create_stairs(m, sp);
    CHECK(st.riser == doctest::Approx(3.0 / 18));
    CHECK(st.tread == doctest::Approx(4.5 / 18));
    TriMesh sm = stair_mesh(3, 4.5, 18, 1);
    CHECK(is_watertight(weld_vertices(sm, 1e-9)));
    CHECK(mesh_signed_volume(sm) > 0);

    TriMesh cube = extrusion_mesh(Polygon2({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), {0, 0, 1}, 1);
    std::string box = create_mesh_element(m, "IfcFurnishingElement", cube, std::string("Box"));
    CHECK(m.get(m.require(box)).class_name == "IFCFURNISHINGELEMENT");
    CHECK(code_of([&] { create_mesh_element(m, "IfcProject", cube, {}); }) == ErrorCode::ClassNotAllowed);

    std::string wall = create_wall(m, {{0, 0}, {3, 0}, 3, 0.2});
    std::string type = create_wall_type(m, "Basic", {wall});
    CHECK(m.type_objects().size() == 1);
    CHECK_FALSE(m.flags(m.require(type)).visible);

    std::string up = create_storey(m, "Level 1", 3.0);
    CHECK(m.storeys().size() == 2);
    CHECK(m.storeys().back() == m.require(up));
    CHECK(m.dangling_refs().empty());
}
