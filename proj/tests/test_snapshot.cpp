#include "ifcmcp/bim_tools.hpp"
#include "ifcmcp/error.hpp"
#include "ifcmcp/scene_query.hpp"
#include "ifcmcp/snapshot.hpp"

#include <doctest.h>


using namespace ifcmcp;

namespace {

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
        ++n;
    return n;
}

IfcModel l_building()
{
    return load_ifc_file(std::string(IFCMCP_SOURCE_ROOT) + "/tests/fixtures/l_building.ifc");
}

} // namespace

TEST_CASE("snapshot: plan is deterministic and names every cut product once")
{
    IfcModel m = l_building();
    std::string a = render_plan(m);
    CHECK(a == render_plan(l_building()));
    CHECK(a.find("<svg xmlns=") != std::string::npos);
    for (EntityId id : m.products()) {
        Bounds3 b = product_bounds(m, id);
        bool cut = b.min.z <= kDefaultCutHeight && b.max.z >= 0.0;
        CAPTURE(m.name_of(id));
        CHECK(count(a, "id=\"ifc-" + m.guid_of(id) + "\"") == (cut ? 1u : 0u));
    }
    CHECK(count(a, "class=\"wall\"") == 6);
    CHECK(count(a, "class=\"door\"") == 1);
}

TEST_CASE("snapshot: plan geometry")
{
    IfcModel m = IfcModel::create("P", GuidGenerator::seeded(5));
    create_wall(m, {{0, 0}, {10, 0}, 3, 0.2});
    std::string svg = render_plan(m);
    // 10 m axis plus a 1 m margin each side at 50 px/m
    CHECK(svg.find("width=\"600\"") != std::string::npos);
    CHECK(render_plan(m, std::nullopt, 5.0).find("class=\"wall\"") != std::string::npos);
    IfcModel empty = IfcModel::create("P");
    CHECK_THROWS_AS(render_plan(empty), Error);
    CHECK_THROWS_AS(render_plan(m, std::string("0000000000000000000000")), Error);
}

TEST_CASE("snapshot: elevations")
{
    IfcModel m = l_building();
    for (auto v : {ElevationView::North, ElevationView::South, ElevationView::East, ElevationView::West}) {
        std::string svg = render_elevation(m, v);
        CHECK(svg == render_elevation(m, v));
        CHECK(count(svg, "id=\"ifc-") >= m.products().size() - 1);
    }
    CHECK(parse_elevation_view("east") == ElevationView::East);
    CHECK_FALSE(parse_elevation_view("up"));
    try {
        render_elevation(IfcModel::create("P"), ElevationView::South);
        FAIL("expected EmptyModel");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyModel);
    }
}
