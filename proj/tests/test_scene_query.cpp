#include "ifcmcp/bim_tools.hpp"
#include "ifcmcp/error.hpp"
#include "ifcmcp/scene_query.hpp"

#include <doctest.h>

using namespace ifcmcp;

namespace {

IfcModel four_walls()
{
    IfcModel m = IfcModel::create("My Project", GuidGenerator::seeded(4));
    create_wall(m, {{0, 0}, {10, 0}, 3, 0.2});
    create_wall(m, {{10, 0}, {10, 10}, 3, 0.2});
    create_wall(m, {{10, 10}, {0, 10}, 3, 0.2});
    create_wall(m, {{0, 10}, {0, 0}, 3, 0.2});
    create_wall_type(m, "wall");
    return m;
}

} // namespace

TEST_CASE("scene: get_scene_info record layout")
{
    IfcModel m = four_walls();
    Json info = get_scene_info(m);
    CHECK(info["count"] == 9);
    CHECK(info["total"] == 9);
    std::vector<std::string> keys;
    for (const auto& [k, v] : info["objects"][0].items())
        keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"name", "type", "location", "visible", "selected", "guid", "ifc_class"});
    CHECK(info["objects"][0]["name"] == "IfcProject/My Project");
    CHECK(info["objects"][0]["type"] == "EMPTY");
    CHECK(info["objects"][4]["name"] == "IfcWall/Wall_001");
    CHECK(info["objects"][4]["type"] == "MESH");
    CHECK(info["objects"][5]["location"] == Json::array({10.0, 0.0, 0.0}));
    CHECK(info["objects"][8]["ifc_class"] == "IfcWallType");
    CHECK(info["objects"][8]["visible"] == false);
}

TEST_CASE("scene: pages concatenate to the full listing")
{
    IfcModel m = four_walls();
    Json all = get_scene_info(m)["objects"];
    for (int limit = 1; limit <= 10; ++limit) {
        Json joined = Json::array();
        for (int offset = 0; offset < 12; offset += limit) {
            Json page = get_scene_info(m, offset, limit);
            CHECK(page["total"] == 9);
            CHECK(page["offset"] == offset);
            CHECK(page["limit"] == limit);
            CHECK(page["count"] == page["objects"].size());
            CHECK(page["count"].get<int>() == std::max(0, std::min(limit, 9 - offset)));
            for (const auto& o : page["objects"])
                joined.push_back(o);
        }
        CHECK(joined == all);
    }
    CHECK_THROWS_AS(get_scene_info(m, -1, 5), Error);
    CHECK_THROWS_AS(get_scene_info(m, 0, 0), Error);
}

TEST_CASE("scene: object info, overview and door properties")
{
    IfcModel m = four_walls();
    std::string wall = m.guid_of(m.products()[0]);
    Json info = get_object_info(m, wall);
    CHECK(info["guid"] == wall);
    CHECK_THROWS_AS(get_object_info(m, "0000000000000000000000"), Error);

    OpeningParams p;
    p.wall_guid = wall;
    p.position_along_axis = 3;
    std::string door = create_door(m, p).element;
    Json dp = get_door_properties(m, door);
    CHECK(dp["host_wall"] == wall);
    CHECK(dp["width"] == 0.9);
    CHECK(dp["position_along_axis"] == 3.0);
    try {
        get_door_properties(m, wall);
        FAIL("expected NotADoor");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotADoor);
    }

    Json ov = get_ifc_scene_overview(m);
    CHECK(ov["project"] == "My Project");
    CHECK(ov["product_counts"]["IfcWall"] == 4);
    CHECK(ov["product_counts"]["IfcDoor"] == 1);
}
