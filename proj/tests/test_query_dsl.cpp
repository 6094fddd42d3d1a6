#include "random_model.hpp"

#include "ifcmcp/bim_tools.hpp"
#include "ifcmcp/error.hpp"
#include "ifcmcp/query_dsl.hpp"

#include <doctest.h>

#include <functional>

using namespace ifcmcp;

namespace {

Json q(const IfcModel& m, const std::string& text) { return eval_query(m, parse_query(text)).result; }

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::StepFailed;
}

IfcModel house()
{
    IfcModel m = IfcModel::create("P", GuidGenerator::seeded(31));
    auto walls = create_wall_chain(m, {{0, 0}, {12, 0}, {12, 8}, {0, 8}}, 3, 0.2, true);
    create_slab(m, Polygon2({{0, 0}, {12, 0}, {12, 8}, {0, 8}}), 0.25, 0);
    OpeningParams d;
    d.wall_guid = walls[0];
    d.position_along_axis = 6;
    create_door(m, d);
    m.add_property_set(walls[0], {"Pset_WallCommon", {{"IsExternal", StepValue::boolean(true), {}}}});
    m.add_property_set(walls[1], {"Pset_WallCommon", {{"IsExternal", StepValue::boolean(false), {}}}});
    return m;
}

} // namespace

TEST_CASE("dsl: parse errors carry a position")
{
    auto pos = [](const std::string& text) -> long {
        try {
            parse_query(text);
        } catch (const QueryParseError& e) {
            return static_cast<long>(e.position());
        }
        return -1;
    };
    CHECK(pos("walls | count") == -1);
    CHECK(pos("walls |") == 7);
    CHECK(pos("walls | filter(length >)") == 23);
    CHECK(pos("walls | count | count") >= 0);
    CHECK(pos("walls | filter(1 < 2 < 3) | count") >= 0);
    CHECK(pos("nosuchthing | count") == 0);
    CHECK(pos("walls | rename(\"{unclosed\")") >= 0);
    IfcModel m = house();
    CHECK(code_of([&] { run_query(m, parse_query("walls | rename(\"{bogus}\")")); }) == ErrorCode::UnknownField);
    CHECK(pos(std::string(kMaxQueryBytes + 1, 'a')) >= 0);
    std::string deep = "walls | filter(" + std::string(40, '(') + "1" + std::string(40, ')') + ") | count";
    CHECK(pos(deep) >= 0);
}

TEST_CASE("dsl: evaluation")
{
    IfcModel m = house();
    CHECK(q(m, "walls | count") == 4);
    CHECK(q(m, "walls | count()") == 4);
    CHECK(q(m, "walls | sum(length)") == 40.0);
    CHECK(q(m, "walls | max(length)") == 12.0);
    CHECK(q(m, "walls | avg(length)") == 10.0);
    CHECK(q(m, "walls | filter(length > 10) | count") == 2);
    CHECK(q(m, "slabs | sum(area)") == 96.0);
    CHECK(q(m, "doors | count") == 1);
    CHECK(q(m, "IfcWall | count") == 4);
    CHECK(q(m, "walls | filter(pset(\"Pset_WallCommon\").IsExternal == true) | count") == 1);
    CHECK(q(m, "walls | filter(pset(\"Pset_WallCommon\").IsExternal == false) | count") == 1);
    CHECK(q(m, "walls | filter(.Name == \"Wall_002\") | list(length)") == Json::array({8.0}));
    CHECK(q(m, "walls | filter(!(length > 10) && height == 3) | count") == 2);
    CHECK(q(m, "windows | max(height)").is_null());
    CHECK(q(m, "windows | sum(height)") == 0.0);
    CHECK(q(m, "walls | filter(length / 0 == 1) | count") == 0);
    Json rows = q(m, "walls | filter(length == 12) | select(.Name, length * 2)");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["length * 2"] == 24.0);
    CHECK(code_of([&] { q(m, "walls | sum(.Name)"); }) == ErrorCode::TypeMismatch);
    CHECK(code_of([&] { q(m, "walls | filter(bogus > 1) | count"); }) == ErrorCode::UnknownField);
    CHECK(code_of([&] { eval_query(m, parse_query("walls | count"), 2); }) == ErrorCode::BudgetExceeded);
    CHECK(code_of([&] { eval_query(m, parse_query("walls | rename(\"x\")")); }) == ErrorCode::InvalidParams);
}

TEST_CASE("dsl: mutations are all-or-nothing")
{
    IfcModel m = house();
    auto r = run_query(m, parse_query("walls | filter(length == 12) | rename(\"Long {length}\")"));
    CHECK(r.changed.size() == 2);
    CHECK(q(m, "walls | filter(.Name == \"Long 12.0\") | count") == 2);

    run_query(m, parse_query("slabs | set(pset(\"Pset_SlabCommon\").FireRating, \"2HR\")"));
    CHECK(q(m, "slabs | filter(pset(\"Pset_SlabCommon\").FireRating == \"2HR\") | count") == 1);

    std::string before = m.to_step();
    CHECK(code_of([&] { run_query(m, parse_query("walls | set(.Name, length)")); }) != ErrorCode::StepFailed);
    CHECK(m.to_step() == before);
    CHECK(format_template_number(2.25) == "2.3");
    CHECK(format_template_number(-2.25) == "-2.3");
    CHECK(format_template_number(3) == "3.0");
}

TEST_CASE("dsl: random scenes agree with brute-force scans")
{
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto s = testing_support::random_scene(seed);
        CAPTURE(seed);
        for (const char* sel : {"walls", "slabs", "doors", "furnishings", "openings"})
            REQUIRE(q(s.model, std::string(sel) + " | count") == s.counts[sel]);
        REQUIRE(q(s.model, "products | count") == s.products);
        REQUIRE(q(s.model, "walls | sum(length)") == clean_number(s.wall_length));
        REQUIRE(q(s.model, "slabs | sum(area)") == clean_number(s.slab_area));
        REQUIRE(q(s.model, "walls | sum(area)").get<double>() == doctest::Approx(s.wall_area));
    }
}
