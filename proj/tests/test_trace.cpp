#include "ifcmcp/trace.hpp"

#include <doctest.h>

#include <fstream>

using namespace ifcmcp;

namespace {

SessionConfig seeded()
{
    SessionConfig c;
    c.seed = 3;
    return c;
}

Json load(const std::string& name)
{
    std::ifstream in(std::string(IFCMCP_SOURCE_ROOT) + "/traces/" + name);
    return Json::parse(in);
}

} // namespace

TEST_CASE("trace: json paths")
{
    Json v = Json::parse(R"({"a":{"b":[1,{"c":"x"}]}})");
    CHECK(*json_at_path(v, "a.b.1.c") == "x");
    CHECK(*json_at_path(v, "a.b.length") == 2);
    CHECK_FALSE(json_at_path(v, "a.z"));
    CHECK_FALSE(json_at_path(v, "a.b.5"));
}

TEST_CASE("trace: shipped traces pass and replay identically")
{
    for (const char* name : {"l_building.json", "semantic_edits.json"}) {
        CAPTURE(name);
        McpServer a(seeded()), b(seeded());
        TraceReport ra = run_trace(a, load(name));
        TraceReport rb = run_trace(b, load(name));
        for (const auto& s : ra.steps)
            if (!s.passed)
                MESSAGE(s.message);
        CHECK(ra.passed);
        CHECK(rb.passed);
        a.session().model().header().time_stamp = b.session().model().header().time_stamp;
        CHECK(a.session().model().to_step() == b.session().model().to_step());
    }
}

TEST_CASE("trace: substitution failures stop the run")
{
    McpServer s(seeded());
    Json script = Json::parse(R"j({"steps":[
        {"tool":"create_storey","args":{"name":"L1","elevation":3}},
        {"tool":"get_object_info","args":{"guid":"$1.missing"}},
        {"tool":"get_scene_info","args":{}}]})j");
    TraceReport r = run_trace(s, script);
    CHECK_FALSE(r.passed);
    CHECK(r.failed_step == 2);
    CHECK(r.steps.size() == 2);
    CHECK(r.steps[1].message.rfind("StepFailed(2)", 0) == 0);
}

TEST_CASE("trace: expected errors and mismatches")
{
    McpServer s(seeded());
    Json script = Json::parse(R"j({"steps":[
        {"tool":"get_object_info","args":{"guid":"0000000000000000000000"},"expect":{"error":"UnknownGuid"}},
        {"tool":"create_wall","args":{"start":[0,0],"end":[4,0],"height":3,"thickness":0.2},
         "expect":{"queries":[{"query":"walls | sum(length)","equals":5}]}}]})j");
    TraceReport r = run_trace(s, script);
    CHECK(r.steps[0].passed);
    CHECK(r.failed_step == 2);
    CHECK(r.steps[1].message.find("walls | sum(length)") != std::string::npos);
}
