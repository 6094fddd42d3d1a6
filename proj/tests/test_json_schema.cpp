#include "ifcmcp/json_schema.hpp"

#include <doctest.h>

using namespace ifcmcp;

namespace {

const Json kSchema = Json::parse(R"({
  "type": "object",
  "required": ["start", "height"],
  "properties": {
    "start": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 3},
    "height": {"type": "number", "exclusiveMinimum": 0},
    "count": {"type": "integer", "minimum": 1, "maximum": 10},
    "style": {"type": "string", "enum": ["hip", "gable", "flat"]},
    "name": {"type": "string", "minLength": 1},
    "close": {"type": "boolean"}
  }
})");

std::vector<std::string> paths(const Json& instance)
{
    std::vector<std::string> out;
    for (const auto& v : validate_args(kSchema, instance))
        out.push_back(v.path);
    return out;
}

} // namespace

TEST_CASE("schema: valid instances pass, extra keys are allowed")
{
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":3})")).empty());
    CHECK(paths(Json::parse(R"({"start":[0,0,1],"height":3,"count":2.0,"style":"hip","extra":1})")).empty());
}

TEST_CASE("schema: each rule reports its own path")
{
    CHECK(paths(Json::parse(R"({"height":3})")) == std::vector<std::string>{"/start"});
    CHECK(paths(Json::parse(R"({"start":[0],"height":3})")) == std::vector<std::string>{"/start"});
    CHECK(paths(Json::parse(R"({"start":[0,"x"],"height":3})")) == std::vector<std::string>{"/start/1"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":0})")) == std::vector<std::string>{"/height"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":"3"})")) == std::vector<std::string>{"/height"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":1,"count":1.5})")) == std::vector<std::string>{"/count"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":1,"count":11})")) == std::vector<std::string>{"/count"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":1,"style":"dome"})")) == std::vector<std::string>{"/style"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":1,"name":""})")) == std::vector<std::string>{"/name"});
    CHECK(paths(Json::parse(R"({"start":[0,0],"height":1,"close":1})")) == std::vector<std::string>{"/close"});
    CHECK(paths(Json::parse(R"([1])")) == std::vector<std::string>{""});
    CHECK(paths(Json::parse(R"({})")).size() == 2);
}

TEST_CASE("schema: violations serialize as path/message pairs")
{
    Json j = violations_json(validate_args(kSchema, Json::object()));
    REQUIRE(j.is_array());
    CHECK(j[0].contains("path"));
    CHECK(j[0].contains("message"));
}
