#include "ifcmcp/trace.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/query_dsl.hpp"
#include "ifcmcp/scene_query.hpp"

#include <cmath>
#include <filesystem>
#include <random>

namespace ifcmcp {

namespace fs = std::filesystem;

std::optional<Json> json_at_path(const Json& value, const std::string& path)
{
    const Json* cur = &value;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key == "length" && (cur->is_array() || cur->is_string()) ) {
            if (dot != std::string::npos)
                return std::nullopt;
            return Json(cur->is_array() ? cur->size() : cur->get<std::string>().size());
        }
        if (cur->is_object()) {
            auto it = cur->find(key);
            if (it == cur->end())
                return std::nullopt;
            cur = &*it;
        } else if (cur->is_array()) {
            if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos)
                return std::nullopt;
            std::size_t i = std::stoul(key);
            if (i >= cur->size())
                return std::nullopt;
            cur = &(*cur)[i];
        } else {
            return std::nullopt;
        }
        if (dot == std::string::npos)
            break;
        start = dot + 1;
    }
    return *cur;
}

namespace {

struct StepFailure {
    std::string reason;
};

Json substitute(const Json& v, const std::vector<Json>& results, const std::string& tmp)
{
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.size() > 1 && s[0] == '$' && std::isdigit(static_cast<unsigned char>(s[1]))) {
            auto dot = s.find('.');
            std::size_t n = std::stoul(s.substr(1, dot == std::string::npos ? std::string::npos : dot - 1));
            if (n == 0 || n > results.size())
                throw StepFailure{"'" + s + "' refers to a step that has not run"};
            if (dot == std::string::npos)
                return results[n - 1];
            auto found = json_at_path(results[n - 1], s.substr(dot + 1));
            if (!found)
                throw StepFailure{"'" + s + "': step " + std::to_string(n) + " returned no such field"};
            return *found;
        }
        for (std::size_t pos; (pos = s.find("{tmp}")) != std::string::npos;)
            s.replace(pos, 5, tmp);
        return s;
    }
    if (v.is_array()) {
        Json out = Json::array();
        for (const auto& x : v)
            out.push_back(substitute(x, results, tmp));
        return out;
    }
    if (v.is_object()) {
        Json out = Json::object();
        for (const auto& [k, x] : v.items())
            out[k] = substitute(x, results, tmp);
        return out;
    }
    return v;
}

bool values_match(const Json& actual, const Json& expected, double tolerance)
{
    if (actual.is_number() && expected.is_number())
        return std::abs(actual.get<double>() - expected.get<double>()) <= tolerance;
    if (actual.is_array() && expected.is_array()) {
        if (actual.size() != expected.size())
            return false;
        for (std::size_t i = 0; i < actual.size(); ++i)
            if (!values_match(actual[i], expected[i], tolerance))
                return false;
        return true;
    }
    return actual == expected;
}

void check_expectations(McpServer& server, const Json& expect, const ToolOutcome& outcome,
                        const std::vector<Json>& results, const std::string& tmp)
{
    bool want_ok = expect.value("ok", !expect.contains("error"));
    if (outcome.rpc_error) {
        if (want_ok || expect.value("error", "") != "InvalidParams")
            throw StepFailure{"rejected: " + outcome.rpc_error->dump()};
        return;
    }
    if (outcome.ok != want_ok)
        throw StepFailure{want_ok ? "tool failed: " + outcome.payload.dump() : "expected failure, tool succeeded"};
    if (auto e = expect.find("error"); e != expect.end()) {
        auto code = json_at_path(outcome.payload, "error.code");
        if (!code || *code != *e)
            throw StepFailure{"expected error " + e->dump() + ", got " + outcome.payload.dump()};
    }
    double tolerance = expect.value("tolerance", 1e-9);
    if (auto r = expect.find("result"); r != expect.end())
        for (const auto& [path, want] : r->items()) {
            Json expected = substitute(want, results, tmp);
            auto got = json_at_path(outcome.payload, path);
            if (!got)
                throw StepFailure{"result has no field '" + path + "'"};
            if (!values_match(*got, expected, tolerance))
                throw StepFailure{"result." + path + " = " + got->dump() + ", expected " + expected.dump()};
        }
    const IfcModel& model = server.session().model();
    if (auto c = expect.find("counts"); c != expect.end()) {
        Json overview = get_ifc_scene_overview(model);
        for (const auto& [cls, want] : c->items()) {
            std::size_t n = model.ids_of_class(step_class_name(cls)).size();
            if (Json(n) != want)
                throw StepFailure{"count of " + cls + " = " + std::to_string(n) + ", expected " + want.dump()};
        }
    }
    if (auto q = expect.find("queries"); q != expect.end())
        for (const auto& item : *q) {
            std::string text = item.at("query").get<std::string>();
            QueryResult res = eval_query(model, parse_query(text));
            Json expected = substitute(item.at("equals"), results, tmp);
            if (!values_match(res.result, expected, item.value("tolerance", tolerance)))
                throw StepFailure{"query '" + text + "' = " + res.result.dump() + ", expected " + expected.dump()};
        }
}

} // namespace

TraceReport run_trace(McpServer& server, const Json& script)
{
    TraceReport report;
    if (!script.is_object() || !script.contains("steps") || !script["steps"].is_array())
        throw Error(ErrorCode::InvalidParams, "trace must be an object with a 'steps' array");

    std::mt19937_64 rng(std::random_device{}());
    fs::path tmp = fs::temp_directory_path() / ("ifc-mcp-trace-" + std::to_string(rng() % 1000000000));
    fs::create_directories(tmp);
    struct Cleanup {
        fs::path dir;
        ~Cleanup()
        {
            std::error_code ec;
            fs::remove_all(dir, ec);
        }
    } cleanup{tmp};

    std::vector<Json> results;
    std::size_t index = 0;
    for (const auto& step : script["steps"]) {
        ++index;
        StepReport sr;
        sr.index = index;
        sr.tool = step.value("tool", "");
        try {
            if (!server.registry().find(sr.tool))
                throw StepFailure{"unknown tool '" + sr.tool + "'"};
            Json args = substitute(step.value("args", Json::object()), results, tmp.string());
            ToolOutcome outcome = server.call_tool(sr.tool, args);
            sr.result = outcome.rpc_error ? *outcome.rpc_error : outcome.payload;
            check_expectations(server, step.value("expect", Json::object()), outcome, results, tmp.string());
            results.push_back(outcome.payload);
            sr.passed = true;
            sr.message = "ok";
        } catch (const StepFailure& f) {
            sr.message = "StepFailed(" + std::to_string(index) + "): " + f.reason;
        } catch (const std::exception& e) {
            sr.message = "StepFailed(" + std::to_string(index) + "): " + e.what();
        }
        report.steps.push_back(sr);
        if (!sr.passed) {
            report.failed_step = index;
            return report;
        }
    }
    report.passed = true;
    return report;
}

} // namespace ifcmcp
