#pragma once

#include "ifcmcp/json_util.hpp"
#include "ifcmcp/mcp_server.hpp"

#include <string>
#include <vector>

namespace ifcmcp {

/// Trace file layout:
///
///   {"steps": [{"tool": "create_wall", "args": {...},
///               "expect": {"ok": true,
///                          "result": {"guids.length": 6},
///                          "counts": {"IfcWall": 6},
///                          "queries": [{"query": "slabs | sum(area)",
///                                       "equals": 150.0, "tolerance": 1e-9}],
///                          "error": "UnknownGuid"}}]}
///
/// Any string argument of the form "$N.path" is replaced by that value from
/// the result of step N (1-based); "length" reads an array size. "{tmp}"
/// inside a string becomes a scratch directory for the run.
struct StepReport {
    std::size_t index = 0;
    std::string tool;
    bool passed = false;
    std::string message;
    Json result;
};

struct TraceReport {
    std::vector<StepReport> steps;
    bool passed = false;
    /// Index of the failing step (1-based) when !passed.
    std::size_t failed_step = 0;
};

/// Runs every step through McpServer::call_tool and checks its expectations;
/// stops at the first failing step.
TraceReport run_trace(McpServer& server, const Json& script);

/// Value at a dotted path ("a.b.0.c", "list.length"); null when absent.
std::optional<Json> json_at_path(const Json& value, const std::string& path);

} // namespace ifcmcp
