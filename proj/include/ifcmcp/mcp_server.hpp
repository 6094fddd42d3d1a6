#pragma once

#include "ifcmcp/json_util.hpp"
#include "ifcmcp/knowledge_store.hpp"
#include "ifcmcp/model.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ifcmcp {

inline constexpr std::string_view kProtocolVersion = "2025-06-18";
inline constexpr std::string_view kServerName = "ifc-mcp";
inline constexpr std::string_view kServerVersion = "0.1.0";

enum class ToolGroup { Query, Create, Edit, Knowledge, Snapshot };

std::string_view to_string(ToolGroup group) noexcept;
/// Full name or first letter ("query" or "q").
std::optional<ToolGroup> parse_tool_group(std::string_view text);
/// Comma-separated list. Throws InvalidParams for unknown names.
std::set<ToolGroup> parse_tool_groups(std::string_view csv);
std::set<ToolGroup> all_tool_groups();

struct ToolAnnotations {
    bool read_only = false;
    bool destructive = false;
};

struct ToolDescriptor {
    std::string name;
    std::string description;
    Json input_schema;
    ToolAnnotations annotations;
    ToolGroup group = ToolGroup::Query;

    Json to_json() const;
};

class Session;
using ToolHandler = std::function<Json(Session&, const Json& args)>;

struct ToolDef {
    ToolDescriptor descriptor;
    ToolHandler handler;
};

class ToolRegistry {
public:
    /// Throws DuplicateName.
    void add(ToolDef tool);
    const ToolDef* find(std::string_view name) const;
    /// Ordered by group, then name.
    std::vector<const ToolDescriptor*> list(const std::set<ToolGroup>& groups) const;
    std::size_t size() const noexcept { return tools_.size(); }

private:
    std::vector<ToolDef> tools_;
};

/// Every tool the server ships.
ToolRegistry builtin_registry();

struct SessionConfig {
    std::set<ToolGroup> groups = all_tool_groups();
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model_path;
    std::string project_name = "My Project";
    /// Directory of documents or a saved index file; IFC_MCP_CORPUS otherwise.
    std::optional<std::filesystem::path> corpus;
};

/// One client's state: the active model, the enabled groups and counters.
class Session {
public:
    explicit Session(SessionConfig config);

    IfcModel& model() noexcept { return model_; }
    const IfcModel& model() const noexcept { return model_; }
    void replace_model(IfcModel model) { model_ = std::move(model); }
    /// Seeded when the session was started with a seed.
    GuidGenerator make_guid_generator() const;

    const SessionConfig& config() const noexcept { return config_; }
    bool group_enabled(ToolGroup g) const { return config_.groups.count(g) != 0; }
    const std::string& id() const noexcept { return id_; }
    std::uint64_t call_count() const noexcept { return calls_; }
    void count_call() noexcept { ++calls_; }

    /// Built on first use from the configured corpus. Throws EmptyIndex when
    /// no corpus is available.
    std::shared_ptr<const Retriever> knowledge();
    void set_knowledge(std::shared_ptr<const Retriever> index) { knowledge_.replace(std::move(index)); }

private:
    SessionConfig config_;
    std::string id_;
    IfcModel model_;
    std::uint64_t calls_ = 0;
    KnowledgeStore knowledge_;
};

/// Result of one tools/call after validation and dispatch.
struct ToolOutcome {
    bool ok = false;
    Json payload;                 // tool result, or {"error": {...}} when !ok
    std::optional<Json> rpc_error; // set when the call was rejected (-32602)
};

/// JSON error object for a library exception.
Json error_payload(const std::exception& e);

class McpServer {
public:
    explicit McpServer(SessionConfig config);
    McpServer(SessionConfig config, ToolRegistry registry);

    /// One JSON-RPC message in, at most one response out (none for
    /// notifications).
    std::optional<Json> handle(const Json& message);
    /// Parses the line first; malformed JSON gives a -32700 response.
    std::optional<std::string> handle_line(std::string_view line);

    /// Validation plus dispatch, shared by tools/call and trace replay.
    ToolOutcome call_tool(const std::string& name, const Json& args);

    /// {"tools": [...]} for the enabled groups; identical bytes on every call.
    const Json& tools_list();

    Session& session() noexcept { return session_; }
    const ToolRegistry& registry() const noexcept { return registry_; }

    /// Newline-delimited JSON-RPC until EOF.
    void serve(std::istream& in, std::ostream& out);

private:
    Json dispatch(const Json& id, const std::string& method, const Json& params);

    ToolRegistry registry_;
    Session session_;
    std::optional<Json> tools_list_;
    std::mutex mutex_;
};

/// Listens on 127.0.0.1:port; every connection gets its own session.
/// Returns when `stop` becomes true (checked between accepts) or on a
/// socket error. Throws IoError when the port cannot be bound.
void serve_tcp(const SessionConfig& config, std::uint16_t port, std::ostream& log,
               const std::atomic<bool>* stop = nullptr);

} // namespace ifcmcp
