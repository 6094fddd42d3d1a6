#include "ifcmcp/mcp_server.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/json_schema.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace ifcmcp {

namespace {

constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;

Json rpc_error(const Json& id, int code, const std::string& message, const Json& data = nullptr)
{
    Json err{{"code", code}, {"message", message}};
    if (!data.is_null())
        err["data"] = data;
    return Json{{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(err)}};
}

Json rpc_result(const Json& id, Json result)
{
    return Json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

std::atomic<std::uint64_t> session_counter{0};

} // namespace

std::string_view to_string(ToolGroup group) noexcept
{
    switch (group) {
    case ToolGroup::Query: return "query";
    case ToolGroup::Create: return "create";
    case ToolGroup::Edit: return "edit";
    case ToolGroup::Knowledge: return "knowledge";
    case ToolGroup::Snapshot: return "snapshot";
    }
    return "query";
}

std::optional<ToolGroup> parse_tool_group(std::string_view text)
{
    for (ToolGroup g : all_tool_groups()) {
        auto name = to_string(g);
        if (text == name || (text.size() == 1 && text[0] == name[0]))
            return g;
    }
    return std::nullopt;
}

std::set<ToolGroup> parse_tool_groups(std::string_view csv)
{
    std::set<ToolGroup> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto comma = csv.find(',', start);
        auto item = csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        if (!item.empty()) {
            auto g = parse_tool_group(item);
            if (!g)
                throw Error(ErrorCode::InvalidParams, "unknown tool group '" + std::string(item) +
                                                          "' (expected query, create, edit, knowledge, snapshot)");
            out.insert(*g);
        }
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::set<ToolGroup> all_tool_groups()
{
    return {ToolGroup::Query, ToolGroup::Create, ToolGroup::Edit, ToolGroup::Knowledge, ToolGroup::Snapshot};
}

Json ToolDescriptor::to_json() const
{
    return Json{{"name", name},
                {"description", description},
                {"inputSchema", input_schema},
                {"annotations",
                 {{"readOnlyHint", annotations.read_only}, {"destructiveHint", annotations.destructive}}}};
}

void ToolRegistry::add(ToolDef tool)
{
    if (find(tool.descriptor.name))
        throw Error(ErrorCode::DuplicateName, "tool '" + tool.descriptor.name + "' is registered twice");
    tools_.push_back(std::move(tool));
}

const ToolDef* ToolRegistry::find(std::string_view name) const
{
    for (const auto& t : tools_)
        if (t.descriptor.name == name)
            return &t;
    return nullptr;
}

std::vector<const ToolDescriptor*> ToolRegistry::list(const std::set<ToolGroup>& groups) const
{
    std::vector<const ToolDescriptor*> out;
    for (const auto& t : tools_)
        if (groups.count(t.descriptor.group))
            out.push_back(&t.descriptor);
    std::sort(out.begin(), out.end(), [](const ToolDescriptor* a, const ToolDescriptor* b) {
        if (a->group != b->group)
            return a->group < b->group;
        return a->name < b->name;
    });
    return out;
}

Session::Session(SessionConfig config)
    : config_(std::move(config)),
      id_("session-" + std::to_string(++session_counter)),
      model_(config_.model_path ? load_ifc_file(*config_.model_path, make_guid_generator())
                                : IfcModel::create(config_.project_name, make_guid_generator()))
{
}

GuidGenerator Session::make_guid_generator() const
{
    return config_.seed ? GuidGenerator::seeded(*config_.seed) : GuidGenerator();
}

std::shared_ptr<const Retriever> Session::knowledge()
{
    if (auto idx = knowledge_.current())
        return idx;
    std::optional<std::filesystem::path> root = config_.corpus;
    if (!root)
        if (const char* env = std::getenv("IFC_MCP_CORPUS"); env && *env)
            root = env;
    if (!root)
        throw Error(ErrorCode::EmptyIndex, "no knowledge corpus configured (set IFC_MCP_CORPUS)");
    std::shared_ptr<const Retriever> idx;
    if (std::filesystem::is_regular_file(*root))
        idx = std::make_shared<const Bm25Index>(Bm25Index::load(*root));
    else
        idx = std::make_shared<const Bm25Index>(index_corpus(*root));
    knowledge_.replace(idx);
    return idx;
}

Json error_payload(const std::exception& e)
{
    Json err;
    if (const auto* q = dynamic_cast<const QueryParseError*>(&e)) {
        err = Json{{"code", std::string(q->code_name())},
                   {"message", q->what()},
                   {"position", q->position()},
                   {"expected", q->expected()}};
    } else if (const auto* s = dynamic_cast<const SyntaxError*>(&e)) {
        err = Json{{"code", std::string(s->code_name())},
                   {"message", s->what()},
                   {"line", s->line()},
                   {"column", s->column()}};
    } else if (const auto* x = dynamic_cast<const Error*>(&e)) {
        err = Json{{"code", std::string(x->code_name())}, {"message", x->what()}};
    } else {
        err = Json{{"code", "InternalError"}, {"message", e.what()}};
    }
    return Json{{"error", std::move(err)}};
}

McpServer::McpServer(SessionConfig config) : McpServer(std::move(config), builtin_registry()) {}

McpServer::McpServer(SessionConfig config, ToolRegistry registry)
    : registry_(std::move(registry)), session_(std::move(config))
{
}

const Json& McpServer::tools_list()
{
    if (!tools_list_) {
        Json tools = Json::array();
        for (const auto* d : registry_.list(session_.config().groups))
            tools.push_back(d->to_json());
        tools_list_ = Json{{"tools", std::move(tools)}};
    }
    return *tools_list_;
}

ToolOutcome McpServer::call_tool(const std::string& name, const Json& args)
{
    ToolOutcome out;
    const ToolDef* tool = registry_.find(name);
    if (!tool) {
        out.payload = Json{{"error", {{"code", "UnknownTool"}, {"message", "unknown tool '" + name + "'"}}}};
        return out;
    }
    if (!session_.group_enabled(tool->descriptor.group)) {
        out.payload = error_payload(Error(ErrorCode::GroupDisabled,
                                          "tool '" + name + "' belongs to the disabled group '" +
                                              std::string(to_string(tool->descriptor.group)) + "'"));
        return out;
    }
    auto violations = validate_args(tool->descriptor.input_schema, args);
    if (!violations.empty()) {
        out.rpc_error = Json{{"code", kInvalidParams},
                             {"message", "invalid arguments for '" + name + "'"},
                             {"data", {{"tool", name}, {"violations", violations_json(violations)}}}};
        return out;
    }
    session_.count_call();
    try {
        out.payload = tool->handler(session_, args);
        out.ok = true;
    } catch (const std::exception& e) {
        out.payload = error_payload(e);
    }
    return out;
}

Json McpServer::dispatch(const Json& id, const std::string& method, const Json& params)
{
    if (method == "initialize") {
        return rpc_result(id, Json{{"protocolVersion", kProtocolVersion},
                                   {"capabilities", {{"tools", {{"listChanged", false}}}}},
                                   {"serverInfo", {{"name", kServerName}, {"version", kServerVersion}}}});
    }
    if (method == "ping")
        return rpc_result(id, Json::object());
    if (method == "tools/list")
        return rpc_result(id, tools_list());
    if (method == "tools/call") {
        if (!params.is_object() || !params.contains("name") || !params["name"].is_string())
            return rpc_error(id, kInvalidParams, "tools/call needs a string 'name'");
        Json args = params.value("arguments", Json::object());
        if (args.is_null())
            args = Json::object();
        if (!args.is_object())
            return rpc_error(id, kInvalidParams, "'arguments' must be an object");
        ToolOutcome o = call_tool(params["name"].get<std::string>(), args);
        if (o.rpc_error)
            return Json{{"jsonrpc", "2.0"}, {"id", id}, {"error", *o.rpc_error}};
        Json result{{"content", Json::array({Json{{"type", "text"}, {"text", o.payload.dump()}}})},
                    {"isError", !o.ok}};
        if (o.ok && o.payload.is_object())
            result["structuredContent"] = o.payload;
        return rpc_result(id, std::move(result));
    }
    return rpc_error(id, kMethodNotFound, "method not found: " + method);
}

std::optional<Json> McpServer::handle(const Json& message)
{
    std::lock_guard lock(mutex_);
    if (!message.is_object())
        return rpc_error(nullptr, kInvalidRequest, "request must be a JSON object");
    bool notification = !message.contains("id");
    Json id = notification ? Json(nullptr) : message["id"];
    if (!id.is_null() && !id.is_string() && !id.is_number_integer())
        return rpc_error(nullptr, kInvalidRequest, "id must be a string or an integer");
    if (message.value("jsonrpc", "") != "2.0" || !message.contains("method") || !message["method"].is_string()) {
        if (notification)
            return std::nullopt;
        return rpc_error(id, kInvalidRequest, "not a JSON-RPC 2.0 request");
    }
    std::string method = message["method"].get<std::string>();
    if (notification)
        return std::nullopt;
    Json params = message.value("params", Json::object());
    return dispatch(id, method, params);
}

std::optional<std::string> McpServer::handle_line(std::string_view line)
{
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
        line.remove_suffix(1);
    if (line.empty())
        return std::nullopt;
    Json message;
    try {
        message = Json::parse(line);
    } catch (const Json::parse_error& e) {
        return rpc_error(nullptr, kParseError, std::string("parse error: ") + e.what()).dump();
    }
    auto response = handle(message);
    if (!response)
        return std::nullopt;
    return response->dump();
}

void McpServer::serve(std::istream& in, std::ostream& out)
{
    std::string line;
    while (std::getline(in, line)) {
        if (auto response = handle_line(line)) {
            out << *response << '\n';
            out.flush();
        }
    }
}

namespace {

void serve_connection(int fd, SessionConfig config, std::ostream& log)
{
    std::unique_ptr<McpServer> server;
    try {
        server = std::make_unique<McpServer>(std::move(config));
    } catch (const std::exception& e) {
        log << "session start failed: " << e.what() << '\n';
        ::close(fd);
        return;
    }
    std::string buffer;
    char chunk[4096];
    for (;;) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0)
            break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (auto response = server->handle_line(line)) {
                std::string frame = *response + "\n";
                std::size_t sent = 0;
                while (sent < frame.size()) {
                    ssize_t w = ::send(fd, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
                    if (w <= 0) {
                        ::close(fd);
                        return;
                    }
                    sent += static_cast<std::size_t>(w);
                }
            }
        }
    }
    ::close(fd);
}

} // namespace

void serve_tcp(const SessionConfig& config, std::uint16_t port, std::ostream& log, const std::atomic<bool>* stop)
{
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0)
        throw Error(ErrorCode::IoError, "cannot create socket");
    int yes = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listener, 8) < 0) {
        ::close(listener);
        throw Error(ErrorCode::IoError, "cannot listen on 127.0.0.1:" + std::to_string(port));
    }
    log << "listening on 127.0.0.1:" << port << '\n';
    std::vector<std::thread> workers;
    while (!stop || !stop->load()) {
        pollfd p{listener, POLLIN, 0};
        int ready = ::poll(&p, 1, 200);
        if (ready < 0)
            break;
        if (ready == 0)
            continue;
        int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0)
            continue;
        workers.emplace_back(serve_connection, fd, config, std::ref(log));
    }
    ::close(listener);
    for (auto& w : workers)
        w.join();
}

} // namespace ifcmcp
