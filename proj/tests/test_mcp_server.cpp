#include "ifcmcp/error.hpp"
#include "ifcmcp/mcp_server.hpp"

#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

using namespace ifcmcp;

namespace {

SessionConfig seeded_config()
{
    SessionConfig c;
    c.seed = 1;
    c.corpus = std::filesystem::path(IFCMCP_SOURCE_ROOT) / "docs" / "knowledge";
    return c;
}

Json call(McpServer& s, int id, const std::string& name, const Json& args)
{
    return *s.handle(Json{{"jsonrpc", "2.0"}, {"id", id}, {"method", "tools/call"},
                          {"params", {{"name", name}, {"arguments", args}}}});
}

void check_frame(const Json& f)
{
    REQUIRE(f.is_object());
    CHECK(f["jsonrpc"] == "2.0");
    CHECK(f.contains("id"));
    CHECK(f.contains("result") != f.contains("error"));
    if (f.contains("error")) {
        CHECK(f["error"]["code"].is_number_integer());
        CHECK(f["error"]["message"].is_string());
    }
}

} // namespace

TEST_CASE("mcp: initialize, list and call")
{
    McpServer s(seeded_config());
    Json init = *s.handle(Json::parse(R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{}})"));
    check_frame(init);
    CHECK(init["result"]["protocolVersion"] == std::string(kProtocolVersion));
    CHECK(init["result"]["serverInfo"]["name"] == "ifc-mcp");
    CHECK_FALSE(s.handle(Json::parse(R"({"jsonrpc":"2.0","method":"notifications/initialized"})")));

    Json list = *s.handle(Json::parse(R"({"jsonrpc":"2.0","id":2,"method":"tools/list"})"));
    check_frame(list);
    std::set<std::string> names;
    for (const auto& t : list["result"]["tools"]) {
        names.insert(t["name"].get<std::string>());
        CHECK(t["inputSchema"]["type"] == "object");
        CHECK(t["annotations"].contains("readOnlyHint"));
    }
    for (const char* n : {"get_scene_info", "execute_ifc_query", "search_ifc_knowledge", "create_wall"})
        CHECK(names.count(n) == 1);
    CHECK(s.tools_list().dump() == s.tools_list().dump());

    Json r = call(s, 3, "create_wall", {{"start", {0, 0}}, {"end", {5, 0}}, {"height", 3}, {"thickness", 0.2}});
    check_frame(r);
    CHECK(r["result"]["isError"] == false);
    CHECK(r["result"]["content"][0]["type"] == "text");
    CHECK(Json::parse(r["result"]["content"][0]["text"].get<std::string>()) == r["result"]["structuredContent"]);

    Json k = call(s, 4, "search_ifc_knowledge", {{"query", "hip roof straight skeleton"}});
    check_frame(k);
    CHECK(k["result"]["isError"] == false);
    CHECK(*s.handle(Json::parse(R"({"jsonrpc":"2.0","id":5,"method":"ping"})")) ==
          Json::parse(R"({"jsonrpc":"2.0","id":5,"result":{}})"));
}

TEST_CASE("mcp: error shapes")
{
    McpServer s(seeded_config());
    Json bad = call(s, 1, "create_wall", {{"start", {0, 0}}, {"height", -1}});
    check_frame(bad);
    CHECK(bad["error"]["code"] == -32602);
    CHECK(bad["error"]["data"]["tool"] == "create_wall");
    CHECK(bad["error"]["data"]["violations"].size() >= 2);

    Json unknown = call(s, 2, "unknown_tool", Json::object());
    check_frame(unknown);
    CHECK(unknown["result"]["isError"] == true);
    CHECK(unknown["result"]["content"][0]["text"].get<std::string>().find("unknown tool") != std::string::npos);

    Json failed = call(s, 3, "get_object_info", {{"guid", "0000000000000000000000"}});
    CHECK(failed["result"]["isError"] == true);
    CHECK(Json::parse(failed["result"]["content"][0]["text"].get<std::string>())["error"]["code"] == "UnknownGuid");

    Json parse = Json::parse(*s.handle_line("{not json"));
    CHECK(parse["error"]["code"] == -32700);
    CHECK(parse["id"].is_null());
    CHECK((*s.handle(Json::array()))["error"]["code"] == -32600);
    CHECK((*s.handle(Json::parse(R"({"jsonrpc":"1.0","id":9,"method":"ping"})")))["error"]["code"] == -32600);
    CHECK((*s.handle(Json::parse(R"({"jsonrpc":"2.0","id":9,"method":"nope"})")))["error"]["code"] == -32601);
}

TEST_CASE("mcp: failed mutations leave the model untouched")
{
    McpServer s(seeded_config());
    call(s, 1, "create_wall", {{"start", {0, 0}}, {"end", {5, 0}}, {"height", 3}, {"thickness", 0.2}});
    std::string before = s.session().model().to_step();
    Json r = call(s, 2, "set_owner_history", {{"guids", {"0000000000000000000000"}}, {"user", "x"}, {"timestamp", 1}});
    CHECK(r["result"]["isError"] == true);
    CHECK(s.session().model().to_step() == before);
}

TEST_CASE("mcp: tool groups")
{
    SessionConfig c = seeded_config();
    c.groups = parse_tool_groups("q,s");
    McpServer s(c);
    for (const auto& t : s.tools_list()["tools"])
        CHECK(t["name"].get<std::string>().rfind("create_", 0) != 0);
    Json r = call(s, 1, "create_wall", {{"start", {0, 0}}, {"end", {5, 0}}, {"height", 3}, {"thickness", 0.2}});
    CHECK(Json::parse(r["result"]["content"][0]["text"].get<std::string>())["error"]["code"] == "GroupDisabled");
    Json m = call(s, 2, "execute_ifc_query", {{"query", "walls | rename(\"x\")"}});
    CHECK(Json::parse(m["result"]["content"][0]["text"].get<std::string>())["error"]["code"] == "GroupDisabled");
    CHECK_THROWS_AS(parse_tool_groups("query,bogus"), Error);
    CHECK(parse_tool_group("k") == ToolGroup::Knowledge);
}

TEST_CASE("mcp: registry rejects duplicate names")
{
    ToolRegistry r = builtin_registry();
    ToolDef dup{{"get_scene_info", "again", Json{{"type", "object"}}, {}, ToolGroup::Query},
                [](Session&, const Json&) { return Json::object(); }};
    try {
        r.add(dup);
        FAIL("expected DuplicateName");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateName);
    }
}

TEST_CASE("mcp: stdio framing")
{
    McpServer s(seeded_config());
    std::istringstream in("{\"jsonrpc\":\"2.0\",\"id\":1,\"method\":\"initialize\"}\n\n"
                          "{\"jsonrpc\":\"2.0\",\"method\":\"notifications/initialized\"}\n"
                          "{\"jsonrpc\":\"2.0\",\"id\":2,\"method\":\"tools/list\"}\n");
    std::ostringstream out;
    s.serve(in, out);
    std::istringstream lines(out.str());
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        check_frame(Json::parse(line));
        ++n;
    }
    CHECK(n == 2);
}

TEST_CASE("mcp: TCP listener gives each connection a session")
{
    std::atomic<bool> stop{false};
    std::ostringstream log;
    const std::uint16_t port = 47000 + static_cast<std::uint16_t>(::getpid() % 2000);
    std::thread listener([&] { serve_tcp(seeded_config(), port, log, &stop); });

    auto exchange = [&](const std::string& request) {
        int fd = -1;
        for (int attempt = 0; attempt < 50 && fd < 0; ++attempt) {
            fd = ::socket(AF_INET, SOCK_STREAM, 0);
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_port = htons(port);
            addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
                ::close(fd);
                fd = -1;
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
        }
        REQUIRE(fd >= 0);
        std::string line = request + "\n";
        REQUIRE(::write(fd, line.data(), line.size()) == static_cast<ssize_t>(line.size()));
        std::string reply;
        char buf[4096];
        while (reply.find('\n') == std::string::npos) {
            ssize_t n = ::read(fd, buf, sizeof buf);
            if (n <= 0)
                break;
            reply.append(buf, static_cast<std::size_t>(n));
        }
        ::close(fd);
        return Json::parse(reply.substr(0, reply.find('\n')));
    };

    Json a = exchange(R"({"jsonrpc":"2.0","id":1,"method":"tools/call","params":{"name":"create_storey","arguments":{"name":"L1","elevation":3}}})");
    CHECK(a["result"]["isError"] == false);
    Json b = exchange(R"({"jsonrpc":"2.0","id":2,"method":"tools/call","params":{"name":"get_ifc_scene_overview","arguments":{}}})");
    CHECK(b["result"]["structuredContent"]["storeys"].size() == 1); // fresh session per connection
    stop = true;
    listener.join();
}
