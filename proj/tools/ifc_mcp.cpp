// ifc-mcp: MCP tool server for IFC models, plus operator commands.

#include "ifcmcp/error.hpp"
#include "ifcmcp/knowledge_store.hpp"
#include "ifcmcp/mcp_server.hpp"
#include "ifcmcp/scene_query.hpp"
#include "ifcmcp/snapshot.hpp"
#include "ifcmcp/trace.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace ifcmcp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitIo = 2;

int exit_code_for(const std::exception& e)
{
    if (const auto* err = dynamic_cast<const Error*>(&e))
        if (err->code() == ErrorCode::IoError || err->code() == ErrorCode::SyntaxError ||
            err->code() == ErrorCode::DuplicateId || err->code() == ErrorCode::DanglingRef)
            return kExitIo;
    return kExitFailed;
}

void report(const std::exception& e)
{
    if (const auto* err = dynamic_cast<const Error*>(&e))
        std::cerr << "error: " << err->code_name() << ": " << err->what() << '\n';
    else
        std::cerr << "error: " << e.what() << '\n';
}

GuidGenerator generator(const std::optional<std::uint64_t>& seed)
{
    return seed ? GuidGenerator::seeded(*seed) : GuidGenerator();
}

void write_text(const std::string& path, const std::string& body)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path);
    out << body;
    if (!out)
        throw Error(ErrorCode::IoError, "write failed: " + path);
}

Json read_json(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::IoError, path + ": " + e.what());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MCP tool server and utilities for IFC building models"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "Serve MCP over stdio (or TCP with --tcp)");
    std::optional<std::string> serve_model;
    std::string serve_groups = "query,create,edit,knowledge,snapshot";
    std::optional<std::uint16_t> serve_port;
    std::optional<std::uint64_t> serve_seed;
    std::optional<std::string> serve_corpus;
    serve->add_option("--model", serve_model, "IFC file to open at start");
    serve->add_option("--groups", serve_groups, "Enabled tool groups (q,c,e,k,s)");
    serve->add_option("--tcp", serve_port, "Listen on 127.0.0.1:<port> instead of stdio");
    serve->add_option("--seed", serve_seed, "Deterministic GlobalIds");
    serve->add_option("--corpus", serve_corpus, "Knowledge directory or index file (default $IFC_MCP_CORPUS)");

    // new
    auto* make = app.add_subcommand("new", "Write an empty project");
    std::string new_out;
    std::string new_project = "My Project";
    std::optional<std::uint64_t> new_seed;
    make->add_option("file", new_out, "Output .ifc")->required();
    make->add_option("--project", new_project, "Project name");
    make->add_option("--seed", new_seed, "Deterministic GlobalIds");

    // open
    auto* open = app.add_subcommand("open", "Load a file and print its overview");
    std::string open_path;
    open->add_option("file", open_path, "Input .ifc")->required();

    // save
    auto* save = app.add_subcommand("save", "Load (or create) a model and write it back out");
    std::string save_out;
    std::optional<std::string> save_model;
    save->add_option("file", save_out, "Output .ifc")->required();
    save->add_option("--model", save_model, "Input .ifc (default: empty project)");

    // replay
    auto* replay = app.add_subcommand("replay", "Run a trace script and report each step");
    std::string replay_path;
    std::optional<std::string> replay_model;
    std::optional<std::string> replay_save;
    std::optional<std::uint64_t> replay_seed;
    std::string replay_groups = "query,create,edit,knowledge,snapshot";
    replay->add_option("trace", replay_path, "Trace .json")->required();
    replay->add_option("--model", replay_model, "Starting .ifc (default: empty project)");
    replay->add_option("--save", replay_save, "Write the final model here");
    replay->add_option("--seed", replay_seed, "Deterministic GlobalIds");
    replay->add_option("--groups", replay_groups, "Enabled tool groups");

    // index
    auto* index = app.add_subcommand("index", "Build a knowledge index from a directory");
    std::string index_dir;
    std::string index_out = "knowledge.idx";
    index->add_option("dir", index_dir, "Corpus directory")->required();
    index->add_option("--out", index_out, "Index file");

    // snapshot
    auto* snapshot = app.add_subcommand("snapshot", "Render a plan or elevation as SVG");
    std::string snap_model;
    std::optional<std::string> snap_plan;
    std::optional<std::string> snap_elevation;
    std::string snap_view = "south";
    std::optional<std::string> snap_storey;
    double snap_cut = kDefaultCutHeight;
    snapshot->add_option("file", snap_model, "Input .ifc")->required();
    snapshot->add_option("--plan", snap_plan, "Plan SVG output");
    snapshot->add_option("--elevation", snap_elevation, "Elevation SVG output");
    snapshot->add_option("--view", snap_view, "north, south, east or west")
        ->check(CLI::IsMember({"north", "south", "east", "west"}));
    snapshot->add_option("--storey", snap_storey, "Storey GUID for the plan");
    snapshot->add_option("--cut", snap_cut, "Cut height above the storey floor")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            SessionConfig cfg;
            cfg.groups = parse_tool_groups(serve_groups);
            cfg.seed = serve_seed;
            cfg.model_path = serve_model;
            if (serve_corpus)
                cfg.corpus = *serve_corpus;
            if (serve_port) {
                serve_tcp(cfg, *serve_port, std::cerr);
                return kExitOk;
            }
            McpServer server(cfg);
            server.serve(std::cin, std::cout);
            return kExitOk;
        }
        if (*make) {
            IfcModel model = IfcModel::create(new_project, generator(new_seed));
            save_ifc_file(model, new_out);
            std::cout << "wrote " << new_out << " (" << model.size() << " entities)\n";
            return kExitOk;
        }
        if (*open) {
            IfcModel model = load_ifc_file(open_path);
            std::cout << get_ifc_scene_overview(model).dump(2) << '\n';
            return kExitOk;
        }
        if (*save) {
            IfcModel model = save_model ? load_ifc_file(*save_model) : IfcModel::create("My Project");
            save_ifc_file(model, save_out);
            std::cout << "wrote " << save_out << " (" << model.size() << " entities)\n";
            return kExitOk;
        }
        if (*replay) {
            Json script = read_json(replay_path);
            SessionConfig cfg;
            cfg.groups = parse_tool_groups(replay_groups);
            cfg.seed = replay_seed;
            cfg.model_path = replay_model;
            McpServer server(cfg);
            TraceReport r = run_trace(server, script);
            for (const auto& s : r.steps)
                std::cout << (s.passed ? "PASS" : "FAIL") << "  step " << s.index << "  " << s.tool
                          << (s.passed ? "" : "  " + s.message) << '\n';
            std::size_t total = script["steps"].size();
            std::cout << (r.passed ? "PASS" : "FAIL") << "  " << (r.passed ? total : r.failed_step - 1) << "/"
                      << total << " steps\n";
            if (replay_save)
                save_ifc_file(server.session().model(), *replay_save);
            return r.passed ? kExitOk : kExitFailed;
        }
        if (*index) {
            Bm25Index idx = index_corpus(index_dir);
            idx.save(index_out);
            std::cout << "indexed " << idx.size() << " chunks into " << index_out << '\n';
            return kExitOk;
        }
        if (*snapshot) {
            if (!snap_plan && !snap_elevation)
                throw Error(ErrorCode::InvalidParams, "give --plan and/or --elevation");
            IfcModel model = load_ifc_file(snap_model);
            if (snap_plan) {
                write_text(*snap_plan, render_plan(model, snap_storey, snap_cut));
                std::cout << "wrote " << *snap_plan << '\n';
            }
            if (snap_elevation) {
                write_text(*snap_elevation, render_elevation(model, *parse_elevation_view(snap_view)));
                std::cout << "wrote " << *snap_elevation << '\n';
            }
            return kExitOk;
        }
    } catch (const std::exception& e) {
        report(e);
        return exit_code_for(e);
    }
    return kExitOk;
}
