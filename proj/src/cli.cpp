#include "drk/cli.hpp"

#include "drk/engine.hpp"
#include "drk/errors.hpp"
#include "drk/eval.hpp"
#include "drk/generation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace drk::cli {

using nlohmann::json;

namespace {

EngineConfig load_config(const std::string& path) {
    return path.empty() ? EngineConfig::defaults() : EngineConfig::load(path);
}

std::vector<std::size_t> parse_k_grid(const std::string& csv) {
    std::vector<std::size_t> grid;
    std::stringstream in(csv);
    std::string part;
    while (std::getline(in, part, ',')) {
        if (part.empty())
            continue;
        try {
            const long k = std::stol(part);
            if (k < 1)
                throw std::invalid_argument("non-positive");
            grid.push_back(static_cast<std::size_t>(k));
        } catch (const std::exception&) {
            throw Error(Errc::usage_error, "--k expects a comma-separated list of positive integers, got '" + csv + "'");
        }
    }
    if (grid.empty())
        throw Error(Errc::usage_error, "--k list is empty");
    return grid;
}

int cmd_ingest(const std::string& config_path, const std::string& manifest) {
    Engine engine(load_config(config_path));
    const std::size_t chunks = engine.ingest_manifest(manifest);
    std::cout << json{{"chunks", chunks}, {"chunk_store", engine.config().chunks_file().string()}}.dump() << "\n";
    return kExitOk;
}

int cmd_index(const std::string& config_path) {
    Engine engine(load_config(config_path));
    const std::size_t chunks = engine.build_index();
    std::cout << json{{"indexed_chunks", chunks}, {"snapshot", engine.config().snapshot_file().string()}}.dump()
              << "\n";
    return kExitOk;
}

int cmd_ask(const std::string& config_path, const std::string& question, bool strict) {
    Engine engine(load_config(config_path));
    const json out = engine.ask_json(question, strict ? std::optional<bool>(true) : std::nullopt);
    std::cout << out.dump() << "\n";
    if (out.at("status").get<std::string>() == "refused")
        return kExitRefused;
    return kExitOk;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path, const std::string& trace_path,
             const std::string& k_csv, const std::string& out_path) {
    const auto k_grid = parse_k_grid(k_csv);
    std::vector<eval::PerQueryMetrics> per_query;
    if (!run_path.empty()) {
        const auto runs = eval::load_run(run_path);
        const auto qrels = eval::load_qrels(qrels_path);
        per_query = eval::score_run(runs, qrels, k_grid);
    }
    if (!trace_path.empty()) {
        auto trace = eval::score_trace(eval::load_trace(trace_path));
        per_query.insert(per_query.end(), std::make_move_iterator(trace.begin()),
                         std::make_move_iterator(trace.end()));
    }
    const auto report = eval::aggregate_report(std::move(per_query), k_grid);
    std::cout << eval::report_to_table(report);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out)
            throw Error(Errc::io_error, "cannot write report to " + out_path);
        out << eval::report_to_json(report).dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_verify_file(const std::string& input_path) {
    std::ifstream in(input_path);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + input_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, input_path + ": " + e.what());
    }

    const auto answer = j.at("answer").get<std::string>();
    const auto snippets = j.at("snippets").get<std::vector<std::string>>();
    verify::SupportPolicy policy;
    policy.threshold = j.value("threshold", policy.threshold);
    policy.check_uncited_against_all = j.value("check_uncited_against_all", policy.check_uncited_against_all);

    std::vector<generation::ManifestEntry> manifest;
    for (std::size_t i = 0; i < snippets.size(); ++i)
        manifest.push_back({i + 1, "snippet-" + std::to_string(i + 1), snippets[i]});

    const auto draft = generation::parse_answer(answer, manifest);
    const auto report = verify::verify_draft(draft, manifest, policy);
    std::cout << verify::report_to_json(report).dump() << "\n";
    return kExitOk;
}

} // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"grounded retrieval engine"};
    app.require_subcommand(1);

    std::string config_path, manifest, question, run_path, qrels_path, trace_path, out_path, input_path;
    std::string k_csv = "1,2,4,8,16,50";
    bool strict = false;

    auto* ingest = app.add_subcommand("ingest", "normalize sources from a manifest into the chunk store");
    ingest->add_option("--manifest", manifest, "JSON-lines manifest of sources")->required();
    ingest->add_option("--config", config_path, "engine config file");

    auto* index = app.add_subcommand("index", "embed the chunk store and write the index snapshot");
    index->add_option("--config", config_path, "engine config file")->required();

    auto* ask = app.add_subcommand("ask", "answer a question with citations");
    ask->add_option("--config", config_path, "engine config file")->required();
    ask->add_option("--question", question, "the question to answer")->required();
    ask->add_flag("--strict", strict, "strict grounding: refuse instead of best-effort");

    auto* eval_cmd = app.add_subcommand("eval", "score run/qrels/trace files into a metrics report");
    eval_cmd->add_option("--run", run_path, "JSON-lines run file");
    eval_cmd->add_option("--qrels", qrels_path, "JSON-lines qrels file");
    eval_cmd->add_option("--trace", trace_path, "JSON-lines trace file");
    eval_cmd->add_option("--k", k_csv, "comma-separated k grid (default 1,2,4,8,16,50)");
    eval_cmd->add_option("--out", out_path, "write the JSON report here");

    auto* verify_file = app.add_subcommand("verify-file", "verify an (answer, snippets) JSON document");
    verify_file->add_option("--input", input_path, "JSON file with answer and snippets")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return kExitUsage;
    }

    try {
        if (ingest->parsed())
            return cmd_ingest(config_path, manifest);
        if (index->parsed())
            return cmd_index(config_path);
        if (ask->parsed())
            return cmd_ask(config_path, question, strict);
        if (eval_cmd->parsed()) {
            if (run_path.empty() && trace_path.empty())
                throw Error(Errc::usage_error, "eval needs --run/--qrels and/or --trace");
            if (!run_path.empty() && qrels_path.empty())
                throw Error(Errc::usage_error, "eval --run also needs --qrels");
            return cmd_eval(run_path, qrels_path, trace_path, k_csv, out_path);
        }
        if (verify_file->parsed())
            return cmd_verify_file(input_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == Errc::usage_error ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace drk::cli
