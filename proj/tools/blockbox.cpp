/*
   Copyright 2026 The Blockbox Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// blockbox: run experiments, calibrate difficulty, compute metrics, host nodes and serve the
// control API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <blockbox/chain/chain_store.hpp>
#include <blockbox/common/errors.hpp>
#include <blockbox/metrics/metrics.hpp>
#include <blockbox/node/node_runner.hpp>
#include <blockbox/orchestrator/calibration.hpp>
#include <blockbox/orchestrator/http_api.hpp>
#include <blockbox/orchestrator/service.hpp>

namespace {

using namespace blockbox;
using nlohmann::json;

struct RunFlags {
    std::string config_path;
    std::string name;
    std::string topology;
    std::uint32_t n{0};
    std::uint32_t rows{0};
    std::uint32_t cols{0};
    std::uint32_t hub{0};
    std::string edges;
    std::uint64_t chain_id{0};
    std::uint64_t difficulty{0};
    std::uint64_t target_interval_ms{0};
    double hashrate{0};
    std::uint64_t height{0};
    std::int64_t duration_ms{0};
    std::string mode;
    std::uint64_t seed{0};
    double latency_ms{0};
    double jitter_ms{0};
    double speed{0};
    std::uint16_t base_port{0};
    bool limit_hashrate{false};
    std::uint32_t settle_rounds{0};
    std::string out;
    bool json_output{false};
    bool progress{false};
};

//! "0-1,1-2" -> [[0,1],[1,2]].
json parse_edges(const std::string& text) {
    auto edges = json::array();
    std::stringstream in{text};
    std::string pair;
    while (std::getline(in, pair, ',')) {
        const auto dash = pair.find('-');
        if (dash == std::string::npos) raise(ErrorCode::invalid_input, "edge '" + pair + "' is not a-b");
        edges.push_back({std::stoul(pair.substr(0, dash)), std::stoul(pair.substr(dash + 1))});
    }
    return edges;
}

//! Config file (if any) with every explicitly given flag layered on top.
orchestrator::ExperimentConfig build_config(const CLI::App& cmd, const RunFlags& f) {
    json j = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in{f.config_path};
        if (!in) raise(ErrorCode::io, "cannot open " + f.config_path);
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            raise(ErrorCode::invalid_input, f.config_path + ": " + e.what());
        }
    }
    const auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
    if (given("--name")) j["name"] = f.name;
    if (given("--topology") || given("--n")) {
        auto& t = j["topology"];
        if (t.is_null()) t = json::object();
        if (given("--topology")) t["kind"] = f.topology;
        if (given("--n")) t["n"] = f.n;
    }
    if (given("--rows")) j["topology"]["rows"] = f.rows;
    if (given("--cols")) j["topology"]["cols"] = f.cols;
    if (given("--hub")) j["topology"]["hub"] = f.hub;
    if (given("--edges")) j["topology"]["edges"] = parse_edges(f.edges);
    if (given("--n")) j["n"] = f.n;
    if (given("--chain-id")) j["genesis"]["chain_id"] = f.chain_id;
    if (given("--difficulty")) j["genesis"]["difficulty"] = f.difficulty;
    if (given("--target-interval-ms")) j["target_interval_ms"] = f.target_interval_ms;
    if (given("--hashrate")) j["hashrate"] = f.hashrate;
    if (given("--height") || given("--duration-ms")) {
        j["stop"] = json::object();
        if (given("--height")) j["stop"]["height"] = f.height;
        if (given("--duration-ms")) j["stop"]["duration_ms"] = f.duration_ms;
    }
    if (given("--settle-rounds")) j["settle_rounds"] = f.settle_rounds;
    auto& mode = j["mode"];
    if (mode.is_null()) mode = json{{"type", "simulated"}};
    if (given("--mode")) mode["type"] = f.mode;
    if (given("--seed")) mode["seed"] = f.seed;
    if (given("--latency-ms")) mode["latency"]["base_ms"] = f.latency_ms;
    if (given("--jitter-ms")) mode["latency"]["jitter_ms"] = f.jitter_ms;
    if (given("--speed")) mode["speed"] = f.speed;
    if (given("--base-port")) mode["base_port"] = f.base_port;
    if (given("--limit-hashrate")) mode["limit_hashrate"] = f.limit_hashrate;
    return orchestrator::config_from_json(j);
}

int cmd_run(const CLI::App& cmd, const RunFlags& f) {
    const auto config = build_config(cmd, f);
    if (const auto errors = orchestrator::validate(config); !errors.empty()) {
        for (const auto& e : errors) std::cerr << "config: " << e << "\n";
        return 2;
    }
    orchestrator::Orchestrator service;
    const auto id = service.start_run(config);
    if (f.progress) {
        std::uint64_t seq = 0;
        for (;;) {
            const auto next = service.next_snapshot(id, seq, std::chrono::seconds{1});
            if (!next) {
                const auto status = service.record(id).status;
                if (status == orchestrator::RunStatus::completed || status == orchestrator::RunStatus::aborted) break;
                continue;
            }
            seq = next->first;
            const auto& s = next->second;
            std::cerr << "[" << s.phase << "] t=" << s.time.count() << " ms height=" << s.max_height()
                      << (s.in_consensus() ? " in consensus" : " diverged") << "\n";
        }
    }
    (void)service.wait(id, std::chrono::hours{24 * 365});
    const auto record = service.record(id);
    if (!f.out.empty()) service.export_to(id, f.out);
    if (f.json_output) {
        std::cout << orchestrator::summary_json(record).dump(2) << "\n";
    } else {
        std::cout << config.name << ": " << orchestrator::to_string(record.status);
        if (record.error) std::cout << " (" << *record.error << ")";
        std::cout << "\n";
        std::cout << "difficulty " << config.genesis.difficulty << ", heads " << (record.consensus ? "agree" : "differ");
        if (record.settle_rounds > 0) std::cout << " after " << record.settle_rounds << " settle round(s)";
        if (record.mean_interval_ms) std::cout << ", mean mainchain interval " << *record.mean_interval_ms << " ms";
        std::cout << "\n";
        if (record.metrics) std::cout << metrics::format_table(*record.metrics);
        if (!f.out.empty()) std::cout << "exported to " << f.out << "\n";
    }
    return record.status == orchestrator::RunStatus::completed ? 0 : 1;
}

int cmd_calibrate(std::uint32_t n, double hashrate, double target_ms, bool measure, double simulated_limit,
                  std::int64_t duration_ms) {
    const std::chrono::milliseconds duration{duration_ms};
    if (measure) {
        hashrate = orchestrator::measure_hashrate_local(duration);
        std::cout << "measured hashrate " << static_cast<std::uint64_t>(hashrate) << " attempts/s\n";
    } else if (simulated_limit > 0) {
        hashrate = orchestrator::measure_hashrate_simulated(simulated_limit, duration);
        std::cout << "measured simulated hashrate " << hashrate << " attempts/s\n";
    }
    const auto c = orchestrator::calibrate_difficulty(n, hashrate, target_ms);
    std::cout << "difficulty " << c.difficulty << "\n";
    return 0;
}

int cmd_metrics(const std::string& dir, bool as_json, bool write) {
    const auto report = orchestrator::recompute_metrics(dir);
    if (as_json) {
        std::cout << orchestrator::metrics_file_text(report);
    } else {
        std::cout << metrics::format_table(report);
    }
    if (write) {
        std::ofstream out{std::filesystem::path{dir} / "metrics.json", std::ios::binary | std::ios::trunc};
        out << orchestrator::metrics_file_text(report);
    }
    return 0;
}

//! Replays one node log through a fresh chain store and checks every HeadChanged against it.
int replay_log(const std::string& path) {
    const auto log = node::read_log_file(path);
    chain::ChainStore store{log.header.genesis};
    std::map<std::string, std::size_t> counts;
    std::size_t mismatches = 0;
    for (const auto& e : log.events) {
        ++counts[std::string{node::type_name(e.body)}];
        if (const auto* m = std::get_if<node::Mined>(&e.body)) (void)store.insert_block(m->block);
        if (const auto* r = std::get_if<node::Received>(&e.body)) (void)store.insert_block(r->block);
        if (const auto* h = std::get_if<node::HeadChanged>(&e.body); h && h->new_hash != store.head()) ++mismatches;
    }
    std::cout << log.header.node_id << ": head " << store.head().short_hex() << " at height " << store.head_block().number
              << " (" << chain::hash_color(store.head()) << "), " << log.events.size() << " events";
    for (const auto& [type, count] : counts) std::cout << ", " << type << "=" << count;
    std::cout << (mismatches == 0 ? ", replay consistent\n" : ", " + std::to_string(mismatches) + " head mismatches\n");
    return mismatches == 0 ? 0 : 1;
}

int cmd_replay(const std::string& target) {
    if (!std::filesystem::is_directory(target)) return replay_log(target);
    int rc = 0;
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator{std::filesystem::path{target} / "logs"}) {
        if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& p : logs) rc = std::max(rc, replay_log(p.string()));
    return rc;
}

int cmd_export(const std::string& server, const std::string& id, const std::string& dir) {
    httplib::Client client{server};
    const auto res = client.Post("/api/runs/" + id + "/export", json{{"directory", dir}}.dump(), "application/json");
    if (!res) raise(ErrorCode::unreachable, "no answer from " + server);
    if (res->status != 200) {
        std::cerr << res->body << "\n";
        return 1;
    }
    std::cout << "exported " << id << " to " << dir << "\n";
    return 0;
}

int cmd_node(const std::string& config_path) {
    std::ifstream in{config_path};
    if (!in) raise(ErrorCode::io, "cannot open " + config_path);
    node::NodeRunner runner{node::node_config_from_json(json::parse(in))};
    return runner.run();
}

orchestrator::ControlServer* g_server = nullptr;

int cmd_serve(const std::string& host, int port, const std::string& data_dir) {
    orchestrator::Orchestrator service{data_dir};
    orchestrator::ControlServer server{service};
    const auto actual = port >= 0 ? static_cast<std::uint16_t>(port) : orchestrator::port_from_environment(8080);
    const auto bound = server.start(host, actual);
    std::cout << "listening on http://" << host << ":" << bound << "/api" << std::endl;
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    server.wait();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blockbox: proof-of-work network experiments"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

    RunFlags rf;
    auto* run = app.add_subcommand("run", "run one experiment and print its metrics");
    run->add_option("--config", rf.config_path, "experiment config JSON; flags override its fields");
    run->add_option("--name", rf.name);
    run->add_option("--topology", rf.topology, "ring, star, grid or custom");
    run->add_option("--n", rf.n, "node count");
    run->add_option("--rows", rf.rows);
    run->add_option("--cols", rf.cols);
    run->add_option("--hub", rf.hub);
    run->add_option("--edges", rf.edges, "custom edges as 0-1,1-2,...");
    run->add_option("--chain-id", rf.chain_id);
    run->add_option("--difficulty", rf.difficulty, "omit to calibrate from hashrate and target");
    run->add_option("--target-interval-ms", rf.target_interval_ms);
    run->add_option("--hashrate", rf.hashrate, "attempts per second per node");
    run->add_option("--height", rf.height, "stop once a head reaches this height");
    run->add_option("--duration-ms", rf.duration_ms, "stop after this much run time");
    run->add_option("--mode", rf.mode, "simulated or multiprocess");
    run->add_option("--seed", rf.seed);
    run->add_option("--latency-ms", rf.latency_ms, "per-hop base latency (simulated)");
    run->add_option("--jitter-ms", rf.jitter_ms, "uniform extra latency (simulated)");
    run->add_option("--speed", rf.speed, "simulated seconds per wall second; 0 = flat out");
    run->add_option("--base-port", rf.base_port, "multiprocess: first port; 0 = any free");
    run->add_flag("--limit-hashrate", rf.limit_hashrate, "multiprocess: throttle nodes to --hashrate");
    run->add_option("--settle-rounds", rf.settle_rounds);
    run->add_option("--out", rf.out, "export the finished run to this directory");
    run->add_flag("--json", rf.json_output, "print the run summary as JSON");
    run->add_flag("--progress", rf.progress, "print snapshots while running");

    std::uint32_t cal_n = 1;
    double cal_hashrate = 1000;
    double cal_target = 1000;
    bool cal_measure = false;
    double cal_sim = 0;
    std::int64_t cal_duration = 2000;
    auto* calibrate = app.add_subcommand("calibrate", "difficulty for a target block interval");
    calibrate->add_option("--n", cal_n)->capture_default_str();
    calibrate->add_option("--hashrate", cal_hashrate)->capture_default_str();
    calibrate->add_option("--target-interval-ms", cal_target)->capture_default_str();
    calibrate->add_flag("--measure", cal_measure, "measure this machine's single-thread hashrate first");
    calibrate->add_option("--measure-simulated", cal_sim, "measure a simulated node with this limit first");
    calibrate->add_option("--duration-ms", cal_duration, "measurement time (>= 1000)")->capture_default_str();

    std::string metrics_dir;
    bool metrics_json = false;
    bool metrics_write = false;
    auto* metrics_cmd = app.add_subcommand("metrics", "recompute metrics from an exported run");
    metrics_cmd->add_option("run-dir", metrics_dir)->required();
    metrics_cmd->add_flag("--json", metrics_json);
    metrics_cmd->add_flag("--write", metrics_write, "rewrite metrics.json");

    std::string export_server = "http://127.0.0.1:8080";
    std::string export_id;
    std::string export_dir;
    auto* export_cmd = app.add_subcommand("export", "export a run held by a running server");
    export_cmd->add_option("--server", export_server)->capture_default_str();
    export_cmd->add_option("run-id", export_id)->required();
    export_cmd->add_option("directory", export_dir)->required();

    std::string replay_target;
    auto* replay = app.add_subcommand("replay", "replay node logs and check them for consistency");
    replay->add_option("log-or-run-dir", replay_target)->required();

    std::string node_config;
    auto* node_cmd = app.add_subcommand("node", "host one node over TCP (started by multiprocess runs)");
    node_cmd->add_option("--config", node_config)->required();

    std::string serve_host = "127.0.0.1";
    int serve_port = -1;
    std::string serve_data;
    auto* serve = app.add_subcommand("serve", "serve the control API (port from BLOCKBOX_PORT, default 8080)");
    serve->add_option("--host", serve_host)->capture_default_str();
    serve->add_option("--port", serve_port, "overrides BLOCKBOX_PORT");
    serve->add_option("--data-dir", serve_data, "persist finished runs here");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_color_mt("blockbox"));
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*run) return cmd_run(*run, rf);
        if (*calibrate) return cmd_calibrate(cal_n, cal_hashrate, cal_target, cal_measure, cal_sim, cal_duration);
        if (*metrics_cmd) return cmd_metrics(metrics_dir, metrics_json, metrics_write);
        if (*export_cmd) return cmd_export(export_server, export_id, export_dir);
        if (*replay) return cmd_replay(replay_target);
        if (*node_cmd) return cmd_node(node_config);
        if (*serve) return cmd_serve(serve_host, serve_port, serve_data);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::invalid_input || e.code() == ErrorCode::invalid_parameter ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
