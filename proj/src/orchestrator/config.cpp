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

#include <blockbox/orchestrator/config.hpp>

#include <cmath>
#include <fstream>

#include <blockbox/common/errors.hpp>
#include <blockbox/orchestrator/calibration.hpp>

namespace blockbox::orchestrator {

std::string node_name(std::size_t index) { return "node-" + std::to_string(index); }

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> out;
    if (c.n == 0) out.emplace_back("n must be at least 1");
    if (c.n != c.topology.n) {
        out.push_back("n is " + std::to_string(c.n) + " but the topology has " + std::to_string(c.topology.n) + " nodes");
    }
    for (const auto& v : topology::validate(c.topology)) {
        out.push_back("topology " + std::string{topology::to_string(v.kind)} + ": " + v.detail);
    }
    if (c.target_interval_ms == 0) out.emplace_back("target_interval_ms must be positive");
    if (!(c.hashrate > 0) || !std::isfinite(c.hashrate)) out.emplace_back("hashrate must be positive");
    if (c.stop.height.has_value() == c.stop.duration.has_value()) {
        out.emplace_back("stop needs exactly one of height or duration_ms");
    }
    if (c.stop.height && *c.stop.height == 0) out.emplace_back("stop height must be at least 1");
    if (c.stop.duration && c.stop.duration->count() <= 0) out.emplace_back("stop duration must be positive");
    if (c.difficulty_given && c.genesis.difficulty == 0) out.emplace_back("difficulty must be positive");
    if (c.genesis.extra.size() > chain::kMaxGenesisExtra) out.emplace_back("genesis extra exceeds 96 bytes");
    if (const auto* sim = std::get_if<SimulatedMode>(&c.mode)) {
        if (sim->latency.base_ms < 0 || sim->latency.jitter_ms < 0) out.emplace_back("latency must be non-negative");
        if (sim->speed < 0) out.emplace_back("speed must be non-negative");
    }
    return out;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json genesis{{"chain_id", c.genesis.chain_id}, {"extra", to_hex(c.genesis.extra)}};
    if (c.difficulty_given) genesis["difficulty"] = c.genesis.difficulty;
    nlohmann::json stop = nlohmann::json::object();
    if (c.stop.height) stop["height"] = *c.stop.height;
    if (c.stop.duration) stop["duration_ms"] = c.stop.duration->count();
    nlohmann::json mode;
    if (const auto* sim = std::get_if<SimulatedMode>(&c.mode)) {
        mode = {{"type", "simulated"},
                {"seed", sim->seed},
                {"latency", {{"base_ms", sim->latency.base_ms}, {"jitter_ms", sim->latency.jitter_ms}}},
                {"speed", sim->speed}};
    } else {
        const auto& mp = std::get<MultiprocessMode>(c.mode);
        mode = {{"type", "multiprocess"},
                {"base_port", mp.base_port},
                {"node_binary", mp.node_binary},
                {"limit_hashrate", mp.limit_hashrate}};
    }
    nlohmann::json topo = c.topology;
    return {{"name", c.name},
            {"n", c.n},
            {"topology", topo},
            {"genesis", genesis},
            {"target_interval_ms", c.target_interval_ms},
            {"hashrate", c.hashrate},
            {"stop", stop},
            {"mode", mode},
            {"settle_rounds", c.settle_rounds}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig c;
        c.name = j.value("name", c.name);
        c.topology = j.at("topology").get<topology::TopologySpec>();
        c.n = j.contains("n") ? j.at("n").get<std::uint32_t>() : c.topology.n;
        c.target_interval_ms = j.at("target_interval_ms").get<std::uint64_t>();
        c.hashrate = j.value("hashrate", c.hashrate);
        c.settle_rounds = j.value("settle_rounds", c.settle_rounds);

        const auto genesis = j.value("genesis", nlohmann::json::object());
        c.genesis.chain_id = genesis.value("chain_id", std::uint64_t{1});
        c.genesis.extra = from_hex(genesis.value("extra", std::string{}));
        if (genesis.contains("difficulty") && !genesis.at("difficulty").is_null()) {
            c.genesis.difficulty = genesis.at("difficulty").get<std::uint64_t>();
            c.difficulty_given = true;
        }

        const auto& stop = j.at("stop");
        if (stop.contains("height")) c.stop.height = stop.at("height").get<std::uint64_t>();
        if (stop.contains("duration_ms")) c.stop.duration = std::chrono::milliseconds{stop.at("duration_ms").get<std::int64_t>()};

        const auto mode = j.value("mode", nlohmann::json{{"type", "simulated"}});
        const auto type = mode.value("type", std::string{"simulated"});
        if (type == "simulated") {
            SimulatedMode sim;
            sim.seed = mode.value("seed", sim.seed);
            const auto latency = mode.value("latency", nlohmann::json::object());
            sim.latency.base_ms = latency.value("base_ms", 0.0);
            sim.latency.jitter_ms = latency.value("jitter_ms", 0.0);
            sim.latency.seed = sim.seed;
            sim.speed = mode.value("speed", 0.0);
            c.mode = sim;
        } else if (type == "multiprocess") {
            MultiprocessMode mp;
            mp.base_port = mode.value("base_port", std::uint16_t{0});
            mp.node_binary = mode.value("node_binary", std::string{});
            mp.limit_hashrate = mode.value("limit_hashrate", false);
            c.mode = mp;
        } else {
            raise(ErrorCode::invalid_input, "unknown mode '" + type + "'");
        }
        if (!c.difficulty_given && c.n > 0 && c.hashrate > 0 && c.target_interval_ms > 0) {
            c.genesis.difficulty = calibrate_difficulty(c.n, c.hashrate, static_cast<double>(c.target_interval_ms)).difficulty;
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed experiment config: "} + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in{path};
    if (!in) raise(ErrorCode::io, "cannot open " + path);
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::invalid_input, path + ": " + e.what());
    }
}

}  // namespace blockbox::orchestrator
