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

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include <blockbox/chain/block.hpp>
#include <blockbox/topology/topology.hpp>
#include <blockbox/wire/latency.hpp>

namespace blockbox::orchestrator {

struct StopCondition {
    //! Stop once any node's head reaches this height.
    std::optional<std::uint64_t> height;
    //! Stop after this much run time (simulated time in simulated mode).
    std::optional<std::chrono::milliseconds> duration;
    friend bool operator==(const StopCondition&, const StopCondition&) = default;
};

struct SimulatedMode {
    std::uint64_t seed{1};
    wire::LatencyModel latency{};
    //! Simulated seconds per wall second; 0 runs as fast as possible.
    double speed{0.0};
    friend bool operator==(const SimulatedMode&, const SimulatedMode&) = default;
};

struct MultiprocessMode {
    //! First p2p port; node i listens on base_port + 2i and takes control on base_port + 2i + 1.
    //! 0 picks free ports.
    std::uint16_t base_port{0};
    //! Executable providing the `node` subcommand; empty means this process's own binary.
    std::string node_binary;
    //! Throttle each node to the configured hashrate instead of hashing flat out.
    bool limit_hashrate{false};
    friend bool operator==(const MultiprocessMode&, const MultiprocessMode&) = default;
};

using Mode = std::variant<SimulatedMode, MultiprocessMode>;

struct ExperimentConfig {
    std::string name{"experiment"};
    std::uint32_t n{0};
    topology::TopologySpec topology;
    chain::GenesisConfig genesis;
    //! True when genesis.difficulty came from the file; otherwise it is calibrated from
    //! n, hashrate and target_interval_ms before the run.
    bool difficulty_given{false};
    std::uint64_t target_interval_ms{1000};
    //! Attempts per second per node.
    double hashrate{1000.0};
    StopCondition stop;
    Mode mode{SimulatedMode{}};
    //! Bound on tie-breaking rounds after the stop (see Orchestrator docs).
    std::uint32_t settle_rounds{20};

    [[nodiscard]] bool simulated() const noexcept { return std::holds_alternative<SimulatedMode>(mode); }
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

//! Empty iff the config is runnable: n matches the topology, which validates; target > 0;
//! exactly one stop condition; positive hashrate; sane latency.
[[nodiscard]] std::vector<std::string> validate(const ExperimentConfig& config);

[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);
//! Throws invalid_input for malformed or missing fields.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

//! Node ids are "node-<i>" for topology index i.
[[nodiscard]] std::string node_name(std::size_t index);

}  // namespace blockbox::orchestrator
