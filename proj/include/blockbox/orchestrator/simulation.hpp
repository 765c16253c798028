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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <blockbox/node/events.hpp>
#include <blockbox/orchestrator/config.hpp>
#include <blockbox/orchestrator/snapshot.hpp>

namespace blockbox::orchestrator {

struct RunControl {
    //! Called from the running thread on phase changes and at least every snapshot_interval
    //! of wall time while the run is busy.
    std::function<void(const Snapshot&)> on_snapshot;
    std::chrono::milliseconds snapshot_interval{250};
    //! Polled between events; a set flag ends the run as soon as possible.
    const std::atomic<bool>* cancel{nullptr};
};

struct RunOutcome {
    std::vector<node::NodeLog> logs;
    std::vector<wire::StatusReport> final_status;
    //! Open links after connecting, as sorted (lower id, higher id) pairs.
    std::vector<std::pair<std::string, std::string>> links;
    //! All final heads equal.
    bool consensus{false};
    //! Heads already agreed once the network drained after the stop, before any settling.
    bool consensus_at_stop{false};
    std::uint32_t settle_rounds{0};
    bool cancelled{false};
    //! Set when the run could not be carried out (a node failed to launch or died); logs are
    //! whatever the nodes managed to write.
    std::optional<std::string> failure;
    std::chrono::microseconds mining_started{0};
    std::chrono::microseconds mining_stopped{0};
    std::chrono::microseconds ended{0};
};

/**
 * Runs a simulated-mode experiment to completion on the calling thread.
 *
 * Nodes are wired along the topology, handshakes settle, then every node starts mining. At the
 * stop condition every node stops mining and all in-flight traffic drains. If heads still
 * differ (equal-weight tips survive a first-seen tie rule indefinitely), settle rounds follow:
 * all nodes mine until the next block is found, stop, and drain again, at most
 * config.settle_rounds times. Identical configs give identical outcomes.
 *
 * Throws invalid_input when the config does not validate or is not in simulated mode.
 */
[[nodiscard]] RunOutcome run_simulation(const ExperimentConfig& config, const RunControl& control = {});

//! Seed for node i, derived from the run seed alone.
[[nodiscard]] std::uint64_t node_seed(std::uint64_t run_seed, std::size_t index);

/**
 * Mean time between mainchain blocks: (time block H was mined - mining start) / H, with the
 * times taken from the miners' Mined events. Nothing when the mainchain is empty.
 */
[[nodiscard]] std::optional<double> mean_mainchain_interval_ms(const std::vector<node::NodeLog>& logs,
                                                                std::chrono::microseconds mining_started);

}  // namespace blockbox::orchestrator
