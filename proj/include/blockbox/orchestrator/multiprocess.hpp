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
#include <filesystem>
#include <memory>
#include <string>

#include <blockbox/orchestrator/config.hpp>
#include <blockbox/orchestrator/simulation.hpp>
#include <blockbox/wire/tcp_transport.hpp>

namespace blockbox::orchestrator {

//! Wall-clock quiet period that counts as quiescence after StopMining.
inline constexpr std::chrono::seconds kQuiescence{2};

//! Synchronous control connection to one node process.
class ControlClient {
  public:
    //! Retries until the node accepts or `patience` runs out; throws unreachable.
    ControlClient(const wire::Address& address, std::chrono::milliseconds patience);

    void send(const wire::Message& command);
    //! Throws unreachable when the node does not answer in time.
    wire::StatusReport report(std::chrono::milliseconds timeout = std::chrono::seconds{5});

  private:
    std::unique_ptr<wire::TcpPeer> peer_;
};

/**
 * Runs a multiprocess-mode experiment: one `node` process per topology vertex on localhost,
 * driven over their control ports. Node configs, process output and event logs go under
 * work_dir (nodes/ and logs/). Follows the same phases as run_simulation; quiescence is
 * kQuiescence of wall time without any head change. A node that fails to start, link up or
 * stay alive ends the run with RunOutcome::failure set and whatever logs exist.
 *
 * Throws invalid_input when the config does not validate or is not in multiprocess mode.
 */
[[nodiscard]] RunOutcome run_multiprocess(const ExperimentConfig& config, const std::filesystem::path& work_dir,
                                          const RunControl& control = {});

//! The executable providing the `node` subcommand: mode.node_binary, or this process's own.
[[nodiscard]] std::string node_executable(const MultiprocessMode& mode);

}  // namespace blockbox::orchestrator
