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
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <blockbox/orchestrator/service.hpp>

namespace httplib {
class Server;
}

namespace blockbox::orchestrator {

//! Port taken from BLOCKBOX_PORT when set and valid, else the fallback.
[[nodiscard]] std::uint16_t port_from_environment(std::uint16_t fallback = 8080);

/**
 * JSON control API over HTTP, served under /api (see docs/http-api.md). Errors are
 * {"error": {"code", "message"}} with 400 for bad input, 404 for unknown runs and 409 for
 * requests the run's state does not allow. GET /api/runs/<id>/stream is a server-sent event
 * stream: one "status" event per snapshot, then a final "end" event carrying the run summary.
 */
class ControlServer {
  public:
    explicit ControlServer(Orchestrator& orchestrator);
    ~ControlServer();

    ControlServer(const ControlServer&) = delete;
    ControlServer& operator=(const ControlServer&) = delete;

    //! Binds (port 0 picks one) and serves on a background thread. Throws io.
    std::uint16_t start(const std::string& host, std::uint16_t port);
    //! Blocks until stop().
    void wait();
    void stop();

    //! Snapshot heartbeat interval of the event stream when nothing new arrives.
    static constexpr std::chrono::milliseconds kStreamHeartbeat{1000};

  private:
    void routes();

    Orchestrator& orchestrator_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace blockbox::orchestrator
