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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <blockbox/node/node.hpp>
#include <blockbox/wire/tcp_transport.hpp>

namespace blockbox::node {

struct PeerAddress {
    std::string id;
    wire::Address address;
    friend bool operator==(const PeerAddress&, const PeerAddress&) = default;
};

//! Everything one node process needs; written by the orchestrator as JSON.
struct NodeConfig {
    std::string node_id;
    chain::GenesisConfig genesis;
    std::uint64_t seed{1};
    wire::Address listen;
    wire::Address control;
    std::vector<PeerAddress> peers;
    //! Attempts per second; nothing hashes flat out.
    std::optional<double> hashrate_limit;
    std::string log_path;

    friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

[[nodiscard]] nlohmann::json to_json(const NodeConfig& config);
//! Throws invalid_input.
[[nodiscard]] NodeConfig node_config_from_json(const nlohmann::json& j);

//! Redial delay after the k-th consecutive failure (k from 0): 1 s doubling, capped at 30 s.
[[nodiscard]] std::chrono::milliseconds redial_backoff(std::uint32_t failures);

/**
 * Hosts a Node over TCP on the wall clock: one event-loop thread owns the Node; socket reader
 * threads, the dialer and the control channel only post work to it.
 *
 * Each link is dialed by the endpoint with the smaller node id and accepted by the other, so
 * every topology edge yields exactly one connection. Failed dials retry with redial_backoff;
 * a peer on another chain is a fatal configuration error. Connections from ids outside the
 * configured peer list are refused. The initial sync starts once every configured peer is
 * connected, or at StartMining, whichever comes first.
 *
 * The control port speaks the same framed format: StartMining, StopMining, Shutdown and
 * ReportStatus (answered with a StatusReport). Every event is appended to log_path as it
 * happens.
 */
class NodeRunner {
  public:
    explicit NodeRunner(NodeConfig config);
    ~NodeRunner();

    NodeRunner(const NodeRunner&) = delete;
    NodeRunner& operator=(const NodeRunner&) = delete;

    //! Blocks until Shutdown arrives or stop() is called. Returns a process exit code: 0 on
    //! shutdown, 2 on a fatal configuration error.
    int run();
    //! Thread-safe.
    void stop();

    //! Bound ports (useful when the config asked for port 0).
    [[nodiscard]] std::uint16_t p2p_port() const noexcept { return p2p_port_; }
    [[nodiscard]] std::uint16_t control_port() const noexcept { return control_port_; }

  private:
    class PeerOutbox;
    using Task = std::function<void()>;

    void post(Task task);
    void adopt(std::shared_ptr<wire::TcpPeer> peer, const wire::Status& remote);
    void on_control(const std::shared_ptr<wire::TcpPeer>& control, const wire::Message& message);
    void on_peer_closed(const std::string& id, const wire::TcpPeer* peer);
    void dial_loop();
    void mine_slice();
    void fatal(const std::string& reason);
    [[nodiscard]] bool all_peers_connected() const;

    NodeConfig config_;
    wire::WallClock clock_;
    std::unique_ptr<PeerOutbox> outbox_;
    std::unique_ptr<Node> node_;
    std::ofstream log_file_;
    std::unique_ptr<LogWriter> log_writer_;

    std::mutex mutex_;
    std::condition_variable wake_;
    std::deque<Task> tasks_;
    bool stopping_{false};
    int exit_code_{0};

    // Loop-thread state.
    std::map<std::string, std::shared_ptr<wire::TcpPeer>> peers_;
    std::vector<std::shared_ptr<wire::TcpPeer>> controls_;
    bool handshakes_reported_{false};
    std::chrono::steady_clock::time_point mining_since_{};
    std::uint64_t mining_attempts_{0};

    mutable std::mutex status_mutex_;
    wire::Status cached_status_;
    //! Ids with an open link; read by the dialer.
    std::set<std::string> connected_;

    std::uint16_t p2p_port_{0};
    std::uint16_t control_port_{0};
    std::unique_ptr<wire::TcpListener> p2p_listener_;
    std::unique_ptr<wire::TcpListener> control_listener_;
    std::thread dialer_;
};

}  // namespace blockbox::node
