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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <blockbox/node/node.hpp>
#include <blockbox/wire/sim_transport.hpp>

namespace blockbox::node {

/**
 * Hosts a Node on the discrete-event scheduler with a fixed hashrate.
 *
 * Attempt k of a mining session that began at time s completes at s + (k+1)/h seconds. Work is
 * done in 50 ms chunks; a block found inside a chunk is delivered to the node at its attempt's
 * completion time, unless the session was restarted in between (head change, StopMining), in
 * which case the block never existed. A head change restarts the session at the current time.
 */
class SimNode final : public wire::Endpoint {
  public:
    static constexpr wire::Micros kMiningChunk{50'000};

    //! Attaches to the network under node_id. hashrate is attempts per second and must be > 0.
    SimNode(wire::Scheduler& scheduler, wire::SimNetwork& network, std::string node_id,
            const chain::GenesisConfig& genesis, std::uint64_t seed, double hashrate);
    ~SimNode() override;

    SimNode(const SimNode&) = delete;
    SimNode& operator=(const SimNode&) = delete;

    [[nodiscard]] wire::Status local_status() const override { return node_->status(); }
    void on_message(const std::string& from, const wire::Message& message) override;
    void on_disconnected(const std::string& peer) override;

    //! Control channel, delivered immediately.
    std::optional<wire::Message> command(const wire::Message& command);

    [[nodiscard]] Node& node() noexcept { return *node_; }
    [[nodiscard]] const Node& node() const noexcept { return *node_; }
    [[nodiscard]] double hashrate() const noexcept { return hashrate_; }
    //! Attempts completed at or before t. Chunks are computed ahead of the clock, so this can
    //! be less than node().attempts().
    [[nodiscard]] std::uint64_t attempts_through(wire::Micros t) const;

  private:
    class NetworkOutbox;

    void restart_mining();
    void close_session();
    void mining_chunk(std::uint64_t generation, wire::Micros chunk_start);
    [[nodiscard]] wire::Micros attempt_time(std::uint64_t attempt_index) const;

    wire::Scheduler& scheduler_;
    std::unique_ptr<NetworkOutbox> outbox_;
    std::unique_ptr<Node> node_;
    double hashrate_;
    std::uint64_t generation_{0};
    wire::Micros session_start_{0};
    std::uint64_t session_attempts_{0};
    std::uint64_t earlier_sessions_attempts_{0};
    std::shared_ptr<bool> alive_;
};

}  // namespace blockbox::node
