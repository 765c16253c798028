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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <blockbox/chain/chain_store.hpp>
#include <blockbox/chain/miner.hpp>
#include <blockbox/node/events.hpp>
#include <blockbox/wire/message.hpp>
#include <blockbox/wire/transport.hpp>

namespace blockbox::node {

//! Blocks requested per GetBlocks during sync.
inline constexpr std::uint32_t kSyncBatch = 128;

/**
 * One node's state machine, independent of transport and time source.
 *
 * Inputs arrive through on_message / on_disconnected / on_command and are processed to
 * completion; outputs are messages on the outbox and NodeEvents for subscribers. The host
 * drives mining by calling mine() with an attempt budget and handing any block found back
 * through submit_mined() when that attempt's time comes.
 *
 * Peers become known through their Status message, which both transports deliver first on
 * every link. A peer advertising more total difficulty than the local head starts a sync:
 * GetBlocks in batches of 128 from the local height upward, backing off (doubling) while the
 * batch does not attach, and restarting when a later batch no longer links to the previous
 * one (the peer reorganized mid-sync). Blocks imported by sync are logged as Received but
 * are not gossiped; gossip is for fresh blocks.
 *
 * Single-threaded: the host serializes every call.
 */
class Node {
  public:
    using Listener = std::function<void(const NodeEvent&)>;

    Node(std::string node_id, const chain::GenesisConfig& genesis, std::uint64_t seed, const wire::Clock& clock,
         wire::Outbox& outbox);

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    void subscribe(Listener listener) { listeners_.push_back(std::move(listener)); }

    void on_message(const std::string& peer, const wire::Message& message);
    void on_disconnected(const std::string& peer);
    //! Called once the initial handshakes are done. Without a sync in progress the initial
    //! sync is complete at the local height.
    void handshakes_done();

    //! StartMining, StopMining, Shutdown, ReportStatus. Returns the StatusReport for ReportStatus.
    std::optional<wire::Message> on_command(const wire::Message& command);

    //! Up to max_attempts nonces on a candidate extending the current head. Nothing is done
    //! unless mining is on.
    chain::Miner::Batch mine(std::uint64_t max_attempts);
    //! Accepts a block produced by mine(): logs Mined, updates the head, gossips to every peer.
    void submit_mined(const chain::Block& block);

    [[nodiscard]] wire::Status status() const;
    [[nodiscard]] wire::StatusReport report() const;

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] const chain::GenesisConfig& genesis_config() const noexcept { return genesis_config_; }
    [[nodiscard]] const chain::ChainStore& store() const noexcept { return store_; }
    [[nodiscard]] const std::vector<NodeEvent>& events() const noexcept { return events_; }
    [[nodiscard]] NodeLog log() const;
    [[nodiscard]] std::vector<std::string> peers() const;
    [[nodiscard]] bool mining() const noexcept { return mining_; }
    [[nodiscard]] bool syncing() const noexcept { return sync_.has_value(); }
    [[nodiscard]] bool shut_down() const noexcept { return shut_down_; }
    [[nodiscard]] std::uint64_t attempts() const noexcept { return miner_.total_attempts(); }

  private:
    struct SyncSession {
        std::string peer;
        std::uint64_t from{1};
        std::uint64_t step{kSyncBatch};
        std::optional<chain::Hash32> expected_parent;
    };

    void emit(EventBody body);
    void handle_status(const std::string& peer, const wire::Status& status);
    void handle_new_block(const std::string& peer, const chain::Block& block);
    void handle_blocks(const std::string& peer, const std::vector<chain::Block>& blocks);
    void handle_get_blocks(const std::string& peer, const wire::GetBlocks& request);

    //! Inserts the block; if it is valid, emits observed (Mined or Received) and then any
    //! HeadChanged. Returns nothing if the block was rejected.
    std::optional<chain::InsertResult> insert(const chain::Block& block, std::optional<EventBody> observed);
    void forward_connected(const chain::InsertResult& result, const chain::Hash32& inserted, bool relay_inserted,
                           const std::optional<std::string>& inserted_from);
    void broadcast(const wire::Message& message, const std::optional<std::string>& except);

    void start_sync(const std::string& peer);
    void request_batch();
    void finish_sync();
    void sync_with_next_peer_after(const std::string& peer);

    std::string id_;
    chain::GenesisConfig genesis_config_;
    chain::Block genesis_;
    const wire::Clock& clock_;
    wire::Outbox& outbox_;
    chain::ChainStore store_;
    chain::Miner miner_;

    std::map<std::string, wire::Status> peers_;
    std::unordered_set<chain::Hash32> seen_;
    std::unordered_map<chain::Hash32, std::string> parked_from_;
    std::optional<SyncSession> sync_;
    bool initial_sync_reported_{false};
    bool mining_{false};
    bool shut_down_{false};

    std::vector<NodeEvent> events_;
    std::vector<Listener> listeners_;
};

}  // namespace blockbox::node
