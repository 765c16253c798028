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

#include <blockbox/node/node.hpp>

#include <algorithm>

#include <spdlog/spdlog.h>

#include <blockbox/common/errors.hpp>

namespace blockbox::node {

namespace {

    template <class... Fs>
    struct overloaded : Fs... {
        using Fs::operator()...;
    };
    template <class... Fs>
    overloaded(Fs...) -> overloaded<Fs...>;

    std::uint64_t millis(wire::Micros t) { return static_cast<std::uint64_t>(t.count() / 1000); }

}  // namespace

Node::Node(std::string node_id, const chain::GenesisConfig& genesis, std::uint64_t seed, const wire::Clock& clock,
           wire::Outbox& outbox)
    : id_{std::move(node_id)},
      genesis_config_{genesis},
      genesis_{chain::make_genesis(genesis)},
      clock_{clock},
      outbox_{outbox},
      store_{genesis_},
      miner_{id_, genesis.difficulty, seed} {
    seen_.insert(genesis_.hash);
}

void Node::emit(EventBody body) {
    events_.push_back(NodeEvent{clock_.now(), id_, std::move(body)});
    for (const auto& listener : listeners_) listener(events_.back());
}

void Node::on_message(const std::string& peer, const wire::Message& message) {
    if (shut_down_ || wire::is_control(message)) return;
    if (const auto* status = std::get_if<wire::Status>(&message)) {
        handle_status(peer, *status);
        return;
    }
    if (!peers_.contains(peer)) return;  // nothing before the handshake
    std::visit(overloaded{
                   [&](const wire::NewBlock& m) { handle_new_block(peer, m.block); },
                   [&](const wire::GetBlocks& m) { handle_get_blocks(peer, m); },
                   [&](const wire::Blocks& m) { handle_blocks(peer, m.blocks); },
                   [&](const wire::Ping&) { outbox_.send(peer, wire::Pong{}); },
                   [](const auto&) {},
               },
               message);
}

void Node::on_disconnected(const std::string& peer) {
    if (shut_down_ || peers_.erase(peer) == 0) return;
    if (sync_ && sync_->peer == peer) {
        sync_.reset();
        emit(SyncFailed{"disconnect"});
        sync_with_next_peer_after(peer);
    }
}

void Node::handshakes_done() {
    if (shut_down_ || sync_ || initial_sync_reported_) return;
    initial_sync_reported_ = true;
    emit(SyncCompleted{store_.head_block().number});
}

std::optional<wire::Message> Node::on_command(const wire::Message& command) {
    if (std::holds_alternative<wire::ReportStatus>(command)) return report();
    if (shut_down_) return std::nullopt;
    if (std::holds_alternative<wire::StartMining>(command)) {
        mining_ = true;
    } else if (std::holds_alternative<wire::StopMining>(command)) {
        mining_ = false;
    } else if (std::holds_alternative<wire::Shutdown>(command)) {
        mining_ = false;
        shut_down_ = true;
        sync_.reset();
    }
    return std::nullopt;
}

chain::Miner::Batch Node::mine(std::uint64_t max_attempts) {
    if (!mining_ || shut_down_ || max_attempts == 0) return {};
    return miner_.attempt(store_, max_attempts, millis(clock_.now()));
}

void Node::submit_mined(const chain::Block& block) {
    if (shut_down_ || seen_.contains(block.hash)) return;
    seen_.insert(block.hash);
    if (const auto result = insert(block, Mined{block})) forward_connected(*result, block.hash, true, std::nullopt);
}

wire::Status Node::status() const {
    const auto& head = store_.head_block();
    return wire::Status{genesis_config_.chain_id, genesis_.hash, head.hash, head.number,
                        store_.head_total_difficulty(), id_};
}

wire::StatusReport Node::report() const {
    wire::StatusReport r;
    const auto& head = store_.head_block();
    r.node_id = id_;
    r.head_hash = head.hash;
    r.head_number = head.number;
    r.total_difficulty = store_.head_total_difficulty();
    r.last_blocks.push_back({head.number, head.hash});
    if (!head.is_genesis()) r.last_blocks.push_back({head.number - 1, head.parent_hash});
    r.peer_count = static_cast<std::uint32_t>(peers_.size());
    r.syncing = syncing();
    r.mining = mining_;
    r.attempts = miner_.total_attempts();
    r.events = events_.size();
    return r;
}

NodeLog Node::log() const { return NodeLog{LogHeader{kLogVersion, id_, genesis_}, events_}; }

std::vector<std::string> Node::peers() const {
    std::vector<std::string> out;
    for (const auto& [id, status] : peers_) out.push_back(id);
    return out;
}

void Node::handle_status(const std::string& peer, const wire::Status& status) {
    if (!wire::compatible(status, this->status())) {
        spdlog::warn("{}: dropping incompatible peer {}", id_, peer);
        outbox_.disconnect(peer);
        return;
    }
    peers_[peer] = status;
    if (!sync_ && status.total_difficulty > store_.head_total_difficulty()) start_sync(peer);
}

void Node::handle_new_block(const std::string& peer, const chain::Block& block) {
    if (!seen_.insert(block.hash).second) return;
    const auto result = insert(block, Received{block, peer});
    if (!result) return;
    if (result->outcome == chain::InsertOutcome::orphaned_pending) {
        parked_from_[block.hash] = peer;
        // A gap wider than one block means we missed more than a single gossip round.
        if (!sync_ && block.number > store_.head_block().number + 1) start_sync(peer);
        return;
    }
    forward_connected(*result, block.hash, true, peer);
}

void Node::handle_get_blocks(const std::string& peer, const wire::GetBlocks& request) {
    const auto count = std::min(request.count, wire::kMaxBlocksPerRequest);
    outbox_.send(peer, wire::Blocks{store_.canonical_range(request.from_number, count)});
}

void Node::handle_blocks(const std::string& peer, const std::vector<chain::Block>& blocks) {
    if (!sync_ || sync_->peer != peer) return;  // unsolicited or from an abandoned session
    auto& session = *sync_;
    if (blocks.empty()) {
        finish_sync();
        return;
    }
    const auto& first = blocks.front();
    if (session.expected_parent && first.parent_hash != *session.expected_parent) {
        emit(SyncFailed{"peer-reorged"});
        emit(SyncStarted{peer});
        session.from = session.from > kSyncBatch ? session.from - kSyncBatch : 1;
        session.step = kSyncBatch;
        session.expected_parent.reset();
        request_batch();
        return;
    }
    if (!store_.contains(first.parent_hash)) {
        if (session.from <= 1) {
            sync_.reset();
            emit(SyncFailed{"no-common-ancestor"});
            return;
        }
        session.from = session.from > session.step ? session.from - session.step : 1;
        session.step *= 2;
        request_batch();
        return;
    }
    for (const auto& block : blocks) {
        const bool fresh = seen_.insert(block.hash).second;
        const auto result = insert(block, fresh ? std::optional<EventBody>{Received{block, peer}} : std::nullopt);
        if (!result) {
            sync_.reset();
            emit(SyncFailed{"invalid-block"});
            return;
        }
        // Sync imports are not relayed, but parked gossip blocks they release are.
        forward_connected(*result, block.hash, false, std::nullopt);
    }
    if (blocks.size() < kSyncBatch) {
        finish_sync();
        return;
    }
    session.expected_parent = blocks.back().hash;
    session.from = blocks.back().number + 1;
    session.step = kSyncBatch;
    request_batch();
}

std::optional<chain::InsertResult> Node::insert(const chain::Block& block, std::optional<EventBody> observed) {
    chain::InsertResult result;
    try {
        result = store_.insert_block(block);
    } catch (const Error& e) {
        spdlog::debug("{}: dropped block {}: {}", id_, block.hash.short_hex(), e.what());
        return std::nullopt;
    }
    if (observed) emit(std::move(*observed));
    if (result.head_changed()) {
        emit(HeadChanged{result.old_head, result.new_head, store_.head_block().number, result.reorg_depth});
    }
    return result;
}

void Node::forward_connected(const chain::InsertResult& result, const chain::Hash32& inserted, bool relay_inserted,
                             const std::optional<std::string>& inserted_from) {
    for (const auto& hash : result.connected) {
        std::optional<std::string> except;
        if (hash == inserted) {
            if (!relay_inserted && !parked_from_.contains(hash)) continue;
            except = inserted_from;
        }
        if (const auto it = parked_from_.find(hash); it != parked_from_.end()) {
            except = it->second;
            parked_from_.erase(it);
        }
        broadcast(wire::NewBlock{store_.block(hash)}, except);
    }
    if (parked_from_.size() > 2 * chain::ChainStore::kOrphanPoolCapacity) {
        std::erase_if(parked_from_, [&](const auto& entry) { return !store_.is_parked(entry.first); });
    }
}

void Node::broadcast(const wire::Message& message, const std::optional<std::string>& except) {
    for (const auto& [peer, status] : peers_) {
        if (peer != except) outbox_.send(peer, message);
    }
}

void Node::start_sync(const std::string& peer) {
    sync_ = SyncSession{peer, store_.head_block().number + 1, kSyncBatch, std::nullopt};
    emit(SyncStarted{peer});
    request_batch();
}

void Node::request_batch() { outbox_.send(sync_->peer, wire::GetBlocks{sync_->from, kSyncBatch}); }

void Node::finish_sync() {
    sync_.reset();
    initial_sync_reported_ = true;
    emit(SyncCompleted{store_.head_block().number});
    // Another peer may have advertised more work than the one we just followed.
    for (const auto& [peer, status] : peers_) {
        if (status.total_difficulty > store_.head_total_difficulty()) {
            start_sync(peer);
            return;
        }
    }
}

void Node::sync_with_next_peer_after(const std::string& peer) {
    const auto td = store_.head_total_difficulty();
    auto pick = [&](auto first, auto last) -> std::optional<std::string> {
        for (auto it = first; it != last; ++it) {
            if (it->second.total_difficulty > td) return it->first;
        }
        return std::nullopt;
    };
    auto next = pick(peers_.upper_bound(peer), peers_.end());
    if (!next) next = pick(peers_.begin(), peers_.upper_bound(peer));
    if (next) start_sync(*next);
}

}  // namespace blockbox::node
