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

#include <blockbox/node/sim_node.hpp>

#include <cmath>

#include <blockbox/common/errors.hpp>

namespace blockbox::node {

class SimNode::NetworkOutbox final : public wire::Outbox {
  public:
    NetworkOutbox(wire::SimNetwork& network, std::string id) : network_{network}, id_{std::move(id)} {}
    void send(const std::string& peer, const wire::Message& message) override { network_.send(id_, peer, message); }
    void disconnect(const std::string& peer) override { network_.disconnect(id_, peer); }

  private:
    wire::SimNetwork& network_;
    std::string id_;
};

SimNode::SimNode(wire::Scheduler& scheduler, wire::SimNetwork& network, std::string node_id,
                 const chain::GenesisConfig& genesis, std::uint64_t seed, double hashrate)
    : scheduler_{scheduler},
      outbox_{std::make_unique<NetworkOutbox>(network, node_id)},
      hashrate_{hashrate},
      alive_{std::make_shared<bool>(true)} {
    if (!(hashrate > 0) || !std::isfinite(hashrate)) raise(ErrorCode::invalid_parameter, "hashrate must be positive");
    node_ = std::make_unique<Node>(node_id, genesis, seed, scheduler, *outbox_);
    node_->subscribe([this](const NodeEvent& event) {
        if (std::holds_alternative<HeadChanged>(event.body) && node_->mining()) restart_mining();
    });
    network.attach(node_id, *this);
}

SimNode::~SimNode() { *alive_ = false; }

void SimNode::on_message(const std::string& from, const wire::Message& message) { node_->on_message(from, message); }

void SimNode::on_disconnected(const std::string& peer) { node_->on_disconnected(peer); }

std::optional<wire::Message> SimNode::command(const wire::Message& command) {
    const bool was_mining = node_->mining();
    auto reply = node_->on_command(command);
    if (node_->mining() && !was_mining) {
        restart_mining();
    } else if (!node_->mining() && was_mining) {
        close_session();
        ++generation_;  // cancels the pending chunk and any found-but-undelivered block
    }
    return reply;
}

wire::Micros SimNode::attempt_time(std::uint64_t attempt_index) const {
    const auto offset = std::floor(static_cast<double>(attempt_index + 1) * 1e6 / hashrate_);
    return session_start_ + wire::Micros{static_cast<std::int64_t>(offset)};
}

std::uint64_t SimNode::attempts_through(wire::Micros t) const {
    if (t < session_start_) return earlier_sessions_attempts_;
    const auto elapsed_s = static_cast<double>((t - session_start_).count()) / 1e6;
    const auto due = static_cast<std::uint64_t>(std::floor(elapsed_s * hashrate_));
    return earlier_sessions_attempts_ + std::min(due, session_attempts_);
}

void SimNode::close_session() {
    // Attempts computed ahead of the clock that would complete after now never happen.
    earlier_sessions_attempts_ = attempts_through(scheduler_.now());
    session_start_ = scheduler_.now();
    session_attempts_ = 0;
}

void SimNode::restart_mining() {
    close_session();
    const auto generation = ++generation_;
    scheduler_.at(session_start_, [this, alive = alive_, generation, start = session_start_] {
        if (*alive) mining_chunk(generation, start);
    });
}

void SimNode::mining_chunk(std::uint64_t generation, wire::Micros chunk_start) {
    if (generation != generation_ || !node_->mining()) return;
    const auto chunk_end = chunk_start + kMiningChunk;
    const auto elapsed_s = static_cast<double>((chunk_end - session_start_).count()) / 1e6;
    const auto due = static_cast<std::uint64_t>(std::floor(elapsed_s * hashrate_));
    if (due > session_attempts_) {
        const auto batch = node_->mine(due - session_attempts_);
        const auto first_index = session_attempts_;
        session_attempts_ += batch.attempts;
        if (batch.block) {
            const auto found_at = std::max(attempt_time(first_index + batch.attempts - 1), scheduler_.now());
            scheduler_.at(found_at, [this, alive = alive_, generation, block = *batch.block] {
                if (*alive && generation == generation_ && node_->mining()) node_->submit_mined(block);
            });
            return;
        }
    }
    scheduler_.at(chunk_end, [this, alive = alive_, generation, chunk_end] {
        if (*alive) mining_chunk(generation, chunk_end);
    });
}

}  // namespace blockbox::node
