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

#include <blockbox/wire/sim_transport.hpp>

namespace blockbox::wire {

void Scheduler::at(Micros when, Task task) {
    if (when < now_) raise(ErrorCode::invalid_parameter, "cannot schedule in the past");
    queue_.push(Entry{when, sequence_++, std::move(task)});
}

bool Scheduler::run_one() {
    if (queue_.empty()) return false;
    // top() is const; moving out is safe because the entry is popped immediately.
    Entry entry = std::move(const_cast<Entry&>(queue_.top()));
    queue_.pop();
    now_ = entry.when;
    ++executed_;
    entry.task();
    return true;
}

void Scheduler::run() {
    while (run_one()) {
    }
}

void Scheduler::run_until(Micros deadline) {
    while (!queue_.empty() && queue_.top().when <= deadline) run_one();
    if (deadline > now_) now_ = deadline;
}

std::optional<Micros> Scheduler::next_time() const {
    if (queue_.empty()) return std::nullopt;
    return queue_.top().when;
}

namespace {

    class SimOutbox final : public Outbox {
      public:
        SimOutbox(SimNetwork& network, std::string id) : network_{network}, id_{std::move(id)} {}
        void send(const std::string& peer, const Message& message) override { network_.send(id_, peer, message); }
        void disconnect(const std::string& peer) override { network_.disconnect(id_, peer); }

      private:
        SimNetwork& network_;
        std::string id_;
    };

    class SimPeer final : public PeerHandle {
      public:
        SimPeer(SimNetwork& network, std::string local, std::string remote, std::weak_ptr<bool> alive)
            : network_{network}, local_{std::move(local)}, remote_{std::move(remote)}, alive_{std::move(alive)} {}

        [[nodiscard]] const std::string& remote_id() const override { return remote_; }
        [[nodiscard]] bool is_open() const override { return !alive_.expired() && network_.linked(local_, remote_); }
        void send(const Message& message) override {
            if (!alive_.expired()) network_.send(local_, remote_, message);
        }
        void close() override {
            if (!alive_.expired()) network_.disconnect(local_, remote_);
        }

      private:
        SimNetwork& network_;
        std::string local_;
        std::string remote_;
        std::weak_ptr<bool> alive_;
    };

}  // namespace

SimNetwork::SimNetwork(Scheduler& scheduler, LatencyModel latency)
    : scheduler_{scheduler}, latency_{latency}, alive_{std::make_shared<bool>(true)} {}

SimNetwork::~SimNetwork() = default;

void SimNetwork::attach(const std::string& id, Endpoint& endpoint) {
    if (members_.contains(id)) raise(ErrorCode::invalid_parameter, "endpoint " + id + " already attached");
    Member m;
    m.endpoint = &endpoint;
    m.index = members_.size();
    m.outbox = std::make_unique<SimOutbox>(*this, id);
    members_.emplace(id, std::move(m));
}

SimNetwork::Member& SimNetwork::member(const std::string& id) {
    auto it = members_.find(id);
    if (it == members_.end()) raise(ErrorCode::invalid_parameter, "unknown endpoint " + id);
    return it->second;
}

std::pair<std::string, std::string> SimNetwork::key(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

std::unique_ptr<PeerHandle> SimNetwork::connect(const std::string& local, const std::string& remote) {
    if (local == remote) raise(ErrorCode::invalid_parameter, "cannot connect " + local + " to itself");
    auto& a = member(local);
    auto& b = member(remote);
    if (linked(local, remote)) raise(ErrorCode::invalid_parameter, local + " and " + remote + " already linked");
    const auto sa = a.endpoint->local_status();
    const auto sb = b.endpoint->local_status();
    if (!compatible(sa, sb)) raise(ErrorCode::incompatible_peer, local + " and " + remote + " disagree on genesis");

    auto& link = links_[key(local, remote)];
    link.open = true;
    ++link.epoch;
    send(local, remote, sa);
    send(remote, local, sb);
    return std::make_unique<SimPeer>(*this, local, remote, alive_);
}

void SimNetwork::send(const std::string& from, const std::string& to, const Message& message) {
    auto link = links_.find(key(from, to));
    if (link == links_.end() || !link->second.open) return;
    const auto epoch = link->second.epoch;
    const auto& source = member(from);
    auto& target = member(to);

    auto frame = encode(message);
    auto& direction = directions_[{from, to}];
    const auto index = direction.next_index++;
    const auto sent = scheduler_.now();
    auto due = sent + latency_.delay(source.index, target.index, index);
    if (due < direction.last_delivery) due = direction.last_delivery;
    direction.last_delivery = due;

    ++in_flight_;
    TraceEntry trace{sent, due, from, to, tag_of(message), frame.size()};
    scheduler_.at(due, [this, from, to, epoch, frame = std::move(frame), trace = std::move(trace),
                        endpoint = target.endpoint]() {
        --in_flight_;
        auto it = links_.find(key(from, to));
        if (it == links_.end() || !it->second.open || it->second.epoch != epoch) return;
        ++delivered_;
        if (trace_) trace_(trace);
        endpoint->on_message(from, decode(frame));
    });
}

void SimNetwork::disconnect(const std::string& a, const std::string& b) {
    auto it = links_.find(key(a, b));
    if (it == links_.end() || !it->second.open) return;
    it->second.open = false;
    auto* ea = member(a).endpoint;
    auto* eb = member(b).endpoint;
    scheduler_.at(scheduler_.now(), [ea, eb, a, b] {
        ea->on_disconnected(b);
        eb->on_disconnected(a);
    });
}

Outbox& SimNetwork::outbox(const std::string& id) { return *member(id).outbox; }

bool SimNetwork::linked(const std::string& a, const std::string& b) const {
    auto it = links_.find(key(a, b));
    return it != links_.end() && it->second.open;
}

std::vector<std::pair<std::string, std::string>> SimNetwork::links() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [pair, link] : links_) {
        if (link.open) out.push_back(pair);
    }
    return out;
}

}  // namespace blockbox::wire
