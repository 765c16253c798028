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
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <blockbox/wire/latency.hpp>
#include <blockbox/wire/transport.hpp>

namespace blockbox::wire {

//! Discrete-event scheduler. Tasks run in (time, insertion order); the clock jumps to each
//! task's time before running it.
class Scheduler final : public Clock {
  public:
    using Task = std::function<void()>;

    [[nodiscard]] Micros now() const override { return now_; }

    //! Throws invalid_parameter when scheduling into the past.
    void at(Micros when, Task task);
    void after(Micros delay, Task task) { at(now_ + delay, std::move(task)); }

    //! Runs the earliest task. Returns false when nothing is pending.
    bool run_one();
    //! Runs until the queue drains.
    void run();
    //! Runs every task due at or before the deadline, then advances the clock to it.
    void run_until(Micros deadline);

    [[nodiscard]] bool empty() const noexcept { return queue_.empty(); }
    [[nodiscard]] std::size_t pending() const noexcept { return queue_.size(); }
    [[nodiscard]] std::uint64_t executed() const noexcept { return executed_; }
    [[nodiscard]] std::optional<Micros> next_time() const;

  private:
    struct Entry {
        Micros when;
        std::uint64_t sequence;
        Task task;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const noexcept {
            return a.when != b.when ? a.when > b.when : a.sequence > b.sequence;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    Micros now_{0};
    std::uint64_t sequence_{0};
    std::uint64_t executed_{0};
};

//! Something attached to the simulated network: a node, or a scripted stand-in in tests.
class Endpoint {
  public:
    virtual ~Endpoint() = default;
    [[nodiscard]] virtual Status local_status() const = 0;
    virtual void on_message(const std::string& from, const Message& message) = 0;
    virtual void on_disconnected(const std::string& /*peer*/) {}
};

struct TraceEntry {
    Micros sent{0};
    Micros delivered{0};
    std::string from;
    std::string to;
    Tag tag{Tag::ping};
    std::size_t bytes{0};
};

/**
 * In-memory transport. Every message is encoded to its wire frame, delayed by the latency
 * model and decoded on delivery. Links are symmetric; delivery per ordered pair is FIFO.
 * connect() performs the Status handshake check synchronously and also sends each side's
 * Status through the link, exactly as the TCP transport does.
 */
class SimNetwork {
  public:
    SimNetwork(Scheduler& scheduler, LatencyModel latency);
    ~SimNetwork();

    SimNetwork(const SimNetwork&) = delete;
    SimNetwork& operator=(const SimNetwork&) = delete;

    void attach(const std::string& id, Endpoint& endpoint);

    //! Throws incompatible_peer on chain id or genesis mismatch, invalid_parameter for unknown
    //! ids, self-links, or an existing link.
    std::unique_ptr<PeerHandle> connect(const std::string& local, const std::string& remote);

    //! Silently dropped if the pair is not linked.
    void send(const std::string& from, const std::string& to, const Message& message);
    void disconnect(const std::string& a, const std::string& b);

    [[nodiscard]] Outbox& outbox(const std::string& id);
    [[nodiscard]] bool linked(const std::string& a, const std::string& b) const;
    //! Open links as (lower id, higher id) pairs, sorted.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> links() const;
    [[nodiscard]] std::size_t in_flight() const noexcept { return in_flight_; }
    [[nodiscard]] std::uint64_t delivered() const noexcept { return delivered_; }

    void on_trace(std::function<void(const TraceEntry&)> sink) { trace_ = std::move(sink); }

  private:
    struct Member {
        Endpoint* endpoint{nullptr};
        std::uint64_t index{0};
        std::unique_ptr<Outbox> outbox;
    };
    struct Direction {
        std::uint64_t next_index{0};
        Micros last_delivery{0};
    };
    struct Link {
        bool open{false};
        std::uint64_t epoch{0};
    };

    [[nodiscard]] Member& member(const std::string& id);
    [[nodiscard]] static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);

    Scheduler& scheduler_;
    LatencyModel latency_;
    std::map<std::string, Member> members_;
    std::map<std::pair<std::string, std::string>, Link> links_;
    std::map<std::pair<std::string, std::string>, Direction> directions_;
    std::size_t in_flight_{0};
    std::uint64_t delivered_{0};
    std::function<void(const TraceEntry&)> trace_;
    std::shared_ptr<bool> alive_;
};

}  // namespace blockbox::wire
