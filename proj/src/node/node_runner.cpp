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

#include <blockbox/node/node_runner.hpp>

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include <blockbox/common/errors.hpp>

namespace blockbox::node {

namespace {

    constexpr std::uint64_t kUnlimitedSlice = 4096;
    constexpr std::chrono::milliseconds kDialTimeout{2000};

}  // namespace

nlohmann::json to_json(const NodeConfig& c) {
    auto peers = nlohmann::json::array();
    for (const auto& p : c.peers) peers.push_back({{"id", p.id}, {"address", p.address.str()}});
    return {{"node_id", c.node_id},
            {"genesis", {{"chain_id", c.genesis.chain_id}, {"difficulty", c.genesis.difficulty}, {"extra", to_hex(c.genesis.extra)}}},
            {"seed", c.seed},
            {"listen", c.listen.str()},
            {"control", c.control.str()},
            {"peers", std::move(peers)},
            {"hashrate_limit", c.hashrate_limit ? nlohmann::json(*c.hashrate_limit) : nlohmann::json(nullptr)},
            {"log_path", c.log_path}};
}

NodeConfig node_config_from_json(const nlohmann::json& j) {
    try {
        NodeConfig c;
        c.node_id = j.at("node_id").get<std::string>();
        const auto& g = j.at("genesis");
        c.genesis = {g.at("chain_id").get<std::uint64_t>(), g.at("difficulty").get<std::uint64_t>(),
                     from_hex(g.value("extra", std::string{}))};
        c.seed = j.value("seed", std::uint64_t{1});
        c.listen = wire::Address::parse(j.at("listen").get<std::string>());
        c.control = wire::Address::parse(j.at("control").get<std::string>());
        for (const auto& p : j.value("peers", nlohmann::json::array())) {
            c.peers.push_back({p.at("id").get<std::string>(), wire::Address::parse(p.at("address").get<std::string>())});
        }
        if (j.contains("hashrate_limit") && !j.at("hashrate_limit").is_null()) c.hashrate_limit = j.at("hashrate_limit").get<double>();
        c.log_path = j.value("log_path", std::string{});
        return c;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed node config: "} + e.what());
    } catch (const Error& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed node config: "} + e.what());
    }
}

std::chrono::milliseconds redial_backoff(std::uint32_t failures) {
    return std::chrono::milliseconds{std::min<std::int64_t>(std::int64_t{1000} << std::min(failures, 5u), 30'000)};
}

class NodeRunner::PeerOutbox final : public wire::Outbox {
  public:
    explicit PeerOutbox(NodeRunner& runner) : runner_{runner} {}

    void send(const std::string& peer, const wire::Message& message) override {
        const auto it = runner_.peers_.find(peer);
        if (it == runner_.peers_.end()) return;
        try {
            it->second->send(message);
        } catch (const Error& e) {
            spdlog::debug("{}: send to {} failed: {}", runner_.config_.node_id, peer, e.what());
            it->second->close();  // the reader notices and reports the disconnect
        }
    }

    void disconnect(const std::string& peer) override {
        if (const auto it = runner_.peers_.find(peer); it != runner_.peers_.end()) it->second->close();
    }

  private:
    NodeRunner& runner_;
};

NodeRunner::NodeRunner(NodeConfig config) : config_{std::move(config)}, outbox_{std::make_unique<PeerOutbox>(*this)} {
    if (config_.hashrate_limit && !(*config_.hashrate_limit > 0)) raise(ErrorCode::invalid_parameter, "hashrate limit must be positive");
    node_ = std::make_unique<Node>(config_.node_id, config_.genesis, config_.seed, clock_, *outbox_);
    if (!config_.log_path.empty()) {
        log_file_.open(config_.log_path, std::ios::trunc);
        if (!log_file_) raise(ErrorCode::io, "cannot write " + config_.log_path);
        log_writer_ = std::make_unique<LogWriter>(log_file_, LogHeader{1, config_.node_id, chain::make_genesis(config_.genesis)});
        node_->subscribe([this](const NodeEvent& e) { log_writer_->append(e); });
    }
    cached_status_ = node_->status();

    p2p_listener_ = std::make_unique<wire::TcpListener>(
        config_.listen,
        [this] {
            std::lock_guard lock{status_mutex_};
            return cached_status_;
        },
        [this](std::unique_ptr<wire::TcpPeer> peer, std::optional<wire::Status> remote) {
            post([this, shared = std::shared_ptr<wire::TcpPeer>{std::move(peer)}, remote = *remote] { adopt(shared, remote); });
        });
    p2p_port_ = p2p_listener_->port();

    control_listener_ = std::make_unique<wire::TcpListener>(
        config_.control, [this](std::unique_ptr<wire::TcpPeer> peer, std::optional<wire::Status>) {
            std::shared_ptr<wire::TcpPeer> control{std::move(peer)};
            std::weak_ptr<wire::TcpPeer> weak = control;
            control->start([this, weak](const std::string&, wire::Message m) {
                post([this, weak, m = std::move(m)] {
                    if (auto c = weak.lock()) on_control(c, m);
                });
            },
                           [](const std::string&) {});
            post([this, control] { controls_.push_back(control); });
        });
    control_port_ = control_listener_->port();
}

NodeRunner::~NodeRunner() {
    stop();
    if (p2p_listener_) p2p_listener_->stop();
    if (control_listener_) control_listener_->stop();
    if (dialer_.joinable()) dialer_.join();
    for (auto& [id, peer] : peers_) peer->close();
    for (auto& c : controls_) c->close();
    peers_.clear();
    controls_.clear();
    // Unrun tasks may hold accepted sockets; dropping them joins their readers, which can
    // still post, so drain until nothing is left.
    for (;;) {
        std::deque<Task> leftover;
        {
            std::lock_guard lock{mutex_};
            leftover.swap(tasks_);
        }
        if (leftover.empty()) break;
    }
}

void NodeRunner::post(Task task) {
    {
        std::lock_guard lock{mutex_};
        tasks_.push_back(std::move(task));
    }
    wake_.notify_one();
}

void NodeRunner::stop() {
    {
        std::lock_guard lock{mutex_};
        stopping_ = true;
    }
    wake_.notify_all();
}

int NodeRunner::run() {
    dialer_ = std::thread{[this] { dial_loop(); }};
    spdlog::info("{}: p2p on {}, control on {}", config_.node_id, p2p_port_, control_port_);
    for (;;) {
        std::deque<Task> batch;
        {
            std::unique_lock lock{mutex_};
            const bool busy = node_->mining() && !config_.hashrate_limit;
            if (!busy) {
                const auto wait = node_->mining() ? std::chrono::milliseconds{2} : std::chrono::milliseconds{100};
                wake_.wait_for(lock, wait, [this] { return !tasks_.empty() || stopping_; });
            }
            if (stopping_) break;
            batch.swap(tasks_);
        }
        for (auto& task : batch) task();
        if (node_->mining()) mine_slice();
        std::lock_guard lock{status_mutex_};
        cached_status_ = node_->status();
    }
    if (log_file_.is_open()) log_file_.flush();
    std::lock_guard lock{mutex_};
    return exit_code_;
}

void NodeRunner::adopt(std::shared_ptr<wire::TcpPeer> peer, const wire::Status& remote) {
    const auto& id = remote.node_id;
    const bool configured = std::any_of(config_.peers.begin(), config_.peers.end(),
                                        [&](const PeerAddress& p) { return p.id == id; });
    if (!configured || peers_.contains(id) || node_->shut_down()) {
        spdlog::warn("{}: refusing link from '{}'", config_.node_id, id);
        peer->close();
        return;
    }
    peer->set_remote_id(id);
    peer->start(
        [this](const std::string& from, wire::Message m) { post([this, from, m = std::move(m)] { node_->on_message(from, m); }); },
        [this, raw = peer.get()](const std::string& from) { post([this, from, raw] { on_peer_closed(from, raw); }); });
    peers_[id] = std::move(peer);
    {
        std::lock_guard lock{status_mutex_};
        connected_.insert(id);
    }
    spdlog::info("{}: linked with {}", config_.node_id, id);
    node_->on_message(id, remote);
    if (!handshakes_reported_ && all_peers_connected()) {
        handshakes_reported_ = true;
        node_->handshakes_done();
    }
}

void NodeRunner::on_peer_closed(const std::string& id, const wire::TcpPeer* peer) {
    const auto it = peers_.find(id);
    if (it == peers_.end() || it->second.get() != peer) return;
    peers_.erase(it);
    {
        std::lock_guard lock{status_mutex_};
        connected_.erase(id);
    }
    spdlog::info("{}: lost link with {}", config_.node_id, id);
    node_->on_disconnected(id);
}

void NodeRunner::on_control(const std::shared_ptr<wire::TcpPeer>& control, const wire::Message& message) {
    if (std::holds_alternative<wire::StartMining>(message)) {
        if (!handshakes_reported_) {
            handshakes_reported_ = true;
            node_->handshakes_done();
        }
        if (!node_->mining()) {
            mining_since_ = std::chrono::steady_clock::now();
            mining_attempts_ = 0;
        }
    }
    const auto reply = node_->on_command(message);
    if (reply) {
        try {
            control->send(*reply);
        } catch (const Error& e) {
            spdlog::debug("{}: control reply failed: {}", config_.node_id, e.what());
        }
    }
    if (std::holds_alternative<wire::Shutdown>(message)) {
        spdlog::info("{}: shutting down", config_.node_id);
        stop();
    }
}

void NodeRunner::mine_slice() {
    std::uint64_t budget = kUnlimitedSlice;
    if (config_.hashrate_limit) {
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - mining_since_).count();
        const auto due = static_cast<std::uint64_t>(std::floor(elapsed * *config_.hashrate_limit));
        budget = due > mining_attempts_ ? std::min(due - mining_attempts_, kUnlimitedSlice) : 0;
        if (budget == 0) return;
    }
    const auto batch = node_->mine(budget);
    mining_attempts_ += batch.attempts;
    if (batch.block) node_->submit_mined(*batch.block);
}

void NodeRunner::fatal(const std::string& reason) {
    spdlog::error("{}: {}", config_.node_id, reason);
    {
        std::lock_guard lock{mutex_};
        exit_code_ = 2;
    }
    stop();
}

bool NodeRunner::all_peers_connected() const {
    return std::all_of(config_.peers.begin(), config_.peers.end(), [&](const PeerAddress& p) { return peers_.contains(p.id); });
}

void NodeRunner::dial_loop() {
    struct Target {
        PeerAddress peer;
        std::uint32_t failures{0};
        std::chrono::steady_clock::time_point next{};
    };
    std::vector<Target> targets;
    for (const auto& p : config_.peers) {
        if (config_.node_id < p.id) targets.push_back({p});
    }
    const auto stopping = [this] {
        std::lock_guard lock{mutex_};
        return stopping_;
    };
    while (!stopping()) {
        const auto now = std::chrono::steady_clock::now();
        for (auto& t : targets) {
            if (stopping()) return;
            wire::Status local;
            {
                std::lock_guard lock{status_mutex_};
                if (connected_.contains(t.peer.id)) continue;
                local = cached_status_;
            }
            if (now < t.next) continue;
            try {
                auto link = wire::connect(local, t.peer.address, kDialTimeout);
                if (link.remote.node_id != t.peer.id) {
                    spdlog::warn("{}: {} answered as '{}'", config_.node_id, t.peer.address.str(), link.remote.node_id);
                    link.peer->close();
                    t.next = now + redial_backoff(t.failures++);
                    continue;
                }
                t.failures = 0;
                // Give the loop time to adopt the link before this target is looked at again.
                t.next = now + std::chrono::milliseconds{500};
                post([this, shared = std::shared_ptr<wire::TcpPeer>{std::move(link.peer)}, remote = link.remote] {
                    adopt(shared, remote);
                });
            } catch (const Error& e) {
                if (e.code() == ErrorCode::incompatible_peer) {
                    fatal("peer " + t.peer.id + " is on a different chain: " + e.what());
                    return;
                }
                const auto delay = redial_backoff(t.failures++);
                spdlog::info("{}: {} unreachable ({}), retrying in {} ms", config_.node_id, t.peer.id, e.what(), delay.count());
                t.next = now + delay;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds{20});
    }
}

}  // namespace blockbox::node
