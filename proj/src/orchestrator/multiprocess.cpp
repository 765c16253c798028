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

#include <blockbox/orchestrator/multiprocess.hpp>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstring>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include <blockbox/common/errors.hpp>
#include <blockbox/node/node_runner.hpp>

extern char** environ;

namespace blockbox::orchestrator {

namespace fs = std::filesystem;
using namespace std::chrono_literals;
using SteadyClock = std::chrono::steady_clock;

ControlClient::ControlClient(const wire::Address& address, std::chrono::milliseconds patience) {
    const auto deadline = SteadyClock::now() + patience;
    for (;;) {
        try {
            peer_ = wire::dial(address, 1000ms);
            return;
        } catch (const Error&) {
            if (SteadyClock::now() >= deadline) throw;
            std::this_thread::sleep_for(50ms);
        }
    }
}

void ControlClient::send(const wire::Message& command) { peer_->send(command); }

wire::StatusReport ControlClient::report(std::chrono::milliseconds timeout) {
    peer_->send(wire::ReportStatus{});
    for (;;) {
        auto reply = peer_->receive(timeout);
        if (auto* r = std::get_if<wire::StatusReport>(&reply)) return std::move(*r);
    }
}

std::string node_executable(const MultiprocessMode& mode) {
    if (!mode.node_binary.empty()) return mode.node_binary;
    return fs::read_symlink("/proc/self/exe").string();
}

namespace {

    struct Child {
        pid_t pid{-1};
        bool exited{false};
        int status{0};

        bool alive() {
            if (pid < 0 || exited) return false;
            if (::waitpid(pid, &status, WNOHANG) == pid) exited = true;
            return !exited;
        }
    };

    Child spawn(const std::string& exe, const std::vector<std::string>& args, const fs::path& output) {
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, output.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(exe.c_str()));
        for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        Child child;
        const int rc = ::posix_spawn(&child.pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
        posix_spawn_file_actions_destroy(&actions);
        if (rc != 0) raise(ErrorCode::io, "cannot start " + exe + ": " + std::strerror(rc));
        return child;
    }

    //! Distinct free loopback ports, held open together so none repeats.
    std::vector<std::uint16_t> free_ports(std::size_t count) {
        std::vector<std::unique_ptr<wire::TcpListener>> probes;
        std::vector<std::uint16_t> ports;
        for (std::size_t i = 0; i < count; ++i) {
            probes.push_back(std::make_unique<wire::TcpListener>(wire::Address{"127.0.0.1", 0}, [](auto, auto) {}));
            ports.push_back(probes.back()->port());
        }
        for (auto& p : probes) p->stop();
        return ports;
    }

    class MultiprocessRunner {
      public:
        MultiprocessRunner(const ExperimentConfig& config, fs::path work_dir, const RunControl& control)
            : config_{config}, mode_{std::get<MultiprocessMode>(config.mode)}, work_dir_{std::move(work_dir)}, control_{control} {}

        ~MultiprocessRunner() { reap(0ms); }

        RunOutcome run() {
            origin_ = SteadyClock::now();
            try {
                launch();
                wait_for_links();
                mine();
                settle();
            } catch (const Error& e) {
                if (!out_.failure) out_.failure = e.what();
            }
            finish();
            return std::move(out_);
        }

      private:
        void launch() {
            fs::create_directories(work_dir_ / "nodes");
            fs::create_directories(work_dir_ / "logs");
            const auto n = config_.n;
            std::vector<std::uint16_t> ports;
            if (mode_.base_port != 0) {
                for (std::uint32_t i = 0; i < 2 * n; ++i) ports.push_back(static_cast<std::uint16_t>(mode_.base_port + i));
            } else {
                ports = free_ports(2 * n);
            }
            const auto adjacency = config_.topology.adjacency();
            const auto exe = node_executable(mode_);
            phase_ = "starting";
            for (std::uint32_t i = 0; i < n; ++i) {
                node::NodeConfig nc;
                nc.node_id = node_name(i);
                nc.genesis = config_.genesis;
                nc.seed = node_seed(0, i);
                nc.listen = {"127.0.0.1", ports[2 * i]};
                nc.control = {"127.0.0.1", ports[2 * i + 1]};
                for (const auto j : adjacency[i]) nc.peers.push_back({node_name(j), {"127.0.0.1", ports[2 * j]}});
                if (mode_.limit_hashrate) nc.hashrate_limit = config_.hashrate;
                nc.log_path = (work_dir_ / "logs" / (nc.node_id + ".jsonl")).string();
                const auto config_path = work_dir_ / "nodes" / (nc.node_id + ".json");
                std::ofstream{config_path} << to_json(nc).dump(2) << "\n";
                children_.push_back(spawn(exe, {"node", "--config", config_path.string()},
                                          work_dir_ / "nodes" / (nc.node_id + ".out")));
                control_addresses_.push_back(nc.control);
                degrees_.push_back(adjacency[i].size());
            }
            for (std::uint32_t i = 0; i < n; ++i) {
                try {
                    clients_.push_back(std::make_unique<ControlClient>(control_addresses_[i], 10s));
                } catch (const Error& e) {
                    raise(ErrorCode::unreachable, node_name(i) + " did not start: " + e.what());
                }
            }
            spdlog::info("launched {} node processes", n);
        }

        void wait_for_links() {
            const auto deadline = SteadyClock::now() + 30s;
            for (;;) {
                const auto reports = poll();
                bool wired = true;
                for (std::size_t i = 0; i < reports.size(); ++i) wired = wired && reports[i].peer_count == degrees_[i];
                if (wired) return;
                if (SteadyClock::now() > deadline) raise(ErrorCode::unreachable, "nodes did not link up within 30 s");
                std::this_thread::sleep_for(50ms);
            }
        }

        void mine() {
            phase_ = "mining";
            broadcast(wire::StartMining{});
            out_.mining_started = since_origin();
            const auto deadline = config_.stop.duration ? std::optional{SteadyClock::now() + *config_.stop.duration} : std::nullopt;
            for (;;) {
                const auto reports = poll();
                std::uint64_t height = 0;
                for (const auto& r : reports) height = std::max(height, r.head_number);
                if (config_.stop.height && height >= *config_.stop.height) break;
                if (deadline && SteadyClock::now() >= *deadline) break;
                if (cancelled()) return;
                std::this_thread::sleep_for(50ms);
            }
            out_.mining_stopped = since_origin();
        }

        void settle() {
            if (cancelled()) return;
            phase_ = "stopping";
            broadcast(wire::StopMining{});
            quiesce();
            out_.consensus_at_stop = agree(poll());
            phase_ = "settling";
            while (!agree(poll()) && !cancelled() && out_.settle_rounds < config_.settle_rounds) {
                ++out_.settle_rounds;
                const auto before = heads(poll());
                broadcast(wire::StartMining{});
                const auto deadline = SteadyClock::now() + 60s;
                while (heads(poll()) == before && SteadyClock::now() < deadline && !cancelled()) std::this_thread::sleep_for(10ms);
                broadcast(wire::StopMining{});
                quiesce();
            }
        }

        void quiesce() {
            auto last = heads(poll());
            auto quiet_since = SteadyClock::now();
            const auto cap = SteadyClock::now() + 120s;
            while (SteadyClock::now() - quiet_since < kQuiescence && SteadyClock::now() < cap && !cancelled()) {
                std::this_thread::sleep_for(100ms);
                auto now = heads(poll());
                if (now != last) {
                    last = std::move(now);
                    quiet_since = SteadyClock::now();
                }
            }
        }

        void finish() {
            out_.cancelled = cancelled();
            if (!last_reports_.empty()) {
                out_.final_status = last_reports_;
                out_.consensus = !out_.failure && !out_.cancelled && agree(last_reports_);
            }
            phase_ = "done";
            emit_snapshot(last_reports_);
            for (auto& c : clients_) {
                try {
                    c->send(wire::Shutdown{});
                } catch (const Error&) {
                }
            }
            reap(5s);
            out_.ended = since_origin();
            for (std::uint32_t i = 0; i < config_.n; ++i) {
                const auto path = work_dir_ / "logs" / (node_name(i) + ".jsonl");
                try {
                    out_.logs.push_back(node::read_log_file(path.string()));
                } catch (const Error& e) {
                    if (!out_.failure) out_.failure = "log of " + node_name(i) + " unreadable: " + e.what();
                    spdlog::warn("{}", e.what());
                }
            }
            // Links as configured; every node reported exactly its degree before mining.
            for (const auto& e : config_.topology.edges) {
                auto a = node_name(e.a);
                auto b = node_name(e.b);
                if (b < a) std::swap(a, b);
                out_.links.emplace_back(a, b);
            }
            std::sort(out_.links.begin(), out_.links.end());
        }

        void reap(std::chrono::milliseconds grace) {
            const auto deadline = SteadyClock::now() + grace;
            for (auto& c : children_) {
                while (c.alive() && SteadyClock::now() < deadline) std::this_thread::sleep_for(20ms);
                if (c.alive()) {
                    ::kill(c.pid, SIGKILL);
                    ::waitpid(c.pid, &c.status, 0);
                    c.exited = true;
                }
            }
        }

        std::vector<wire::StatusReport> poll() {
            for (std::size_t i = 0; i < children_.size(); ++i) {
                if (!children_[i].alive()) raise(ErrorCode::unreachable, node_name(i) + " exited unexpectedly");
            }
            std::vector<wire::StatusReport> reports;
            for (auto& c : clients_) reports.push_back(c->report());
            last_reports_ = reports;
            if (control_.on_snapshot && SteadyClock::now() - last_snapshot_ >= control_.snapshot_interval) emit_snapshot(reports);
            return reports;
        }

        void emit_snapshot(const std::vector<wire::StatusReport>& reports) {
            if (!control_.on_snapshot) return;
            last_snapshot_ = SteadyClock::now();
            control_.on_snapshot(Snapshot{phase_, std::chrono::duration_cast<std::chrono::milliseconds>(since_origin()), reports});
        }

        void broadcast(const wire::Message& m) {
            for (auto& c : clients_) c->send(m);
        }

        static std::vector<chain::Hash32> heads(const std::vector<wire::StatusReport>& reports) {
            std::vector<chain::Hash32> out;
            for (const auto& r : reports) out.push_back(r.head_hash);
            return out;
        }

        static bool agree(const std::vector<wire::StatusReport>& reports) {
            return std::all_of(reports.begin(), reports.end(), [&](const auto& r) { return r.head_hash == reports.front().head_hash; });
        }

        [[nodiscard]] bool cancelled() const { return control_.cancel && control_.cancel->load(); }
        [[nodiscard]] std::chrono::microseconds since_origin() const {
            return std::chrono::duration_cast<std::chrono::microseconds>(SteadyClock::now() - origin_);
        }

        const ExperimentConfig& config_;
        MultiprocessMode mode_;
        fs::path work_dir_;
        const RunControl& control_;
        RunOutcome out_;
        std::string phase_;
        SteadyClock::time_point origin_{};
        SteadyClock::time_point last_snapshot_{};
        std::vector<Child> children_;
        std::vector<wire::Address> control_addresses_;
        std::vector<std::size_t> degrees_;
        std::vector<std::unique_ptr<ControlClient>> clients_;
        std::vector<wire::StatusReport> last_reports_;
    };

}  // namespace

RunOutcome run_multiprocess(const ExperimentConfig& config, const fs::path& work_dir, const RunControl& control) {
    if (config.simulated()) raise(ErrorCode::invalid_input, "run_multiprocess needs a multiprocess-mode config");
    if (const auto errors = validate(config); !errors.empty()) raise(ErrorCode::invalid_input, errors.front());
    return MultiprocessRunner{config, work_dir, control}.run();
}

}  // namespace blockbox::orchestrator
