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

#include <blockbox/orchestrator/simulation.hpp>

#include <algorithm>
#include <array>
#include <memory>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include <blockbox/common/errors.hpp>
#include <blockbox/metrics/metrics.hpp>
#include <blockbox/node/sim_node.hpp>

namespace blockbox::orchestrator {

std::uint64_t node_seed(std::uint64_t run_seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                      static_cast<std::uint32_t>(index), 0x6e6f6465u};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (std::uint64_t{out[0]} << 32) | out[1];
}

namespace {

using Clock = std::chrono::steady_clock;

class Runner {
  public:
    Runner(const ExperimentConfig& config, const RunControl& control)
        : config_{config},
          control_{control},
          mode_{std::get<SimulatedMode>(config.mode)},
          network_{scheduler_, mode_.latency} {
        for (std::size_t i = 0; i < config.n; ++i) {
            nodes_.push_back(std::make_unique<node::SimNode>(scheduler_, network_, node_name(i), config.genesis,
                                                             node_seed(mode_.seed, i), config.hashrate));
            nodes_.back()->node().subscribe([this](const node::NodeEvent& e) { observe(e); });
        }
    }

    RunOutcome run() {
        RunOutcome out;
        for (const auto& e : config_.topology.edges) {
            handles_.push_back(network_.connect(node_name(e.a), node_name(e.b)));
        }
        out.links = network_.links();
        if (out.links.size() != config_.topology.edges.size()) raise(ErrorCode::invalid_input, "topology has duplicate links");

        phase_ = "starting";
        snapshot();
        drain();
        for (auto& n : nodes_) n->node().handshakes_done();
        drain();

        phase_ = "mining";
        out.mining_started = scheduler_.now();
        wall_origin_ = Clock::now();
        sim_origin_ = scheduler_.now();
        broadcast(wire::StartMining{});
        snapshot();
        const auto deadline = config_.stop.duration
                                  ? std::optional{scheduler_.now() + std::chrono::duration_cast<wire::Micros>(*config_.stop.duration)}
                                  : std::nullopt;
        while (!stop_ && !cancelled()) {
            const auto next = scheduler_.next_time();
            if (!next) break;
            if (deadline && *next > *deadline) {
                pace(*deadline);
                scheduler_.run_until(*deadline);
                break;
            }
            step(*next);
        }
        out.mining_stopped = scheduler_.now();

        phase_ = "stopping";
        broadcast(wire::StopMining{});
        snapshot();
        drain();
        out.consensus_at_stop = heads_agree();

        phase_ = "settling";
        while (!heads_agree() && !cancelled() && out.settle_rounds < config_.settle_rounds) {
            ++out.settle_rounds;
            mined_ = false;
            broadcast(wire::StartMining{});
            while (!mined_ && !cancelled()) {
                const auto next = scheduler_.next_time();
                if (!next) break;
                step(*next);
            }
            broadcast(wire::StopMining{});
            drain();
        }
        if (out.settle_rounds > 0) spdlog::info("heads settled after {} extra round(s)", out.settle_rounds);

        phase_ = "done";
        snapshot();
        out.cancelled = cancelled();
        out.consensus = heads_agree();
        out.ended = scheduler_.now();
        for (const auto& n : nodes_) {
            out.logs.push_back(n->node().log());
            out.final_status.push_back(n->node().report());
        }
        return out;
    }

  private:
    void observe(const node::NodeEvent& e) {
        if (std::holds_alternative<node::Mined>(e.body)) mined_ = true;
        if (const auto* h = std::get_if<node::HeadChanged>(&e.body);
            h && config_.stop.height && phase_ == "mining" && h->new_height >= *config_.stop.height) {
            stop_ = true;
        }
    }

    void broadcast(const wire::Message& m) {
        for (auto& n : nodes_) (void)n->command(m);
    }

    [[nodiscard]] bool cancelled() const { return control_.cancel && control_.cancel->load(); }

    [[nodiscard]] bool heads_agree() const {
        return std::all_of(nodes_.begin(), nodes_.end(), [&](const auto& n) {
            return n->node().store().head() == nodes_.front()->node().store().head();
        });
    }

    void drain() {
        while (!cancelled()) {
            const auto next = scheduler_.next_time();
            if (!next) return;
            step(*next);
        }
    }

    void step(wire::Micros next) {
        pace(next);
        scheduler_.run_one();
        if ((++steps_ & 0xff) == 0) maybe_snapshot();
    }

    //! Holds simulated time to mode.speed times wall time, emitting snapshots while waiting.
    void pace(wire::Micros sim_time) {
        if (mode_.speed <= 0 || phase_ != "mining") return;
        const auto sim_elapsed = std::chrono::duration<double>(sim_time - sim_origin_);
        const auto due = wall_origin_ + std::chrono::duration_cast<Clock::duration>(sim_elapsed / mode_.speed);
        while (!cancelled()) {
            const auto now = Clock::now();
            if (now >= due) break;
            std::this_thread::sleep_for(std::min<Clock::duration>(due - now, std::chrono::milliseconds{50}));
            maybe_snapshot();
        }
    }

    void maybe_snapshot() {
        if (control_.on_snapshot && Clock::now() - last_snapshot_ >= control_.snapshot_interval) snapshot();
    }

    void snapshot() {
        if (!control_.on_snapshot) return;
        last_snapshot_ = Clock::now();
        Snapshot s;
        s.phase = phase_;
        s.time = std::chrono::duration_cast<std::chrono::milliseconds>(scheduler_.now());
        for (const auto& n : nodes_) s.nodes.push_back(n->node().report());
        control_.on_snapshot(s);
    }

    const ExperimentConfig& config_;
    const RunControl& control_;
    SimulatedMode mode_;
    wire::Scheduler scheduler_;
    wire::SimNetwork network_;
    std::vector<std::unique_ptr<node::SimNode>> nodes_;
    std::vector<std::unique_ptr<wire::PeerHandle>> handles_;
    std::string phase_;
    bool stop_{false};
    bool mined_{false};
    std::uint64_t steps_{0};
    Clock::time_point last_snapshot_{};
    Clock::time_point wall_origin_{};
    wire::Micros sim_origin_{0};
};

}  // namespace

RunOutcome run_simulation(const ExperimentConfig& config, const RunControl& control) {
    if (!config.simulated()) raise(ErrorCode::invalid_input, "run_simulation needs a simulated-mode config");
    if (const auto errors = validate(config); !errors.empty()) raise(ErrorCode::invalid_input, errors.front());
    return Runner{config, control}.run();
}

std::optional<double> mean_mainchain_interval_ms(const std::vector<node::NodeLog>& logs,
                                                 std::chrono::microseconds mining_started) {
    const auto dag = metrics::build_dag(logs);
    if (dag.mainchain.empty()) return std::nullopt;
    const auto& tip = dag.mainchain.back();
    for (const auto& log : logs) {
        for (const auto& e : log.events) {
            const auto* m = std::get_if<node::Mined>(&e.body);
            if (m && m->block.hash == tip) {
                return static_cast<double>((e.time - mining_started).count()) / 1000.0 /
                       static_cast<double>(dag.mainchain.size());
            }
        }
    }
    return std::nullopt;
}

}  // namespace blockbox::orchestrator
