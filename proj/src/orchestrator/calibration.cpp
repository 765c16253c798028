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

#include <blockbox/orchestrator/calibration.hpp>

#include <cmath>

#include <spdlog/spdlog.h>

#include <blockbox/chain/miner.hpp>
#include <blockbox/common/errors.hpp>
#include <blockbox/node/sim_node.hpp>

namespace blockbox::orchestrator {

namespace {

    void require_measurable(std::chrono::milliseconds duration) {
        if (duration < std::chrono::seconds{1}) {
            raise(ErrorCode::invalid_parameter, "hashrate measurement needs at least 1 s, got " +
                                                    std::to_string(duration.count()) + " ms");
        }
    }

}  // namespace

Calibration calibrate_difficulty(std::uint32_t n, double hashrate, double target_interval_ms) {
    if (n == 0 || !(hashrate > 0) || !(target_interval_ms > 0) || !std::isfinite(hashrate) ||
        !std::isfinite(target_interval_ms)) {
        raise(ErrorCode::invalid_parameter, "calibration inputs must be positive");
    }
    const double raw = std::round(static_cast<double>(n) * hashrate * target_interval_ms / 1000.0);
    Calibration out;
    if (raw < 1.0) {
        out.warning = "calibrated difficulty " + std::to_string(raw) + " is below 1; clamped to 1";
        spdlog::warn("{}", *out.warning);
        out.difficulty = 1;
    } else if (raw >= 1.8e19) {
        raise(ErrorCode::invalid_parameter, "calibrated difficulty does not fit in 64 bits");
    } else {
        out.difficulty = static_cast<std::uint64_t>(raw);
    }
    return out;
}

double measure_hashrate_simulated(double hashrate_limit, std::chrono::milliseconds duration) {
    require_measurable(duration);
    wire::Scheduler scheduler;
    wire::SimNetwork network{scheduler, wire::LatencyModel{}};
    node::SimNode probe{scheduler, network, "probe", chain::GenesisConfig{1, kMeasureDifficulty, {}}, 1, hashrate_limit};
    probe.node().handshakes_done();
    probe.command(wire::StartMining{});
    const auto end = std::chrono::duration_cast<wire::Micros>(duration);
    scheduler.run_until(end);
    const double seconds = static_cast<double>(duration.count()) / 1000.0;
    return static_cast<double>(probe.attempts_through(end)) / seconds;
}

double measure_hashrate_local(std::chrono::milliseconds duration) {
    require_measurable(duration);
    const auto genesis = chain::make_genesis({1, kMeasureDifficulty, {}});
    const chain::ChainStore store{genesis};
    chain::Miner miner{"probe", kMeasureDifficulty, 1};
    const auto start = std::chrono::steady_clock::now();
    const auto deadline = start + duration;
    auto now = start;
    while (now < deadline) {
        (void)miner.attempt(store, 4096, 0);
        now = std::chrono::steady_clock::now();
    }
    const double seconds = std::chrono::duration<double>(now - start).count();
    return static_cast<double>(miner.total_attempts()) / seconds;
}

}  // namespace blockbox::orchestrator
