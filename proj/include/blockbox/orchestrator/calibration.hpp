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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

namespace blockbox::orchestrator {

struct Calibration {
    std::uint64_t difficulty{1};
    //! Set when the raw value rounded below 1 and was clamped.
    std::optional<std::string> warning;
};

/**
 * D = round(n * hashrate * target_interval_ms / 1000). With n nodes each making hashrate
 * attempts per second at success probability 1/D, the network finds a block every
 * D / (n * hashrate) seconds on average. Throws invalid_parameter for non-positive inputs.
 */
[[nodiscard]] Calibration calibrate_difficulty(std::uint32_t n, double hashrate, double target_interval_ms);

//! Difficulty used while measuring: success is so unlikely that every attempt counts.
inline constexpr std::uint64_t kMeasureDifficulty = std::uint64_t{1} << 32;

/**
 * Attempts per second of a simulated node throttled to hashrate_limit, measured by running it
 * for `duration` of simulated time at difficulty 2^32. Throws invalid_parameter for a
 * duration under one second.
 */
[[nodiscard]] double measure_hashrate_simulated(double hashrate_limit, std::chrono::milliseconds duration);

//! Attempts per second of this machine on one thread, hashing flat out for `duration` of wall
//! time at difficulty 2^32. Throws invalid_parameter for a duration under one second.
[[nodiscard]] double measure_hashrate_local(std::chrono::milliseconds duration);

}  // namespace blockbox::orchestrator
