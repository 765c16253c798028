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

#include <blockbox/wire/latency.hpp>

#include <cmath>
#include <random>

#include <blockbox/common/errors.hpp>

namespace blockbox::wire {

std::chrono::microseconds LatencyModel::delay(std::uint64_t source, std::uint64_t destination,
                                              std::uint64_t message_index) const {
    if (base_ms < 0 || jitter_ms < 0) raise(ErrorCode::invalid_parameter, "latency must be non-negative");
    const auto base_us = std::llround(base_ms * 1000.0);
    const auto jitter_us = std::llround(jitter_ms * 1000.0);
    if (jitter_us == 0) return std::chrono::microseconds{base_us};

    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(source), hi(source), lo(destination), hi(destination),
                      lo(message_index), hi(message_index)};
    std::mt19937_64 rng{seq};
    std::uniform_int_distribution<long long> jitter{0, jitter_us};
    return std::chrono::microseconds{base_us + jitter(rng)};
}

}  // namespace blockbox::wire
