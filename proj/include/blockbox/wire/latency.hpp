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

namespace blockbox::wire {

//! Per-message link delay: base + uniform[0, jitter], drawn as a pure function of
//! (seed, source, destination, message index) at microsecond resolution.
struct LatencyModel {
    double base_ms{0.0};
    double jitter_ms{0.0};
    std::uint64_t seed{0};

    [[nodiscard]] std::chrono::microseconds delay(std::uint64_t source, std::uint64_t destination,
                                                  std::uint64_t message_index) const;

    friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

}  // namespace blockbox::wire
