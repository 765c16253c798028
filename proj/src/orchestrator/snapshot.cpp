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

#include <blockbox/orchestrator/snapshot.hpp>

#include <algorithm>

namespace blockbox::orchestrator {

bool Snapshot::in_consensus() const {
    return std::all_of(nodes.begin(), nodes.end(),
                       [&](const wire::StatusReport& r) { return r.head_hash == nodes.front().head_hash; });
}

std::uint64_t Snapshot::max_height() const {
    std::uint64_t h = 0;
    for (const auto& r : nodes) h = std::max(h, r.head_number);
    return h;
}

nlohmann::json to_json(const Snapshot& snapshot) {
    auto nodes = nlohmann::json::array();
    for (const auto& r : snapshot.nodes) {
        auto last = nlohmann::json::array();
        for (const auto& b : r.last_blocks) {
            last.push_back({{"height", b.number},
                            {"hash", b.hash.hex()},
                            {"short", b.hash.short_hex()},
                            {"color", chain::hash_color(b.hash)}});
        }
        nodes.push_back({{"node", r.node_id},
                         {"height", r.head_number},
                         {"head", r.head_hash.hex()},
                         {"total_difficulty", r.total_difficulty},
                         {"last_blocks", std::move(last)},
                         {"peers", r.peer_count},
                         {"syncing", r.syncing},
                         {"mining", r.mining},
                         {"attempts", r.attempts},
                         {"events", r.events}});
    }
    return {{"phase", snapshot.phase},
            {"time_ms", snapshot.time.count()},
            {"in_consensus", snapshot.in_consensus()},
            {"max_height", snapshot.max_height()},
            {"nodes", std::move(nodes)}};
}

}  // namespace blockbox::orchestrator
