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
#include <string>
#include <vector>

#include <json.hpp>

#include <blockbox/wire/message.hpp>

namespace blockbox::orchestrator {

//! Live view of a run: one StatusReport per node, as pushed to the control panel.
struct Snapshot {
    std::string phase;  // starting | mining | stopping | settling | done
    std::chrono::milliseconds time{0};
    std::vector<wire::StatusReport> nodes;

    //! Every node reports the same head hash.
    [[nodiscard]] bool in_consensus() const;
    [[nodiscard]] std::uint64_t max_height() const;
};

//! {"phase", "time_ms", "in_consensus", "max_height", "nodes": [{"node", "height", "head",
//! "total_difficulty", "last_blocks": [{"height", "hash", "short", "color"}], "peers",
//! "syncing", "mining", "attempts", "events"}]}. Colors are "#rrggbb" from the first three
//! hash bytes.
[[nodiscard]] nlohmann::json to_json(const Snapshot& snapshot);

}  // namespace blockbox::orchestrator
