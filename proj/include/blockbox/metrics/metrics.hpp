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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include <blockbox/chain/block.hpp>
#include <blockbox/node/events.hpp>

namespace blockbox::metrics {

using Rational = boost::rational<std::int64_t>;

/**
 * The global block DAG reconstructed from every node's log.
 *
 * Genesis is held apart: it is not produced by any miner, so it counts in neither B nor M.
 * Blocks whose ancestry never reaches genesis are detached: counted, but not part of B.
 */
struct BlockDag {
    chain::Block genesis;
    //! B: connected, non-genesis blocks.
    std::map<chain::Hash32, chain::Block> blocks;
    //! M in ascending height, genesis excluded.
    std::vector<chain::Hash32> mainchain;
    std::set<chain::Hash32> on_mainchain;
    //! Θ = B \ M.
    std::set<chain::Hash32> off_chain;
    //! Node that logged the Mined event for each block.
    std::map<chain::Hash32, std::string> miner_of;
    std::set<chain::Hash32> detached;
    //! Final head of every node (from replaying its log), keyed by node id.
    std::map<std::string, chain::Hash32> final_heads;
    chain::Hash32 canonical_head{};
};

//! Throws log_corruption for one hash with two different contents or two Mined events for one
//! hash, invalid_input for no logs or logs that disagree on genesis.
[[nodiscard]] BlockDag build_dag(const std::vector<node::NodeLog>& logs);

//! μ = |M| / |B|. Throws invalid_input when B is empty.
[[nodiscard]] Rational mainchain_rate(const BlockDag& dag);
//! F = (1/|M|) Σ_{b∈M} Σ_{c∈Θ} [p(b) = p(c)]. Throws invalid_input when M is empty.
[[nodiscard]] Rational branching_ratio(const BlockDag& dag);
//! C(node) = |mainchain blocks mined by node| / |M| for every node in `nodes` and every
//! attributed miner. Throws invalid_input when M is empty.
[[nodiscard]] std::map<std::string, Rational> contribution_ratio(const BlockDag& dag,
                                                                 const std::vector<std::string>& nodes = {});
//! Height of the first block (in the node's log order) that the node mined and that is on the
//! mainchain; nothing when the node never got one there.
[[nodiscard]] std::map<std::string, std::optional<std::uint64_t>> initial_consensus(
    const std::vector<node::NodeLog>& logs, const BlockDag& dag);

struct Counts {
    std::size_t blocks{0};
    std::size_t mainchain{0};
    std::size_t off_chain{0};
    std::size_t detached{0};
    friend bool operator==(const Counts&, const Counts&) = default;
};

struct MetricsReport {
    Rational mainchain_rate;
    Rational branching_ratio;
    std::map<std::string, Rational> contribution;
    std::map<std::string, std::optional<std::uint64_t>> initial_consensus;
    Counts counts;
    chain::Hash32 canonical_head{};
    std::uint64_t canonical_height{0};
    //! Mainchain blocks with no Mined attribution (incomplete logs), and the like.
    std::vector<std::string> warnings;
    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

//! Every metric over the logs. `nodes` lists configured node ids that may be absent from M.
[[nodiscard]] MetricsReport compute_metrics(const std::vector<node::NodeLog>& logs,
                                            const std::vector<std::string>& nodes = {});

[[nodiscard]] nlohmann::json to_json(const MetricsReport& report);
[[nodiscard]] MetricsReport report_from_json(const nlohmann::json& j);
//! Human-readable table.
[[nodiscard]] std::string format_table(const MetricsReport& report);

[[nodiscard]] nlohmann::json rational_to_json(const Rational& r);
[[nodiscard]] Rational rational_from_json(const nlohmann::json& j);

}  // namespace blockbox::metrics
