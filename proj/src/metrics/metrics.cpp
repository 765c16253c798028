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

#include <blockbox/metrics/metrics.hpp>

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <blockbox/chain/chain_store.hpp>
#include <blockbox/common/errors.hpp>

namespace blockbox::metrics {

namespace {

    const chain::Block* logged_block(const node::NodeEvent& event) {
        if (const auto* m = std::get_if<node::Mined>(&event.body)) return &m->block;
        if (const auto* r = std::get_if<node::Received>(&event.body)) return &r->block;
        return nullptr;
    }

    //! The node's head after it processed everything it logged, under the same fork choice.
    chain::Hash32 replay_head(const node::NodeLog& log) {
        chain::ChainStore store{log.header.genesis};
        for (const auto& event : log.events) {
            if (const auto* block = logged_block(event)) {
                try {
                    store.insert_block(*block);
                } catch (const Error&) {
                    // A block the node itself could not attach never moved its head either.
                }
            }
        }
        return store.head();
    }

    double as_double(const Rational& r) {
        return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
    }

}  // namespace

BlockDag build_dag(const std::vector<node::NodeLog>& logs) {
    if (logs.empty()) raise(ErrorCode::invalid_input, "no event logs");
    BlockDag dag;
    dag.genesis = logs.front().header.genesis;
    for (const auto& log : logs) {
        if (log.header.genesis != dag.genesis) {
            raise(ErrorCode::invalid_input, "log of " + log.header.node_id + " starts from a different genesis");
        }
    }

    std::unordered_map<chain::Hash32, chain::Block> all;
    for (const auto& log : logs) {
        for (const auto& event : log.events) {
            const auto* block = logged_block(event);
            if (block == nullptr) continue;
            if (block->hash == dag.genesis.hash) continue;
            auto [it, fresh] = all.emplace(block->hash, *block);
            if (!fresh && it->second != *block) {
                raise(ErrorCode::log_corruption, "block " + block->hash.hex() + " appears with different contents");
            }
            if (std::holds_alternative<node::Mined>(event.body)) {
                const auto [at, first] = dag.miner_of.emplace(block->hash, log.header.node_id);
                if (!first) {
                    raise(ErrorCode::log_corruption, "block " + block->hash.hex() + " mined twice (" + at->second +
                                                         ", " + log.header.node_id + ")");
                }
            }
        }
    }

    // Connectivity: a block belongs to B iff following parents reaches genesis with heights
    // decreasing by one at each step.
    std::unordered_map<chain::Hash32, bool> connected;
    connected[dag.genesis.hash] = true;
    for (const auto& entry : all) {
        std::vector<chain::Hash32> path;
        auto cursor = entry.first;
        bool ok = false;
        for (;;) {
            if (const auto known = connected.find(cursor); known != connected.end()) {
                ok = known->second;
                break;
            }
            const auto it = all.find(cursor);
            if (it == all.end()) break;
            path.push_back(cursor);
            const auto& block = it->second;
            std::uint64_t parent_number = 0;
            if (block.parent_hash != dag.genesis.hash) {
                const auto parent = all.find(block.parent_hash);
                if (parent == all.end()) break;
                parent_number = parent->second.number;
            }
            if (block.number != parent_number + 1) break;
            cursor = block.parent_hash;
        }
        for (const auto& h : path) connected[h] = ok;
    }
    for (auto& [hash, block] : all) {
        if (connected[hash]) {
            dag.blocks.emplace(hash, std::move(block));
        } else {
            dag.detached.insert(hash);
        }
    }
    for (const auto& h : dag.detached) dag.miner_of.erase(h);

    // Canonical head: the heaviest final head; lowest hash on a tie. With static difficulty the
    // total difficulty is proportional to height, but it is summed explicitly all the same.
    std::unordered_map<chain::Hash32, std::uint64_t> td_cache;
    auto total_difficulty = [&](const chain::Hash32& head) {
        std::vector<chain::Hash32> path;
        auto cursor = head;
        std::uint64_t base = 0;
        while (true) {
            if (cursor == dag.genesis.hash) {
                base = dag.genesis.difficulty;
                break;
            }
            if (const auto it = td_cache.find(cursor); it != td_cache.end()) {
                base = it->second;
                break;
            }
            path.push_back(cursor);
            cursor = dag.blocks.at(cursor).parent_hash;
        }
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            base += dag.blocks.at(*it).difficulty;
            td_cache[*it] = base;
        }
        return base;
    };

    dag.canonical_head = dag.genesis.hash;
    std::uint64_t best_td = dag.genesis.difficulty;
    for (const auto& log : logs) {
        const auto head = replay_head(log);
        dag.final_heads[log.header.node_id] = head;
        if (head != dag.genesis.hash && !dag.blocks.contains(head)) continue;
        const auto td = total_difficulty(head);
        if (td > best_td || (td == best_td && head < dag.canonical_head)) {
            best_td = td;
            dag.canonical_head = head;
        }
    }

    for (auto cursor = dag.canonical_head; cursor != dag.genesis.hash; cursor = dag.blocks.at(cursor).parent_hash) {
        dag.mainchain.push_back(cursor);
    }
    std::reverse(dag.mainchain.begin(), dag.mainchain.end());
    dag.on_mainchain.insert(dag.mainchain.begin(), dag.mainchain.end());
    for (const auto& [hash, block] : dag.blocks) {
        if (!dag.on_mainchain.contains(hash)) dag.off_chain.insert(hash);
    }
    return dag;
}

Rational mainchain_rate(const BlockDag& dag) {
    if (dag.blocks.empty()) raise(ErrorCode::invalid_input, "no produced blocks");
    return Rational{static_cast<std::int64_t>(dag.mainchain.size()), static_cast<std::int64_t>(dag.blocks.size())};
}

Rational branching_ratio(const BlockDag& dag) {
    if (dag.mainchain.empty()) raise(ErrorCode::invalid_input, "empty mainchain");
    std::unordered_map<chain::Hash32, std::int64_t> off_chain_children;
    for (const auto& hash : dag.off_chain) ++off_chain_children[dag.blocks.at(hash).parent_hash];
    std::int64_t sum = 0;
    for (const auto& hash : dag.mainchain) {
        if (const auto it = off_chain_children.find(dag.blocks.at(hash).parent_hash); it != off_chain_children.end()) {
            sum += it->second;
        }
    }
    return Rational{sum, static_cast<std::int64_t>(dag.mainchain.size())};
}

std::map<std::string, Rational> contribution_ratio(const BlockDag& dag, const std::vector<std::string>& nodes) {
    if (dag.mainchain.empty()) raise(ErrorCode::invalid_input, "empty mainchain");
    std::map<std::string, std::int64_t> mined;
    for (const auto& n : nodes) mined[n] = 0;
    for (const auto& [node, head] : dag.final_heads) mined.try_emplace(node, 0);
    for (const auto& hash : dag.mainchain) {
        if (const auto it = dag.miner_of.find(hash); it != dag.miner_of.end()) ++mined[it->second];
    }
    std::map<std::string, Rational> out;
    const auto m = static_cast<std::int64_t>(dag.mainchain.size());
    for (const auto& [node, count] : mined) out.emplace(node, Rational{count, m});
    return out;
}

std::map<std::string, std::optional<std::uint64_t>> initial_consensus(const std::vector<node::NodeLog>& logs,
                                                                      const BlockDag& dag) {
    std::map<std::string, std::optional<std::uint64_t>> out;
    for (const auto& log : logs) {
        auto& slot = out[log.header.node_id];
        for (const auto& event : log.events) {
            const auto* mined = std::get_if<node::Mined>(&event.body);
            if (mined != nullptr && dag.on_mainchain.contains(mined->block.hash)) {
                slot = mined->block.number;
                break;
            }
        }
    }
    return out;
}

MetricsReport compute_metrics(const std::vector<node::NodeLog>& logs, const std::vector<std::string>& nodes) {
    const auto dag = build_dag(logs);
    MetricsReport report;
    report.mainchain_rate = mainchain_rate(dag);
    report.branching_ratio = branching_ratio(dag);
    report.contribution = contribution_ratio(dag, nodes);
    report.initial_consensus = initial_consensus(logs, dag);
    for (const auto& n : nodes) report.initial_consensus.try_emplace(n, std::nullopt);
    report.counts = Counts{dag.blocks.size(), dag.mainchain.size(), dag.off_chain.size(), dag.detached.size()};
    report.canonical_head = dag.canonical_head;
    report.canonical_height = dag.mainchain.size();
    const auto unattributed = std::count_if(dag.mainchain.begin(), dag.mainchain.end(),
                                            [&](const auto& h) { return !dag.miner_of.contains(h); });
    if (unattributed > 0) {
        report.warnings.push_back("incomplete logs: " + std::to_string(unattributed) +
                                  " mainchain block(s) without a Mined event; contributions sum below 1");
    }
    return report;
}

nlohmann::json rational_to_json(const Rational& r) {
    return {{"num", r.numerator()}, {"den", r.denominator()}, {"value", as_double(r)}};
}

Rational rational_from_json(const nlohmann::json& j) {
    try {
        return Rational{j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>()};
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed rational: "} + e.what());
    } catch (const boost::bad_rational& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed rational: "} + e.what());
    }
}

nlohmann::json to_json(const MetricsReport& report) {
    nlohmann::json contribution = nlohmann::json::object();
    for (const auto& [node, c] : report.contribution) contribution[node] = rational_to_json(c);
    nlohmann::json initial = nlohmann::json::object();
    for (const auto& [node, i] : report.initial_consensus) initial[node] = i ? nlohmann::json(*i) : nlohmann::json(nullptr);
    return {
        {"mainchain_rate", rational_to_json(report.mainchain_rate)},
        {"branching_ratio", rational_to_json(report.branching_ratio)},
        {"contribution", contribution},
        {"initial_consensus", initial},
        {"counts",
         {{"blocks", report.counts.blocks},
          {"mainchain", report.counts.mainchain},
          {"off_chain", report.counts.off_chain},
          {"detached", report.counts.detached}}},
        {"canonical_head", report.canonical_head.hex()},
        {"canonical_height", report.canonical_height},
        {"warnings", report.warnings},
    };
}

MetricsReport report_from_json(const nlohmann::json& j) {
    try {
        MetricsReport r;
        r.mainchain_rate = rational_from_json(j.at("mainchain_rate"));
        r.branching_ratio = rational_from_json(j.at("branching_ratio"));
        for (const auto& [node, c] : j.at("contribution").items()) r.contribution[node] = rational_from_json(c);
        for (const auto& [node, i] : j.at("initial_consensus").items()) {
            r.initial_consensus[node] = i.is_null() ? std::nullopt : std::optional<std::uint64_t>{i.get<std::uint64_t>()};
        }
        const auto& counts = j.at("counts");
        r.counts = Counts{counts.at("blocks").get<std::size_t>(), counts.at("mainchain").get<std::size_t>(),
                          counts.at("off_chain").get<std::size_t>(), counts.at("detached").get<std::size_t>()};
        r.canonical_head = chain::Hash32::from_hex(j.at("canonical_head").get<std::string>());
        r.canonical_height = j.at("canonical_height").get<std::uint64_t>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed metrics report: "} + e.what());
    }
}

std::string format_table(const MetricsReport& report) {
    std::ostringstream out;
    auto frac = [](const Rational& r) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << as_double(r) << "  (" << r.numerator() << "/" << r.denominator() << ")";
        return s.str();
    };
    out << "mainchain rate  mu  " << frac(report.mainchain_rate) << '\n';
    out << "branching ratio F   " << frac(report.branching_ratio) << '\n';
    out << "blocks B=" << report.counts.blocks << "  M=" << report.counts.mainchain << "  off-chain=" << report.counts.off_chain
        << "  detached=" << report.counts.detached << '\n';
    out << "canonical head " << report.canonical_head.short_hex() << " at height " << report.canonical_height << "\n\n";
    std::size_t width = 4;
    for (const auto& [node, c] : report.contribution) width = std::max(width, node.size());
    out << std::left << std::setw(static_cast<int>(width)) << "node" << "  " << std::setw(24) << "contribution C"
        << "initial consensus I\n";
    std::set<std::string> names;
    for (const auto& [node, c] : report.contribution) names.insert(node);
    for (const auto& [node, i] : report.initial_consensus) names.insert(node);
    for (const auto& node : names) {
        const auto c = report.contribution.contains(node) ? report.contribution.at(node) : Rational{0};
        const auto it = report.initial_consensus.find(node);
        const auto i = it != report.initial_consensus.end() && it->second ? std::to_string(*it->second) : "not-achieved";
        out << std::left << std::setw(static_cast<int>(width)) << node << "  " << std::setw(24) << frac(c) << i << '\n';
    }
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';
    return out.str();
}

}  // namespace blockbox::metrics
