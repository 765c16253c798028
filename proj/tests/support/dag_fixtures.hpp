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
#include <random>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include <blockbox/node/events.hpp>

#include "support/chain_fixtures.hpp"

namespace blockbox::testing {

using Rational = boost::rational<std::int64_t>;

/**
 * Builds per-node logs from labelled blocks. Blocks are D-difficulty children sealed without
 * mining (fixtures never re-validate PoW above D=1, so difficulty is kept at 1 unless a test
 * wants total-difficulty arithmetic, in which case it uses mined children).
 */
class DagBuilder {
  public:
    explicit DagBuilder(std::uint64_t difficulty = 1) : genesis_{chain::make_genesis({1, difficulty, {}})} {
        blocks_["g"] = genesis_;
    }

    const chain::Block& block(const std::string& label, const std::string& parent, const std::string& miner) {
        const auto& p = blocks_.at(parent);
        blocks_[label] = p.difficulty == 1 ? child_of(p, miner, nonce_++) : mined_child_of(p, miner, nonce_++);
        return blocks_[label];
    }

    //! A block whose parent is never logged anywhere.
    const chain::Block& floating(const std::string& label, std::uint64_t number, const std::string& miner) {
        chain::Block b;
        b.number = number;
        b.parent_hash = chain::sha256(Bytes{0xde, 0xad, static_cast<std::uint8_t>(nonce_)});
        b.miner_id = miner;
        b.difficulty = genesis_.difficulty;
        b.nonce = nonce_++;
        chain::seal(b);
        blocks_[label] = b;
        return blocks_[label];
    }

    DagBuilder& mined(const std::string& node, const std::string& label) {
        append(node, node::Mined{blocks_.at(label)});
        return *this;
    }

    DagBuilder& received(const std::string& node, const std::string& label, const std::string& from = "peer") {
        append(node, node::Received{blocks_.at(label), from});
        return *this;
    }

    //! Declares a node that logged nothing (still has a log).
    DagBuilder& node(const std::string& id) {
        logs_.try_emplace(id, fresh(id));
        return *this;
    }

    [[nodiscard]] const chain::Block& operator[](const std::string& label) const { return blocks_.at(label); }
    [[nodiscard]] const chain::Block& genesis() const { return genesis_; }

    [[nodiscard]] std::vector<node::NodeLog> logs() const {
        std::vector<node::NodeLog> out;
        for (const auto& [id, log] : logs_) out.push_back(log);
        return out;
    }

  private:
    node::NodeLog fresh(const std::string& id) const { return node::NodeLog{{node::kLogVersion, id, genesis_}, {}}; }

    void append(const std::string& id, node::EventBody body) {
        auto [it, created] = logs_.try_emplace(id, fresh(id));
        it->second.events.push_back(node::NodeEvent{wire::Micros{clock_++}, id, std::move(body)});
    }

    chain::Block genesis_;
    std::map<std::string, chain::Block> blocks_;
    std::map<std::string, node::NodeLog> logs_;
    std::uint64_t nonce_{1};
    std::int64_t clock_{0};
};

struct DagFixture {
    std::string name;
    std::vector<node::NodeLog> logs;
    std::vector<std::string> nodes;  // configured node ids (may include silent ones)
    // Hand-computed expectations; absent ones are checked against the oracle only.
    std::optional<std::size_t> blocks;
    std::optional<std::size_t> detached;
    std::optional<Rational> mu;
    std::optional<Rational> f;
    std::map<std::string, Rational> c;
    std::map<std::string, std::optional<std::uint64_t>> i;
};

//! Twelve hand-built DAGs covering no-fork, two- and three-way forks, orphan-heavy trees,
//! detached blocks, head ties, incomplete attribution and a late joiner.
inline std::vector<DagFixture> hand_built_dags() {
    std::vector<DagFixture> out;

    {  // 1. single node, linear five blocks
        DagBuilder d;
        for (int k = 1; k <= 5; ++k) d.block("a" + std::to_string(k), k == 1 ? "g" : "a" + std::to_string(k - 1), "n0");
        for (int k = 1; k <= 5; ++k) d.mined("n0", "a" + std::to_string(k));
        out.push_back({"linear-5", d.logs(), {"n0", "n1"}, 5, 0, Rational{1}, Rational{0},
                       {{"n0", Rational{1}}, {"n1", Rational{0}}}, {{"n0", 1}, {"n1", std::nullopt}}});
    }
    {  // 2. two logs holding the same three blocks
        DagBuilder d;
        d.block("a1", "g", "n0");
        d.block("a2", "a1", "n0");
        d.block("a3", "a2", "n1");
        d.mined("n0", "a1").mined("n0", "a2").received("n0", "a3", "n1");
        d.received("n1", "a1", "n0").received("n1", "a2", "n0").mined("n1", "a3");
        out.push_back({"dedupe-3", d.logs(), {"n0", "n1"}, 3, 0, Rational{1}, Rational{0},
                       {{"n0", Rational{2, 3}}, {"n1", Rational{1, 3}}}, {{"n0", 1}, {"n1", 3}}});
    }
    {  // 3. two-way fork, D=1000: branch a (5 blocks, TD 6000) beats branch b (2 blocks off a1)
        DagBuilder d{1000};
        d.block("a1", "g", "n0");
        d.block("a2", "a1", "n0");
        d.block("b2", "a1", "n1");
        d.block("b3", "b2", "n1");
        d.block("a3", "a2", "n1");
        d.block("a4", "a3", "n0");
        d.block("a5", "a4", "n1");
        d.mined("n0", "a1").mined("n0", "a2").received("n0", "b2").received("n0", "b3");
        d.received("n0", "a3").mined("n0", "a4").received("n0", "a5");
        d.received("n1", "a1").mined("n1", "b2").mined("n1", "b3").received("n1", "a2");
        d.mined("n1", "a3").received("n1", "a4").mined("n1", "a5");
        out.push_back({"two-way-fork-td", d.logs(), {"n0", "n1"}, 7, 0, Rational{5, 7}, Rational{1, 5},
                       {{"n0", Rational{3, 5}}, {"n1", Rational{2, 5}}}, {{"n0", 1}, {"n1", 3}}});
    }
    {  // 4. M of four blocks, one orphan sharing its parent with mainchain block 2
        DagBuilder d;
        d.block("m1", "g", "n0");
        d.block("m2", "m1", "n0");
        d.block("x2", "m1", "n1");
        d.block("m3", "m2", "n0");
        d.block("m4", "m3", "n0");
        d.mined("n0", "m1").mined("n0", "m2").mined("n0", "m3").mined("n0", "m4");
        d.received("n1", "m1").mined("n1", "x2").received("n1", "m2").received("n1", "m3").received("n1", "m4");
        out.push_back({"one-orphan", d.logs(), {"n0", "n1"}, 5, 0, Rational{4, 5}, Rational{1, 4},
                       {{"n0", Rational{1}}, {"n1", Rational{0}}}, {{"n0", 1}, {"n1", std::nullopt}}});
    }
    {  // 5. three-way fork at one height: 1 mainchain + 2 orphans, |M| = 5
        DagBuilder d;
        d.block("m1", "g", "n0");
        d.block("m2", "m1", "n0");
        d.block("m3", "m2", "n0");
        d.block("x3", "m2", "n1");
        d.block("y3", "m2", "n2");
        d.block("m4", "m3", "n0");
        d.block("m5", "m4", "n0");
        for (auto l : {"m1", "m2", "m3", "m4", "m5"}) d.mined("n0", l);
        d.received("n1", "m1").received("n1", "m2").mined("n1", "x3");
        d.received("n2", "m1").received("n2", "m2").mined("n2", "y3");
        out.push_back({"three-way-fork", d.logs(), {"n0", "n1", "n2"}, 7, 0, Rational{5, 7}, Rational{2, 5},
                       {{"n0", Rational{1}}, {"n1", Rational{0}}, {"n2", Rational{0}}},
                       {{"n0", 1}, {"n1", std::nullopt}, {"n2", std::nullopt}}});
    }
    {  // 6. miners along M: [a, a, b, c]; d is configured but silent
        DagBuilder d;
        d.block("m1", "g", "a");
        d.block("m2", "m1", "a");
        d.block("m3", "m2", "b");
        d.block("m4", "m3", "c");
        d.mined("a", "m1").mined("a", "m2").received("a", "m3").received("a", "m4");
        d.received("b", "m1").received("b", "m2").mined("b", "m3").received("b", "m4");
        d.received("c", "m1").received("c", "m2").received("c", "m3").mined("c", "m4");
        d.node("d");
        out.push_back({"miners-aabc", d.logs(), {"a", "b", "c", "d"}, 4, 0, Rational{1}, Rational{0},
                       {{"a", Rational{1, 2}}, {"b", Rational{1, 4}}, {"c", Rational{1, 4}}, {"d", Rational{0}}},
                       {{"a", 1}, {"b", 3}, {"c", 4}, {"d", std::nullopt}}});
    }
    {  // 7. orphan-heavy: short mainchain, stale branches with their own children
        DagBuilder d;
        d.block("m1", "g", "n0");
        d.block("m2", "m1", "n1");
        d.block("m3", "m2", "n0");
        d.block("o1", "g", "n1");   // shares parent with m1
        d.block("o2", "g", "n2");   // shares parent with m1
        d.block("o3", "o1", "n1");  // child of an orphan: shares parent with nothing on M
        d.block("o4", "m1", "n2");  // shares parent with m2
        d.block("o5", "m2", "n2");  // shares parent with m3
        d.block("o6", "o5", "n2");
        for (auto l : {"m1", "m3"}) d.mined("n0", l);
        d.received("n0", "m2");
        d.mined("n1", "o1").mined("n1", "o3").received("n1", "m1").mined("n1", "m2").received("n1", "m3");
        d.mined("n2", "o2").received("n2", "m1").mined("n2", "o4").received("n2", "m2").mined("n2", "o5").mined("n2", "o6");
        // n2 ends on o6 (height 4), which outweighs m3; make the mainchain the heavier m-branch.
        d.block("m4", "m3", "n0");
        d.block("m5", "m4", "n0");
        d.mined("n0", "m4").mined("n0", "m5");
        // M = m1..m5 (5). Θ = o1..o6 (6). Sharing: m1<-{o1,o2}, m2<-{o4}, m3<-{o5} -> 4.
        out.push_back({"orphan-heavy", d.logs(), {"n0", "n1", "n2"}, 11, 0, Rational{5, 11}, Rational{4, 5},
                       {{"n0", Rational{4, 5}}, {"n1", Rational{1, 5}}, {"n2", Rational{0}}},
                       {{"n0", 1}, {"n1", 2}, {"n2", std::nullopt}}});
    }
    {  // 8. linear chain plus two detached blocks: only the detached count moves
        DagBuilder d;
        for (int k = 1; k <= 5; ++k) d.block("a" + std::to_string(k), k == 1 ? "g" : "a" + std::to_string(k - 1), "n0");
        for (int k = 1; k <= 5; ++k) d.mined("n0", "a" + std::to_string(k));
        d.floating("z7", 7, "n1");
        d.block("z8", "z7", "n1");
        d.mined("n1", "z7").mined("n1", "z8").received("n1", "a1");
        out.push_back({"detached", d.logs(), {"n0", "n1"}, 5, 2, Rational{1}, Rational{0},
                       {{"n0", Rational{1}}, {"n1", Rational{0}}}, {{"n0", 1}, {"n1", std::nullopt}}});
    }
    {  // 9. final heads tie at equal height: the lower hash wins
        DagBuilder d;
        d.block("c1", "g", "n0");
        d.block("p2", "c1", "n0");
        d.block("q2", "c1", "n1");
        d.mined("n0", "c1").mined("n0", "p2").received("n0", "q2");
        d.received("n1", "c1").mined("n1", "q2").received("n1", "p2");
        const bool p_wins = d["p2"].hash < d["q2"].hash;
        out.push_back({"head-tie", d.logs(), {"n0", "n1"}, 3, 0, Rational{2, 3}, Rational{1, 2},
                       {{"n0", p_wins ? Rational{1} : Rational{1, 2}}, {"n1", p_wins ? Rational{0} : Rational{1, 2}}},
                       {{"n0", 1}, {"n1", p_wins ? std::nullopt : std::optional<std::uint64_t>{2}}}});
    }
    {  // 10. incomplete attribution: a mainchain block nobody logged as mined
        DagBuilder d;
        d.block("m1", "g", "n0");
        d.block("m2", "m1", "lost");
        d.block("m3", "m2", "n0");
        d.mined("n0", "m1").received("n0", "m2", "lost").mined("n0", "m3");
        out.push_back({"incomplete-attribution", d.logs(), {"n0"}, 3, 0, Rational{1}, Rational{0},
                       {{"n0", Rational{2, 3}}}, {{"n0", 1}}});
    }
    {  // 11. a node whose every block is orphaned
        DagBuilder d;
        d.block("m1", "g", "n0");
        d.block("m2", "m1", "n0");
        d.block("m3", "m2", "n0");
        d.block("s1", "g", "n1");   // shares parent with m1
        d.block("s2", "m1", "n1");  // shares parent with m2
        d.mined("n0", "m1").mined("n0", "m2").mined("n0", "m3");
        d.mined("n1", "s1").received("n1", "m1").mined("n1", "s2").received("n1", "m2");
        out.push_back({"always-orphaned", d.logs(), {"n0", "n1"}, 5, 0, Rational{3, 5}, Rational{2, 3},
                       {{"n0", Rational{1}}, {"n1", Rational{0}}}, {{"n0", 1}, {"n1", std::nullopt}}});
    }
    {  // 12. late joiner syncs 25 blocks, then mines block 26
        DagBuilder d;
        std::string prev = "g";
        for (int k = 1; k <= 30; ++k) {
            const auto label = "m" + std::to_string(k);
            d.block(label, prev, k == 26 ? "late" : "n0");
            prev = label;
        }
        for (int k = 1; k <= 30; ++k) {
            const auto label = "m" + std::to_string(k);
            if (k == 26) {
                d.received("n0", label, "late");
            } else {
                d.mined("n0", label);
            }
        }
        for (int k = 1; k <= 25; ++k) d.received("late", "m" + std::to_string(k), "n0");
        d.mined("late", "m26");
        for (int k = 27; k <= 30; ++k) d.received("late", "m" + std::to_string(k), "n0");
        out.push_back({"late-joiner", d.logs(), {"n0", "late"}, 30, 0, Rational{1}, Rational{0},
                       {{"n0", Rational{29, 30}}, {"late", Rational{1, 30}}}, {{"n0", 1}, {"late", 26}}});
    }
    return out;
}

/**
 * Random DAG with up to max_blocks blocks spread over a few miners, with the odd detached
 * block. Every node logs its own blocks plus a random 80% of the rest, sometimes shuffled so
 * that children arrive before their parents.
 */
inline DagFixture random_dag(std::mt19937_64& rng, std::size_t max_blocks) {
    DagBuilder d;
    const std::size_t node_count = std::uniform_int_distribution<std::size_t>{1, 4}(rng);
    const std::size_t count = std::uniform_int_distribution<std::size_t>{1, max_blocks}(rng);
    std::vector<std::string> labels{"g"};
    std::vector<std::string> miner_of;
    std::vector<std::string> nodes;
    for (std::size_t n = 0; n < node_count; ++n) nodes.push_back("n" + std::to_string(n));
    for (std::size_t k = 0; k < count; ++k) {
        // Bias towards recent parents so the tree has depth as well as breadth.
        const auto span = std::min<std::size_t>(labels.size(), 4);
        const auto parent = labels[labels.size() - 1 - std::uniform_int_distribution<std::size_t>{0, span - 1}(rng)];
        const auto miner = nodes[std::uniform_int_distribution<std::size_t>{0, node_count - 1}(rng)];
        const auto label = "b" + std::to_string(k);
        if (std::bernoulli_distribution{0.05}(rng)) {
            d.floating(label, 1 + std::uniform_int_distribution<std::uint64_t>{1, 9}(rng), miner);
        } else {
            d.block(label, parent, miner);
        }
        labels.push_back(label);
        miner_of.push_back(miner);
    }
    for (const auto& node : nodes) {
        std::vector<std::size_t> order;
        for (std::size_t k = 0; k < count; ++k) {
            if (miner_of[k] == node || std::bernoulli_distribution{0.8}(rng)) order.push_back(k);
        }
        if (std::bernoulli_distribution{0.3}(rng)) std::shuffle(order.begin(), order.end(), rng);
        for (auto k : order) {
            if (miner_of[k] == node) {
                d.mined(node, labels[k + 1]);
            } else {
                d.received(node, labels[k + 1]);
            }
        }
        d.node(node);
    }
    DagFixture f;
    f.name = "random";
    f.logs = d.logs();
    f.nodes = nodes;
    return f;
}

}  // namespace blockbox::testing
