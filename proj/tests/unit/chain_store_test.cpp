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

#include <algorithm>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include <blockbox/chain/chain_store.hpp>
#include <support/chain_fixtures.hpp>

namespace blockbox::chain {
namespace {

    using testing::child_of;
    using testing::mined_child_of;

    ErrorCode insert_error(ChainStore& store, const Block& b) {
        try {
            store.insert_block(b);
        } catch (const Error& e) {
            return e.code();
        }
        ADD_FAILURE() << "insert did not throw";
        return ErrorCode::io;
    }

    TEST(ChainStore, GenesisIntoEmptyStoreExtendsHead) {
        ChainStore store;
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        const auto r = store.insert_block(genesis);
        EXPECT_EQ(r.outcome, InsertOutcome::extends_head);
        EXPECT_EQ(store.head(), genesis.hash);
        EXPECT_EQ(store.genesis_hash(), genesis.hash);
        EXPECT_EQ(store.total_difficulty(genesis.hash), 1u);
    }

    TEST(ChainStore, ChildBeforeGenesisWaitsForIt) {
        ChainStore store;
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        const auto one = child_of(genesis, "a");
        EXPECT_EQ(store.insert_block(one).outcome, InsertOutcome::orphaned_pending);
        EXPECT_TRUE(store.empty());
        const auto r = store.insert_block(genesis);
        EXPECT_EQ(r.connected.size(), 2u);
        EXPECT_EQ(store.head(), one.hash);
    }

    TEST(ChainStore, RejectsInvalidBlocks) {
        const auto genesis = make_genesis(GenesisConfig{1, 1000, {}});
        ChainStore store{genesis};

        auto tampered = mined_child_of(genesis, "a");
        tampered.timestamp_ms += 1;
        EXPECT_EQ(insert_error(store, tampered), ErrorCode::rejected);

        Block weak = mined_child_of(genesis, "a");
        const PowTarget target{1000};
        do {
            ++weak.nonce;
            seal(weak);
        } while (target.accepts(weak.hash));
        EXPECT_EQ(insert_error(store, weak), ErrorCode::rejected);

        EXPECT_EQ(insert_error(store, make_genesis(GenesisConfig{2, 1000, {}})), ErrorCode::rejected);

        auto skipped = mined_child_of(genesis, "a");
        skipped.number = 2;
        seal(skipped);
        while (!target.accepts(skipped.hash)) {
            ++skipped.nonce;
            seal(skipped);
        }
        EXPECT_EQ(insert_error(store, skipped), ErrorCode::rejected);

        auto easier = child_of(make_genesis(GenesisConfig{1, 1, {}}), "a");
        easier.parent_hash = genesis.hash;
        seal(easier);
        EXPECT_EQ(insert_error(store, easier), ErrorCode::rejected);

        EXPECT_EQ(store.size(), 1u);
    }

    TEST(ChainStore, DuplicateIsReported) {
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        const auto one = child_of(genesis, "a");
        EXPECT_EQ(store.insert_block(one).outcome, InsertOutcome::extends_head);
        EXPECT_EQ(store.insert_block(one).outcome, InsertOutcome::duplicate);
        EXPECT_EQ(store.insert_block(genesis).outcome, InsertOutcome::duplicate);
    }

    TEST(ChainStore, EqualTotalDifficultyKeepsFirstSeenHead) {
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        auto b1 = child_of(genesis, "a");
        auto b2 = child_of(b1, "a");
        auto b3 = child_of(b2, "a");
        for (const auto* b : {&b1, &b2, &b3}) store.insert_block(*b);
        ASSERT_EQ(store.head(), b3.hash);

        const auto rival = child_of(b2, "b");
        const auto r = store.insert_block(rival);
        EXPECT_EQ(r.outcome, InsertOutcome::side_chain);
        EXPECT_FALSE(r.head_changed());
        EXPECT_EQ(store.head(), b3.hash);
        EXPECT_EQ(store.total_difficulty(rival.hash), store.total_difficulty(b3.hash));
    }

    TEST(ChainStore, HeavierBranchTriggersReorg) {
        // Genesis D = 1000. Branch A: 3 blocks, TD(A3) = 4000. Branch B: 4 blocks from genesis,
        // TD(B3) = 4000 (tie, stays on A), TD(B4) = 5000 > 4000.
        const auto genesis = make_genesis(GenesisConfig{1, 1000, {}});
        ChainStore store{genesis};
        std::vector<Block> a{mined_child_of(genesis, "a")};
        for (int i = 0; i < 2; ++i) a.push_back(mined_child_of(a.back(), "a"));
        std::vector<Block> b{mined_child_of(genesis, "b")};
        for (int i = 0; i < 3; ++i) b.push_back(mined_child_of(b.back(), "b"));

        for (const auto& block : a) EXPECT_EQ(store.insert_block(block).outcome, InsertOutcome::extends_head);
        EXPECT_EQ(store.head_total_difficulty(), 4000u);
        for (int i = 0; i < 3; ++i) EXPECT_EQ(store.insert_block(b[i]).outcome, InsertOutcome::side_chain);
        EXPECT_EQ(store.total_difficulty(b[2].hash), 4000u);
        EXPECT_EQ(store.head(), a[2].hash);

        const auto r = store.insert_block(b[3]);
        EXPECT_EQ(r.outcome, InsertOutcome::reorg);
        EXPECT_EQ(r.old_head, a[2].hash);
        EXPECT_EQ(r.new_head, b[3].hash);
        EXPECT_EQ(r.reorg_depth, 3u);
        EXPECT_EQ(store.head_total_difficulty(), 5000u);
        EXPECT_EQ(store.canonical_at(1), b[0].hash);
    }

    TEST(Mainchain, GenesisOnly) {
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        const auto chain = mainchain_of(store);
        ASSERT_EQ(chain.size(), 1u);
        EXPECT_EQ(chain[0], genesis);
        EXPECT_THROW(mainchain_of(ChainStore{}), Error);
    }

    TEST(Mainchain, LinearChainInHeightOrder) {
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        std::vector<Block> blocks{genesis};
        for (int i = 0; i < 4; ++i) {
            blocks.push_back(child_of(blocks.back(), "a"));
            store.insert_block(blocks.back());
        }
        EXPECT_EQ(mainchain_of(store), blocks);
    }

    TEST(Mainchain, ExcludesSideBranch) {
        // g - 1 - 2 - 3a
        //          \- 3b - 4b
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        const auto b1 = child_of(genesis, "a");
        const auto b2 = child_of(b1, "a");
        const auto b3a = child_of(b2, "a");
        const auto b3b = child_of(b2, "b");
        const auto b4b = child_of(b3b, "b");
        for (const auto* b : {&b1, &b2, &b3a, &b3b, &b4b}) store.insert_block(*b);
        const auto chain = mainchain_of(store);
        EXPECT_EQ(chain, (std::vector<Block>{genesis, b1, b2, b3b, b4b}));
        EXPECT_EQ(store.children(b2.hash).size(), 2u);
    }

    TEST(ChainStore, OutOfOrderArrivalsReplayOnParent) {
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        const auto b1 = child_of(genesis, "a");
        const auto b2 = child_of(b1, "a");
        const auto b3 = child_of(b2, "a");
        EXPECT_EQ(store.insert_block(b3).outcome, InsertOutcome::orphaned_pending);
        EXPECT_EQ(store.insert_block(b2).outcome, InsertOutcome::orphaned_pending);
        EXPECT_EQ(store.insert_block(b3).outcome, InsertOutcome::duplicate);
        EXPECT_EQ(store.orphan_count(), 2u);
        const auto r = store.insert_block(b1);
        EXPECT_EQ(r.outcome, InsertOutcome::extends_head);
        EXPECT_EQ(r.connected, (std::vector<Hash32>{b1.hash, b2.hash, b3.hash}));
        EXPECT_EQ(store.head(), b3.hash);
        EXPECT_EQ(store.orphan_count(), 0u);
    }

    TEST(ChainStore, OrphanPoolEvictsOldestBeyondCapacity) {
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        const auto missing = child_of(genesis, "gap");
        std::vector<Block> parked;
        for (std::uint64_t i = 0; i <= ChainStore::kOrphanPoolCapacity; ++i) {
            parked.push_back(child_of(missing, "p", i));
            EXPECT_EQ(store.insert_block(parked.back()).outcome, InsertOutcome::orphaned_pending);
        }
        EXPECT_EQ(store.orphan_count(), ChainStore::kOrphanPoolCapacity);
        EXPECT_FALSE(store.is_parked(parked.front().hash));
        EXPECT_TRUE(store.is_parked(parked.back().hash));

        const auto r = store.insert_block(missing);
        EXPECT_EQ(r.connected.size(), ChainStore::kOrphanPoolCapacity + 1);
        EXPECT_FALSE(store.contains(parked.front().hash));
        // First-seen among the tied children is the oldest surviving parked block.
        EXPECT_EQ(store.head(), parked[1].hash);
    }

    // Random block tree over D = 1 (equal weight per block), up to 20 blocks.
    std::vector<Block> random_tree(std::mt19937_64& rng, const Block& genesis, std::size_t count) {
        std::vector<Block> all{genesis};
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick{0, all.size() - 1};
            all.push_back(child_of(all[pick(rng)], "m" + std::to_string(i % 3), i));
        }
        all.erase(all.begin());
        return all;
    }

    TEST(ChainStoreProperty, FinalHeadDependsOnlyOnFirstSeenAmongTiedTips) {
        std::mt19937_64 rng{99};
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        for (int trial = 0; trial < 200; ++trial) {
            const auto blocks = random_tree(rng, genesis, 1 + rng() % 20);
            std::uint64_t best_height = 0;
            for (const auto& b : blocks) best_height = std::max(best_height, b.number);

            for (int order = 0; order < 5; ++order) {
                auto shuffled = blocks;
                std::shuffle(shuffled.begin(), shuffled.end(), rng);
                ChainStore store{genesis};
                std::vector<Hash32> attach_order;
                for (const auto& b : shuffled) {
                    const auto r = store.insert_block(b);
                    attach_order.insert(attach_order.end(), r.connected.begin(), r.connected.end());
                }
                ASSERT_EQ(store.size(), blocks.size() + 1);
                ASSERT_EQ(store.orphan_count(), 0u);

                // Expected head: the first attached block at the maximal height.
                Hash32 expected;
                for (const auto& h : attach_order) {
                    if (store.block(h).number == best_height) {
                        expected = h;
                        break;
                    }
                }
                ASSERT_EQ(store.head(), expected) << "trial " << trial;

                const auto chain = store.mainchain();
                for (std::size_t i = 1; i < chain.size(); ++i) {
                    ASSERT_EQ(chain[i].number, chain[i - 1].number + 1);
                    ASSERT_EQ(chain[i].parent_hash, chain[i - 1].hash);
                    ASSERT_GT(store.total_difficulty(chain[i].hash), store.total_difficulty(chain[i - 1].hash));
                }
            }
        }
    }

    TEST(ChainStoreProperty, UniqueHeaviestTipWinsInEveryOrder) {
        std::mt19937_64 rng{5};
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        int checked = 0;
        for (int trial = 0; trial < 300 && checked < 100; ++trial) {
            const auto blocks = random_tree(rng, genesis, 2 + rng() % 19);
            std::uint64_t best_height = 0;
            for (const auto& b : blocks) best_height = std::max(best_height, b.number);
            const auto tips = std::count_if(blocks.begin(), blocks.end(), [&](const Block& b) { return b.number == best_height; });
            if (tips != 1) continue;
            ++checked;

            std::optional<Hash32> head;
            std::optional<std::vector<Block>> chain;
            for (int order = 0; order < 6; ++order) {
                auto shuffled = blocks;
                std::shuffle(shuffled.begin(), shuffled.end(), rng);
                ChainStore store{genesis};
                for (const auto& b : shuffled) store.insert_block(b);
                if (!head) {
                    head = store.head();
                    chain = store.mainchain();
                }
                ASSERT_EQ(store.head(), *head);
                ASSERT_EQ(store.mainchain(), *chain);
            }
        }
        EXPECT_GE(checked, 50);
    }

    TEST(ChainStoreProperty, TotalDifficultyAccumulatesAlongParents) {
        std::mt19937_64 rng{17};
        const auto genesis = make_genesis(GenesisConfig{1, 1, {}});
        ChainStore store{genesis};
        for (const auto& b : random_tree(rng, genesis, 20)) store.insert_block(b);
        EXPECT_EQ(store.total_difficulty(genesis.hash), genesis.difficulty);
        for (const auto& b : random_tree(rng, genesis, 20)) {
            store.insert_block(b);
            EXPECT_EQ(store.total_difficulty(b.hash), store.total_difficulty(b.parent_hash) + b.difficulty);
        }
    }

}  // namespace
}  // namespace blockbox::chain
