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
#include <deque>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <blockbox/chain/block.hpp>

namespace blockbox::chain {

enum class InsertOutcome {
    extends_head,
    side_chain,
    reorg,
    duplicate,
    orphaned_pending,
};

std::string_view to_string(InsertOutcome outcome) noexcept;

struct InsertResult {
    InsertOutcome outcome{InsertOutcome::duplicate};
    Hash32 old_head{};
    Hash32 new_head{};
    //! Number of blocks abandoned from the previous canonical chain (0 unless outcome is reorg).
    std::uint64_t reorg_depth{0};
    //! Hashes attached to the tree by this call: the block itself when its parent was known,
    //! followed by any parked descendants it released, in attachment order.
    std::vector<Hash32> connected;

    [[nodiscard]] bool accepted() const noexcept {
        return outcome == InsertOutcome::extends_head || outcome == InsertOutcome::side_chain ||
               outcome == InsertOutcome::reorg;
    }
    [[nodiscard]] bool head_changed() const noexcept { return old_head != new_head; }
};

/**
 * A node's block tree plus the head chosen by fork choice.
 *
 * Fork choice is greatest cumulative difficulty; on an exact tie the block that was attached
 * first keeps the head. Blocks whose parent is unknown wait in a bounded FIFO pool and are
 * attached as soon as the parent arrives. Difficulty is static: every block must carry the
 * genesis difficulty.
 *
 * Single writer. Concurrent readers need their own copy.
 */
class ChainStore {
  public:
    static constexpr std::size_t kOrphanPoolCapacity = 1024;

    ChainStore() = default;
    explicit ChainStore(const Block& genesis);

    //! Throws Error{rejected} for a bad hash, failed proof of work, wrong height or difficulty,
    //! or a second, different genesis.
    InsertResult insert_block(const Block& block);

    [[nodiscard]] bool empty() const noexcept { return blocks_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return blocks_.size(); }
    [[nodiscard]] std::size_t orphan_count() const noexcept { return parked_.size(); }

    [[nodiscard]] bool contains(const Hash32& hash) const { return blocks_.contains(hash); }
    [[nodiscard]] bool is_parked(const Hash32& hash) const { return parked_.contains(hash); }
    [[nodiscard]] const Block* find(const Hash32& hash) const;
    //! Throws Error{not_found}.
    [[nodiscard]] const Block& block(const Hash32& hash) const;
    [[nodiscard]] std::uint64_t total_difficulty(const Hash32& hash) const;
    [[nodiscard]] const std::vector<Hash32>& children(const Hash32& hash) const;

    [[nodiscard]] const Hash32& head() const noexcept { return head_; }
    [[nodiscard]] const Block& head_block() const { return block(head_); }
    [[nodiscard]] std::uint64_t head_total_difficulty() const { return total_difficulty(head_); }
    [[nodiscard]] const Hash32& genesis_hash() const noexcept { return genesis_; }

    //! Genesis-to-head path, ascending height.
    [[nodiscard]] std::vector<Block> mainchain() const;
    [[nodiscard]] std::optional<Hash32> canonical_at(std::uint64_t number) const;
    //! Canonical blocks with heights in [from, from + count), clipped at the head.
    [[nodiscard]] std::vector<Block> canonical_range(std::uint64_t from, std::size_t count) const;

    [[nodiscard]] bool is_ancestor(const Hash32& ancestor, const Hash32& descendant) const;

  private:
    struct Entry {
        Block block;
        std::uint64_t total_difficulty{0};
        std::vector<Hash32> children;
    };

    void attach(const Block& block, InsertResult& result);
    void release_parked(const Hash32& root, InsertResult& result);
    void park(const Block& block);
    void unpark(const Hash32& hash);
    void set_head(const Hash32& hash);
    [[nodiscard]] Hash32 common_ancestor(const Hash32& a, const Hash32& b) const;

    std::unordered_map<Hash32, Entry> blocks_;
    Hash32 genesis_{};
    Hash32 head_{};
    std::vector<Hash32> canonical_;

    struct Parked {
        Block block;
        std::uint64_t sequence{0};
    };

    std::unordered_map<Hash32, Parked> parked_;
    std::unordered_multimap<Hash32, Hash32> waiting_on_;
    std::deque<Hash32> park_order_;
    std::uint64_t park_sequence_{0};
};

//! Free-function form of ChainStore::mainchain. Throws invalid_input on an empty store.
std::vector<Block> mainchain_of(const ChainStore& store);

}  // namespace blockbox::chain
