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

#include <blockbox/chain/chain_store.hpp>

#include <algorithm>

namespace blockbox::chain {

std::string_view to_string(InsertOutcome outcome) noexcept {
    switch (outcome) {
        case InsertOutcome::extends_head:
            return "accepted-extends-head";
        case InsertOutcome::side_chain:
            return "accepted-side-chain";
        case InsertOutcome::reorg:
            return "reorg";
        case InsertOutcome::duplicate:
            return "duplicate";
        case InsertOutcome::orphaned_pending:
            return "orphaned-pending";
    }
    return "unknown";
}

ChainStore::ChainStore(const Block& genesis) { insert_block(genesis); }

const Block* ChainStore::find(const Hash32& hash) const {
    auto it = blocks_.find(hash);
    return it == blocks_.end() ? nullptr : &it->second.block;
}

const Block& ChainStore::block(const Hash32& hash) const {
    auto it = blocks_.find(hash);
    if (it == blocks_.end()) raise(ErrorCode::not_found, "block " + hash.short_hex());
    return it->second.block;
}

std::uint64_t ChainStore::total_difficulty(const Hash32& hash) const {
    auto it = blocks_.find(hash);
    if (it == blocks_.end()) raise(ErrorCode::not_found, "block " + hash.short_hex());
    return it->second.total_difficulty;
}

const std::vector<Hash32>& ChainStore::children(const Hash32& hash) const {
    auto it = blocks_.find(hash);
    if (it == blocks_.end()) raise(ErrorCode::not_found, "block " + hash.short_hex());
    return it->second.children;
}

InsertResult ChainStore::insert_block(const Block& block) {
    InsertResult result;
    result.old_head = head_;
    result.new_head = head_;

    if (!hash_matches(block)) raise(ErrorCode::rejected, "hash does not match contents");
    if (block.is_genesis() != block.parent_hash.is_zero()) {
        raise(ErrorCode::rejected, "height 0 iff zero parent hash");
    }
    if (block.difficulty == 0) raise(ErrorCode::rejected, "difficulty is zero");
    if (blocks_.contains(block.hash) || parked_.contains(block.hash)) {
        result.outcome = InsertOutcome::duplicate;
        return result;
    }

    if (block.is_genesis()) {
        if (!blocks_.empty()) raise(ErrorCode::rejected, "store already has a different genesis");
        genesis_ = block.hash;
        blocks_.emplace(block.hash, Entry{block, block.difficulty, {}});
        set_head(block.hash);
        result.connected.push_back(block.hash);
        // Blocks parked before genesis arrived may connect now.
        release_parked(block.hash, result);
        result.new_head = head_;
        result.outcome = InsertOutcome::extends_head;
        return result;
    }

    if (!pow_valid(block)) raise(ErrorCode::rejected, "proof of work below target");

    auto parent = blocks_.find(block.parent_hash);
    if (parent == blocks_.end()) {
        park(block);
        result.outcome = InsertOutcome::orphaned_pending;
        return result;
    }
    if (parent->second.block.number + 1 != block.number) {
        raise(ErrorCode::rejected, "height " + std::to_string(block.number) + " does not follow its parent");
    }
    if (block.difficulty != blocks_.at(genesis_).block.difficulty) {
        raise(ErrorCode::rejected, "difficulty differs from the genesis difficulty");
    }

    attach(block, result);
    release_parked(block.hash, result);

    result.new_head = head_;
    if (result.new_head == result.old_head) {
        result.outcome = InsertOutcome::side_chain;
    } else if (is_ancestor(result.old_head, result.new_head)) {
        result.outcome = InsertOutcome::extends_head;
    } else {
        result.outcome = InsertOutcome::reorg;
        const auto fork = common_ancestor(result.old_head, result.new_head);
        result.reorg_depth = blocks_.at(result.old_head).block.number - blocks_.at(fork).block.number;
    }
    return result;
}

void ChainStore::attach(const Block& block, InsertResult& result) {
    auto& parent = blocks_.at(block.parent_hash);
    const auto td = parent.total_difficulty + block.difficulty;
    parent.children.push_back(block.hash);
    blocks_.emplace(block.hash, Entry{block, td, {}});
    result.connected.push_back(block.hash);
    if (td > blocks_.at(head_).total_difficulty) set_head(block.hash);
}

void ChainStore::release_parked(const Hash32& root, InsertResult& result) {
    std::deque<Hash32> frontier{root};
    while (!frontier.empty()) {
        const auto parent_hash = frontier.front();
        frontier.pop_front();
        const auto& parent = blocks_.at(parent_hash).block;

        auto [first, last] = waiting_on_.equal_range(parent_hash);
        std::vector<const Parked*> ready;
        for (auto it = first; it != last; ++it) ready.push_back(&parked_.at(it->second));
        std::sort(ready.begin(), ready.end(), [](auto* a, auto* b) { return a->sequence < b->sequence; });

        std::vector<Block> children;
        children.reserve(ready.size());
        for (const auto* p : ready) children.push_back(p->block);
        for (const auto& child : children) {
            unpark(child.hash);
            // Parked blocks were hash- and PoW-checked on arrival; the remaining checks need
            // the parent, so a failure here silently drops the block.
            if (child.number != parent.number + 1) continue;
            if (child.difficulty != blocks_.at(genesis_).block.difficulty) continue;
            attach(child, result);
            frontier.push_back(child.hash);
        }
    }
}

void ChainStore::park(const Block& block) {
    while (parked_.size() >= kOrphanPoolCapacity && !park_order_.empty()) {
        const auto oldest = park_order_.front();
        park_order_.pop_front();
        if (parked_.contains(oldest)) unpark(oldest);
    }
    parked_.emplace(block.hash, Parked{block, park_sequence_++});
    waiting_on_.emplace(block.parent_hash, block.hash);
    park_order_.push_back(block.hash);
}

void ChainStore::unpark(const Hash32& hash) {
    auto it = parked_.find(hash);
    if (it == parked_.end()) return;
    auto [first, last] = waiting_on_.equal_range(it->second.block.parent_hash);
    for (auto w = first; w != last; ++w) {
        if (w->second == hash) {
            waiting_on_.erase(w);
            break;
        }
    }
    parked_.erase(it);
    // park_order_ is cleaned lazily; drop leading entries that are gone.
    while (!park_order_.empty() && !parked_.contains(park_order_.front())) park_order_.pop_front();
}

void ChainStore::set_head(const Hash32& hash) {
    head_ = hash;
    std::vector<Hash32> tail;
    auto cursor = hash;
    for (;;) {
        const auto& entry = blocks_.at(cursor).block;
        if (entry.number < canonical_.size() && canonical_[entry.number] == cursor) {
            canonical_.resize(entry.number + 1);
            break;
        }
        tail.push_back(cursor);
        if (entry.is_genesis()) {
            canonical_.clear();
            break;
        }
        cursor = entry.parent_hash;
    }
    canonical_.insert(canonical_.end(), tail.rbegin(), tail.rend());
}

Hash32 ChainStore::common_ancestor(const Hash32& a, const Hash32& b) const {
    const Block* x = &blocks_.at(a).block;
    const Block* y = &blocks_.at(b).block;
    while (x->number > y->number) x = &blocks_.at(x->parent_hash).block;
    while (y->number > x->number) y = &blocks_.at(y->parent_hash).block;
    while (x->hash != y->hash) {
        x = &blocks_.at(x->parent_hash).block;
        y = &blocks_.at(y->parent_hash).block;
    }
    return x->hash;
}

bool ChainStore::is_ancestor(const Hash32& ancestor, const Hash32& descendant) const {
    auto a = blocks_.find(ancestor);
    auto d = blocks_.find(descendant);
    if (a == blocks_.end() || d == blocks_.end()) return false;
    const Block* cursor = &d->second.block;
    while (cursor->number > a->second.block.number) cursor = &blocks_.at(cursor->parent_hash).block;
    return cursor->hash == ancestor;
}

std::vector<Block> ChainStore::mainchain() const {
    std::vector<Block> out;
    out.reserve(canonical_.size());
    for (const auto& hash : canonical_) out.push_back(blocks_.at(hash).block);
    return out;
}

std::optional<Hash32> ChainStore::canonical_at(std::uint64_t number) const {
    if (number >= canonical_.size()) return std::nullopt;
    return canonical_[number];
}

std::vector<Block> ChainStore::canonical_range(std::uint64_t from, std::size_t count) const {
    std::vector<Block> out;
    for (auto n = from; n < canonical_.size() && out.size() < count; ++n) out.push_back(blocks_.at(canonical_[n]).block);
    return out;
}

std::vector<Block> mainchain_of(const ChainStore& store) {
    if (store.empty()) raise(ErrorCode::invalid_input, "store is empty");
    return store.mainchain();
}

}  // namespace blockbox::chain
