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
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include <blockbox/chain/chain_store.hpp>

namespace blockbox::chain {

/**
 * Nonce search against a store's head.
 *
 * The candidate is built once per head (parent, height, timestamp fixed) and only the nonce
 * bytes of its preimage are rewritten per attempt. A head change between calls rebuilds the
 * candidate, so stale work is never continued.
 */
class Miner {
  public:
    Miner(std::string miner_id, std::uint64_t difficulty, std::uint64_t seed);

    struct Batch {
        std::optional<Block> block;
        //! Attempts consumed, including the successful one.
        std::uint64_t attempts{0};
    };

    //! Up to max_attempts nonces; stops at the first valid block.
    Batch attempt(const ChainStore& store, std::uint64_t max_attempts, std::uint64_t timestamp_ms);

    //! Forces a fresh candidate (new timestamp) on the next attempt.
    void invalidate() noexcept { has_candidate_ = false; }

    [[nodiscard]] std::uint64_t total_attempts() const noexcept { return total_attempts_; }
    [[nodiscard]] const std::string& miner_id() const noexcept { return miner_id_; }

  private:
    void rebuild(const ChainStore& store, std::uint64_t timestamp_ms);

    std::string miner_id_;
    PowTarget target_;
    std::mt19937_64 rng_;
    bool has_candidate_{false};
    Block candidate_;
    Bytes preimage_;
    std::size_t nonce_at_{0};
    std::uint64_t total_attempts_{0};
};

//! A single nonce attempt with a random nonce on a block extending the store's head.
std::optional<Block> mine_step(const ChainStore& store, std::string_view miner_id, std::uint64_t difficulty,
                               std::mt19937_64& rng, std::uint64_t timestamp_ms = 0);

}  // namespace blockbox::chain
