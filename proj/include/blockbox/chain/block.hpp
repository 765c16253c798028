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
#include <string>

#include <blockbox/chain/hash.hpp>
#include <blockbox/common/bytes.hpp>

namespace blockbox::chain {

inline constexpr std::size_t kMaxMinerIdLength = 256;

struct Block {
    std::uint64_t number{0};
    Hash32 parent_hash{};
    std::string miner_id;
    std::uint64_t nonce{0};
    std::uint64_t difficulty{1};
    std::uint64_t timestamp_ms{0};
    Hash32 hash{};

    [[nodiscard]] bool is_genesis() const noexcept { return number == 0; }

    friend bool operator==(const Block&, const Block&) = default;
};

/**
 * Canonical preimage of a block hash. Layout, all integers big-endian:
 *
 *   number       u64
 *   parent_hash  32 bytes
 *   miner_id     u32 length + UTF-8 bytes
 *   nonce        u64
 *   difficulty   u64
 *   timestamp_ms u64
 *
 * The hash field itself is not part of the preimage.
 */
Bytes canonical_serialize(const Block& block);

//! Byte offset of the nonce inside the canonical serialization of this block.
std::size_t nonce_offset(const Block& block) noexcept;

Hash32 compute_hash(const Block& block);

//! Recomputes and stores block.hash.
void seal(Block& block);

[[nodiscard]] bool hash_matches(const Block& block);

//! Wire form: canonical serialization followed by the 32-byte hash.
void write_block(ByteWriter& out, const Block& block);
Block read_block(ByteReader& in);

struct GenesisConfig {
    std::uint64_t chain_id{1};
    std::uint64_t difficulty{1};
    //! Mixed into the genesis hash so distinct experiments never share a chain.
    Bytes extra;

    friend bool operator==(const GenesisConfig&, const GenesisConfig&) = default;
};

inline constexpr std::size_t kMaxGenesisExtra = 96;

//! Deterministic height-0 block for the configuration. The chain id and extra bytes are
//! folded into the miner_id field as "genesis/<chain_id>/<hex extra>".
Block make_genesis(const GenesisConfig& config);

//! Proof-of-work target for a fixed difficulty D: a hash h is valid iff
//! h (big-endian) < floor(2^256 / D). Each attempt therefore succeeds with probability 1/D.
class PowTarget {
  public:
    explicit PowTarget(std::uint64_t difficulty);

    [[nodiscard]] bool accepts(const Hash32& hash) const noexcept;
    [[nodiscard]] std::uint64_t difficulty() const noexcept { return difficulty_; }
    //! floor(2^256 / D) for D >= 2; for D == 1 the bound is 2^256 and is not representable.
    [[nodiscard]] const Hash32& threshold() const noexcept { return threshold_; }

  private:
    std::uint64_t difficulty_;
    Hash32 threshold_{};
    bool unbounded_{false};
};

//! Throws invalid_parameter when difficulty is zero.
[[nodiscard]] bool pow_valid(const Block& block);

//! "#rrggbb" from the first three bytes of the hash. Shared by status snapshots and the panel.
std::string hash_color(const Hash32& hash);

}  // namespace blockbox::chain
