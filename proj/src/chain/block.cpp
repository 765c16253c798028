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

#include <blockbox/chain/block.hpp>

namespace blockbox::chain {

namespace {
    __extension__ using uint128 = unsigned __int128;
}  // namespace

Bytes canonical_serialize(const Block& block) {
    ByteWriter out{60 + block.miner_id.size()};
    out.u64(block.number)
        .raw(block.parent_hash.view())
        .str(block.miner_id)
        .u64(block.nonce)
        .u64(block.difficulty)
        .u64(block.timestamp_ms);
    return std::move(out).take();
}

std::size_t nonce_offset(const Block& block) noexcept { return 8 + 32 + 4 + block.miner_id.size(); }

Hash32 compute_hash(const Block& block) { return sha256(canonical_serialize(block)); }

void seal(Block& block) { block.hash = compute_hash(block); }

bool hash_matches(const Block& block) { return compute_hash(block) == block.hash; }

void write_block(ByteWriter& out, const Block& block) {
    out.raw(canonical_serialize(block)).raw(block.hash.view());
}

Block read_block(ByteReader& in) {
    Block block;
    block.number = in.u64();
    block.parent_hash = Hash32::from_bytes(in.raw(32));
    block.miner_id = in.str(kMaxMinerIdLength);
    block.nonce = in.u64();
    block.difficulty = in.u64();
    block.timestamp_ms = in.u64();
    block.hash = Hash32::from_bytes(in.raw(32));
    return block;
}

Block make_genesis(const GenesisConfig& config) {
    if (config.difficulty == 0) raise(ErrorCode::invalid_parameter, "genesis difficulty must be >= 1");
    if (config.extra.size() > kMaxGenesisExtra) {
        raise(ErrorCode::invalid_parameter, "genesis extra is limited to " + std::to_string(kMaxGenesisExtra) + " bytes");
    }
    Block genesis;
    genesis.number = 0;
    genesis.miner_id = "genesis/" + std::to_string(config.chain_id) + "/" + to_hex(config.extra);
    genesis.nonce = 0;
    genesis.difficulty = config.difficulty;
    genesis.timestamp_ms = 0;
    seal(genesis);
    return genesis;
}

PowTarget::PowTarget(std::uint64_t difficulty) : difficulty_{difficulty} {
    if (difficulty == 0) raise(ErrorCode::invalid_parameter, "difficulty must be >= 1");
    if (difficulty == 1) {
        unbounded_ = true;
        threshold_.bytes.fill(0xff);
        return;
    }
    // Schoolbook division of 2^256 (limbs 1,0,0,0,0 in base 2^64) by the difficulty.
    // The leading limb of the quotient is zero for D >= 2.
    uint128 remainder = 1;
    for (int limb = 0; limb < 4; ++limb) {
        const uint128 current = remainder << 64;
        const auto quotient = static_cast<std::uint64_t>(current / difficulty);
        remainder = current % difficulty;
        for (int i = 0; i < 8; ++i) {
            threshold_.bytes[static_cast<std::size_t>(limb * 8 + i)] =
                static_cast<std::uint8_t>(quotient >> (56 - 8 * i));
        }
    }
}

bool PowTarget::accepts(const Hash32& hash) const noexcept { return unbounded_ || hash < threshold_; }

bool pow_valid(const Block& block) { return PowTarget{block.difficulty}.accepts(block.hash); }

std::string hash_color(const Hash32& hash) { return "#" + to_hex(ByteView{hash.bytes.data(), 3}); }

}  // namespace blockbox::chain
