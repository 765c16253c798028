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

#include <blockbox/chain/miner.hpp>

namespace blockbox::chain {

namespace {

    void put_nonce(Bytes& preimage, std::size_t offset, std::uint64_t nonce) noexcept {
        for (int i = 0; i < 8; ++i) preimage[offset + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(nonce >> (56 - 8 * i));
    }

}  // namespace

Miner::Miner(std::string miner_id, std::uint64_t difficulty, std::uint64_t seed)
    : miner_id_{std::move(miner_id)}, target_{difficulty}, rng_{seed} {
    if (miner_id_.size() > kMaxMinerIdLength) raise(ErrorCode::invalid_parameter, "miner id too long");
}

void Miner::rebuild(const ChainStore& store, std::uint64_t timestamp_ms) {
    const auto& head = store.head_block();
    candidate_ = Block{};
    candidate_.number = head.number + 1;
    candidate_.parent_hash = head.hash;
    candidate_.miner_id = miner_id_;
    candidate_.nonce = rng_();
    candidate_.difficulty = target_.difficulty();
    candidate_.timestamp_ms = timestamp_ms;
    preimage_ = canonical_serialize(candidate_);
    nonce_at_ = nonce_offset(candidate_);
    has_candidate_ = true;
}

Miner::Batch Miner::attempt(const ChainStore& store, std::uint64_t max_attempts, std::uint64_t timestamp_ms) {
    if (store.empty()) raise(ErrorCode::invalid_parameter, "cannot mine without a genesis block");
    if (!has_candidate_ || candidate_.parent_hash != store.head()) rebuild(store, timestamp_ms);

    Batch batch;
    while (batch.attempts < max_attempts) {
        ++batch.attempts;
        ++total_attempts_;
        const auto nonce = candidate_.nonce++;
        put_nonce(preimage_, nonce_at_, nonce);
        const auto hash = sha256(preimage_);
        if (target_.accepts(hash)) {
            Block found = candidate_;
            found.nonce = nonce;
            found.hash = hash;
            batch.block = std::move(found);
            has_candidate_ = false;
            break;
        }
    }
    return batch;
}

std::optional<Block> mine_step(const ChainStore& store, std::string_view miner_id, std::uint64_t difficulty,
                               std::mt19937_64& rng, std::uint64_t timestamp_ms) {
    if (store.empty()) raise(ErrorCode::invalid_parameter, "cannot mine without a genesis block");
    const auto& head = store.head_block();
    Block candidate;
    candidate.number = head.number + 1;
    candidate.parent_hash = head.hash;
    candidate.miner_id = std::string{miner_id};
    candidate.nonce = rng();
    candidate.difficulty = difficulty;
    candidate.timestamp_ms = timestamp_ms;
    seal(candidate);
    if (!pow_valid(candidate)) return std::nullopt;
    return candidate;
}

}  // namespace blockbox::chain
