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

#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include <blockbox/chain/block.hpp>
#include <support/chain_fixtures.hpp>

namespace blockbox::chain {
namespace {

    using boost::multiprecision::cpp_int;

    Block sample_block() {
        Block b;
        b.number = 7;
        b.parent_hash = sha256(Bytes{1, 2, 3});
        b.miner_id = "node-4";
        b.nonce = 42;
        b.difficulty = 1000;
        b.timestamp_ms = 5250;
        seal(b);
        return b;
    }

    cpp_int as_integer(const Hash32& h) {
        cpp_int out = 0;
        for (auto byte : h.bytes) out = (out << 8) | byte;
        return out;
    }

    // Independent route to the PoW predicate: h < floor(2^256 / D)  <=>  (h + 1) * D <= 2^256.
    bool oracle_pow_valid(const Hash32& h, std::uint64_t difficulty) {
        const cpp_int two_256 = cpp_int{1} << 256;
        return (as_integer(h) + 1) * difficulty <= two_256;
    }

    Hash32 random_hash(std::mt19937_64& rng) {
        Hash32 h;
        for (auto& byte : h.bytes) byte = static_cast<std::uint8_t>(rng());
        return h;
    }

    TEST(CanonicalSerialize, IsDeterministic) {
        const auto b = sample_block();
        EXPECT_EQ(canonical_serialize(b), canonical_serialize(b));
        EXPECT_EQ(compute_hash(b), compute_hash(b));
    }

    TEST(CanonicalSerialize, NonceChangesBytes) {
        auto a = sample_block();
        auto b = a;
        b.nonce += 1;
        EXPECT_NE(canonical_serialize(a), canonical_serialize(b));
        seal(b);
        EXPECT_NE(a.hash, b.hash);
    }

    TEST(CanonicalSerialize, LayoutIsFixedWidthBigEndian) {
        const auto b = sample_block();
        const auto bytes = canonical_serialize(b);
        ASSERT_EQ(bytes.size(), 8u + 32u + 4u + b.miner_id.size() + 8u + 8u + 8u);
        EXPECT_EQ(bytes[7], 7);
        EXPECT_EQ(bytes[43], b.miner_id.size());
        EXPECT_EQ(nonce_offset(b), 44u + b.miner_id.size());
        EXPECT_EQ(bytes[nonce_offset(b) + 7], 42);
    }

    TEST(CanonicalSerialize, MatchesCommittedGoldenBytes) {
        const auto table = testing::read_fixture_table(BLOCKBOX_FIXTURE_DIR "/block_golden.txt");

        const auto genesis = make_genesis(GenesisConfig{1, 1000, {}});
        const auto& g = table.at("genesis_chain1_d1000");
        EXPECT_EQ(to_hex(canonical_serialize(genesis)), g.at(0));
        EXPECT_EQ(genesis.hash.hex(), g.at(1));

        Block b;
        b.number = 1;
        b.parent_hash = genesis.hash;
        b.miner_id = "node-3";
        b.nonce = 0x0102030405060708ULL;
        b.difficulty = 1000;
        b.timestamp_ms = 750;
        seal(b);
        const auto& one = table.at("block1_node3");
        EXPECT_EQ(to_hex(canonical_serialize(b)), one.at(0));
        EXPECT_EQ(b.hash.hex(), one.at(1));
    }

    TEST(Block, TamperingIsDetected) {
        auto b = sample_block();
        ASSERT_TRUE(hash_matches(b));
        b.timestamp_ms += 1;
        EXPECT_FALSE(hash_matches(b));
    }

    TEST(Block, WireFormRoundTrips) {
        const auto b = sample_block();
        ByteWriter out;
        write_block(out, b);
        ByteReader in{out.bytes()};
        EXPECT_EQ(read_block(in), b);
        EXPECT_TRUE(in.empty());
    }

    TEST(Genesis, DistinctConfigsGiveDistinctHashes) {
        const auto base = make_genesis(GenesisConfig{1, 1000, {}});
        EXPECT_TRUE(base.is_genesis());
        EXPECT_TRUE(base.parent_hash.is_zero());
        EXPECT_EQ(base, make_genesis(GenesisConfig{1, 1000, {}}));
        EXPECT_NE(base.hash, make_genesis(GenesisConfig{2, 1000, {}}).hash);
        EXPECT_NE(base.hash, make_genesis(GenesisConfig{1, 1001, {}}).hash);
        EXPECT_NE(base.hash, make_genesis(GenesisConfig{1, 1000, {0x00}}).hash);
        EXPECT_NE(make_genesis(GenesisConfig{1, 1000, {0x00}}).hash, make_genesis(GenesisConfig{1, 1000, {0x01}}).hash);
    }

    TEST(Genesis, RejectsZeroDifficulty) {
        EXPECT_THROW(make_genesis(GenesisConfig{1, 0, {}}), Error);
    }

    TEST(PowValid, DifficultyOneAcceptsEveryHash) {
        Hash32 max;
        max.bytes.fill(0xff);
        EXPECT_TRUE(PowTarget{1}.accepts(max));
        EXPECT_TRUE(PowTarget{1}.accepts(Hash32{}));
    }

    TEST(PowValid, MaxHashFailsAtDifficultyTwo) {
        Hash32 max;
        max.bytes.fill(0xff);
        EXPECT_FALSE(PowTarget{2}.accepts(max));
        Hash32 half;  // 2^255 - 1 is the largest valid hash at D = 2
        half.bytes.fill(0xff);
        half.bytes[0] = 0x7f;
        EXPECT_TRUE(PowTarget{2}.accepts(half));
        half.bytes.fill(0);
        half.bytes[0] = 0x80;
        EXPECT_FALSE(PowTarget{2}.accepts(half));
    }

    TEST(PowValid, ZeroDifficultyIsInvalidParameter) {
        auto b = sample_block();
        b.difficulty = 0;
        try {
            (void)pow_valid(b);
            FAIL() << "expected an error";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
        }
    }

    TEST(PowValid, AgreesWithBigIntegerOracle) {
        std::mt19937_64 rng{2024};
        const cpp_int two_256 = cpp_int{1} << 256;
        for (int i = 0; i < 2000; ++i) {
            std::uint64_t difficulty = 1 + (rng() >> (rng() % 64));
            const PowTarget target{difficulty};
            auto h = random_hash(rng);
            // Shrink about half the samples into the interesting region near the threshold.
            if (i % 2 == 0) {
                for (std::size_t k = 0; k < (difficulty > 1 ? 8u : 0u) && k < 32; ++k) h.bytes[k] = 0;
            }
            EXPECT_EQ(target.accepts(h), oracle_pow_valid(h, difficulty)) << h.hex() << " D=" << difficulty;

            if (difficulty > 1) {
                // Exact boundary: threshold - 1 valid, threshold invalid.
                const cpp_int bound = two_256 / difficulty;
                EXPECT_EQ(as_integer(target.threshold()), bound);
                EXPECT_FALSE(target.accepts(target.threshold()));
                auto below = target.threshold();
                for (auto k = below.bytes.size(); k-- > 0;) {
                    if (below.bytes[k]-- != 0) break;
                }
                EXPECT_TRUE(target.accepts(below));
            }
        }
    }

    TEST(PowValid, AcceptanceRateMatchesOneOverDifficulty) {
        // 99% interval for p = 1/1000 over 100000 trials is roughly [74, 126] hits;
        // the stated window [1/1300, 1/770] is wider.
        Block b = sample_block();
        b.difficulty = 1000;
        std::mt19937_64 rng{7};
        const PowTarget target{b.difficulty};
        int hits = 0;
        constexpr int kTrials = 100000;
        for (int i = 0; i < kTrials; ++i) {
            b.nonce = rng();
            seal(b);
            hits += target.accepts(b.hash) ? 1 : 0;
        }
        const double rate = static_cast<double>(hits) / kTrials;
        EXPECT_GE(rate, 1.0 / 1300);
        EXPECT_LE(rate, 1.0 / 770);
    }

    TEST(HashColor, UsesFirstThreeBytes) {
        const auto h = Hash32::from_hex("a1b2c3" + std::string(58, '0'));
        EXPECT_EQ(hash_color(h), "#a1b2c3");
    }

}  // namespace
}  // namespace blockbox::chain
