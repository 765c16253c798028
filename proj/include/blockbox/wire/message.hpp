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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <blockbox/chain/block.hpp>
#include <blockbox/common/bytes.hpp>

namespace blockbox::wire {

inline constexpr std::size_t kMaxFrameLength = std::size_t{16} << 20;
inline constexpr std::uint32_t kMaxBlocksPerRequest = 512;
inline constexpr std::size_t kMaxNodeIdLength = 128;

// Peer protocol.

//! Handshake and head advertisement. node_id lets an accepting socket learn who dialed it.
struct Status {
    std::uint64_t chain_id{0};
    chain::Hash32 genesis_hash{};
    chain::Hash32 head_hash{};
    std::uint64_t head_number{0};
    std::uint64_t total_difficulty{0};
    std::string node_id;

    friend bool operator==(const Status&, const Status&) = default;
};

struct NewBlock {
    chain::Block block;
    friend bool operator==(const NewBlock&, const NewBlock&) = default;
};

//! Canonical blocks with heights [from_number, from_number + count). count is in [1, 512].
struct GetBlocks {
    std::uint64_t from_number{0};
    std::uint32_t count{1};
    friend bool operator==(const GetBlocks&, const GetBlocks&) = default;
};

//! Strictly ascending by height; consecutive heights must be parent-linked.
struct Blocks {
    std::vector<chain::Block> blocks;
    friend bool operator==(const Blocks&, const Blocks&) = default;
};

struct Ping {
    friend bool operator==(const Ping&, const Ping&) = default;
};
struct Pong {
    friend bool operator==(const Pong&, const Pong&) = default;
};

// Control channel (orchestrator <-> node).

struct StartMining {
    friend bool operator==(const StartMining&, const StartMining&) = default;
};
struct StopMining {
    friend bool operator==(const StopMining&, const StopMining&) = default;
};
struct Shutdown {
    friend bool operator==(const Shutdown&, const Shutdown&) = default;
};
struct ReportStatus {
    friend bool operator==(const ReportStatus&, const ReportStatus&) = default;
};

struct BlockSummary {
    std::uint64_t number{0};
    chain::Hash32 hash{};
    friend bool operator==(const BlockSummary&, const BlockSummary&) = default;
};

struct StatusReport {
    std::string node_id;
    chain::Hash32 head_hash{};
    std::uint64_t head_number{0};
    std::uint64_t total_difficulty{0};
    //! Head first, then its parent; at most two entries.
    std::vector<BlockSummary> last_blocks;
    std::uint32_t peer_count{0};
    bool syncing{false};
    bool mining{false};
    std::uint64_t attempts{0};
    std::uint64_t events{0};

    friend bool operator==(const StatusReport&, const StatusReport&) = default;
};

using Message = std::variant<Status, NewBlock, GetBlocks, Blocks, Ping, Pong, StartMining, StopMining, Shutdown,
                             ReportStatus, StatusReport>;

enum class Tag : std::uint8_t {
    status = 0x01,
    new_block = 0x02,
    get_blocks = 0x03,
    blocks = 0x04,
    ping = 0x05,
    pong = 0x06,
    start_mining = 0x20,
    stop_mining = 0x21,
    shutdown = 0x22,
    report_status = 0x23,
    status_report = 0x24,
};

[[nodiscard]] Tag tag_of(const Message& message) noexcept;
[[nodiscard]] std::string_view name_of(const Message& message) noexcept;
[[nodiscard]] bool is_control(const Message& message) noexcept;

/**
 * Frame = u32 big-endian payload length, then the payload: one tag byte followed by the
 * variant's fields (see docs/wire-protocol.md). Throws invalid_parameter for messages that
 * violate their own invariants.
 */
Bytes encode(const Message& message);

//! Decodes exactly one frame. Errors: framing (truncated or trailing bytes), oversize
//! (declared length above 16 MiB), protocol (unknown tag or malformed payload).
Message decode(ByteView frame);

Message decode_payload(ByteView payload);

//! Incremental decoder for byte streams.
class FrameDecoder {
  public:
    void feed(ByteView bytes);
    //! Next complete message, if any. Oversize and protocol errors propagate.
    std::optional<Message> next();
    [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size() - consumed_; }

  private:
    Bytes buffer_;
    std::size_t consumed_{0};
};

}  // namespace blockbox::wire
