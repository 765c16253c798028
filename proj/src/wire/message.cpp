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

#include <blockbox/wire/message.hpp>

#include <type_traits>

namespace blockbox::wire {

namespace {

    template <class... Ts>
    struct overloaded : Ts... {
        using Ts::operator()...;
    };
    template <class... Ts>
    overloaded(Ts...) -> overloaded<Ts...>;

    void write_hash(ByteWriter& out, const chain::Hash32& h) { out.raw(h.view()); }
    chain::Hash32 read_hash(ByteReader& in) { return chain::Hash32::from_bytes(in.raw(32)); }

    void check_blocks(const std::vector<chain::Block>& blocks, ErrorCode code) {
        if (blocks.size() > kMaxBlocksPerRequest) raise(code, "too many blocks in one message");
        for (std::size_t i = 1; i < blocks.size(); ++i) {
            const auto& prev = blocks[i - 1];
            const auto& cur = blocks[i];
            if (cur.number <= prev.number) raise(code, "blocks not ascending by height");
            if (cur.number == prev.number + 1 && cur.parent_hash != prev.hash) {
                raise(code, "contiguous blocks are not parent-linked");
            }
        }
    }

    void write_payload(ByteWriter& out, const Message& message) {
        out.u8(static_cast<std::uint8_t>(tag_of(message)));
        std::visit(overloaded{
                       [&](const Status& m) {
                           out.u64(m.chain_id);
                           write_hash(out, m.genesis_hash);
                           write_hash(out, m.head_hash);
                           out.u64(m.head_number).u64(m.total_difficulty).str(m.node_id);
                       },
                       [&](const NewBlock& m) { chain::write_block(out, m.block); },
                       [&](const GetBlocks& m) {
                           if (m.count == 0 || m.count > kMaxBlocksPerRequest) {
                               raise(ErrorCode::invalid_parameter, "GetBlocks.count must be in [1, 512]");
                           }
                           out.u64(m.from_number).u32(m.count);
                       },
                       [&](const Blocks& m) {
                           check_blocks(m.blocks, ErrorCode::invalid_parameter);
                           out.u32(static_cast<std::uint32_t>(m.blocks.size()));
                           for (const auto& b : m.blocks) chain::write_block(out, b);
                       },
                       [&](const StatusReport& m) {
                           if (m.last_blocks.size() > 2) raise(ErrorCode::invalid_parameter, "at most two recent blocks");
                           out.str(m.node_id);
                           write_hash(out, m.head_hash);
                           out.u64(m.head_number).u64(m.total_difficulty);
                           out.u8(static_cast<std::uint8_t>(m.last_blocks.size()));
                           for (const auto& s : m.last_blocks) {
                               out.u64(s.number);
                               write_hash(out, s.hash);
                           }
                           out.u32(m.peer_count);
                           out.u8(static_cast<std::uint8_t>((m.syncing ? 1 : 0) | (m.mining ? 2 : 0)));
                           out.u64(m.attempts).u64(m.events);
                       },
                       [](const auto&) {},
                   },
                   message);
    }

}  // namespace

Tag tag_of(const Message& message) noexcept {
    return std::visit(overloaded{
                          [](const Status&) { return Tag::status; },
                          [](const NewBlock&) { return Tag::new_block; },
                          [](const GetBlocks&) { return Tag::get_blocks; },
                          [](const Blocks&) { return Tag::blocks; },
                          [](const Ping&) { return Tag::ping; },
                          [](const Pong&) { return Tag::pong; },
                          [](const StartMining&) { return Tag::start_mining; },
                          [](const StopMining&) { return Tag::stop_mining; },
                          [](const Shutdown&) { return Tag::shutdown; },
                          [](const ReportStatus&) { return Tag::report_status; },
                          [](const StatusReport&) { return Tag::status_report; },
                      },
                      message);
}

std::string_view name_of(const Message& message) noexcept {
    switch (tag_of(message)) {
        case Tag::status:
            return "Status";
        case Tag::new_block:
            return "NewBlock";
        case Tag::get_blocks:
            return "GetBlocks";
        case Tag::blocks:
            return "Blocks";
        case Tag::ping:
            return "Ping";
        case Tag::pong:
            return "Pong";
        case Tag::start_mining:
            return "StartMining";
        case Tag::stop_mining:
            return "StopMining";
        case Tag::shutdown:
            return "Shutdown";
        case Tag::report_status:
            return "ReportStatus";
        case Tag::status_report:
            return "StatusReport";
    }
    return "?";
}

bool is_control(const Message& message) noexcept { return static_cast<std::uint8_t>(tag_of(message)) >= 0x20; }

Bytes encode(const Message& message) {
    ByteWriter payload;
    write_payload(payload, message);
    if (payload.size() > kMaxFrameLength) raise(ErrorCode::oversize, "frame exceeds 16 MiB");
    ByteWriter frame{payload.size() + 4};
    frame.u32(static_cast<std::uint32_t>(payload.size())).raw(payload.bytes());
    return std::move(frame).take();
}

Message decode_payload(ByteView payload) {
    ByteReader in{payload, ErrorCode::protocol};
    const auto tag = static_cast<Tag>(in.u8());
    Message out;
    switch (tag) {
        case Tag::status: {
            Status m;
            m.chain_id = in.u64();
            m.genesis_hash = read_hash(in);
            m.head_hash = read_hash(in);
            m.head_number = in.u64();
            m.total_difficulty = in.u64();
            m.node_id = in.str(kMaxNodeIdLength);
            out = std::move(m);
            break;
        }
        case Tag::new_block:
            out = NewBlock{chain::read_block(in)};
            break;
        case Tag::get_blocks: {
            GetBlocks m;
            m.from_number = in.u64();
            m.count = in.u32();
            if (m.count == 0 || m.count > kMaxBlocksPerRequest) raise(ErrorCode::protocol, "GetBlocks.count out of range");
            out = m;
            break;
        }
        case Tag::blocks: {
            const auto count = in.u32();
            if (count > kMaxBlocksPerRequest) raise(ErrorCode::protocol, "too many blocks in one message");
            Blocks m;
            m.blocks.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) m.blocks.push_back(chain::read_block(in));
            check_blocks(m.blocks, ErrorCode::protocol);
            out = std::move(m);
            break;
        }
        case Tag::ping:
            out = Ping{};
            break;
        case Tag::pong:
            out = Pong{};
            break;
        case Tag::start_mining:
            out = StartMining{};
            break;
        case Tag::stop_mining:
            out = StopMining{};
            break;
        case Tag::shutdown:
            out = Shutdown{};
            break;
        case Tag::report_status:
            out = ReportStatus{};
            break;
        case Tag::status_report: {
            StatusReport m;
            m.node_id = in.str(kMaxNodeIdLength);
            m.head_hash = read_hash(in);
            m.head_number = in.u64();
            m.total_difficulty = in.u64();
            const auto recent = in.u8();
            if (recent > 2) raise(ErrorCode::protocol, "at most two recent blocks");
            for (std::uint8_t i = 0; i < recent; ++i) {
                BlockSummary s;
                s.number = in.u64();
                s.hash = read_hash(in);
                m.last_blocks.push_back(s);
            }
            m.peer_count = in.u32();
            const auto flags = in.u8();
            if (flags > 3) raise(ErrorCode::protocol, "unknown status flags");
            m.syncing = (flags & 1) != 0;
            m.mining = (flags & 2) != 0;
            m.attempts = in.u64();
            m.events = in.u64();
            out = std::move(m);
            break;
        }
        default:
            raise(ErrorCode::protocol, "unknown message tag " + std::to_string(static_cast<int>(tag)));
    }
    if (!in.empty()) raise(ErrorCode::protocol, "trailing bytes in payload");
    return out;
}

Message decode(ByteView frame) {
    ByteReader in{frame, ErrorCode::framing};
    const auto length = in.u32();
    if (length > kMaxFrameLength) raise(ErrorCode::oversize, "declared frame length " + std::to_string(length));
    if (length == 0) raise(ErrorCode::protocol, "empty payload");
    const auto payload = in.raw(length);
    if (!in.empty()) raise(ErrorCode::framing, "trailing bytes after frame");
    return decode_payload(payload);
}

void FrameDecoder::feed(ByteView bytes) {
    if (consumed_ > 0 && consumed_ == buffer_.size()) {
        buffer_.clear();
        consumed_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameDecoder::next() {
    const auto available = buffer_.size() - consumed_;
    if (available < 4) return std::nullopt;
    const auto* p = buffer_.data() + consumed_;
    const std::uint32_t length = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                                 (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
    if (length > kMaxFrameLength) raise(ErrorCode::oversize, "declared frame length " + std::to_string(length));
    if (length == 0) raise(ErrorCode::protocol, "empty payload");
    if (available < 4 + std::size_t{length}) return std::nullopt;
    auto message = decode_payload(ByteView{p + 4, length});
    consumed_ += 4 + std::size_t{length};
    if (consumed_ > (std::size_t{1} << 20) && consumed_ * 2 > buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(consumed_));
        consumed_ = 0;
    }
    return message;
}

}  // namespace blockbox::wire
