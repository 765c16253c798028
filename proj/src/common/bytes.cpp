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

#include <blockbox/common/bytes.hpp>

#include <array>

namespace blockbox {

namespace {

    constexpr std::array<char, 16> kHexDigits{'0', '1', '2', '3', '4', '5', '6', '7',
                                              '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};

    int hex_value(char c) noexcept {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    }

}  // namespace

std::string to_hex(ByteView bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.size() % 2 != 0) raise(ErrorCode::invalid_input, "odd-length hex string");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]);
        const int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) raise(ErrorCode::invalid_input, "invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

ByteWriter& ByteWriter::u8(std::uint8_t value) {
    buffer_.push_back(value);
    return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t value) {
    for (int shift = 24; shift >= 0; shift -= 8) buffer_.push_back(static_cast<std::uint8_t>(value >> shift));
    return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t value) {
    for (int shift = 56; shift >= 0; shift -= 8) buffer_.push_back(static_cast<std::uint8_t>(value >> shift));
    return *this;
}

ByteWriter& ByteWriter::raw(ByteView bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    return *this;
}

ByteWriter& ByteWriter::str(std::string_view text) {
    u32(static_cast<std::uint32_t>(text.size()));
    buffer_.insert(buffer_.end(), text.begin(), text.end());
    return *this;
}

void ByteReader::need(std::size_t count) const {
    if (remaining() < count) {
        raise(on_short_, "need " + std::to_string(count) + " bytes, " + std::to_string(remaining()) + " left");
    }
}

std::uint8_t ByteReader::u8() {
    need(1);
    return bytes_[offset_++];
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t value{0};
    for (int i = 0; i < 4; ++i) value = (value << 8) | bytes_[offset_++];
    return value;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t value{0};
    for (int i = 0; i < 8; ++i) value = (value << 8) | bytes_[offset_++];
    return value;
}

ByteView ByteReader::raw(std::size_t count) {
    need(count);
    auto view = bytes_.subspan(offset_, count);
    offset_ += count;
    return view;
}

std::string ByteReader::str(std::size_t max_length) {
    const auto length = u32();
    if (length > max_length) {
        raise(ErrorCode::protocol, "string length " + std::to_string(length) + " exceeds " + std::to_string(max_length));
    }
    auto view = raw(length);
    return {view.begin(), view.end()};
}

}  // namespace blockbox
