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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <blockbox/common/errors.hpp>

namespace blockbox {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);

//! Accepts an optional "0x" prefix. Throws invalid_input on odd length or non-hex digits.
Bytes from_hex(std::string_view hex);

//! Appends fixed-width big-endian integers and raw bytes.
class ByteWriter {
  public:
    ByteWriter() = default;
    explicit ByteWriter(std::size_t reserve) { buffer_.reserve(reserve); }

    ByteWriter& u8(std::uint8_t value);
    ByteWriter& u32(std::uint32_t value);
    ByteWriter& u64(std::uint64_t value);
    ByteWriter& raw(ByteView bytes);
    //! u32 length followed by the bytes.
    ByteWriter& str(std::string_view text);

    [[nodiscard]] std::size_t size() const noexcept { return buffer_.size(); }
    [[nodiscard]] const Bytes& bytes() const& noexcept { return buffer_; }
    [[nodiscard]] Bytes take() && noexcept { return std::move(buffer_); }

  private:
    Bytes buffer_;
};

//! Big-endian cursor over a byte view. Running past the end throws an Error with the
//! code supplied at construction, so each format can classify truncation its own way.
class ByteReader {
  public:
    explicit ByteReader(ByteView bytes, ErrorCode on_short = ErrorCode::protocol) noexcept
        : bytes_{bytes}, on_short_{on_short} {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView raw(std::size_t count);
    std::string str(std::size_t max_length);

    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - offset_; }
    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
    [[nodiscard]] bool empty() const noexcept { return remaining() == 0; }

  private:
    void need(std::size_t count) const;

    ByteView bytes_;
    std::size_t offset_{0};
    ErrorCode on_short_;
};

}  // namespace blockbox
