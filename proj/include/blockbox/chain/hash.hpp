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

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <string_view>

#include <blockbox/common/bytes.hpp>

namespace blockbox::chain {

//! 32-byte digest. Ordering is lexicographic over the bytes, which equals numeric
//! ordering when the digest is read as a big-endian 256-bit integer.
struct Hash32 {
    std::array<std::uint8_t, 32> bytes{};

    static Hash32 from_hex(std::string_view hex);
    static Hash32 from_bytes(ByteView bytes);

    [[nodiscard]] std::string hex() const { return to_hex(bytes); }
    [[nodiscard]] std::string short_hex(std::size_t chars = 8) const { return hex().substr(0, chars); }
    [[nodiscard]] ByteView view() const noexcept { return bytes; }
    [[nodiscard]] bool is_zero() const noexcept;

    friend auto operator<=>(const Hash32&, const Hash32&) = default;
};

//! SHA-256 of the input.
Hash32 sha256(ByteView data);

}  // namespace blockbox::chain

template <>
struct std::hash<blockbox::chain::Hash32> {
    std::size_t operator()(const blockbox::chain::Hash32& h) const noexcept {
        std::size_t out;
        std::memcpy(&out, h.bytes.data(), sizeof(out));
        return out;
    }
};
