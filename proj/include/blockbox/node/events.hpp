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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include <blockbox/chain/block.hpp>
#include <blockbox/wire/transport.hpp>

namespace blockbox::node {

struct Mined {
    chain::Block block;
    friend bool operator==(const Mined&, const Mined&) = default;
};

struct Received {
    chain::Block block;
    std::string from_peer;
    friend bool operator==(const Received&, const Received&) = default;
};

struct HeadChanged {
    chain::Hash32 old_hash{};
    chain::Hash32 new_hash{};
    std::uint64_t new_height{0};
    std::uint64_t reorg_depth{0};
    friend bool operator==(const HeadChanged&, const HeadChanged&) = default;
};

struct SyncStarted {
    std::string peer;
    friend bool operator==(const SyncStarted&, const SyncStarted&) = default;
};

struct SyncCompleted {
    std::uint64_t height{0};
    friend bool operator==(const SyncCompleted&, const SyncCompleted&) = default;
};

struct SyncFailed {
    std::string reason;
    friend bool operator==(const SyncFailed&, const SyncFailed&) = default;
};

using EventBody = std::variant<Mined, Received, HeadChanged, SyncStarted, SyncCompleted, SyncFailed>;

struct NodeEvent {
    wire::Micros time{0};
    std::string node_id;
    EventBody body;
    friend bool operator==(const NodeEvent&, const NodeEvent&) = default;
};

//! "mined", "received", "head_changed", "sync_started", "sync_completed", "sync_failed".
[[nodiscard]] std::string_view type_name(const EventBody& body) noexcept;

inline constexpr int kLogVersion = 1;

//! First line of every log: who wrote it and the genesis it started from.
struct LogHeader {
    int version{kLogVersion};
    std::string node_id;
    chain::Block genesis;
    friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

struct NodeLog {
    LogHeader header;
    std::vector<NodeEvent> events;
    friend bool operator==(const NodeLog&, const NodeLog&) = default;
};

// JSON forms. Hashes are lowercase hex; the nonce is a 16-digit hex string so that consumers
// limited to double-precision numbers read it exactly.
[[nodiscard]] nlohmann::json block_to_json(const chain::Block& block);
//! Throws log_corruption for missing fields or a hash that does not match the contents.
[[nodiscard]] chain::Block block_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json event_to_json(const NodeEvent& event);
[[nodiscard]] NodeEvent event_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json header_to_json(const LogHeader& header);
[[nodiscard]] LogHeader header_from_json(const nlohmann::json& j);

//! One JSON object per line: the header, then events in append order.
void write_log(std::ostream& out, const NodeLog& log);
//! Throws log_corruption (with the line number) on malformed input or an unknown version.
[[nodiscard]] NodeLog read_log(std::istream& in);
[[nodiscard]] NodeLog read_log_file(const std::string& path);
void write_log_file(const std::string& path, const NodeLog& log);

//! Streams a log line by line (header on construction), flushing after each record.
class LogWriter {
  public:
    LogWriter(std::ostream& out, const LogHeader& header);
    void append(const NodeEvent& event);

  private:
    std::ostream& out_;
};

}  // namespace blockbox::node
