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

#include <blockbox/node/events.hpp>

#include <fstream>
#include <istream>
#include <ostream>

#include <blockbox/common/errors.hpp>

namespace blockbox::node {

namespace {

    template <class... Fs>
    struct overloaded : Fs... {
        using Fs::operator()...;
    };
    template <class... Fs>
    overloaded(Fs...) -> overloaded<Fs...>;

    chain::Hash32 hash_field(const nlohmann::json& j, const char* key) {
        return chain::Hash32::from_hex(j.at(key).get<std::string>());
    }

    std::string nonce_hex(std::uint64_t nonce) {
        ByteWriter w;
        w.u64(nonce);
        return to_hex(w.bytes());
    }

    std::uint64_t nonce_from_hex(const std::string& text) {
        const auto bytes = from_hex(text);
        if (bytes.size() != 8) raise(ErrorCode::log_corruption, "nonce must be 16 hex digits");
        ByteReader r{bytes, ErrorCode::log_corruption};
        return r.u64();
    }

    template <class Fn>
    auto guarded(Fn fn) {
        try {
            return fn();
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::log_corruption, e.what());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::log_corruption) throw;
            raise(ErrorCode::log_corruption, e.what());
        }
    }

}  // namespace

std::string_view type_name(const EventBody& body) noexcept {
    return std::visit(overloaded{
                          [](const Mined&) { return std::string_view{"mined"}; },
                          [](const Received&) { return std::string_view{"received"}; },
                          [](const HeadChanged&) { return std::string_view{"head_changed"}; },
                          [](const SyncStarted&) { return std::string_view{"sync_started"}; },
                          [](const SyncCompleted&) { return std::string_view{"sync_completed"}; },
                          [](const SyncFailed&) { return std::string_view{"sync_failed"}; },
                      },
                      body);
}

nlohmann::json block_to_json(const chain::Block& block) {
    return {
        {"number", block.number},
        {"hash", block.hash.hex()},
        {"parent", block.parent_hash.hex()},
        {"miner", block.miner_id},
        {"nonce", nonce_hex(block.nonce)},
        {"difficulty", block.difficulty},
        {"timestamp_ms", block.timestamp_ms},
    };
}

chain::Block block_from_json(const nlohmann::json& j) {
    return guarded([&] {
        chain::Block b;
        b.number = j.at("number").get<std::uint64_t>();
        b.parent_hash = hash_field(j, "parent");
        b.miner_id = j.at("miner").get<std::string>();
        b.nonce = nonce_from_hex(j.at("nonce").get<std::string>());
        b.difficulty = j.at("difficulty").get<std::uint64_t>();
        b.timestamp_ms = j.at("timestamp_ms").get<std::uint64_t>();
        b.hash = hash_field(j, "hash");
        if (!chain::hash_matches(b)) raise(ErrorCode::log_corruption, "block " + b.hash.hex() + " does not hash to its id");
        return b;
    });
}

nlohmann::json event_to_json(const NodeEvent& event) {
    nlohmann::json j{{"t_us", event.time.count()}, {"node", event.node_id}, {"type", type_name(event.body)}};
    std::visit(overloaded{
                   [&](const Mined& e) { j["block"] = block_to_json(e.block); },
                   [&](const Received& e) {
                       j["block"] = block_to_json(e.block);
                       j["from"] = e.from_peer;
                   },
                   [&](const HeadChanged& e) {
                       j["old"] = e.old_hash.hex();
                       j["new"] = e.new_hash.hex();
                       j["height"] = e.new_height;
                       j["reorg_depth"] = e.reorg_depth;
                   },
                   [&](const SyncStarted& e) { j["peer"] = e.peer; },
                   [&](const SyncCompleted& e) { j["height"] = e.height; },
                   [&](const SyncFailed& e) { j["reason"] = e.reason; },
               },
               event.body);
    return j;
}

NodeEvent event_from_json(const nlohmann::json& j) {
    return guarded([&] {
        NodeEvent e;
        e.time = wire::Micros{j.at("t_us").get<std::int64_t>()};
        e.node_id = j.at("node").get<std::string>();
        const auto type = j.at("type").get<std::string>();
        if (type == "mined") {
            e.body = Mined{block_from_json(j.at("block"))};
        } else if (type == "received") {
            e.body = Received{block_from_json(j.at("block")), j.at("from").get<std::string>()};
        } else if (type == "head_changed") {
            e.body = HeadChanged{hash_field(j, "old"), hash_field(j, "new"), j.at("height").get<std::uint64_t>(),
                                 j.at("reorg_depth").get<std::uint64_t>()};
        } else if (type == "sync_started") {
            e.body = SyncStarted{j.at("peer").get<std::string>()};
        } else if (type == "sync_completed") {
            e.body = SyncCompleted{j.at("height").get<std::uint64_t>()};
        } else if (type == "sync_failed") {
            e.body = SyncFailed{j.at("reason").get<std::string>()};
        } else {
            raise(ErrorCode::log_corruption, "unknown event type '" + type + "'");
        }
        return e;
    });
}

nlohmann::json header_to_json(const LogHeader& header) {
    return {{"type", "log_header"},
            {"version", header.version},
            {"node", header.node_id},
            {"genesis", block_to_json(header.genesis)}};
}

LogHeader header_from_json(const nlohmann::json& j) {
    return guarded([&] {
        if (j.at("type").get<std::string>() != "log_header") raise(ErrorCode::log_corruption, "missing log header");
        LogHeader h;
        h.version = j.at("version").get<int>();
        if (h.version != kLogVersion) {
            raise(ErrorCode::log_corruption, "unsupported log version " + std::to_string(h.version));
        }
        h.node_id = j.at("node").get<std::string>();
        h.genesis = block_from_json(j.at("genesis"));
        return h;
    });
}

void write_log(std::ostream& out, const NodeLog& log) {
    out << header_to_json(log.header).dump() << '\n';
    for (const auto& e : log.events) out << event_to_json(e).dump() << '\n';
}

NodeLog read_log(std::istream& in) {
    NodeLog log;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!have_header) {
                log.header = header_from_json(j);
                have_header = true;
            } else {
                log.events.push_back(event_from_json(j));
            }
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::log_corruption, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            raise(ErrorCode::log_corruption, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) raise(ErrorCode::log_corruption, "empty log");
    return log;
}

NodeLog read_log_file(const std::string& path) {
    std::ifstream in{path};
    if (!in) raise(ErrorCode::io, "cannot open " + path);
    return read_log(in);
}

void write_log_file(const std::string& path, const NodeLog& log) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) raise(ErrorCode::io, "cannot write " + path);
    write_log(out, log);
    if (!out) raise(ErrorCode::io, "write failed: " + path);
}

LogWriter::LogWriter(std::ostream& out, const LogHeader& header) : out_{out} {
    out_ << header_to_json(header).dump() << '\n' << std::flush;
}

void LogWriter::append(const NodeEvent& event) { out_ << event_to_json(event).dump() << '\n' << std::flush; }

}  // namespace blockbox::node
