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

#include <map>
#include <string>

#include <blockbox/wire/message.hpp>
#include <support/chain_fixtures.hpp>

namespace blockbox::testing {

//! The messages frozen in fixtures/wire_golden.txt.
inline std::map<std::string, wire::Message> golden_messages() {
    using namespace wire;
    const auto genesis = chain::make_genesis(chain::GenesisConfig{1, 1000, {}});
    chain::Block one;
    one.number = 1;
    one.parent_hash = genesis.hash;
    one.miner_id = "node-3";
    one.nonce = 0x0102030405060708ULL;
    one.difficulty = 1000;
    one.timestamp_ms = 750;
    chain::seal(one);

    const auto easy = chain::make_genesis(chain::GenesisConfig{7, 1, {0xca, 0xfe}});
    const auto e1 = child_of(easy, "a");
    const auto e2 = child_of(e1, "b");

    std::map<std::string, Message> out;
    out["ping"] = Ping{};
    out["pong"] = Pong{};
    out["status_zero"] = Status{};
    out["status"] = Status{1, genesis.hash, one.hash, 1, 2000, "node-3"};
    out["new_block"] = NewBlock{one};
    out["get_blocks"] = GetBlocks{129, 128};
    out["blocks"] = Blocks{{e1, e2}};
    out["blocks_empty"] = Blocks{};
    out["start_mining"] = StartMining{};
    out["stop_mining"] = StopMining{};
    out["shutdown"] = Shutdown{};
    out["report_status"] = ReportStatus{};
    out["status_report"] = StatusReport{"node-3", one.hash, 1, 2000, {{1, one.hash}, {0, genesis.hash}}, 2, false, true, 123456, 9};
    return out;
}

}  // namespace blockbox::testing
