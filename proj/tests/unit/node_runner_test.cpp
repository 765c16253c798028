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

#include <chrono>
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include <blockbox/common/errors.hpp>
#include <blockbox/node/node_runner.hpp>

namespace blockbox::node {
namespace {

    using namespace std::chrono_literals;

    std::uint16_t unused_port() {
        wire::TcpListener probe{wire::Address{"127.0.0.1", 0}, [](auto, auto) {}};
        const auto port = probe.port();
        probe.stop();
        return port;
    }

    std::filesystem::path scratch(const std::string& name) {
        const auto dir = std::filesystem::temp_directory_path() / ("blockbox-runner-" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
        return dir / name;
    }

    NodeConfig config_for(const std::string& id, std::vector<PeerAddress> peers, std::uint64_t chain_id = 1) {
        NodeConfig c;
        c.node_id = id;
        c.genesis = {chain_id, 50, {}};
        c.seed = id.back();
        c.listen = {"127.0.0.1", 0};
        c.control = {"127.0.0.1", 0};
        c.peers = std::move(peers);
        c.hashrate_limit = 2000;
        c.log_path = scratch(id + ".jsonl").string();
        return c;
    }

    //! A runner on its own thread.
    struct Running {
        explicit Running(NodeConfig c) : runner{std::move(c)}, thread{[this] { exit_code = runner.run(); }} {}
        ~Running() {
            runner.stop();
            if (thread.joinable()) thread.join();
        }
        [[nodiscard]] wire::Address p2p() const { return {"127.0.0.1", runner.p2p_port()}; }

        wire::StatusReport report() {
            auto control = wire::dial({"127.0.0.1", runner.control_port()});
            control->send(wire::ReportStatus{});
            return std::get<wire::StatusReport>(control->receive(5s));
        }
        void command(const wire::Message& m) {
            auto control = wire::dial({"127.0.0.1", runner.control_port()});
            control->send(m);
            (void)report();  // the loop handles commands in order; wait for this one
        }
        void join() { thread.join(); }

        NodeRunner runner;
        int exit_code{-1};
        std::thread thread;
    };

    template <typename Pred>
    bool eventually(Pred pred, std::chrono::milliseconds limit = 10s) {
        const auto deadline = std::chrono::steady_clock::now() + limit;
        while (std::chrono::steady_clock::now() < deadline) {
            if (pred()) return true;
            std::this_thread::sleep_for(20ms);
        }
        return pred();
    }

    TEST(NodeRunner, BackoffDoublesFromOneSecondToThirty) {
        const std::vector<std::int64_t> expected{1000, 2000, 4000, 8000, 16000, 30000, 30000, 30000};
        for (std::uint32_t k = 0; k < expected.size(); ++k) EXPECT_EQ(redial_backoff(k).count(), expected[k]) << k;
        EXPECT_EQ(redial_backoff(1000).count(), 30000);
    }

    TEST(NodeRunner, ConfigJsonRoundTrip) {
        auto c = config_for("node-3", {{"node-1", {"127.0.0.1", 7001}}, {"node-4", {"10.0.0.2", 7009}}});
        c.genesis.extra = {1, 2, 3};
        EXPECT_EQ(node_config_from_json(to_json(c)), c);
        c.hashrate_limit.reset();
        EXPECT_EQ(node_config_from_json(to_json(c)), c);
        EXPECT_THROW((void)node_config_from_json(nlohmann::json{{"node_id", "x"}}), Error);
    }

    TEST(NodeRunner, TwoNodesMineAndAgreeOverTcp) {
        // node-0 dials node-1, so node-1 never uses the placeholder address it holds for node-0.
        Running one{config_for("node-1", {{"node-0", {"127.0.0.1", 1}}})};
        Running zero{config_for("node-0", {{"node-1", one.p2p()}})};
        ASSERT_TRUE(eventually([&] { return one.report().peer_count == 1 && zero.report().peer_count == 1; }));

        zero.command(wire::StartMining{});
        one.command(wire::StartMining{});
        ASSERT_TRUE(eventually([&] { return zero.report().head_number >= 5 && one.report().head_number >= 5; }));
        zero.command(wire::StopMining{});
        one.command(wire::StopMining{});
        ASSERT_TRUE(eventually([&] { return zero.report().head_hash == one.report().head_hash; }));
        const auto final_head = zero.report();
        EXPECT_FALSE(final_head.mining);
        EXPECT_EQ(final_head.last_blocks.size(), 2u);

        zero.command(wire::Shutdown{});
        one.command(wire::Shutdown{});
        zero.join();
        one.join();
        EXPECT_EQ(zero.exit_code, 0);
        EXPECT_EQ(one.exit_code, 0);

        const auto log0 = read_log_file(scratch("node-0.jsonl").string());
        const auto log1 = read_log_file(scratch("node-1.jsonl").string());
        EXPECT_EQ(log0.header.node_id, "node-0");
        std::size_t mined = 0;
        std::size_t received = 0;
        for (const auto* log : {&log0, &log1}) {
            for (const auto& e : log->events) {
                mined += std::holds_alternative<Mined>(e.body);
                received += std::holds_alternative<Received>(e.body);
            }
        }
        EXPECT_GE(mined, 5u);
        EXPECT_GT(received, 0u);
    }

    TEST(NodeRunner, RedialsUntilALateStartingPeerAppears) {
        const auto port = unused_port();
        Running zero{config_for("node-0", {{"node-1", {"127.0.0.1", port}}})};
        std::this_thread::sleep_for(300ms);  // first dial fails; the next waits a second
        auto late = config_for("node-1", {{"node-0", {"127.0.0.1", 1}}});
        late.listen.port = port;
        Running one{late};
        EXPECT_TRUE(eventually([&] { return zero.report().peer_count == 1; }, 5s));
    }

    TEST(NodeRunner, RefusesUnconfiguredPeers) {
        Running one{config_for("node-1", {{"node-0", {"127.0.0.1", 1}}})};
        Running stranger{config_for("node-0x", {{"node-1", one.p2p()}})};  // "node-0x" < "node-1": it dials
        std::this_thread::sleep_for(700ms);
        EXPECT_EQ(one.report().peer_count, 0u);
    }

    TEST(NodeRunner, PeerOnAnotherChainIsFatal) {
        Running one{config_for("node-1", {{"node-0", {"127.0.0.1", 1}}}, 1)};
        Running zero{config_for("node-0", {{"node-1", one.p2p()}}, 2)};
        zero.join();
        EXPECT_EQ(zero.exit_code, 2);
    }

}  // namespace
}  // namespace blockbox::node
