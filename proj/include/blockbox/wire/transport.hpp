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

#include <chrono>
#include <string>

#include <blockbox/wire/message.hpp>

namespace blockbox::wire {

using Micros = std::chrono::microseconds;

class Clock {
  public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual Micros now() const = 0;
};

//! Monotonic wall clock measured from construction.
class WallClock final : public Clock {
  public:
    WallClock() : start_{std::chrono::steady_clock::now()} {}
    [[nodiscard]] Micros now() const override {
        return std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now() - start_);
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

//! Outbound side of a node: addressed by peer node id.
class Outbox {
  public:
    virtual ~Outbox() = default;
    virtual void send(const std::string& peer, const Message& message) = 0;
    virtual void disconnect(const std::string& peer) = 0;
};

//! One established, handshaken connection. Reliable and ordered.
class PeerHandle {
  public:
    virtual ~PeerHandle() = default;
    [[nodiscard]] virtual const std::string& remote_id() const = 0;
    [[nodiscard]] virtual bool is_open() const = 0;
    virtual void send(const Message& message) = 0;
    virtual void close() = 0;
};

//! Handshake rule shared by both transports: same chain id and genesis hash.
[[nodiscard]] inline bool compatible(const Status& a, const Status& b) noexcept {
    return a.chain_id == b.chain_id && a.genesis_hash == b.genesis_hash;
}

}  // namespace blockbox::wire
