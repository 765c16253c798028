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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include <blockbox/wire/transport.hpp>

namespace blockbox::wire {

struct Address {
    std::string host{"127.0.0.1"};
    std::uint16_t port{0};

    //! "host:port"; throws invalid_parameter.
    static Address parse(std::string_view text);
    [[nodiscard]] std::string str() const { return host + ":" + std::to_string(port); }

    friend bool operator==(const Address&, const Address&) = default;
};

inline constexpr std::chrono::milliseconds kDefaultConnectTimeout{5000};

/**
 * A framed TCP stream. Before start() the owner may call receive() synchronously (used for
 * handshakes and control replies); after start() a reader thread delivers every inbound
 * message to the callback until the socket closes.
 */
class TcpPeer final : public PeerHandle {
  public:
    using MessageFn = std::function<void(const std::string& peer, Message message)>;
    using CloseFn = std::function<void(const std::string& peer)>;

    TcpPeer(int fd, std::string remote_id);
    ~TcpPeer() override;

    TcpPeer(const TcpPeer&) = delete;
    TcpPeer& operator=(const TcpPeer&) = delete;

    [[nodiscard]] const std::string& remote_id() const override { return remote_id_; }
    void set_remote_id(std::string id) { remote_id_ = std::move(id); }
    [[nodiscard]] bool is_open() const override { return open_.load(); }

    //! Throws unreachable if the socket is closed or the write fails.
    void send(const Message& message) override;
    void close() override;

    //! Throws unreachable on timeout or EOF.
    Message receive(std::chrono::milliseconds timeout);

    void start(MessageFn on_message, CloseFn on_close);

  private:
    void read_loop();

    int fd_;
    std::string remote_id_;
    std::atomic<bool> open_{true};
    std::mutex write_mutex_;
    FrameDecoder decoder_;
    MessageFn on_message_;
    CloseFn on_close_;
    std::thread reader_;
};

struct Connected {
    std::unique_ptr<TcpPeer> peer;
    Status remote;
};

//! Opens a stream without a handshake (control channel). Throws unreachable.
std::unique_ptr<TcpPeer> dial(const Address& remote, std::chrono::milliseconds timeout = kDefaultConnectTimeout);

//! Dials, sends our Status, and waits for the peer's. Throws unreachable on failure or
//! timeout, incompatible_peer on chain id or genesis mismatch.
Connected connect(const Status& local, const Address& remote,
                  std::chrono::milliseconds timeout = kDefaultConnectTimeout);

/**
 * Accept loop on its own thread. With a status provider, each accepted socket must complete
 * the Status handshake within the connect timeout; incompatible peers get our Status back and
 * are closed without being handed to the callback.
 */
class TcpListener {
  public:
    using AcceptFn = std::function<void(std::unique_ptr<TcpPeer> peer, std::optional<Status> remote)>;

    TcpListener(const Address& bind, std::function<Status()> local_status, AcceptFn on_accept);
    TcpListener(const Address& bind, AcceptFn on_accept);
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    [[nodiscard]] std::uint16_t port() const noexcept { return port_; }
    void stop();

  private:
    void accept_loop();

    int fd_{-1};
    std::uint16_t port_{0};
    std::function<Status()> local_status_;
    AcceptFn on_accept_;
    std::atomic<bool> running_{true};
    std::thread thread_;
};

}  // namespace blockbox::wire
