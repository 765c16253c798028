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

#include <blockbox/wire/tcp_transport.hpp>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <iostream>

namespace blockbox::wire {

namespace {

    std::string errno_text() { return std::strerror(errno); }

    sockaddr_in resolve(const Address& address) {
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(address.port);
        if (inet_pton(AF_INET, address.host.c_str(), &addr.sin_addr) == 1) return addr;

        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* found = nullptr;
        if (getaddrinfo(address.host.c_str(), nullptr, &hints, &found) != 0 || found == nullptr) {
            raise(ErrorCode::unreachable, "cannot resolve " + address.host);
        }
        addr.sin_addr = reinterpret_cast<sockaddr_in*>(found->ai_addr)->sin_addr;
        freeaddrinfo(found);
        return addr;
    }

    void set_blocking(int fd, bool blocking) {
        const int flags = fcntl(fd, F_GETFL, 0);
        fcntl(fd, F_SETFL, blocking ? (flags & ~O_NONBLOCK) : (flags | O_NONBLOCK));
    }

    int open_stream(const Address& remote, std::chrono::milliseconds timeout) {
        const auto addr = resolve(remote);
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) raise(ErrorCode::unreachable, "socket: " + errno_text());
        set_blocking(fd, false);
        int rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
        if (rc != 0 && errno != EINPROGRESS) {
            const auto reason = errno_text();
            ::close(fd);
            raise(ErrorCode::unreachable, remote.str() + ": " + reason);
        }
        if (rc != 0) {
            pollfd p{fd, POLLOUT, 0};
            rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
            if (rc <= 0) {
                ::close(fd);
                raise(ErrorCode::unreachable, remote.str() + ": connect timed out");
            }
            int error = 0;
            socklen_t len = sizeof(error);
            getsockopt(fd, SOL_SOCKET, SO_ERROR, &error, &len);
            if (error != 0) {
                ::close(fd);
                raise(ErrorCode::unreachable, remote.str() + ": " + std::strerror(error));
            }
        }
        set_blocking(fd, true);
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return fd;
    }

}  // namespace

Address Address::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon + 1 == text.size()) {
        raise(ErrorCode::invalid_parameter, "address must be host:port, got '" + std::string{text} + "'");
    }
    Address out;
    out.host = std::string{text.substr(0, colon)};
    if (out.host.empty()) out.host = "127.0.0.1";
    unsigned long port = 0;
    try {
        port = std::stoul(std::string{text.substr(colon + 1)});
    } catch (const std::exception&) {
        raise(ErrorCode::invalid_parameter, "bad port in '" + std::string{text} + "'");
    }
    if (port > 65535) raise(ErrorCode::invalid_parameter, "port out of range");
    out.port = static_cast<std::uint16_t>(port);
    return out;
}

TcpPeer::TcpPeer(int fd, std::string remote_id) : fd_{fd}, remote_id_{std::move(remote_id)} {}

TcpPeer::~TcpPeer() {
    close();
    if (reader_.joinable()) {
        if (reader_.get_id() == std::this_thread::get_id()) {
            reader_.detach();
        } else {
            reader_.join();
        }
    }
    ::close(fd_);
}

void TcpPeer::send(const Message& message) {
    const auto frame = encode(message);
    std::lock_guard lock{write_mutex_};
    if (!open_) raise(ErrorCode::unreachable, "connection to " + remote_id_ + " is closed");
    std::size_t offset = 0;
    while (offset < frame.size()) {
        const auto n = ::send(fd_, frame.data() + offset, frame.size() - offset, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            open_ = false;
            ::shutdown(fd_, SHUT_RDWR);
            raise(ErrorCode::unreachable, "write to " + remote_id_ + " failed: " + errno_text());
        }
        offset += static_cast<std::size_t>(n);
    }
}

void TcpPeer::close() {
    if (open_.exchange(false)) ::shutdown(fd_, SHUT_RDWR);
}

Message TcpPeer::receive(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::array<std::uint8_t, 4096> buffer{};
    for (;;) {
        if (auto message = decoder_.next()) return std::move(*message);
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) raise(ErrorCode::unreachable, "timed out waiting for " + remote_id_);
        pollfd p{fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
        if (rc < 0 && errno == EINTR) continue;
        if (rc <= 0) raise(ErrorCode::unreachable, "timed out waiting for " + remote_id_);
        const auto n = ::recv(fd_, buffer.data(), buffer.size(), 0);
        if (n <= 0) {
            open_ = false;
            raise(ErrorCode::unreachable, "connection to " + remote_id_ + " closed");
        }
        decoder_.feed(ByteView{buffer.data(), static_cast<std::size_t>(n)});
    }
}

void TcpPeer::start(MessageFn on_message, CloseFn on_close) {
    on_message_ = std::move(on_message);
    on_close_ = std::move(on_close);
    reader_ = std::thread{[this] { read_loop(); }};
}

void TcpPeer::read_loop() {
    std::array<std::uint8_t, 16384> buffer{};
    try {
        for (;;) {
            while (auto message = decoder_.next()) on_message_(remote_id_, std::move(*message));
            const auto n = ::recv(fd_, buffer.data(), buffer.size(), 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            decoder_.feed(ByteView{buffer.data(), static_cast<std::size_t>(n)});
        }
    } catch (const Error& e) {
        std::clog << "[tcp] dropping " << remote_id_ << ": " << e.what() << '\n';
    }
    open_ = false;
    if (on_close_) on_close_(remote_id_);
}

std::unique_ptr<TcpPeer> dial(const Address& remote, std::chrono::milliseconds timeout) {
    return std::make_unique<TcpPeer>(open_stream(remote, timeout), remote.str());
}

Connected connect(const Status& local, const Address& remote, std::chrono::milliseconds timeout) {
    auto peer = dial(remote, timeout);
    peer->send(local);
    auto reply = peer->receive(timeout);
    auto* status = std::get_if<Status>(&reply);
    if (status == nullptr) raise(ErrorCode::protocol, "expected Status from " + remote.str());
    if (!compatible(local, *status)) {
        peer->close();
        raise(ErrorCode::incompatible_peer, remote.str() + " is on chain " + std::to_string(status->chain_id) +
                                                " genesis " + status->genesis_hash.short_hex());
    }
    peer->set_remote_id(status->node_id);
    return Connected{std::move(peer), *status};
}

TcpListener::TcpListener(const Address& bind, std::function<Status()> local_status, AcceptFn on_accept)
    : local_status_{std::move(local_status)}, on_accept_{std::move(on_accept)} {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) raise(ErrorCode::io, "socket: " + errno_text());
    int one = 1;
    setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    auto addr = resolve(bind);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 64) != 0) {
        const auto reason = errno_text();
        ::close(fd_);
        raise(ErrorCode::io, "cannot listen on " + bind.str() + ": " + reason);
    }
    socklen_t len = sizeof(addr);
    getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread{[this] { accept_loop(); }};
}

TcpListener::TcpListener(const Address& bind, AcceptFn on_accept) : TcpListener{bind, nullptr, std::move(on_accept)} {}

TcpListener::~TcpListener() {
    stop();
    ::close(fd_);
}

void TcpListener::stop() {
    if (running_.exchange(false)) {
        ::shutdown(fd_, SHUT_RDWR);
        if (thread_.joinable()) thread_.join();
    }
}

void TcpListener::accept_loop() {
    while (running_) {
        pollfd p{fd_, POLLIN, 0};
        if (::poll(&p, 1, 200) <= 0) continue;
        const int client = ::accept(fd_, nullptr, nullptr);
        if (client < 0) continue;
        int one = 1;
        setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        auto peer = std::make_unique<TcpPeer>(client, "incoming");
        if (!local_status_) {
            on_accept_(std::move(peer), std::nullopt);
            continue;
        }
        try {
            auto hello = peer->receive(kDefaultConnectTimeout);
            auto* remote = std::get_if<Status>(&hello);
            if (remote == nullptr) raise(ErrorCode::protocol, "expected Status first");
            const auto local = local_status_();
            peer->send(local);
            if (!compatible(local, *remote)) {
                std::clog << "[tcp] rejecting incompatible peer " << remote->node_id << '\n';
                continue;
            }
            peer->set_remote_id(remote->node_id);
            on_accept_(std::move(peer), *remote);
        } catch (const Error& e) {
            std::clog << "[tcp] handshake failed: " << e.what() << '\n';
        }
    }
}

}  // namespace blockbox::wire
