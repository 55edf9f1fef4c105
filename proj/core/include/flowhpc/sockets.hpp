/* Copyright 2026 The FlowHPC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FLOWHPC_SOCKETS_HPP_
#define FLOWHPC_SOCKETS_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

struct iovec;

namespace flowhpc {

// Move-only owner of a connected TCP socket. All sends use MSG_NOSIGNAL so
// a vanished peer surfaces as an error, not SIGPIPE.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  void send_all(const void* data, size_t n);
  // Gathered send; the kernel sees one stream either way.
  void send_vecs(std::span<iovec> vecs);
  // Reads exactly n bytes or throws ConnectionFailed.
  void recv_all(void* data, size_t n);
  // Like recv_all, but a clean EOF before the first byte returns false.
  bool recv_all_or_eof(void* data, size_t n);

 private:
  int fd_ = -1;
};

// Connects, retrying while the target refuses or does not resolve, until
// the deadline. Sets TCP_NODELAY.
Socket tcp_connect(const std::string& host, uint16_t port, std::chrono::milliseconds timeout);

class Listener {
 public:
  Listener() = default;
  Listener(Listener&& other) noexcept : fd_(other.fd_), port_(other.port_) { other.fd_ = -1; }
  Listener& operator=(Listener&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = other.fd_;
      port_ = other.port_;
      other.fd_ = -1;
    }
    return *this;
  }
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener() { close(); }

  // Port 0 asks the kernel for a free port; port() reports the real one.
  static Listener bind_and_listen(const std::string& host, uint16_t port);

  // Blocks. An invalid Socket means the listener was shut down.
  Socket accept();
  uint16_t port() const { return port_; }
  bool valid() const { return fd_ >= 0; }
  // Unblocks any accept in progress.
  void close();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Binds port 0, records the assigned port, closes. Small race window until
// the caller rebinds; fine for tests and single-host launches.
uint16_t pick_free_port(const std::string& host = "127.0.0.1");

}  // namespace flowhpc

#endif  // FLOWHPC_SOCKETS_HPP_
