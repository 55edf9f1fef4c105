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
#include "flowhpc/sockets.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/uio.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>
#include <vector>

#include "flowhpc/error.hpp"

namespace flowhpc {

namespace {

std::string errno_text(int err) { return std::string(std::strerror(err)); }

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

struct AddrInfoHolder {
  addrinfo* res = nullptr;
  ~AddrInfoHolder() {
    if (res) ::freeaddrinfo(res);
  }
};

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::send_all(const void* data, size_t n) {
  const auto* p = static_cast<const uint8_t*>(data);
  while (n > 0) {
    ssize_t sent = ::send(fd_, p, n, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      throw_error(ErrorCode::kConnectionFailed, "send: " + errno_text(errno));
    }
    p += sent;
    n -= static_cast<size_t>(sent);
  }
}

void Socket::send_vecs(std::span<iovec> vecs) {
  size_t idx = 0;
  while (idx < vecs.size()) {
    msghdr msg{};
    msg.msg_iov = vecs.data() + idx;
    msg.msg_iovlen = vecs.size() - idx;
    ssize_t sent = ::sendmsg(fd_, &msg, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      throw_error(ErrorCode::kConnectionFailed, "sendmsg: " + errno_text(errno));
    }
    size_t left = static_cast<size_t>(sent);
    while (idx < vecs.size() && left >= vecs[idx].iov_len) {
      left -= vecs[idx].iov_len;
      ++idx;
    }
    if (idx < vecs.size() && left > 0) {
      vecs[idx].iov_base = static_cast<uint8_t*>(vecs[idx].iov_base) + left;
      vecs[idx].iov_len -= left;
    }
  }
}

void Socket::recv_all(void* data, size_t n) {
  if (!recv_all_or_eof(data, n))
    throw_error(ErrorCode::kConnectionFailed, "connection closed by peer");
}

bool Socket::recv_all_or_eof(void* data, size_t n) {
  auto* p = static_cast<uint8_t*>(data);
  size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd_, p + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_error(ErrorCode::kConnectionFailed, "recv: " + errno_text(errno));
    }
    if (r == 0) {
      if (got == 0) return false;
      throw_error(ErrorCode::kConnectionFailed,
                  "connection closed mid-message after " + std::to_string(got) + " bytes");
    }
    got += static_cast<size_t>(r);
  }
  return true;
}

Socket tcp_connect(const std::string& host, uint16_t port, std::chrono::milliseconds timeout) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error = "no attempt made";
  for (;;) {
    AddrInfoHolder ai;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &ai.res);
    if (rc != 0) {
      last_error = std::string("resolve ") + host + ": " + gai_strerror(rc);
    } else {
      for (addrinfo* a = ai.res; a; a = a->ai_next) {
        int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
        if (fd < 0) {
          last_error = "socket: " + errno_text(errno);
          continue;
        }
        if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
          set_nodelay(fd);
          return Socket(fd);
        }
        last_error = "connect " + host + ":" + std::to_string(port) + ": " + errno_text(errno);
        ::close(fd);
      }
    }
    if (std::chrono::steady_clock::now() >= deadline)
      throw_error(ErrorCode::kConnectionFailed, last_error + " (gave up after " +
                                                    std::to_string(timeout.count()) + " ms)");
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

Listener Listener::bind_and_listen(const std::string& host, uint16_t port) {
  AddrInfoHolder ai;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), std::to_string(port).c_str(),
                         &hints, &ai.res);
  if (rc != 0)
    throw_error(ErrorCode::kConnectionFailed,
                "resolve " + host + ": " + gai_strerror(rc));

  std::string last_error = "no usable address";
  for (addrinfo* a = ai.res; a; a = a->ai_next) {
    int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) {
      last_error = "socket: " + errno_text(errno);
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, a->ai_addr, a->ai_addrlen) != 0) {
      int err = errno;
      ::close(fd);
      if (err == EADDRINUSE)
        throw_error(ErrorCode::kAddressInUse,
                    host + ":" + std::to_string(port) + " already bound");
      last_error = "bind: " + errno_text(err);
      continue;
    }
    if (::listen(fd, 128) != 0) {
      last_error = "listen: " + errno_text(errno);
      ::close(fd);
      continue;
    }
    Listener l;
    l.fd_ = fd;
    sockaddr_storage ss{};
    socklen_t len = sizeof ss;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len) == 0) {
      if (ss.ss_family == AF_INET)
        l.port_ = ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
      else if (ss.ss_family == AF_INET6)
        l.port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
    }
    return l;
  }
  throw_error(ErrorCode::kIoError, "cannot listen on " + host + ": " + last_error);
}

Socket Listener::accept() {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      set_nodelay(fd);
      return Socket(fd);
    }
    if (errno == EINTR) continue;
    // EBADF or EINVAL after close/shutdown ends the accept loop.
    return Socket();
  }
}

void Listener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

uint16_t pick_free_port(const std::string& host) {
  Listener l = Listener::bind_and_listen(host, 0);
  return l.port();
}

}  // namespace flowhpc
