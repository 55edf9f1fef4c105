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
#include "flowhpc/server.hpp"

#include <sys/socket.h>

#include <algorithm>

#include "flowhpc/checkpoint.hpp"
#include "flowhpc/graph_io.hpp"
#include "flowhpc/wire.hpp"

namespace flowhpc {

Server::Server(TaskIdentity identity, ClusterSpec spec, std::vector<DeviceName> devices,
               ServerOptions opts)
    : identity_(std::move(identity)),
      spec_(std::move(spec)),
      devices_(std::move(devices)),
      opts_(opts),
      state_(std::make_unique<InMemoryStateStore>(opts.default_queue_capacity,
                                                  opts.default_timeout_ms)) {
  if (!spec_.contains(identity_))
    throw_error(ErrorCode::kIdentityNotInSpec,
                "task " + identity_.to_string() + " not present in cluster spec");
  if (std::find(devices_.begin(), devices_.end(), DeviceName::cpu(0)) == devices_.end())
    devices_.insert(devices_.begin(), DeviceName::cpu(0));
}

Server::~Server() { stop(); }

void Server::start() {
  TaskAddress addr = spec_.address_of(identity_);
  listener_ = Listener::bind_and_listen(addr.host, addr.port);
  port_ = listener_.port();
  accept_thread_ = std::thread([this] { accept_loop(); });
  // Teardown must run on a thread that is not a connection thread: the
  // Shutdown request arrives on one of those, and a thread cannot join
  // itself. Connection handlers only signal; this thread does the work.
  reaper_thread_ = std::thread([this] {
    {
      std::unique_lock lk(stop_mu_);
      stop_cv_.wait(lk, [this] { return stop_signaled_; });
    }
    teardown();
  });
}

void Server::accept_loop() {
  for (;;) {
    Socket sock = listener_.accept();
    if (!sock.valid() || stopping_.load()) return;
    std::lock_guard lk(conns_mu_);
    conn_threads_.emplace_back(
        [this](Socket s) { serve_connection(std::move(s)); }, std::move(sock));
  }
}

void Server::serve_connection(Socket sock) {
  {
    std::lock_guard lk(conns_mu_);
    live_fds_.insert(sock.fd());
  }
  struct FdGuard {
    Server* server;
    int fd;
    ~FdGuard() {
      std::lock_guard lk(server->conns_mu_);
      server->live_fds_.erase(fd);
    }
  } guard{this, sock.fd()};

  Frame frame;
  for (;;) {
    try {
      if (!read_frame_or_eof(sock, frame)) return;
    } catch (const FlowError&) {
      // Peer vanished mid-frame or sent a garbage length; nothing to answer.
      return;
    }

    FramePieces reply;
    MessageType reply_type = frame.type;
    try {
      switch (frame.type) {
        case MessageType::kPing:
          reply.body = frame.payload.data();
          reply.body_len = frame.payload.size();
          break;
        case MessageType::kRegisterGraph: {
          Graph g = deserialize_graph(frame.payload);
          uint32_t id;
          {
            std::lock_guard lk(graphs_mu_);
            id = static_cast<uint32_t>(graphs_.size());
            graphs_.push_back(std::make_shared<const Graph>(std::move(g)));
          }
          ByteWriter w;
          w.u32(id);
          reply.head = w.take();
          break;
        }
        case MessageType::kRunGraph: {
          wire::RunGraphRequest req = wire::decode_run_graph_request(frame.payload);
          std::shared_ptr<const Graph> g;
          {
            std::lock_guard lk(graphs_mu_);
            if (req.graph_id >= graphs_.size())
              throw_error(ErrorCode::kInvalidArgument,
                          "unregistered graph id " + std::to_string(req.graph_id));
            g = graphs_[req.graph_id];
          }
          RunOptions ro;
          ro.devices = devices_;
          ro.cpu_threads = opts_.cpu_threads;
          RunResult res = run_graph(*g, req.fetches, req.feeds, state_.get(), ro);
          if (req.return_values) reply.head = wire::encode_tensor_list(res.fetched);
          break;
        }
        case MessageType::kEnqueue: {
          wire::EnqueueRequest req = wire::decode_enqueue_request(frame.payload);
          if (req.subop == wire::kEnqueueClose)
            state_->close_queue(req.queue);
          else
            state_->enqueue(req.queue, req.value, req.capacity, req.timeout_ms);
          break;
        }
        case MessageType::kDequeue: {
          wire::DequeueRequest req = wire::decode_dequeue_request(frame.payload);
          Tensor t = state_->dequeue(req.queue, req.capacity, req.timeout_ms);
          reply.head = wire::encode_single_tensor(t);
          break;
        }
        case MessageType::kAssignAdd: {
          auto [name, delta] = wire::decode_named_tensor(frame.payload);
          state_->assign_add(name, delta);
          break;
        }
        case MessageType::kReadVariable: {
          std::string name = wire::decode_name(frame.payload);
          Tensor t = state_->read_variable(name);
          reply.head = wire::encode_single_tensor(t);
          break;
        }
        case MessageType::kCheckpointSave: {
          wire::CheckpointRequest req = wire::decode_checkpoint_request(frame.payload);
          CheckpointManifest m =
              checkpoint_save(state_->snapshot_variables(), req.directory, req.id);
          ByteWriter w;
          w.u32(static_cast<uint32_t>(m.entries.size()));
          w.u64(m.payload_bytes);
          reply.head = w.take();
          break;
        }
        case MessageType::kCheckpointRestore: {
          wire::CheckpointRequest req = wire::decode_checkpoint_request(frame.payload);
          auto vars = checkpoint_restore(req.directory, req.id);
          uint32_t count = static_cast<uint32_t>(vars.size());
          state_->replace_variables(std::move(vars));
          ByteWriter w;
          w.u32(count);
          reply.head = w.take();
          break;
        }
        case MessageType::kShutdown: {
          try {
            write_frame(sock, MessageType::kShutdown, frame.request_id, FramePieces{});
          } catch (const FlowError&) {
          }
          signal_stop();
          return;
        }
        case MessageType::kError:
          throw_error(ErrorCode::kProtocol, "client sent an Error frame");
      }
    } catch (const FlowError& e) {
      reply_type = MessageType::kError;
      reply = FramePieces{};
      reply.head =
          wire::encode_error({static_cast<uint8_t>(e.code()), e.node_id(), e.what()});
    } catch (const std::exception& e) {
      reply_type = MessageType::kError;
      reply = FramePieces{};
      reply.head = wire::encode_error(
          {static_cast<uint8_t>(ErrorCode::kUnknown), FlowError::kNoNode, e.what()});
    }

    try {
      write_frame(sock, reply_type, frame.request_id, reply);
    } catch (const FlowError&) {
      return;
    }
  }
}

void Server::signal_stop() {
  {
    std::lock_guard lk(stop_mu_);
    stop_signaled_ = true;
  }
  stop_cv_.notify_all();
}

void Server::teardown() {
  stopping_.store(true);
  listener_.close();
  if (accept_thread_.joinable()) accept_thread_.join();
  // Unblock queue waiters, then half-close connections parked in recv.
  // SHUT_RD only: a thread that already dequeued a request must still be
  // able to flush its reply before it sees EOF and exits. Threads
  // deregister their fd before closing it, so the sweep cannot touch a
  // recycled descriptor.
  state_->close_all_queues();
  {
    std::lock_guard lk(conns_mu_);
    for (int fd : live_fds_) ::shutdown(fd, SHUT_RD);
  }
  std::vector<std::thread> conns;
  {
    std::lock_guard lk(conns_mu_);
    conns.swap(conn_threads_);
  }
  for (auto& t : conns)
    if (t.joinable()) t.join();

  {
    std::lock_guard lk(stop_mu_);
    stop_done_ = true;
  }
  stop_cv_.notify_all();
}

void Server::wait() {
  std::unique_lock lk(stop_mu_);
  stop_cv_.wait(lk, [this] { return stop_done_; });
}

void Server::stop() {
  signal_stop();
  std::lock_guard lk(lifecycle_mu_);
  if (reaper_thread_.joinable()) reaper_thread_.join();
}

}  // namespace flowhpc
