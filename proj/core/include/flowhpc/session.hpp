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
#ifndef FLOWHPC_SESSION_HPP_
#define FLOWHPC_SESSION_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/wire.hpp"

namespace flowhpc {

struct SessionOptions {
  FramingMode framing = FramingMode::kEager;
  std::chrono::milliseconds connect_timeout{30000};
};

struct SessionStats {
  uint64_t frames_sent = 0;
  uint64_t frames_received = 0;
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;
  // Payload bytes of the most recent reply, header excluded. The bandwidth
  // app asserts acknowledgement replies stay empty.
  uint64_t last_response_payload = 0;
};

// A client connection to one task server. Not thread safe; use one session
// per thread. Graphs ship once: run() registers by graph version on first
// use and reuses the server-side id afterwards.
//
// Server-side failures surface as FlowError. A failure inside a node
// (kernel error, missing feed) arrives as RemoteKernel with the offending
// node id and the original code spelled out in the message; store-level
// failures (Timeout, QueueClosed, UnknownVariable...) keep their own code.
class Session {
 public:
  explicit Session(const TaskAddress& target, SessionOptions opts = {});

  std::vector<uint8_t> ping(const std::vector<uint8_t>& payload);

  uint32_t register_graph(const Graph& g);
  std::vector<Tensor> run(const Graph& g, const std::vector<uint32_t>& fetches,
                          const FeedMap& feeds = {}, bool return_values = true);
  std::vector<Tensor> run_registered(uint32_t graph_id, const std::vector<uint32_t>& fetches,
                                     const FeedMap& feeds = {}, bool return_values = true);

  void enqueue(const std::string& queue, const Tensor& value, uint32_t capacity = 0,
               uint32_t timeout_ms = 0);
  Tensor dequeue(const std::string& queue, uint32_t capacity = 0, uint32_t timeout_ms = 0);
  void close_queue(const std::string& queue);

  void assign_add(const std::string& variable, const Tensor& delta);
  Tensor read_variable(const std::string& variable);

  // Returns (entry count, payload bytes) reported by the server.
  std::pair<uint32_t, uint64_t> checkpoint_save(const std::string& directory, uint64_t id);
  // Returns the number of variables restored.
  uint32_t checkpoint_restore(const std::string& directory, uint64_t id);

  // Stops the whole server, not just this session.
  void shutdown_server();

  const SessionStats& stats() const { return stats_; }
  const TaskAddress& target() const { return target_; }

 private:
  Frame roundtrip(MessageType type, const FramePieces& pieces);

  TaskAddress target_;
  SessionOptions opts_;
  Socket sock_;
  uint32_t next_request_id_ = 1;
  SessionStats stats_;
  // graph version -> server-side graph id
  std::map<uint64_t, uint32_t> registered_;
};

}  // namespace flowhpc

#endif  // FLOWHPC_SESSION_HPP_
