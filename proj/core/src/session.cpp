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
#include "flowhpc/session.hpp"

#include "flowhpc/graph_io.hpp"

namespace flowhpc {

Session::Session(const TaskAddress& target, SessionOptions opts)
    : target_(target), opts_(opts), sock_(tcp_connect(target.host, target.port,
                                                      opts.connect_timeout)) {}

Frame Session::roundtrip(MessageType type, const FramePieces& pieces) {
  uint32_t id = next_request_id_++;
  write_frame(sock_, type, id, pieces, opts_.framing);
  stats_.frames_sent++;
  stats_.bytes_sent += kFrameHeaderBytes + pieces.payload_size();

  Frame reply = read_frame(sock_);
  stats_.frames_received++;
  stats_.bytes_received += kFrameHeaderBytes + reply.payload.size();
  stats_.last_response_payload = reply.payload.size();
  if (reply.request_id != id)
    throw_error(ErrorCode::kProtocol, "response id " + std::to_string(reply.request_id) +
                                          " does not match request " + std::to_string(id));
  if (reply.type == MessageType::kError) {
    wire::ErrorBody err = wire::decode_error(reply.payload);
    ErrorCode code = err.code <= static_cast<uint8_t>(ErrorCode::kProtocol)
                         ? static_cast<ErrorCode>(err.code)
                         : ErrorCode::kUnknown;
    if (err.node_id != FlowError::kNoNode)
      throw FlowError(ErrorCode::kRemoteKernel,
                      std::string(error_code_name(code)) + " at node " +
                          std::to_string(err.node_id) + ": " + err.message,
                      err.node_id);
    throw FlowError(code, err.message);
  }
  if (reply.type != type)
    throw_error(ErrorCode::kProtocol,
                std::string("response type ") + message_type_name(reply.type) +
                    " for a " + message_type_name(type) + " request");
  return reply;
}

std::vector<uint8_t> Session::ping(const std::vector<uint8_t>& payload) {
  FramePieces p;
  p.body = payload.data();
  p.body_len = payload.size();
  return roundtrip(MessageType::kPing, p).payload;
}

uint32_t Session::register_graph(const Graph& g) {
  auto it = registered_.find(g.version());
  if (it != registered_.end()) return it->second;
  FramePieces p;
  p.head = serialize_graph(g);
  Frame reply = roundtrip(MessageType::kRegisterGraph, p);
  ByteReader r(reply.payload);
  uint32_t id = r.u32();
  registered_.emplace(g.version(), id);
  return id;
}

std::vector<Tensor> Session::run(const Graph& g, const std::vector<uint32_t>& fetches,
                                 const FeedMap& feeds, bool return_values) {
  return run_registered(register_graph(g), fetches, feeds, return_values);
}

std::vector<Tensor> Session::run_registered(uint32_t graph_id,
                                            const std::vector<uint32_t>& fetches,
                                            const FeedMap& feeds, bool return_values) {
  wire::RunGraphRequest req;
  req.graph_id = graph_id;
  req.return_values = return_values;
  req.fetches = fetches;
  req.feeds = feeds;
  Frame reply = roundtrip(MessageType::kRunGraph, wire::encode_run_graph_request(req));
  if (!return_values) return {};
  return wire::decode_tensor_list(reply.payload);
}

void Session::enqueue(const std::string& queue, const Tensor& value, uint32_t capacity,
                      uint32_t timeout_ms) {
  wire::EnqueueRequest req;
  req.queue = queue;
  req.subop = wire::kEnqueuePush;
  req.capacity = capacity;
  req.timeout_ms = timeout_ms;
  req.value = value;
  roundtrip(MessageType::kEnqueue, wire::encode_enqueue_request(req));
}

void Session::close_queue(const std::string& queue) {
  wire::EnqueueRequest req;
  req.queue = queue;
  req.subop = wire::kEnqueueClose;
  roundtrip(MessageType::kEnqueue, wire::encode_enqueue_request(req));
}

Tensor Session::dequeue(const std::string& queue, uint32_t capacity, uint32_t timeout_ms) {
  wire::DequeueRequest req{queue, capacity, timeout_ms};
  FramePieces p;
  p.head = wire::encode_dequeue_request(req);
  Frame reply = roundtrip(MessageType::kDequeue, p);
  return wire::decode_single_tensor(reply.payload);
}

void Session::assign_add(const std::string& variable, const Tensor& delta) {
  roundtrip(MessageType::kAssignAdd, wire::encode_named_tensor(variable, delta));
}

Tensor Session::read_variable(const std::string& variable) {
  FramePieces p;
  p.head = wire::encode_name(variable);
  Frame reply = roundtrip(MessageType::kReadVariable, p);
  return wire::decode_single_tensor(reply.payload);
}

std::pair<uint32_t, uint64_t> Session::checkpoint_save(const std::string& directory,
                                                       uint64_t id) {
  FramePieces p;
  p.head = wire::encode_checkpoint_request({directory, id});
  Frame reply = roundtrip(MessageType::kCheckpointSave, p);
  ByteReader r(reply.payload);
  uint32_t entries = r.u32();
  uint64_t bytes = r.u64();
  return {entries, bytes};
}

uint32_t Session::checkpoint_restore(const std::string& directory, uint64_t id) {
  FramePieces p;
  p.head = wire::encode_checkpoint_request({directory, id});
  Frame reply = roundtrip(MessageType::kCheckpointRestore, p);
  ByteReader r(reply.payload);
  return r.u32();
}

void Session::shutdown_server() { roundtrip(MessageType::kShutdown, FramePieces{}); }

}  // namespace flowhpc
