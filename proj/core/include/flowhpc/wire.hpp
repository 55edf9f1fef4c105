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
#ifndef FLOWHPC_WIRE_HPP_
#define FLOWHPC_WIRE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "flowhpc/bytes.hpp"
#include "flowhpc/executor.hpp"
#include "flowhpc/sockets.hpp"
#include "flowhpc/tensor.hpp"

namespace flowhpc {

// Frame layout on the wire, all little-endian:
//   length u32   counts everything after itself: 1 + 4 + payload
//   type   u8
//   req id u32   echoed by the response
//   payload
enum class MessageType : uint8_t {
  kPing = 0,
  kRegisterGraph = 1,
  kRunGraph = 2,
  kEnqueue = 3,
  kDequeue = 4,
  kAssignAdd = 5,
  kReadVariable = 6,
  kCheckpointSave = 7,
  kCheckpointRestore = 8,
  kShutdown = 9,
  kError = 255,
};

const char* message_type_name(MessageType t);

// Generous ceiling: the integrity tests push single 128 MiB payloads.
inline constexpr uint64_t kMaxFramePayload = 192ull << 20;
inline constexpr size_t kFrameHeaderBytes = 9;

struct Frame {
  MessageType type = MessageType::kPing;
  uint32_t request_id = 0;
  std::vector<uint8_t> payload;
};

// A frame body split so the bulk payload (usually a tensor's bytes) can be
// borrowed instead of copied.
struct FramePieces {
  std::vector<uint8_t> head;
  const void* body = nullptr;
  size_t body_len = 0;

  size_t payload_size() const { return head.size() + body_len; }
};

// kEager hands header, head, and body to one gathered send. kStaged first
// copies everything into a scratch buffer, costing one extra pass over the
// payload, then sends that. Byte streams are identical.
enum class FramingMode : uint8_t { kEager = 0, kStaged = 1 };

const char* framing_mode_name(FramingMode mode);
FramingMode parse_framing_mode(const std::string& text);

void write_frame(Socket& s, MessageType type, uint32_t request_id, const FramePieces& pieces,
                 FramingMode mode = FramingMode::kEager);
Frame read_frame(Socket& s);
bool read_frame_or_eof(Socket& s, Frame& out);

// Payload codecs. Each request/response payload is defined by its encode
// function; decode functions validate and reject trailing bytes.
namespace wire {

struct RunGraphRequest {
  uint32_t graph_id = 0;
  bool return_values = true;
  std::vector<uint32_t> fetches;
  FeedMap feeds;
};

struct EnqueueRequest {
  std::string queue;
  // 0 pushes `value`; 1 closes the queue (no tensor present).
  uint8_t subop = 0;
  uint32_t capacity = 0;
  uint32_t timeout_ms = 0;
  Tensor value;
};

struct DequeueRequest {
  std::string queue;
  uint32_t capacity = 0;
  uint32_t timeout_ms = 0;
};

struct CheckpointRequest {
  std::string directory;
  uint64_t id = 0;
};

struct ErrorBody {
  uint8_t code = 0;
  uint32_t node_id = 0xffffffffu;
  std::string message;
};

inline constexpr uint8_t kEnqueuePush = 0;
inline constexpr uint8_t kEnqueueClose = 1;

FramePieces encode_run_graph_request(const RunGraphRequest& req);
RunGraphRequest decode_run_graph_request(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_tensor_list(const std::vector<Tensor>& tensors);
std::vector<Tensor> decode_tensor_list(const std::vector<uint8_t>& payload);

FramePieces encode_enqueue_request(const EnqueueRequest& req);
EnqueueRequest decode_enqueue_request(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_dequeue_request(const DequeueRequest& req);
DequeueRequest decode_dequeue_request(const std::vector<uint8_t>& payload);

FramePieces encode_named_tensor(const std::string& name, const Tensor& value);
std::pair<std::string, Tensor> decode_named_tensor(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_name(const std::string& name);
std::string decode_name(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_checkpoint_request(const CheckpointRequest& req);
CheckpointRequest decode_checkpoint_request(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_error(const ErrorBody& body);
ErrorBody decode_error(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_single_tensor(const Tensor& t);
Tensor decode_single_tensor(const std::vector<uint8_t>& payload);

}  // namespace wire

}  // namespace flowhpc

#endif  // FLOWHPC_WIRE_HPP_
