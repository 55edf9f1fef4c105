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
#include "flowhpc/wire.hpp"

#include <sys/uio.h>

#include <array>
#include <cstring>

namespace flowhpc {

const char* message_type_name(MessageType t) {
  switch (t) {
    case MessageType::kPing: return "Ping";
    case MessageType::kRegisterGraph: return "RegisterGraph";
    case MessageType::kRunGraph: return "RunGraph";
    case MessageType::kEnqueue: return "Enqueue";
    case MessageType::kDequeue: return "Dequeue";
    case MessageType::kAssignAdd: return "AssignAdd";
    case MessageType::kReadVariable: return "ReadVariable";
    case MessageType::kCheckpointSave: return "CheckpointSave";
    case MessageType::kCheckpointRestore: return "CheckpointRestore";
    case MessageType::kShutdown: return "Shutdown";
    case MessageType::kError: return "Error";
  }
  return "Unknown";
}

const char* framing_mode_name(FramingMode mode) {
  return mode == FramingMode::kEager ? "eager" : "staged";
}

FramingMode parse_framing_mode(const std::string& text) {
  if (text == "eager") return FramingMode::kEager;
  if (text == "staged") return FramingMode::kStaged;
  throw_error(ErrorCode::kInvalidArgument, "unknown framing mode: " + text);
}

void write_frame(Socket& s, MessageType type, uint32_t request_id, const FramePieces& pieces,
                 FramingMode mode) {
  size_t payload = pieces.payload_size();
  if (payload > kMaxFramePayload)
    throw_error(ErrorCode::kProtocol, "frame payload of " + std::to_string(payload) +
                                          " bytes exceeds the transport limit");
  std::array<uint8_t, kFrameHeaderBytes> header;
  uint32_t length = static_cast<uint32_t>(5 + payload);
  std::memcpy(header.data(), &length, 4);
  header[4] = static_cast<uint8_t>(type);
  std::memcpy(header.data() + 5, &request_id, 4);

  if (mode == FramingMode::kEager) {
    std::array<iovec, 3> vecs;
    size_t n = 0;
    vecs[n++] = {header.data(), header.size()};
    if (!pieces.head.empty())
      vecs[n++] = {const_cast<uint8_t*>(pieces.head.data()), pieces.head.size()};
    if (pieces.body_len > 0) vecs[n++] = {const_cast<void*>(pieces.body), pieces.body_len};
    s.send_vecs(std::span<iovec>(vecs.data(), n));
    return;
  }

  // Staged path: assemble the entire frame in scratch memory first. The
  // extra copy is intentional; it models serializing into a host-side
  // buffer before transmission.
  std::vector<uint8_t> staged(header.size() + payload);
  std::memcpy(staged.data(), header.data(), header.size());
  if (!pieces.head.empty())
    std::memcpy(staged.data() + header.size(), pieces.head.data(), pieces.head.size());
  if (pieces.body_len > 0)
    std::memcpy(staged.data() + header.size() + pieces.head.size(), pieces.body, pieces.body_len);
  s.send_all(staged.data(), staged.size());
}

bool read_frame_or_eof(Socket& s, Frame& out) {
  uint32_t length = 0;
  if (!s.recv_all_or_eof(&length, 4)) return false;
  if (length < 5 || length > kMaxFramePayload + 5)
    throw_error(ErrorCode::kProtocol, "bad frame length " + std::to_string(length));
  uint8_t type = 0;
  s.recv_all(&type, 1);
  uint32_t request_id = 0;
  s.recv_all(&request_id, 4);
  out.type = static_cast<MessageType>(type);
  out.request_id = request_id;
  out.payload.resize(length - 5);
  if (!out.payload.empty()) s.recv_all(out.payload.data(), out.payload.size());
  return true;
}

Frame read_frame(Socket& s) {
  Frame f;
  if (!read_frame_or_eof(s, f))
    throw_error(ErrorCode::kConnectionFailed, "connection closed while awaiting a frame");
  return f;
}

namespace wire {

namespace {

void write_name(ByteWriter& w, const std::string& name) {
  if (name.size() > 0xffff)
    throw_error(ErrorCode::kInvalidArgument, "name longer than 65535 bytes");
  w.u16(static_cast<uint16_t>(name.size()));
  w.str(name);
}

std::string read_name(ByteReader& r) { return r.str(r.u16()); }

// Tensor header without its payload, so the payload can ride as a borrowed
// FramePieces body.
void write_tensor_header(ByteWriter& w, const Tensor& t) {
  w.u8(static_cast<uint8_t>(t.dtype()));
  w.u8(static_cast<uint8_t>(t.shape().rank()));
  for (int64_t d : t.shape().dims()) w.u64(static_cast<uint64_t>(d));
}

void expect_done(const ByteReader& r, const char* what) {
  if (!r.done())
    throw_error(ErrorCode::kProtocol, std::string("trailing bytes in ") + what);
}

}  // namespace

FramePieces encode_run_graph_request(const RunGraphRequest& req) {
  // Feeds are embedded whole (not borrowed): multi-tensor bodies would need
  // scatter-gather bookkeeping that RunGraph latency does not justify.
  ByteWriter w;
  w.u32(req.graph_id);
  w.u8(req.return_values ? 1 : 0);
  w.u16(static_cast<uint16_t>(req.fetches.size()));
  for (uint32_t f : req.fetches) w.u32(f);
  w.u16(static_cast<uint16_t>(req.feeds.size()));
  for (const auto& [id, tensor] : req.feeds) {
    w.u32(id);
    encode_tensor(w, tensor);
  }
  FramePieces p;
  p.head = w.take();
  return p;
}

RunGraphRequest decode_run_graph_request(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  RunGraphRequest req;
  req.graph_id = r.u32();
  req.return_values = r.u8() != 0;
  uint16_t n_fetch = r.u16();
  req.fetches.resize(n_fetch);
  for (auto& f : req.fetches) f = r.u32();
  uint16_t n_feed = r.u16();
  for (uint16_t i = 0; i < n_feed; ++i) {
    uint32_t id = r.u32();
    req.feeds.emplace(id, decode_tensor(r));
  }
  expect_done(r, "RunGraph request");
  return req;
}

std::vector<uint8_t> encode_tensor_list(const std::vector<Tensor>& tensors) {
  ByteWriter w;
  w.u16(static_cast<uint16_t>(tensors.size()));
  for (const Tensor& t : tensors) encode_tensor(w, t);
  return w.take();
}

std::vector<Tensor> decode_tensor_list(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  uint16_t n = r.u16();
  std::vector<Tensor> out;
  out.reserve(n);
  for (uint16_t i = 0; i < n; ++i) out.push_back(decode_tensor(r));
  expect_done(r, "tensor list");
  return out;
}

FramePieces encode_enqueue_request(const EnqueueRequest& req) {
  ByteWriter w;
  write_name(w, req.queue);
  w.u8(req.subop);
  w.u32(req.capacity);
  w.u32(req.timeout_ms);
  FramePieces p;
  if (req.subop == kEnqueuePush) {
    write_tensor_header(w, req.value);
    p.body = req.value.raw();
    p.body_len = req.value.byte_size();
  }
  p.head = w.take();
  return p;
}

EnqueueRequest decode_enqueue_request(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  EnqueueRequest req;
  req.queue = read_name(r);
  req.subop = r.u8();
  if (req.subop != kEnqueuePush && req.subop != kEnqueueClose)
    throw_error(ErrorCode::kProtocol, "bad enqueue subop " + std::to_string(req.subop));
  req.capacity = r.u32();
  req.timeout_ms = r.u32();
  if (req.subop == kEnqueuePush) req.value = decode_tensor(r);
  expect_done(r, "Enqueue request");
  return req;
}

std::vector<uint8_t> encode_dequeue_request(const DequeueRequest& req) {
  ByteWriter w;
  write_name(w, req.queue);
  w.u32(req.capacity);
  w.u32(req.timeout_ms);
  return w.take();
}

DequeueRequest decode_dequeue_request(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  DequeueRequest req;
  req.queue = read_name(r);
  req.capacity = r.u32();
  req.timeout_ms = r.u32();
  expect_done(r, "Dequeue request");
  return req;
}

FramePieces encode_named_tensor(const std::string& name, const Tensor& value) {
  ByteWriter w;
  write_name(w, name);
  write_tensor_header(w, value);
  FramePieces p;
  p.body = value.raw();
  p.body_len = value.byte_size();
  p.head = w.take();
  return p;
}

std::pair<std::string, Tensor> decode_named_tensor(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  std::string name = read_name(r);
  Tensor t = decode_tensor(r);
  expect_done(r, "named tensor");
  return {std::move(name), std::move(t)};
}

std::vector<uint8_t> encode_name(const std::string& name) {
  ByteWriter w;
  write_name(w, name);
  return w.take();
}

std::string decode_name(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  std::string name = read_name(r);
  expect_done(r, "name");
  return name;
}

std::vector<uint8_t> encode_checkpoint_request(const CheckpointRequest& req) {
  ByteWriter w;
  write_name(w, req.directory);
  w.u64(req.id);
  return w.take();
}

CheckpointRequest decode_checkpoint_request(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  CheckpointRequest req;
  req.directory = read_name(r);
  req.id = r.u64();
  expect_done(r, "checkpoint request");
  return req;
}

std::vector<uint8_t> encode_error(const ErrorBody& body) {
  ByteWriter w;
  w.u8(body.code);
  w.u32(body.node_id);
  w.str(body.message);
  return w.take();
}

ErrorBody decode_error(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  ErrorBody body;
  body.code = r.u8();
  body.node_id = r.u32();
  body.message = r.str(r.remaining());
  return body;
}

std::vector<uint8_t> encode_single_tensor(const Tensor& t) {
  ByteWriter w;
  encode_tensor(w, t);
  return w.take();
}

Tensor decode_single_tensor(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  Tensor t = decode_tensor(r);
  expect_done(r, "tensor");
  return t;
}

}  // namespace wire

}  // namespace flowhpc
