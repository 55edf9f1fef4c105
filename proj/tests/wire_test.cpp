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
#include <chrono>
#include <cstring>
#include <thread>

#include "doctest.h"
#include "flowhpc/error.hpp"
#include "flowhpc/sockets.hpp"
#include "flowhpc/wire.hpp"
#include "test_util.hpp"

using namespace flowhpc;

namespace {

// Connected loopback socket pair.
struct SocketPair {
  Socket client;
  Socket server;

  SocketPair() {
    Listener lst = Listener::bind_and_listen("127.0.0.1", 0);
    client = tcp_connect("127.0.0.1", lst.port(), std::chrono::milliseconds(5000));
    server = lst.accept();
    REQUIRE(client.valid());
    REQUIRE(server.valid());
  }
};

}  // namespace

TEST_SUITE("wire") {

TEST_CASE("frames round trip under both framing modes") {
  for (FramingMode mode : {FramingMode::kEager, FramingMode::kStaged}) {
    CAPTURE(framing_mode_name(mode));
    SocketPair pair;
    std::vector<uint8_t> head{1, 2, 3};
    std::vector<uint8_t> body(1000);
    for (size_t i = 0; i < body.size(); ++i) body[i] = static_cast<uint8_t>(i * 7);

    FramePieces pieces;
    pieces.head = head;
    pieces.body = body.data();
    pieces.body_len = body.size();
    write_frame(pair.client, MessageType::kEnqueue, 0xdeadbeef, pieces, mode);

    Frame got = read_frame(pair.server);
    CHECK(got.type == MessageType::kEnqueue);
    CHECK(got.request_id == 0xdeadbeef);
    REQUIRE(got.payload.size() == head.size() + body.size());
    CHECK(std::memcmp(got.payload.data(), head.data(), head.size()) == 0);
    CHECK(std::memcmp(got.payload.data() + head.size(), body.data(), body.size()) == 0);
  }
}

TEST_CASE("eager and staged modes emit identical byte streams") {
  std::vector<uint8_t> body(333);
  for (size_t i = 0; i < body.size(); ++i) body[i] = static_cast<uint8_t>(i);
  FramePieces pieces;
  pieces.head = {9, 8, 7};
  pieces.body = body.data();
  pieces.body_len = body.size();

  auto capture = [&](FramingMode mode) {
    SocketPair pair;
    write_frame(pair.client, MessageType::kRunGraph, 42, pieces, mode);
    std::vector<uint8_t> raw(kFrameHeaderBytes + pieces.payload_size());
    pair.server.recv_all(raw.data(), raw.size());
    return raw;
  };
  CHECK(capture(FramingMode::kEager) == capture(FramingMode::kStaged));
}

TEST_CASE("empty payload frames work") {
  SocketPair pair;
  write_frame(pair.client, MessageType::kShutdown, 7, FramePieces{});
  Frame got = read_frame(pair.server);
  CHECK(got.type == MessageType::kShutdown);
  CHECK(got.request_id == 7);
  CHECK(got.payload.empty());
}

TEST_CASE("clean close reads as eof not error") {
  SocketPair pair;
  pair.client.close();
  Frame out;
  CHECK_FALSE(read_frame_or_eof(pair.server, out));
}

TEST_CASE("a length field beyond the cap is rejected before allocation") {
  SocketPair pair;
  // Hand-rolled header claiming a payload far over the cap.
  uint8_t raw[kFrameHeaderBytes];
  const uint32_t huge = 0xffffffffu;
  std::memcpy(raw, &huge, 4);
  raw[4] = 0;  // Ping
  std::memset(raw + 5, 0, 4);
  pair.client.send_all(raw, sizeof(raw));
  CHECK_THROWS_AS((void)read_frame(pair.server), FlowError);
}

TEST_CASE("a truncated frame reads as error") {
  SocketPair pair;
  // Header promises 100 payload bytes, connection dies after 10.
  std::vector<uint8_t> head(kFrameHeaderBytes);
  const uint32_t length = 5 + 100;
  std::memcpy(head.data(), &length, 4);
  head[4] = 0;
  pair.client.send_all(head.data(), head.size());
  uint8_t some[10] = {0};
  pair.client.send_all(some, sizeof(some));
  pair.client.close();
  CHECK_THROWS_AS((void)read_frame(pair.server), FlowError);
}

TEST_CASE("run graph requests round trip") {
  wire::RunGraphRequest req;
  req.graph_id = 12;
  req.return_values = false;
  req.fetches = {3, 1, 4};
  req.feeds.emplace(2u, testutil::random_f64(Shape::vector(5), 1));
  req.feeds.emplace(9u, Tensor::scalar_f32(2.5f));

  FramePieces pieces = wire::encode_run_graph_request(req);
  std::vector<uint8_t> payload = pieces.head;
  payload.insert(payload.end(), static_cast<const uint8_t*>(pieces.body),
                 static_cast<const uint8_t*>(pieces.body) + pieces.body_len);
  wire::RunGraphRequest back = wire::decode_run_graph_request(payload);
  CHECK(back.graph_id == 12);
  CHECK(back.return_values == false);
  CHECK(back.fetches == req.fetches);
  REQUIRE(back.feeds.size() == 2);
  CHECK(back.feeds.at(2).same_bits(req.feeds.at(2)));
  CHECK(back.feeds.at(9).same_bits(req.feeds.at(9)));
}

TEST_CASE("enqueue and dequeue requests round trip") {
  wire::EnqueueRequest enq;
  enq.queue = "tiles";
  enq.subop = wire::kEnqueuePush;
  enq.capacity = 16;
  enq.timeout_ms = 2500;
  enq.value = testutil::random_c128(Shape::vector(6), 3);
  FramePieces pieces = wire::encode_enqueue_request(enq);
  std::vector<uint8_t> payload = pieces.head;
  payload.insert(payload.end(), static_cast<const uint8_t*>(pieces.body),
                 static_cast<const uint8_t*>(pieces.body) + pieces.body_len);
  wire::EnqueueRequest eback = wire::decode_enqueue_request(payload);
  CHECK(eback.queue == "tiles");
  CHECK(eback.subop == wire::kEnqueuePush);
  CHECK(eback.capacity == 16);
  CHECK(eback.timeout_ms == 2500);
  CHECK(eback.value.same_bits(enq.value));

  wire::DequeueRequest deq;
  deq.queue = "tiles";
  deq.capacity = 4;
  deq.timeout_ms = 100;
  wire::DequeueRequest dback = wire::decode_dequeue_request(wire::encode_dequeue_request(deq));
  CHECK(dback.queue == "tiles");
  CHECK(dback.capacity == 4);
  CHECK(dback.timeout_ms == 100);
}

TEST_CASE("named tensors, names, and checkpoint requests round trip") {
  Tensor t = testutil::random_f32(Shape::matrix(2, 5), 4);
  FramePieces pieces = wire::encode_named_tensor("weights", t);
  std::vector<uint8_t> payload = pieces.head;
  payload.insert(payload.end(), static_cast<const uint8_t*>(pieces.body),
                 static_cast<const uint8_t*>(pieces.body) + pieces.body_len);
  auto [name, back] = wire::decode_named_tensor(payload);
  CHECK(name == "weights");
  CHECK(back.same_bits(t));

  CHECK(wire::decode_name(wire::encode_name("x")) == "x");
  CHECK(wire::decode_name(wire::encode_name("")) == "");

  wire::CheckpointRequest ck;
  ck.directory = "/tmp/ck";
  ck.id = 900;
  wire::CheckpointRequest cback =
      wire::decode_checkpoint_request(wire::encode_checkpoint_request(ck));
  CHECK(cback.directory == "/tmp/ck");
  CHECK(cback.id == 900);
}

TEST_CASE("error bodies round trip") {
  wire::ErrorBody body;
  body.code = static_cast<uint8_t>(ErrorCode::kTimeout);
  body.node_id = 17;
  body.message = "queue wait expired";
  wire::ErrorBody back = wire::decode_error(wire::encode_error(body));
  CHECK(back.code == body.code);
  CHECK(back.node_id == 17);
  CHECK(back.message == body.message);
}

TEST_CASE("tensor lists round trip with mixed dtypes") {
  std::vector<Tensor> list{testutil::random_f32(Shape::vector(3), 5),
                           testutil::random_f64(Shape::matrix(2, 2), 6),
                           testutil::random_c128(Shape::scalar(), 7)};
  std::vector<Tensor> back = wire::decode_tensor_list(wire::encode_tensor_list(list));
  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(back[i].same_bits(list[i]));

  Tensor single = testutil::random_f64(Shape::vector(11), 8);
  CHECK(wire::decode_single_tensor(wire::encode_single_tensor(single)).same_bits(single));
}

TEST_CASE("decoders reject trailing garbage") {
  std::vector<uint8_t> payload = wire::encode_name("q");
  payload.push_back(0x5a);
  CHECK_THROWS_AS((void)wire::decode_name(payload), FlowError);
}

}  // TEST_SUITE
