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
#include "flowhpc/graph_io.hpp"

#include "flowhpc/bytes.hpp"

namespace flowhpc {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'G', '1'};

void encode_attr_value(ByteWriter& w, const AttrValue& v) {
  ByteWriter body;
  body.u8(static_cast<uint8_t>(v.kind));
  switch (v.kind) {
    case AttrValue::Kind::kDType:
      body.u8(static_cast<uint8_t>(v.dtype_value));
      break;
    case AttrValue::Kind::kShape:
      body.u8(static_cast<uint8_t>(v.shape_value.rank()));
      for (int64_t d : v.shape_value.dims()) body.u64(static_cast<uint64_t>(d));
      break;
    case AttrValue::Kind::kInt:
      body.u64(v.int_value);
      break;
    case AttrValue::Kind::kString:
      body.str(v.string_value);
      break;
    case AttrValue::Kind::kTensor:
      encode_tensor(body, v.tensor_value);
      break;
  }
  auto bytes = body.take();
  w.u32(static_cast<uint32_t>(bytes.size()));
  w.bytes(bytes.data(), bytes.size());
}

AttrValue decode_attr_value(ByteReader& r, uint32_t len) {
  if (len == 0) throw_error(ErrorCode::kProtocol, "empty attr value");
  size_t end = r.pos() + len;
  auto kind = r.u8();
  AttrValue v;
  switch (kind) {
    case static_cast<uint8_t>(AttrValue::Kind::kDType):
      v = AttrValue::of_dtype(dtype_from_tag(r.u8()));
      break;
    case static_cast<uint8_t>(AttrValue::Kind::kShape): {
      uint8_t rank = r.u8();
      std::vector<int64_t> dims(rank);
      for (auto& d : dims) d = static_cast<int64_t>(r.u64());
      v = AttrValue::of_shape(Shape(std::move(dims)));
      break;
    }
    case static_cast<uint8_t>(AttrValue::Kind::kInt):
      v = AttrValue::of_int(r.u64());
      break;
    case static_cast<uint8_t>(AttrValue::Kind::kString):
      v = AttrValue::of_string(r.str(len - 1));
      break;
    case static_cast<uint8_t>(AttrValue::Kind::kTensor):
      v = AttrValue::of_tensor(decode_tensor(r));
      break;
    default:
      throw_error(ErrorCode::kProtocol, "unknown attr value kind " + std::to_string(kind));
  }
  if (r.pos() != end)
    throw_error(ErrorCode::kProtocol, "attr value length mismatch");
  return v;
}

}  // namespace

std::vector<uint8_t> serialize_graph(const Graph& g) {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(static_cast<uint32_t>(g.size()));
  for (const NodeSpec& n : g.nodes()) {
    w.u32(n.id);
    w.u8(static_cast<uint8_t>(n.op_kind));
    if (!n.device.has_value()) {
      w.u8(0);
      w.u16(0);
    } else {
      w.u8(n.device->kind == DeviceKind::kCpu ? 1 : 2);
      w.u16(n.device->index);
    }
    w.u16(static_cast<uint16_t>(n.inputs.size()));
    for (uint32_t in : n.inputs) w.u32(in);
    w.u16(static_cast<uint16_t>(n.attrs.size()));
    // std::map iteration is already key-sorted, which makes the bytes
    // canonical.
    for (const auto& [key, value] : n.attrs) {
      w.u16(static_cast<uint16_t>(key.size()));
      w.str(key);
      encode_attr_value(w, value);
    }
  }
  if (w.size() > kMaxSerializedGraphBytes)
    throw_error(ErrorCode::kGraphTooLarge,
                "serialized graph is " + std::to_string(w.size()) + " bytes, cap is " +
                    std::to_string(kMaxSerializedGraphBytes) +
                    "; move bulk data into variables or feeds");
  return w.take();
}

Graph deserialize_graph(const std::vector<uint8_t>& bytes) {
  if (bytes.size() > kMaxSerializedGraphBytes)
    throw_error(ErrorCode::kGraphTooLarge, "serialized graph exceeds the size cap");
  ByteReader r(bytes);
  if (r.remaining() < 4 || std::memcmp(r.view(4), kMagic, 4) != 0)
    throw_error(ErrorCode::kParseError, "bad graph magic, expected DFG1");
  uint32_t count = r.u32();
  GraphBuilder b;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t id = r.u32();
    if (id != i)
      throw_error(ErrorCode::kParseError, "non-dense node id " + std::to_string(id) +
                                              " at position " + std::to_string(i));
    OpKind kind = op_kind_from_tag(r.u8());
    uint8_t dev_tag = r.u8();
    uint16_t dev_index = r.u16();
    std::optional<DeviceName> device;
    if (dev_tag == 1) device = DeviceName::cpu(dev_index);
    else if (dev_tag == 2) device = DeviceName::dev(dev_index);
    else if (dev_tag != 0)
      throw_error(ErrorCode::kParseError, "bad device tag " + std::to_string(dev_tag));
    uint16_t n_inputs = r.u16();
    std::vector<uint32_t> inputs(n_inputs);
    for (auto& in : inputs) {
      in = r.u32();
      if (in >= id)
        throw_error(ErrorCode::kParseError, "input " + std::to_string(in) +
                                                " does not precede node " + std::to_string(id));
    }
    uint16_t n_attrs = r.u16();
    AttrMap attrs;
    for (uint16_t a = 0; a < n_attrs; ++a) {
      uint16_t key_len = r.u16();
      std::string key = r.str(key_len);
      uint32_t val_len = r.u32();
      attrs.emplace(std::move(key), decode_attr_value(r, val_len));
    }
    b.add(kind, std::move(inputs), std::move(attrs), device);
  }
  if (!r.done()) throw_error(ErrorCode::kParseError, "trailing bytes after graph");
  return b.build();
}

}  // namespace flowhpc
