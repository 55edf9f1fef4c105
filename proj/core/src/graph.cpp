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
#include "flowhpc/graph.hpp"

#include <atomic>

namespace flowhpc {

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kMatMul: return "MatMul";
    case OpKind::kAdd: return "Add";
    case OpKind::kDot: return "Dot";
    case OpKind::kMatVec: return "MatVec";
    case OpKind::kAxpy: return "Axpy";
    case OpKind::kScale: return "Scale";
    case OpKind::kFFT: return "FFT";
    case OpKind::kRandomUniform: return "RandomUniform";
    case OpKind::kConst: return "Const";
    case OpKind::kPlaceholder: return "Placeholder";
    case OpKind::kVariableRead: return "VariableRead";
    case OpKind::kAssignAdd: return "AssignAdd";
    case OpKind::kAssign: return "Assign";
    case OpKind::kEnqueue: return "Enqueue";
    case OpKind::kDequeue: return "Dequeue";
    case OpKind::kIdentity: return "Identity";
  }
  return "Unknown";
}

OpKind op_kind_from_tag(uint8_t tag) {
  if (tag > static_cast<uint8_t>(OpKind::kIdentity))
    throw_error(ErrorCode::kProtocol, "unknown op kind tag " + std::to_string(tag));
  return static_cast<OpKind>(tag);
}

AttrValue AttrValue::of_dtype(DType d) {
  AttrValue v;
  v.kind = Kind::kDType;
  v.dtype_value = d;
  return v;
}

AttrValue AttrValue::of_shape(Shape s) {
  AttrValue v;
  v.kind = Kind::kShape;
  v.shape_value = std::move(s);
  return v;
}

AttrValue AttrValue::of_int(uint64_t i) {
  AttrValue v;
  v.kind = Kind::kInt;
  v.int_value = i;
  return v;
}

AttrValue AttrValue::of_string(std::string s) {
  AttrValue v;
  v.kind = Kind::kString;
  v.string_value = std::move(s);
  return v;
}

AttrValue AttrValue::of_tensor(Tensor t) {
  AttrValue v;
  v.kind = Kind::kTensor;
  v.tensor_value = std::move(t);
  return v;
}

bool AttrValue::operator==(const AttrValue& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::kDType: return dtype_value == other.dtype_value;
    case Kind::kShape: return shape_value == other.shape_value;
    case Kind::kInt: return int_value == other.int_value;
    case Kind::kString: return string_value == other.string_value;
    case Kind::kTensor: return tensor_value.same_bits(other.tensor_value);
  }
  return false;
}

const AttrValue& NodeSpec::attr(const std::string& key) const {
  auto it = attrs.find(key);
  if (it == attrs.end())
    throw_error(ErrorCode::kInvalidArgument,
                std::string(op_kind_name(op_kind)) + " node missing attr \"" + key + "\"", id);
  return it->second;
}

const AttrValue* NodeSpec::find_attr(const std::string& key) const {
  auto it = attrs.find(key);
  return it == attrs.end() ? nullptr : &it->second;
}

const NodeSpec& Graph::node(uint32_t id) const {
  if (id >= nodes_.size())
    throw_error(ErrorCode::kInvalidArgument, "node id " + std::to_string(id) + " out of range");
  return nodes_[id];
}

namespace {
std::atomic<uint64_t> g_graph_version{1};
}

uint32_t GraphBuilder::add(OpKind kind, std::vector<uint32_t> inputs, AttrMap attrs,
                           std::optional<DeviceName> device) {
  uint32_t id = static_cast<uint32_t>(nodes_.size());
  for (uint32_t in : inputs) {
    if (in >= id)
      throw_error(ErrorCode::kInvalidArgument,
                  "input " + std::to_string(in) + " does not precede node " + std::to_string(id));
  }
  nodes_.push_back(NodeSpec{id, kind, std::move(inputs), std::move(attrs), device});
  return id;
}

uint32_t GraphBuilder::constant(Tensor value, std::optional<DeviceName> device) {
  AttrMap attrs;
  attrs.emplace("value", AttrValue::of_tensor(std::move(value)));
  return add(OpKind::kConst, {}, std::move(attrs), device);
}

uint32_t GraphBuilder::placeholder(DType dtype, Shape shape) {
  AttrMap attrs;
  attrs.emplace("dtype", AttrValue::of_dtype(dtype));
  attrs.emplace("shape", AttrValue::of_shape(std::move(shape)));
  return add(OpKind::kPlaceholder, {}, std::move(attrs));
}

uint32_t GraphBuilder::random_uniform(Shape shape, DType dtype, uint64_t seed,
                                      std::optional<DeviceName> device) {
  AttrMap attrs;
  attrs.emplace("dtype", AttrValue::of_dtype(dtype));
  attrs.emplace("shape", AttrValue::of_shape(std::move(shape)));
  attrs.emplace("seed", AttrValue::of_int(seed));
  return add(OpKind::kRandomUniform, {}, std::move(attrs), device);
}

uint32_t GraphBuilder::variable_read(const std::string& name, std::optional<DeviceName> device) {
  AttrMap attrs;
  attrs.emplace("var", AttrValue::of_string(name));
  return add(OpKind::kVariableRead, {}, std::move(attrs), device);
}

uint32_t GraphBuilder::assign(const std::string& name, uint32_t value,
                              std::optional<DeviceName> device) {
  AttrMap attrs;
  attrs.emplace("var", AttrValue::of_string(name));
  return add(OpKind::kAssign, {value}, std::move(attrs), device);
}

uint32_t GraphBuilder::assign_add(const std::string& name, uint32_t value,
                                  std::optional<DeviceName> device) {
  AttrMap attrs;
  attrs.emplace("var", AttrValue::of_string(name));
  return add(OpKind::kAssignAdd, {value}, std::move(attrs), device);
}

uint32_t GraphBuilder::enqueue(const std::string& queue, uint32_t value, uint32_t capacity,
                               uint32_t timeout_ms) {
  AttrMap attrs;
  attrs.emplace("queue", AttrValue::of_string(queue));
  if (capacity) attrs.emplace("capacity", AttrValue::of_int(capacity));
  if (timeout_ms) attrs.emplace("timeout_ms", AttrValue::of_int(timeout_ms));
  return add(OpKind::kEnqueue, {value}, std::move(attrs));
}

uint32_t GraphBuilder::dequeue(const std::string& queue, uint32_t capacity, uint32_t timeout_ms) {
  AttrMap attrs;
  attrs.emplace("queue", AttrValue::of_string(queue));
  if (capacity) attrs.emplace("capacity", AttrValue::of_int(capacity));
  if (timeout_ms) attrs.emplace("timeout_ms", AttrValue::of_int(timeout_ms));
  return add(OpKind::kDequeue, {}, std::move(attrs));
}

Graph GraphBuilder::build() {
  Graph g;
  g.nodes_ = std::move(nodes_);
  g.version_ = g_graph_version.fetch_add(1, std::memory_order_relaxed);
  nodes_.clear();
  return g;
}

}  // namespace flowhpc
