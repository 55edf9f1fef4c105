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
#ifndef FLOWHPC_GRAPH_HPP_
#define FLOWHPC_GRAPH_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowhpc/device.hpp"
#include "flowhpc/tensor.hpp"

namespace flowhpc {

// Enumerator values are stable: they appear in serialized graphs.
enum class OpKind : uint8_t {
  kMatMul = 0,
  kAdd = 1,
  kDot = 2,
  kMatVec = 3,
  kAxpy = 4,
  kScale = 5,
  kFFT = 6,
  kRandomUniform = 7,
  kConst = 8,
  kPlaceholder = 9,
  kVariableRead = 10,
  kAssignAdd = 11,
  kAssign = 12,
  kEnqueue = 13,
  kDequeue = 14,
  kIdentity = 15,
};

const char* op_kind_name(OpKind kind);
OpKind op_kind_from_tag(uint8_t tag);

// Op-specific constant, fully resolved at node construction time.
struct AttrValue {
  enum class Kind : uint8_t {
    kDType = 0,
    kShape = 1,
    kInt = 2,
    kString = 3,
    kTensor = 4,
  };
  Kind kind = Kind::kInt;
  DType dtype_value = DType::kF32;
  Shape shape_value;
  uint64_t int_value = 0;
  std::string string_value;
  Tensor tensor_value;

  static AttrValue of_dtype(DType d);
  static AttrValue of_shape(Shape s);
  static AttrValue of_int(uint64_t v);
  static AttrValue of_string(std::string s);
  static AttrValue of_tensor(Tensor t);

  bool operator==(const AttrValue& other) const;
};

using AttrMap = std::map<std::string, AttrValue>;

struct NodeSpec {
  uint32_t id = 0;
  OpKind op_kind = OpKind::kConst;
  std::vector<uint32_t> inputs;
  AttrMap attrs;
  std::optional<DeviceName> device;

  const AttrValue& attr(const std::string& key) const;
  const AttrValue* find_attr(const std::string& key) const;
};

// Immutable after construction; construction order is a topological order
// because inputs may only reference already-created nodes.
class Graph {
 public:
  Graph() = default;

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const NodeSpec& node(uint32_t id) const;
  uint64_t version() const { return version_; }
  size_t size() const { return nodes_.size(); }

 private:
  friend class GraphBuilder;

  std::vector<NodeSpec> nodes_;
  uint64_t version_ = 0;
};

// Builds nodes with dense ids 0..n-1. Input ids are validated eagerly so the
// result is acyclic by construction.
class GraphBuilder {
 public:
  uint32_t add(OpKind kind, std::vector<uint32_t> inputs, AttrMap attrs = {},
               std::optional<DeviceName> device = std::nullopt);

  // Convenience wrappers used by the apps.
  uint32_t constant(Tensor value, std::optional<DeviceName> device = std::nullopt);
  uint32_t placeholder(DType dtype, Shape shape);
  uint32_t random_uniform(Shape shape, DType dtype, uint64_t seed,
                          std::optional<DeviceName> device = std::nullopt);
  uint32_t variable_read(const std::string& name,
                         std::optional<DeviceName> device = std::nullopt);
  uint32_t assign(const std::string& name, uint32_t value,
                  std::optional<DeviceName> device = std::nullopt);
  uint32_t assign_add(const std::string& name, uint32_t value,
                      std::optional<DeviceName> device = std::nullopt);
  uint32_t enqueue(const std::string& queue, uint32_t value, uint32_t capacity = 0,
                   uint32_t timeout_ms = 0);
  uint32_t dequeue(const std::string& queue, uint32_t capacity = 0, uint32_t timeout_ms = 0);

  Graph build();

 private:
  std::vector<NodeSpec> nodes_;
};

}  // namespace flowhpc

#endif  // FLOWHPC_GRAPH_HPP_
