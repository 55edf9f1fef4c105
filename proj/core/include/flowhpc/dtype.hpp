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
#ifndef FLOWHPC_DTYPE_HPP_
#define FLOWHPC_DTYPE_HPP_

#include <cstddef>
#include <cstdint>

#include "flowhpc/error.hpp"

namespace flowhpc {

// Element types supported by the runtime. The numeric tags are part of the
// wire and file formats.
enum class DType : uint8_t {
  kF32 = 0,   // 32-bit IEEE float
  kF64 = 1,   // 64-bit IEEE float
  kC128 = 2,  // complex of two 64-bit floats
};

inline size_t dtype_size(DType dt) {
  switch (dt) {
    case DType::kF32: return 4;
    case DType::kF64: return 8;
    case DType::kC128: return 16;
  }
  throw_error(ErrorCode::kInvalidArgument, "bad dtype tag");
}

inline const char* dtype_name(DType dt) {
  switch (dt) {
    case DType::kF32: return "f32";
    case DType::kF64: return "f64";
    case DType::kC128: return "c128";
  }
  return "?";
}

inline DType dtype_from_tag(uint8_t tag) {
  if (tag > 2) throw_error(ErrorCode::kProtocol, "bad dtype tag");
  return static_cast<DType>(tag);
}

inline DType dtype_from_name(const std::string& name) {
  if (name == "f32") return DType::kF32;
  if (name == "f64") return DType::kF64;
  if (name == "c128") return DType::kC128;
  throw_error(ErrorCode::kParseError, "bad dtype name: " + name);
}

}  // namespace flowhpc

#endif  // FLOWHPC_DTYPE_HPP_
