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
#ifndef FLOWHPC_SHAPE_HPP_
#define FLOWHPC_SHAPE_HPP_

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "flowhpc/error.hpp"

namespace flowhpc {

// Row-major tensor shape. Rank 0 is a scalar (element count 1). The element
// count must fit in 63 bits; construction enforces it.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<int64_t> dims) : dims_(dims) { validate(); }
  explicit Shape(std::vector<int64_t> dims) : dims_(std::move(dims)) { validate(); }

  static Shape scalar() { return Shape(); }
  static Shape vector(int64_t n) { return Shape({n}); }
  static Shape matrix(int64_t rows, int64_t cols) { return Shape({rows, cols}); }

  size_t rank() const { return dims_.size(); }
  const std::vector<int64_t>& dims() const { return dims_; }
  int64_t dim(size_t i) const { return dims_.at(i); }

  int64_t elem_count() const {
    int64_t n = 1;
    for (int64_t d : dims_) n *= d;
    return n;
  }

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return dims_ != other.dims_; }

  std::string to_string() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < dims_.size(); ++i) {
      if (i) os << ",";
      os << dims_[i];
    }
    os << ")";
    return os.str();
  }

 private:
  void validate() const {
    constexpr int64_t kMax = (int64_t{1} << 62);
    int64_t n = 1;
    for (int64_t d : dims_) {
      if (d < 0) throw_error(ErrorCode::kInvalidArgument, "negative extent in shape");
      if (d != 0 && n > kMax / (d == 0 ? 1 : d))
        throw_error(ErrorCode::kInvalidArgument, "shape element count overflows 63 bits");
      n *= d;
    }
  }

  std::vector<int64_t> dims_;
};

}  // namespace flowhpc

#endif  // FLOWHPC_SHAPE_HPP_
