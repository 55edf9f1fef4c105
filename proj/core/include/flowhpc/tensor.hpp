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
#ifndef FLOWHPC_TENSOR_HPP_
#define FLOWHPC_TENSOR_HPP_

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "flowhpc/dtype.hpp"
#include "flowhpc/shape.hpp"

namespace flowhpc {

/// Immutable dense n-dimensional array. Copies share the underlying buffer,
/// so tensors are cheap to pass around and safe to share across threads.
/// Mutation exists only behind server-resident variables.
class Tensor {
 public:
  /// Default tensor: empty f32 vector. Useful as a container placeholder.
  Tensor();

  static Tensor zeros(DType dtype, const Shape& shape);
  /// Takes ownership of a raw byte buffer. Size must match shape and dtype.
  static Tensor take(DType dtype, const Shape& shape, std::vector<uint8_t>&& bytes);

  static Tensor from_f32(const Shape& shape, const std::vector<float>& values);
  static Tensor from_f64(const Shape& shape, const std::vector<double>& values);
  static Tensor from_c128(const Shape& shape, const std::vector<std::complex<double>>& values);
  static Tensor scalar_f32(float v);
  static Tensor scalar_f64(double v);
  static Tensor scalar_c128(std::complex<double> v);

  DType dtype() const { return dtype_; }
  const Shape& shape() const { return shape_; }
  int64_t elem_count() const { return shape_.elem_count(); }
  size_t byte_size() const { return static_cast<size_t>(elem_count()) * dtype_size(dtype_); }

  const uint8_t* raw() const { return data_->data(); }

  std::span<const float> f32() const;
  std::span<const double> f64() const;
  std::span<const std::complex<double>> c128() const;

  float f32_at(int64_t i) const { return f32()[i]; }
  double f64_at(int64_t i) const { return f64()[i]; }

  /// Scalar value as double, for rank-0 f32/f64 tensors.
  double scalar_value() const;

  /// Bitwise equality of dtype, shape and payload.
  bool same_bits(const Tensor& other) const;

  /// Same buffer viewed under another shape with the same element count.
  Tensor reshaped(const Shape& shape) const;

 private:
  Tensor(DType dtype, Shape shape, std::shared_ptr<const std::vector<uint8_t>> data)
      : dtype_(dtype), shape_(std::move(shape)), data_(std::move(data)) {}

  void check_dtype(DType want) const;

  DType dtype_;
  Shape shape_;
  std::shared_ptr<const std::vector<uint8_t>> data_;
};

}  // namespace flowhpc

#endif  // FLOWHPC_TENSOR_HPP_
