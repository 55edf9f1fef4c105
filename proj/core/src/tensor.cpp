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
#include "flowhpc/tensor.hpp"

#include <cstring>

#include "flowhpc/bytes.hpp"

namespace flowhpc {

namespace {
std::shared_ptr<const std::vector<uint8_t>> empty_buffer() {
  static const auto buf = std::make_shared<const std::vector<uint8_t>>();
  return buf;
}
}  // namespace

Tensor::Tensor() : dtype_(DType::kF32), shape_({0}), data_(empty_buffer()) {}

Tensor Tensor::zeros(DType dtype, const Shape& shape) {
  size_t bytes = static_cast<size_t>(shape.elem_count()) * dtype_size(dtype);
  auto buf = std::make_shared<std::vector<uint8_t>>(bytes, uint8_t{0});
  return Tensor(dtype, shape, std::move(buf));
}

Tensor Tensor::take(DType dtype, const Shape& shape, std::vector<uint8_t>&& bytes) {
  size_t want = static_cast<size_t>(shape.elem_count()) * dtype_size(dtype);
  if (bytes.size() != want)
    throw_error(ErrorCode::kLengthMismatch,
                "buffer of " + std::to_string(bytes.size()) + " bytes for shape " +
                    shape.to_string());
  auto buf = std::make_shared<const std::vector<uint8_t>>(std::move(bytes));
  return Tensor(dtype, shape, std::move(buf));
}

template <typename T>
static Tensor from_typed(DType dtype, const Shape& shape, const std::vector<T>& values) {
  if (static_cast<int64_t>(values.size()) != shape.elem_count())
    throw_error(ErrorCode::kLengthMismatch, "value count does not match shape");
  std::vector<uint8_t> bytes(values.size() * sizeof(T));
  if (!values.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
  return Tensor::take(dtype, shape, std::move(bytes));
}

Tensor Tensor::from_f32(const Shape& shape, const std::vector<float>& values) {
  return from_typed(DType::kF32, shape, values);
}
Tensor Tensor::from_f64(const Shape& shape, const std::vector<double>& values) {
  return from_typed(DType::kF64, shape, values);
}
Tensor Tensor::from_c128(const Shape& shape, const std::vector<std::complex<double>>& values) {
  return from_typed(DType::kC128, shape, values);
}
Tensor Tensor::scalar_f32(float v) { return from_f32(Shape::scalar(), {v}); }
Tensor Tensor::scalar_f64(double v) { return from_f64(Shape::scalar(), {v}); }
Tensor Tensor::scalar_c128(std::complex<double> v) { return from_c128(Shape::scalar(), {v}); }

void Tensor::check_dtype(DType want) const {
  if (dtype_ != want)
    throw_error(ErrorCode::kDTypeMismatch,
                std::string("tensor is ") + dtype_name(dtype_) + ", wanted " + dtype_name(want));
}

std::span<const float> Tensor::f32() const {
  check_dtype(DType::kF32);
  return {reinterpret_cast<const float*>(data_->data()), static_cast<size_t>(elem_count())};
}

std::span<const double> Tensor::f64() const {
  check_dtype(DType::kF64);
  return {reinterpret_cast<const double*>(data_->data()), static_cast<size_t>(elem_count())};
}

std::span<const std::complex<double>> Tensor::c128() const {
  check_dtype(DType::kC128);
  return {reinterpret_cast<const std::complex<double>*>(data_->data()),
          static_cast<size_t>(elem_count())};
}

double Tensor::scalar_value() const {
  if (shape_.rank() != 0)
    throw_error(ErrorCode::kShapeMismatch, "scalar_value on non-scalar " + shape_.to_string());
  if (dtype_ == DType::kF32) return static_cast<double>(f32()[0]);
  if (dtype_ == DType::kF64) return f64()[0];
  throw_error(ErrorCode::kDTypeMismatch, "scalar_value on complex tensor");
}

Tensor Tensor::reshaped(const Shape& shape) const {
  if (shape.elem_count() != elem_count())
    throw_error(ErrorCode::kShapeMismatch,
                "reshape " + shape_.to_string() + " to " + shape.to_string());
  return Tensor(dtype_, shape, data_);
}

bool Tensor::same_bits(const Tensor& other) const {
  if (dtype_ != other.dtype_ || shape_ != other.shape_) return false;
  if (data_ == other.data_) return true;
  return data_->size() == other.data_->size() &&
         std::memcmp(data_->data(), other.data_->data(), data_->size()) == 0;
}

void encode_tensor(ByteWriter& w, const Tensor& t) {
  w.u8(static_cast<uint8_t>(t.dtype()));
  w.u8(static_cast<uint8_t>(t.shape().rank()));
  for (int64_t d : t.shape().dims()) w.u64(static_cast<uint64_t>(d));
  w.bytes(t.raw(), t.byte_size());
}

Tensor decode_tensor(ByteReader& r) {
  DType dtype = dtype_from_tag(r.u8());
  uint8_t rank = r.u8();
  std::vector<int64_t> dims(rank);
  for (auto& d : dims) d = static_cast<int64_t>(r.u64());
  Shape shape{std::move(dims)};
  size_t payload = static_cast<size_t>(shape.elem_count()) * dtype_size(dtype);
  return Tensor::take(dtype, shape, r.bytes(payload));
}

}  // namespace flowhpc
