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
#include "flowhpc/kernels.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "flowhpc/rng.hpp"

namespace flowhpc::ops {

namespace {

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw_error(code, msg);
}

bool is_pow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.dtype() == DType::kF32 && b.dtype() == DType::kF32, ErrorCode::kDTypeMismatch,
          "matmul expects f32 operands");
  require(a.shape().rank() == 2 && b.shape().rank() == 2, ErrorCode::kShapeMismatch,
          "matmul expects rank-2 operands");
  int64_t m = a.shape().dim(0), k = a.shape().dim(1);
  int64_t k2 = b.shape().dim(0), n = b.shape().dim(1);
  require(k == k2, ErrorCode::kShapeMismatch,
          "inner dims differ: " + a.shape().to_string() + " x " + b.shape().to_string());

  std::vector<uint8_t> out(static_cast<size_t>(m) * n * sizeof(float), 0);
  float* c = reinterpret_cast<float*>(out.data());
  const float* pa = a.f32().data();
  const float* pb = b.f32().data();
  // i-k-j order: the inner loop runs along contiguous rows of B and C, which
  // the compiler vectorizes. Accumulation stays in f32.
  for (int64_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    for (int64_t kk = 0; kk < k; ++kk) {
      float aik = pa[i * k + kk];
      const float* brow = pb + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return Tensor::take(DType::kF32, Shape::matrix(m, n), std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.dtype() == b.dtype(), ErrorCode::kDTypeMismatch, "add operands differ in dtype");
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch, "add operands differ in shape");
  std::vector<uint8_t> out(a.byte_size());
  switch (a.dtype()) {
    case DType::kF32: {
      auto* o = reinterpret_cast<float*>(out.data());
      auto x = a.f32(), y = b.f32();
      for (size_t i = 0; i < x.size(); ++i) o[i] = x[i] + y[i];
      break;
    }
    case DType::kF64: {
      auto* o = reinterpret_cast<double*>(out.data());
      auto x = a.f64(), y = b.f64();
      for (size_t i = 0; i < x.size(); ++i) o[i] = x[i] + y[i];
      break;
    }
    case DType::kC128: {
      auto* o = reinterpret_cast<std::complex<double>*>(out.data());
      auto x = a.c128(), y = b.c128();
      for (size_t i = 0; i < x.size(); ++i) o[i] = x[i] + y[i];
      break;
    }
  }
  return Tensor::take(a.dtype(), a.shape(), std::move(out));
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require(a.dtype() == DType::kF64 && b.dtype() == DType::kF64, ErrorCode::kDTypeMismatch,
          "dot expects f64 operands");
  require(a.shape().rank() == 1 && b.shape().rank() == 1 && a.shape() == b.shape(),
          ErrorCode::kShapeMismatch, "dot expects equal-length vectors");
  auto x = a.f64(), y = b.f64();
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return Tensor::scalar_f64(acc);
}

Tensor matvec(const Tensor& a, const Tensor& x) {
  require(a.dtype() == DType::kF64 && x.dtype() == DType::kF64, ErrorCode::kDTypeMismatch,
          "matvec expects f64 operands");
  require(a.shape().rank() == 2 && x.shape().rank() == 1, ErrorCode::kShapeMismatch,
          "matvec expects (m,n) and (n,)");
  int64_t m = a.shape().dim(0), n = a.shape().dim(1);
  require(x.shape().dim(0) == n, ErrorCode::kShapeMismatch,
          "matvec shapes " + a.shape().to_string() + " x " + x.shape().to_string());
  std::vector<uint8_t> out(static_cast<size_t>(m) * sizeof(double));
  auto* y = reinterpret_cast<double*>(out.data());
  const double* pa = a.f64().data();
  const double* px = x.f64().data();
  for (int64_t i = 0; i < m; ++i) {
    const double* row = pa + i * n;
    double acc = 0.0;
    for (int64_t j = 0; j < n; ++j) acc += row[j] * px[j];
    y[i] = acc;
  }
  return Tensor::take(DType::kF64, Shape::vector(m), std::move(out));
}

Tensor axpy(const Tensor& alpha, const Tensor& x, const Tensor& y) {
  require(alpha.dtype() == DType::kF64 && alpha.shape().rank() == 0, ErrorCode::kShapeMismatch,
          "axpy alpha must be a rank-0 f64 tensor");
  require(x.dtype() == DType::kF64 && y.dtype() == DType::kF64, ErrorCode::kDTypeMismatch,
          "axpy expects f64 operands");
  require(x.shape() == y.shape(), ErrorCode::kShapeMismatch, "axpy operands differ in shape");
  double av = alpha.f64()[0];
  std::vector<uint8_t> out(x.byte_size());
  auto* o = reinterpret_cast<double*>(out.data());
  auto px = x.f64(), py = y.f64();
  for (size_t i = 0; i < px.size(); ++i) o[i] = av * px[i] + py[i];
  return Tensor::take(DType::kF64, x.shape(), std::move(out));
}

Tensor scale(const Tensor& alpha, const Tensor& x) {
  require(alpha.dtype() == DType::kF64 && alpha.shape().rank() == 0, ErrorCode::kShapeMismatch,
          "scale alpha must be a rank-0 f64 tensor");
  require(x.dtype() == DType::kF64, ErrorCode::kDTypeMismatch, "scale expects f64 operand");
  double av = alpha.f64()[0];
  std::vector<uint8_t> out(x.byte_size());
  auto* o = reinterpret_cast<double*>(out.data());
  auto px = x.f64();
  for (size_t i = 0; i < px.size(); ++i) o[i] = av * px[i];
  return Tensor::take(DType::kF64, x.shape(), std::move(out));
}

namespace {

// In-place iterative radix-2 decimation in time. `sign` is -1 for the
// forward transform. Stage twiddles are generated with one sin/cos pair per
// distinct angle; nothing is cached between calls.
void fft_inplace(std::complex<double>* data, int64_t n, double sign) {
  // bit-reversal permutation
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (int64_t len = 2; len <= n; len <<= 1) {
    int64_t half = len >> 1;
    double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (int64_t k = 0; k < half; ++k) {
      std::complex<double> w(std::cos(ang * static_cast<double>(k)),
                             std::sin(ang * static_cast<double>(k)));
      for (int64_t i = k; i < n; i += len) {
        std::complex<double> u = data[i];
        std::complex<double> v = data[i + half] * w;
        data[i] = u + v;
        data[i + half] = u - v;
      }
    }
  }
}

}  // namespace

Tensor fft_local(const Tensor& x) {
  require(x.dtype() == DType::kC128, ErrorCode::kDTypeMismatch, "fft expects c128 input");
  require(x.shape().rank() == 1, ErrorCode::kShapeMismatch, "fft expects a rank-1 input");
  int64_t n = x.shape().dim(0);
  require(is_pow2(n), ErrorCode::kNonPowerOfTwo,
          "fft length " + std::to_string(n) + " is not a power of two");
  std::vector<uint8_t> out(x.byte_size());
  std::memcpy(out.data(), x.raw(), out.size());
  fft_inplace(reinterpret_cast<std::complex<double>*>(out.data()), n, -1.0);
  return Tensor::take(DType::kC128, x.shape(), std::move(out));
}

Tensor ifft_local(const Tensor& x) {
  require(x.dtype() == DType::kC128, ErrorCode::kDTypeMismatch, "ifft expects c128 input");
  require(x.shape().rank() == 1, ErrorCode::kShapeMismatch, "ifft expects a rank-1 input");
  int64_t n = x.shape().dim(0);
  require(is_pow2(n), ErrorCode::kNonPowerOfTwo,
          "ifft length " + std::to_string(n) + " is not a power of two");
  std::vector<uint8_t> out(x.byte_size());
  std::memcpy(out.data(), x.raw(), out.size());
  auto* d = reinterpret_cast<std::complex<double>*>(out.data());
  fft_inplace(d, n, +1.0);
  double inv = 1.0 / static_cast<double>(n);
  for (int64_t i = 0; i < n; ++i) d[i] *= inv;
  return Tensor::take(DType::kC128, x.shape(), std::move(out));
}

Tensor random_uniform(const Shape& shape, DType dtype, uint64_t seed) {
  int64_t n = shape.elem_count();
  std::vector<uint8_t> out(static_cast<size_t>(n) * dtype_size(dtype));
  switch (dtype) {
    case DType::kF32: {
      auto* o = reinterpret_cast<float*>(out.data());
      for (int64_t i = 0; i < n; ++i) o[i] = counter_uniform_f32(seed, static_cast<uint64_t>(i));
      break;
    }
    case DType::kF64: {
      auto* o = reinterpret_cast<double*>(out.data());
      for (int64_t i = 0; i < n; ++i) o[i] = counter_uniform_f64(seed, static_cast<uint64_t>(i));
      break;
    }
    case DType::kC128: {
      auto* o = reinterpret_cast<std::complex<double>*>(out.data());
      for (int64_t i = 0; i < n; ++i)
        o[i] = {counter_uniform_f64(seed, 2 * static_cast<uint64_t>(i)),
                counter_uniform_f64(seed, 2 * static_cast<uint64_t>(i) + 1)};
      break;
    }
  }
  return Tensor::take(dtype, shape, std::move(out));
}

}  // namespace flowhpc::ops
