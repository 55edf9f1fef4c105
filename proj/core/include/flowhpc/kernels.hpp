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
#ifndef FLOWHPC_KERNELS_HPP_
#define FLOWHPC_KERNELS_HPP_

#include "flowhpc/tensor.hpp"

namespace flowhpc::ops {

// Local numerical kernels. All of them produce fresh tensors; accumulation
// inside a kernel is sequential left-to-right so single-process results are
// bit-deterministic.

/// f32 matrix product, (m,k) x (k,n) -> (m,n).
Tensor matmul(const Tensor& a, const Tensor& b);

/// Element-wise sum; operands must agree in dtype and shape.
Tensor add(const Tensor& a, const Tensor& b);

/// f64 dot product of two equal-length vectors -> rank-0 tensor.
Tensor dot(const Tensor& a, const Tensor& b);

/// f64 matrix-vector product, (m,n) x (n,) -> (m,).
Tensor matvec(const Tensor& a, const Tensor& x);

/// alpha*x + y for f64 vectors; alpha is a rank-0 f64 tensor.
Tensor axpy(const Tensor& alpha, const Tensor& x, const Tensor& y);

/// alpha*x for f64 tensors; alpha is a rank-0 f64 tensor.
Tensor scale(const Tensor& alpha, const Tensor& x);

/// Unnormalized forward DFT of a power-of-two length c128 vector,
/// radix-2 decimation in time.
Tensor fft_local(const Tensor& x);

/// Inverse of fft_local, including the 1/n normalization.
Tensor ifft_local(const Tensor& x);

/// Deterministic uniforms in [0,1) keyed by (seed, element index).
Tensor random_uniform(const Shape& shape, DType dtype, uint64_t seed);

}  // namespace flowhpc::ops

#endif  // FLOWHPC_KERNELS_HPP_
