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
#ifndef FLOWHPC_RNG_HPP_
#define FLOWHPC_RNG_HPP_

#include <cstdint>

namespace flowhpc {

// Counter-based generator: the value at (seed, index) is a pure function of
// both, so a tensor filled from it is identical no matter how the fill is
// parallelized or split.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t counter_bits(uint64_t seed, uint64_t index) {
  return mix64(mix64(seed) ^ (index * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull));
}

/// Uniform in [0,1) with 24 bits of mantissa.
inline float counter_uniform_f32(uint64_t seed, uint64_t index) {
  return static_cast<float>(counter_bits(seed, index) >> 40) * 0x1.0p-24f;
}

/// Uniform in [0,1) with 53 bits of mantissa.
inline double counter_uniform_f64(uint64_t seed, uint64_t index) {
  return static_cast<double>(counter_bits(seed, index) >> 11) * 0x1.0p-53;
}

}  // namespace flowhpc

#endif  // FLOWHPC_RNG_HPP_
