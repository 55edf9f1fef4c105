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
#ifndef FLOWHPC_APPS_STREAM_HPP_
#define FLOWHPC_APPS_STREAM_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/device.hpp"
#include "flowhpc/wire.hpp"

namespace flowhpc {

// Point-to-point bandwidth probe. The worker holds a constant f32 source
// tensor and repeatedly folds it into a server-resident accumulator with
// assign_add, so every repetition moves the full payload over the wire and
// the final accumulator value proves nothing was dropped or reordered.
struct StreamConfig {
  // Bytes moved per repetition. Must be a positive multiple of 4.
  uint64_t size_bytes = 2u * 1000u * 1000u;
  uint32_t repetitions = 100;
  // Untimed repetitions against a separate accumulator, so cold-path costs
  // (graph registration, first-touch allocation) stay out of the sample.
  uint32_t warmups = 3;
  FramingMode framing = FramingMode::kEager;
  uint64_t seed = 1;
  uint32_t timeout_ms = 30000;
  // Placement for the accumulator ops on the server. Unset lets the placer
  // choose.
  std::optional<DeviceName> device;
};

struct StreamResult {
  uint64_t size_bytes = 0;
  FramingMode framing = FramingMode::kEager;
  std::vector<uint64_t> rep_elapsed_ns;
  // Megabyte = 1e6 bytes, the memory-bandwidth convention.
  double median_mbps = 0.0;
  double mean_mbps = 0.0;
  // Accumulator equals repetitions * source bit-exactly. Source values are
  // small integers, so float accumulation is exact and equality is strict.
  bool dest_exact = false;
  // Largest reply payload seen during the timed loop. Acknowledgements carry
  // no tensor data, so this stays 0.
  uint64_t max_reply_payload = 0;
};

StreamResult run_stream_bandwidth(const TaskAddress& server, const StreamConfig& config);

// Cluster-level entry: pushes from the "worker" side into the single "ps"
// task. Fails with SanityCheckFailed if the accumulator check does not hold.
StreamResult run_stream(const ClusterSpec& cluster, const StreamConfig& config);

// Appends per-rep rows and a summary block to a CSV. Columns:
// size_bytes, framing, rep, elapsed_ns. Summary rows use rep=-1 with the
// statistic name in the framing column suffix.
void append_stream_csv(const std::string& path, const StreamResult& result);

}  // namespace flowhpc

#endif  // FLOWHPC_APPS_STREAM_HPP_
