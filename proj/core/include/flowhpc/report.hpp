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
#ifndef FLOWHPC_REPORT_HPP_
#define FLOWHPC_REPORT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowhpc/cluster_spec.hpp"

namespace flowhpc {

// One benchmark measurement. A run emits one record per repetition per
// timed phase; summary rows use rep = -1.
struct RunRecord {
  std::string app;      // stream, matmul, cg, fft
  std::string mode;     // simulated, launched, external
  std::string cluster;  // job shape, e.g. "ps=1,worker=4"
  std::string params;   // key=value pairs separated by spaces
  int32_t rep = 0;      // 0-based repetition, -1 for summary rows
  std::string phase = "total";
  double wall_seconds = 0.0;
  std::string metric;  // gflops or mbps, empty when only timing
  double value = 0.0;
  bool sanity_ok = true;
  // Environment fingerprint, filled by fill_environment.
  std::string host;
  uint32_t cores = 0;
  std::string build;
};

// Populates host, cores and build on the record.
void fill_environment(RunRecord& record);

// Appends to an append-only CSV report. A version header comment and the
// column row are written once when the file is created.
void append_run_csv(const std::string& path, const RunRecord& record);

// Appends the record as a single JSON object line.
void append_run_jsonl(const std::string& path, const RunRecord& record);

// "ps=1,worker=4" in job declaration order.
std::string cluster_shape(const ClusterSpec& spec);

double median_of(std::vector<double> values);
double mean_of(std::span<const double> values);

// Gflops/s for a known operation count over a wall-clock interval.
double gflops_rate(uint64_t flops, double seconds);

}  // namespace flowhpc

#endif  // FLOWHPC_REPORT_HPP_
