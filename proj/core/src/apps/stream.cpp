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
#include "flowhpc/apps/stream.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "flowhpc/error.hpp"
#include "flowhpc/graph.hpp"
#include "flowhpc/rng.hpp"
#include "flowhpc/session.hpp"

namespace flowhpc {
namespace {

// Small integer sources keep repeated f32 addition exact: values in [1,8]
// summed 100 times stay far below the 2^24 integer-exact range.
std::vector<float> make_source(uint64_t n, uint64_t seed) {
  std::vector<float> src(n);
  for (uint64_t i = 0; i < n; ++i) {
    src[i] = 1.0f + static_cast<float>(counter_bits(seed, i) & 7u);
  }
  return src;
}

double to_mbps(uint64_t bytes, uint64_t elapsed_ns) {
  if (elapsed_ns == 0) return 0.0;
  return (static_cast<double>(bytes) / 1e6) / (static_cast<double>(elapsed_ns) / 1e9);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

StreamResult run_stream_bandwidth(const TaskAddress& server, const StreamConfig& config) {
  if (config.size_bytes == 0 || config.size_bytes % sizeof(float) != 0) {
    throw_error(ErrorCode::kInvalidArgument,
                "transfer size must be a positive multiple of 4 bytes");
  }
  if (config.repetitions == 0) {
    throw_error(ErrorCode::kInvalidArgument, "need at least one repetition");
  }
  const uint64_t n = config.size_bytes / sizeof(float);
  const std::vector<float> source = make_source(n, config.seed);
  const Shape shape = Shape::vector(static_cast<int64_t>(n));
  const Tensor src_tensor = Tensor::from_f32(shape, source);

  // One graph carries init and push paths; partial execution selects one per
  // run. Warm-up pushes target a separate accumulator so the timed one only
  // ever sees the timed repetitions.
  GraphBuilder b;
  const uint32_t ph = b.placeholder(DType::kF32, shape);
  const uint32_t init_warm = b.assign("stream_warmup", ph, config.device);
  const uint32_t init_dest = b.assign("stream_dest", ph, config.device);
  const uint32_t push_warm = b.assign_add("stream_warmup", ph, config.device);
  const uint32_t push_dest = b.assign_add("stream_dest", ph, config.device);
  const Graph g = b.build();

  SessionOptions sopts;
  sopts.framing = config.framing;
  Session session(server, sopts);

  const Tensor zeros = Tensor::zeros(DType::kF32, shape);
  session.run(g, {init_warm, init_dest}, {{ph, zeros}}, /*return_values=*/false);

  FeedMap feeds{{ph, src_tensor}};
  const uint32_t graph_id = session.register_graph(g);
  for (uint32_t i = 0; i < config.warmups; ++i) {
    session.run_registered(graph_id, {push_warm}, feeds, /*return_values=*/false);
  }

  StreamResult result;
  result.size_bytes = config.size_bytes;
  result.framing = config.framing;
  result.rep_elapsed_ns.reserve(config.repetitions);
  for (uint32_t rep = 0; rep < config.repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    session.run_registered(graph_id, {push_dest}, feeds, /*return_values=*/false);
    const auto t1 = std::chrono::steady_clock::now();
    result.rep_elapsed_ns.push_back(
        static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
    result.max_reply_payload =
        std::max(result.max_reply_payload, session.stats().last_response_payload);
  }

  std::vector<double> mbps;
  mbps.reserve(result.rep_elapsed_ns.size());
  double sum = 0.0;
  for (uint64_t ns : result.rep_elapsed_ns) {
    const double v = to_mbps(config.size_bytes, ns);
    mbps.push_back(v);
    sum += v;
  }
  result.median_mbps = median_of(mbps);
  result.mean_mbps = mbps.empty() ? 0.0 : sum / static_cast<double>(mbps.size());

  std::vector<float> expected(n);
  const float reps = static_cast<float>(config.repetitions);
  for (uint64_t i = 0; i < n; ++i) expected[i] = reps * source[i];
  const Tensor dest = session.read_variable("stream_dest");
  result.dest_exact = dest.same_bits(Tensor::from_f32(shape, expected));
  return result;
}

StreamResult run_stream(const ClusterSpec& cluster, const StreamConfig& config) {
  const TaskAddress ps = cluster.address_of({"ps", 0});
  StreamResult result = run_stream_bandwidth(ps, config);
  if (!result.dest_exact) {
    throw_error(ErrorCode::kSanityCheckFailed,
                "stream accumulator does not equal repetitions times source");
  }
  if (result.max_reply_payload != 0) {
    throw_error(ErrorCode::kSanityCheckFailed,
                "stream replies carried " + std::to_string(result.max_reply_payload) +
                    " payload bytes, expected none");
  }
  return result;
}

void append_stream_csv(const std::string& path, const StreamResult& result) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw_error(ErrorCode::kIoError, "cannot open " + path + " for append");
  if (fresh) {
    out << "# flowhpc stream report v1\n";
    out << "size_bytes,framing,rep,elapsed_ns\n";
  }
  const char* label = framing_mode_name(result.framing);
  for (size_t rep = 0; rep < result.rep_elapsed_ns.size(); ++rep) {
    out << result.size_bytes << "," << label << "," << rep << "," << result.rep_elapsed_ns[rep]
        << "\n";
  }
  out << "# summary size_bytes=" << result.size_bytes << " framing=" << label
      << " reps=" << result.rep_elapsed_ns.size() << " median_mbps=" << result.median_mbps
      << " mean_mbps=" << result.mean_mbps
      << " total_bytes=" << result.size_bytes * result.rep_elapsed_ns.size()
      << " dest_exact=" << (result.dest_exact ? 1 : 0) << "\n";
  if (!out) throw_error(ErrorCode::kIoError, "short write to " + path);
}

}  // namespace flowhpc
