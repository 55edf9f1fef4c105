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
#include "flowhpc/report.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "flowhpc/error.hpp"

namespace flowhpc {
namespace {

constexpr const char* kCsvVersionLine = "# flowhpc run report v1";
constexpr const char* kCsvColumns =
    "app,mode,cluster,params,rep,phase,wall_seconds,metric,value,sanity,host,cores,build";

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_append(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw_error(ErrorCode::kIoError, "cannot open report file " + path);
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void fill_environment(RunRecord& record) {
  char host[256] = {0};
  if (::gethostname(host, sizeof(host) - 1) == 0) {
    record.host = host;
  } else {
    record.host = "unknown";
  }
  record.cores = std::thread::hardware_concurrency();
  record.build = "flowhpc-0.1.0 " __VERSION__;
}

void append_run_csv(const std::string& path, const RunRecord& record) {
  const bool fresh =
      !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out = open_append(path);
  if (fresh) out << kCsvVersionLine << "\n" << kCsvColumns << "\n";
  out << csv_escape(record.app) << ',' << csv_escape(record.mode) << ','
      << csv_escape(record.cluster) << ',' << csv_escape(record.params) << ','
      << record.rep << ',' << csv_escape(record.phase) << ','
      << format_double(record.wall_seconds) << ',' << csv_escape(record.metric) << ','
      << format_double(record.value) << ',' << (record.sanity_ok ? 1 : 0) << ','
      << csv_escape(record.host) << ',' << record.cores << ','
      << csv_escape(record.build) << "\n";
  if (!out) throw_error(ErrorCode::kIoError, "short write to report file " + path);
}

void append_run_jsonl(const std::string& path, const RunRecord& record) {
  nlohmann::json j;
  j["app"] = record.app;
  j["mode"] = record.mode;
  j["cluster"] = record.cluster;
  j["params"] = record.params;
  j["rep"] = record.rep;
  j["phase"] = record.phase;
  j["wall_seconds"] = record.wall_seconds;
  j["metric"] = record.metric;
  j["value"] = record.value;
  j["sanity_ok"] = record.sanity_ok;
  j["host"] = record.host;
  j["cores"] = record.cores;
  j["build"] = record.build;
  std::ofstream out = open_append(path);
  out << j.dump() << "\n";
  if (!out) throw_error(ErrorCode::kIoError, "short write to report file " + path);
}

std::string cluster_shape(const ClusterSpec& spec) {
  std::string out;
  for (const auto& [name, tasks] : spec.jobs()) {
    if (!out.empty()) out += ',';
    out += name + "=" + std::to_string(tasks.size());
  }
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double gflops_rate(uint64_t flops, double seconds) {
  if (seconds <= 0.0) return 0.0;
  return static_cast<double>(flops) / seconds / 1e9;
}

}  // namespace flowhpc
