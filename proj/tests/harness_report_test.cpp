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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "flowhpc/apps/cg.hpp"
#include "flowhpc/error.hpp"
#include "flowhpc/harness.hpp"
#include "flowhpc/report.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace flowhpc;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void touch(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << "x";
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("statistics helpers") {
  CHECK(median_of({3.0}) == 3.0);
  CHECK(median_of({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median_of({4.0, 1.0, 3.0, 2.0}) == 2.5);
  const std::vector<double> v{1.0, 2.0, 6.0};
  CHECK(mean_of(v) == doctest::Approx(3.0));
  CHECK(gflops_rate(2'000'000'000ull, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("cluster shape lists jobs in declaration order") {
  ClusterSpec spec;
  spec.add_job("ps", {TaskAddress{"h", 1}});
  spec.add_job("worker", {TaskAddress{"h", 2}, TaskAddress{"h", 3}, TaskAddress{"h", 4},
                          TaskAddress{"h", 5}});
  CHECK(cluster_shape(spec) == "ps=1,worker=4");
}

TEST_CASE("run records append to csv and jsonl") {
  testutil::TempDir dir("report");
  RunRecord record;
  record.app = "stream";
  record.mode = "simulated";
  record.cluster = "ps=1,worker=1";
  record.params = "size=8000";
  record.rep = 0;
  record.wall_seconds = 0.5;
  record.metric = "mbps";
  record.value = 123.5;
  fill_environment(record);
  CHECK(!record.host.empty());
  CHECK(record.cores > 0);
  CHECK(!record.build.empty());

  const std::string csv = dir.sub("report.csv");
  append_run_csv(csv, record);
  record.rep = 1;
  append_run_csv(csv, record);
  const std::vector<std::string> lines = read_lines(csv);
  // Comment header and column row are written once, then one row per call.
  REQUIRE(lines.size() == 4);
  CHECK(lines[0][0] == '#');
  CHECK(lines[1].find("app") != std::string::npos);
  CHECK(lines[2].find("stream") != std::string::npos);
  CHECK(lines[3].find("123.5") != std::string::npos);

  const std::string jsonl = dir.sub("report.jsonl");
  append_run_jsonl(jsonl, record);
  append_run_jsonl(jsonl, record);
  const std::vector<std::string> rows = read_lines(jsonl);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    const nlohmann::json j = nlohmann::json::parse(row);
    CHECK(j.at("app").get<std::string>() == "stream");
    CHECK(j.at("rep").get<int>() == 1);
    CHECK(j.at("value").get<double>() == doctest::Approx(123.5));
    CHECK(j.at("sanity_ok").get<bool>());
  }
}

TEST_CASE("latest common checkpoint intersects per-worker ids") {
  testutil::TempDir dir("ckpt_ids");
  const fs::path root = dir.path();
  touch(root / "worker_0" / "manifest-5");
  touch(root / "worker_0" / "manifest-10");
  touch(root / "worker_1" / "manifest-5");
  CHECK(latest_common_checkpoint(dir.str(), 2) == std::optional<uint64_t>(5));

  touch(root / "worker_1" / "manifest-10");
  CHECK(latest_common_checkpoint(dir.str(), 2) == std::optional<uint64_t>(10));

  // Stray files are not checkpoints.
  touch(root / "worker_0" / "manifest-abc");
  touch(root / "worker_1" / "data-12");
  CHECK(latest_common_checkpoint(dir.str(), 2) == std::optional<uint64_t>(10));

  // A worker with no checkpoints sinks the whole set.
  CHECK(!latest_common_checkpoint(dir.str(), 3).has_value());
  CHECK(!latest_common_checkpoint(dir.sub("missing"), 1).has_value());
}

TEST_CASE("local clusters get distinct loopback ports") {
  const ClusterSpec spec = make_local_cluster({{"a", 2}, {"b", 1}});
  CHECK(spec.task_count() == 3);
  std::set<uint16_t> ports;
  for (const auto& [job, tasks] : spec.jobs()) {
    for (const auto& addr : tasks) {
      CHECK(addr.host == "127.0.0.1");
      ports.insert(addr.port);
    }
  }
  CHECK(ports.size() == 3);
}

TEST_CASE("launch mode names round trip") {
  CHECK(parse_launch_mode("simulated") == LaunchMode::kSimulated);
  CHECK(parse_launch_mode("launched") == LaunchMode::kLaunched);
  CHECK(parse_launch_mode("external") == LaunchMode::kExternal);
  for (LaunchMode mode :
       {LaunchMode::kSimulated, LaunchMode::kLaunched, LaunchMode::kExternal}) {
    CHECK(parse_launch_mode(launch_mode_name(mode)) == mode);
  }
  CHECK_THROWS_AS(parse_launch_mode("threads"), FlowError);
}

TEST_CASE("role binary env plumbing") {
  ::unsetenv("FLOWHPC_BIN");
  CHECK(flowhpc_bin_from_env().empty());
  ::setenv("FLOWHPC_BIN", "/opt/flowhpc", 1);
  CHECK(flowhpc_bin_from_env() == "/opt/flowhpc");
  ::unsetenv("FLOWHPC_BIN");
}

TEST_CASE("stream harness sweeps sizes and writes reports") {
  testutil::TempDir out("harness_stream");
  HarnessOptions opts;
  opts.mode = LaunchMode::kSimulated;
  opts.out_dir = out.str();

  StreamConfig config;
  config.repetitions = 3;
  config.warmups = 1;
  const StreamOutcome outcome = harness_stream(opts, config, {8000, 16000});

  REQUIRE(outcome.sweep.size() == 2);
  CHECK(outcome.sweep[0].size_bytes == 8000);
  CHECK(outcome.sweep[1].size_bytes == 16000);
  CHECK(outcome.result.size_bytes == 16000);
  for (const auto& r : outcome.sweep) {
    CHECK(r.dest_exact);
    CHECK(r.rep_elapsed_ns.size() == 3);
  }
  CHECK(!outcome.records.empty());
  for (const auto& rec : outcome.records) {
    CHECK(rec.app == "stream");
    CHECK(rec.mode == "simulated");
    CHECK(rec.sanity_ok);
  }
  CHECK(fs::exists(out.path() / "report.csv"));
  CHECK(fs::exists(out.path() / "report.jsonl"));

  // Every jsonl row must parse.
  for (const auto& line : read_lines(out.sub("report.jsonl")))
    CHECK_NOTHROW(nlohmann::json::parse(line));
}

TEST_CASE("matmul harness validates and reports a rate") {
  testutil::TempDir out("harness_matmul");
  HarnessOptions opts;
  opts.mode = LaunchMode::kSimulated;
  opts.out_dir = out.str();
  opts.reps = 1;

  MatmulPlan plan;
  plan.n = 32;
  plan.tile = 16;
  plan.workers = 2;
  plan.reducers = 2;
  const Tensor a = testutil::random_f32(Shape::matrix(32, 32), 51);
  const Tensor b = testutil::random_f32(Shape::matrix(32, 32), 52);
  const MatmulOutcome outcome = harness_matmul(opts, plan, a, b);

  REQUIRE(outcome.rep_seconds.size() == 1);
  CHECK(outcome.median_gflops > 0.0);
  const std::vector<double> want = oracle::matmul(a.f32(), b.f32(), 32, 32, 32);
  const auto got = outcome.c.f32();
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); i += 37)
    CHECK(std::abs(got[i] - want[i]) <= 1e-4 * std::abs(want[i]) + 1e-4);
  CHECK(fs::exists(out.path() / "report.csv"));
}

TEST_CASE("cg harness recomputes the driver-side residual") {
  testutil::TempDir out("harness_cg");
  HarnessOptions opts;
  opts.mode = LaunchMode::kSimulated;
  opts.out_dir = out.str();
  opts.reps = 1;

  const uint32_t m = 25;
  const Tensor a = random_spd_matrix(m, 61);
  const Tensor b = random_vector_f64(m, 62);
  CGConfig config;
  config.m = m;
  config.workers = 2;
  config.fixed_iters = false;
  config.iters = 100;
  config.tol = 1e-9;
  const CGOutcome outcome = harness_cg(opts, config, a, b);

  CHECK(outcome.solve.converged);
  CHECK(outcome.residual <= 1e-7);
  CHECK(outcome.median_gflops > 0.0);
  REQUIRE(outcome.rep_seconds.size() == 1);
}

TEST_CASE("fft harness produces the reference spectrum") {
  testutil::TempDir out("harness_fft");
  HarnessOptions opts;
  opts.mode = LaunchMode::kSimulated;
  opts.out_dir = out.str();
  opts.reps = 1;

  FFTPlan plan;
  plan.n = 256;
  plan.tiles = 2;
  plan.workers = 1;
  const Tensor x = testutil::random_c128(Shape::vector(256), 71);
  const FFTOutcome outcome = harness_fft(opts, plan, x);

  const std::vector<std::complex<double>> want = oracle::dft(
      std::vector<std::complex<double>>(x.c128().begin(), x.c128().end()));
  CHECK(oracle::rel_l2_error(outcome.spectrum.c128(), want) < 1e-9);
  REQUIRE(outcome.rep_seconds.size() == 1);
  REQUIRE(outcome.collect_seconds.size() == 1);
  REQUIRE(outcome.merge_seconds.size() == 1);
  CHECK(outcome.median_gflops > 0.0);
}

}  // TEST_SUITE
