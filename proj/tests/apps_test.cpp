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
#include <cmath>
#include <complex>
#include <memory>
#include <thread>
#include <vector>

#include "doctest.h"
#include "flowhpc/apps/cg.hpp"
#include "flowhpc/apps/fft.hpp"
#include "flowhpc/apps/matmul.hpp"
#include "flowhpc/apps/reduce.hpp"
#include "flowhpc/apps/stream.hpp"
#include "flowhpc/harness.hpp"
#include "flowhpc/kernels.hpp"
#include "flowhpc/server.hpp"
#include "flowhpc/session.hpp"
#include "flowhpc/tile_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace flowhpc;

TEST_SUITE("apps") {

TEST_CASE("flop estimates follow the reporting conventions") {
  CHECK(flops_matmul(4) == 2 * 64 - 16);
  CHECK(flops_matmul(1) == 1);
  CHECK(flops_fft(8) == 5 * 8 * 3);
  CHECK(flops_fft(1024) == 5ull * 1024 * 10);
  CHECK(flops_cg(10, 3) == 3ull * 2 * 100);
}

TEST_CASE("matmul: work list enumerates the grid in row-major order") {
  const std::vector<WorkItem> items = make_work_list(3);
  REQUIRE(items.size() == 27);
  CHECK(items[0].i == 0);
  CHECK(items[0].k == 0);
  CHECK(items[0].j == 0);
  // j varies fastest, then k, then i.
  CHECK(items[1].j == 1);
  CHECK(items[3].k == 1);
  CHECK(items[9].i == 1);
  CHECK(items[26].i == 2);
  CHECK(items[26].k == 2);
  CHECK(items[26].j == 2);

  CHECK(target_index(WorkItem{1, 2, 0}, 3) == 3);
  // The k index never influences the output tile.
  CHECK(target_index(WorkItem{1, 0, 0}, 3) == target_index(WorkItem{1, 2, 0}, 3));
  CHECK(reducer_for_target(5, 2) == 1);
  CHECK(reducer_for_target(4, 2) == 0);
}

TEST_CASE("matmul: split and assemble invert bit-exactly") {
  testutil::TempDir dir("matmul_tiles");
  const Tensor a = testutil::random_f32(Shape::matrix(24, 24), 7);
  TileAudit audit;
  split_matrix(a, "A", 8, dir.str(), &audit);
  CHECK(audit.writes().size() == 9);
  const Tensor back = assemble_matrix(dir.str(), "A", 24, 8, &audit);
  CHECK(same_bits(a, back));
  CHECK(audit.reads().size() == 9);
  CHECK(audit.reads().at("A_0001_0002.til") == 1);
}

namespace {

// Runs a full matmul cluster in threads and returns the assembled product.
Tensor run_matmul_cluster(MatmulPlan plan, const Tensor& a, const Tensor& b) {
  testutil::TempDir tiles("mm_in");
  testutil::TempDir out("mm_out");
  plan.tiles_dir = tiles.str();
  plan.out_dir = out.str();
  split_matrix(a, "A", plan.tile, plan.tiles_dir);
  split_matrix(b, "B", plan.tile, plan.tiles_dir);

  ClusterHandle h;
  h.spec = make_local_cluster({{"worker", plan.workers}, {"reduce", plan.reducers}});
  const ClusterSpec spec = h.spec;
  for (uint32_t w = 0; w < plan.workers; ++w)
    h.add_thread_role("worker_" + std::to_string(w),
                      [plan, w, spec] { role_matmul_worker(plan, w, spec); });
  for (uint32_t r = 0; r < plan.reducers; ++r)
    h.add_thread_role("reduce_" + std::to_string(r),
                      [plan, r, spec] { role_matmul_reducer(plan, r, spec); });
  if (plan.dynamic_shard)
    h.add_thread_role("feeder", [plan, spec] { role_matmul_feeder(plan, spec); });
  h.join(120000);
  return assemble_matrix(plan.out_dir, "C", plan.n, plan.tile);
}

}  // namespace

TEST_CASE("matmul: distributed product matches the triple loop") {
  const Tensor a = testutil::random_f32(Shape::matrix(48, 48), 11);
  const Tensor b = testutil::random_f32(Shape::matrix(48, 48), 12);
  const std::vector<double> want = oracle::matmul(a.f32(), b.f32(), 48, 48, 48);

  MatmulPlan plan;
  plan.n = 48;
  plan.tile = 16;
  plan.workers = 2;
  plan.reducers = 2;
  const Tensor c = run_matmul_cluster(plan, a, b);
  const auto got = c.f32();
  for (size_t i = 0; i < got.size(); ++i)
    CHECK(std::abs(got[i] - want[i]) <= 1e-4 * std::abs(want[i]) + 1e-4);
}

TEST_CASE("matmul: dynamic sharding computes the same product") {
  const Tensor a = testutil::random_f32(Shape::matrix(32, 32), 21);
  const Tensor b = testutil::random_f32(Shape::matrix(32, 32), 22);

  MatmulPlan fixed;
  fixed.n = 32;
  fixed.tile = 16;
  fixed.workers = 2;
  fixed.reducers = 2;
  const Tensor c_static = run_matmul_cluster(fixed, a, b);

  MatmulPlan dyn = fixed;
  dyn.workers = 3;
  dyn.dynamic_shard = true;
  const Tensor c_dynamic = run_matmul_cluster(dyn, a, b);

  // Partial tiles accumulate in k order either way, so the two shardings
  // agree bit for bit.
  CHECK(same_bits(c_static, c_dynamic));
}

TEST_CASE("stream: accumulator proves every byte arrived") {
  ClusterHandle h;
  h.spec = make_local_cluster({{"ps", 1}, {"worker", 1}});
  Server ps({"ps", 0}, h.spec, {});
  ps.start();
  Server worker({"worker", 0}, h.spec, {});
  worker.start();

  for (FramingMode framing : {FramingMode::kEager, FramingMode::kStaged}) {
    StreamConfig config;
    config.size_bytes = 200 * 1000;
    config.repetitions = 4;
    config.warmups = 1;
    config.framing = framing;
    StreamResult result = run_stream(h.spec, config);
    CHECK(result.dest_exact);
    CHECK(result.max_reply_payload == 0);
    CHECK(result.rep_elapsed_ns.size() == 4);
    CHECK(result.median_mbps > 0.0);
    CHECK(result.size_bytes == config.size_bytes);
  }

  worker.stop();
  ps.stop();
}

TEST_CASE("fft: split and interleave invert bit-exactly") {
  testutil::TempDir dir("fft_tiles");
  const Tensor x = testutil::random_c128(Shape::vector(64), 31);
  TileAudit audit;
  split_signal(x, 4, dir.str(), &audit);
  const Tensor back = interleave_tiles(dir.str(), 64, 4, &audit);
  CHECK(same_bits(x, back));
  CHECK(audit.writes().size() == 4);
  CHECK(audit.writes().at("x_0003.til") == 1);
}

TEST_CASE("fft: merge variants agree with the direct transform") {
  const uint64_t n = 128;
  const uint32_t tiles = 4;
  const Tensor x = testutil::random_c128(Shape::vector(n), 33);

  // Build the per-tile spectra exactly as workers would: DFT of x[t::T].
  std::vector<Tensor> spectra;
  for (uint32_t t = 0; t < tiles; ++t) {
    std::vector<std::complex<double>> sub;
    for (uint64_t i = t; i < n; i += tiles) sub.push_back(x.c128()[i]);
    spectra.push_back(Tensor::from_c128(Shape::vector(n / tiles), oracle::dft(sub)));
  }

  const std::vector<std::complex<double>> want = oracle::dft(
      std::vector<std::complex<double>>(x.c128().begin(), x.c128().end()));

  const Tensor direct = fft_merge(spectra, n);
  const Tensor butterfly = fft_merge_butterfly(spectra, n);
  CHECK(oracle::rel_l2_error(direct.c128(), want) < 1e-11);
  CHECK(oracle::rel_l2_error(butterfly.c128(), want) < 1e-11);
  CHECK(oracle::rel_l2_error(butterfly.c128(), direct.c128()) < 1e-12);
}

TEST_CASE("fft: distributed transform matches the direct definition") {
  const uint64_t n = 256;
  const Tensor x = testutil::random_c128(Shape::vector(n), 41);
  testutil::TempDir tiles("fft_in");
  testutil::TempDir out("fft_out");

  for (bool butterfly : {false, true}) {
    FFTPlan plan;
    plan.n = n;
    plan.tiles = 4;
    plan.workers = 2;
    plan.tiles_dir = tiles.str();
    plan.out_path = out.str() + (butterfly ? "/spec_b.til" : "/spec_d.til");
    plan.butterfly_merge = butterfly;
    split_signal(x, plan.tiles, plan.tiles_dir);

    ClusterHandle h;
    h.spec = make_local_cluster({{"ps", 1}, {"worker", plan.workers}});
    const ClusterSpec spec = h.spec;
    h.add_thread_role("merger", [plan, spec] { role_fft_merger(plan, spec, ""); });
    for (uint32_t w = 0; w < plan.workers; ++w)
      h.add_thread_role("worker_" + std::to_string(w),
                        [plan, w, spec] { role_fft_worker(plan, w, spec); });
    h.join(120000);

    const Tensor spectrum = read_vector_tile(plan.out_path, 0);
    const std::vector<std::complex<double>> want = oracle::dft(
        std::vector<std::complex<double>>(x.c128().begin(), x.c128().end()));
    CHECK(oracle::rel_l2_error(spectrum.c128(), want) < 1e-9);
  }
}

TEST_CASE("cg: padding rounds the dimension up to the worker count") {
  CHECK(cg_padded_dim(36, 2) == 36);
  CHECK(cg_padded_dim(7, 3) == 9);
  CHECK(cg_padded_dim(1, 4) == 4);
  CHECK(cg_padded_dim(8, 1) == 8);
}

TEST_CASE("cg: split pads with identity rows and zero rhs entries") {
  const uint32_t m = 7;
  const uint32_t workers = 3;
  const Tensor a = random_spd_matrix(m, 5);
  const Tensor b = random_vector_f64(m, 6);
  testutil::TempDir dir("cg_blocks");
  split_cg_system(a, b, workers, dir.str());

  const uint32_t padded = cg_padded_dim(m, workers);
  const uint32_t rows = padded / workers;
  for (uint32_t w = 0; w < workers; ++w) {
    const Tensor block = read_rect_tile(vector_tile_path(dir.str(), "A_block", w), w, 0);
    REQUIRE(block.shape() == Shape::matrix(rows, padded));
    for (uint32_t r = 0; r < rows; ++r) {
      const uint32_t global = w * rows + r;
      for (uint32_t c = 0; c < padded; ++c) {
        const double got = block.f64()[r * padded + c];
        double want = 0.0;
        if (global < m && c < m)
          want = a.f64()[global * m + c];
        else if (global == c)
          want = 1.0;
        CHECK(got == want);
      }
    }
  }
  const Tensor rhs = read_vector_tile(vector_tile_path(dir.str(), "b", 0), 0);
  REQUIRE(rhs.shape() == Shape::vector(padded));
  for (uint32_t i = 0; i < padded; ++i)
    CHECK(rhs.f64()[i] == (i < m ? b.f64()[i] : 0.0));
}

TEST_CASE("cg: poisson matrix has the 5-point structure") {
  const uint32_t grid = 4;
  const Tensor a = poisson2d_matrix(grid);
  const uint32_t m = grid * grid;
  REQUIRE(a.shape() == Shape::matrix(m, m));
  const auto v = a.f64();
  for (uint32_t r = 0; r < m; ++r) {
    for (uint32_t c = 0; c < m; ++c) {
      const double got = v[r * m + c];
      CHECK(got == v[c * m + r]);
      if (r == c) CHECK(got == 4.0);
    }
    // Interior points couple to 4 neighbors with -1 each.
    const uint32_t x = r % grid;
    const uint32_t y = r / grid;
    double row_sum = 0.0;
    for (uint32_t c = 0; c < m; ++c) row_sum += v[r * m + c];
    const uint32_t neighbors = (x > 0) + (x + 1 < grid) + (y > 0) + (y + 1 < grid);
    CHECK(row_sum == doctest::Approx(4.0 - neighbors));
  }
}

TEST_CASE("cg: random spd matrix is symmetric and diagonally dominant") {
  const uint32_t m = 24;
  const Tensor a = random_spd_matrix(m, 9);
  const auto v = a.f64();
  for (uint32_t r = 0; r < m; ++r) {
    double off = 0.0;
    for (uint32_t c = 0; c < m; ++c) {
      CHECK(v[r * m + c] == v[c * m + r]);
      if (r != c) off += std::abs(v[r * m + c]);
    }
    CHECK(v[r * m + r] > off);
  }
}

namespace {

CGSolveOutcome run_cg_cluster(const CGConfig& config) {
  ClusterHandle h;
  h.spec = make_local_cluster({{"ps", 1}, {"worker", config.workers}});
  const ClusterSpec spec = h.spec;
  h.add_thread_role("reducer", [config, spec] { role_cg_reducer(config, spec); });
  for (uint32_t w = 0; w < config.workers; ++w)
    h.add_thread_role("worker_" + std::to_string(w),
                      [config, w, spec] { role_cg_worker(config, w, spec); });
  CGSolveOutcome out = cg_collect(config, spec);
  shutdown_cluster(spec);
  h.join(120000);
  return out;
}

}  // namespace

TEST_CASE("cg: distributed solve matches a dense direct solve") {
  const uint32_t grid = 6;
  const uint32_t m = grid * grid;
  const Tensor a = poisson2d_matrix(grid);
  const Tensor b = random_vector_f64(m, 17);
  testutil::TempDir dir("cg_solve");
  split_cg_system(a, b, 2, dir.str());

  CGConfig config;
  config.m = m;
  config.workers = 2;
  config.fixed_iters = false;
  config.iters = 200;
  config.tol = 1e-10;
  config.refresh_interval = 25;
  config.blocks_dir = dir.str();
  CGSolveOutcome out = run_cg_cluster(config);

  CHECK(out.converged);
  CHECK(out.iterations <= 200);
  REQUIRE(out.x.shape() == Shape::vector(m));

  const std::vector<double> want =
      oracle::solve_dense(std::vector<double>(a.f64().begin(), a.f64().end()),
                          std::vector<double>(b.f64().begin(), b.f64().end()), m);
  double num = 0.0, den = 0.0;
  for (uint32_t i = 0; i < m; ++i) {
    num += (out.x.f64()[i] - want[i]) * (out.x.f64()[i] - want[i]);
    den += want[i] * want[i];
  }
  CHECK(std::sqrt(num / den) < 1e-8);

  // Worker 0 reported one residual per iteration, ending under tolerance.
  REQUIRE(!out.residual_history.empty());
  CHECK(out.residual_history.size() == out.iterations);
  double bnorm2 = 0.0;
  for (double v : b.f64()) bnorm2 += v * v;
  CHECK(std::sqrt(out.residual_history.back().second / bnorm2) <= config.tol);
}

TEST_CASE("cg: checkpoint restore reproduces the uninterrupted run") {
  const uint32_t m = 25;
  const Tensor a = random_spd_matrix(m, 3);
  const Tensor b = random_vector_f64(m, 4);
  testutil::TempDir blocks("cg_ck_blocks");
  testutil::TempDir ck("cg_ck_state");
  split_cg_system(a, b, 2, blocks.str());

  CGConfig config;
  config.m = m;
  config.workers = 2;
  config.fixed_iters = true;
  config.iters = 16;
  config.refresh_interval = 0;
  config.blocks_dir = blocks.str();
  config.checkpoint_dir = ck.str();
  config.checkpoint_interval = 4;
  const CGSolveOutcome full = run_cg_cluster(config);
  CHECK(full.iterations == 16);

  CHECK(latest_common_checkpoint(ck.str(), 2) == std::optional<uint64_t>(16));

  CGConfig resume = config;
  resume.restore_from = 8;
  const CGSolveOutcome restored = run_cg_cluster(resume);
  CHECK(restored.iterations == 16);

  // Two workers only, so every reduction is a commutative two-term sum and
  // the restored trajectory reproduces the original bit for bit.
  REQUIRE(restored.x.shape() == full.x.shape());
  for (uint32_t i = 0; i < m; ++i) CHECK(restored.x.f64()[i] == full.x.f64()[i]);
}

TEST_CASE("reduce channel: barrier rounds sum and gather exactly") {
  ClusterHandle h;
  h.spec = make_local_cluster({{"ps", 1}});
  Server ps({"ps", 0}, h.spec, {});
  ps.start();
  const TaskAddress addr = h.spec.address_of({"ps", 0});

  const uint32_t workers = 3;
  const uint32_t rounds = 50;

  std::thread sum_server([&] {
    Session s(addr);
    CHECK(serve_scalar_reduce(s, "t.sum", workers, 30000) == rounds);
  });
  std::thread gather_server([&] {
    Session s(addr);
    CHECK(serve_all_gather(s, "t.gather", workers, 30000) == rounds);
  });

  std::vector<std::thread> members;
  for (uint32_t w = 0; w < workers; ++w) {
    members.emplace_back([&, w] {
      Session s(addr);
      ReduceChannel sum(&s, "t.sum", workers, w, 30000);
      ReduceChannel gather(&s, "t.gather", workers, w, 30000);
      for (uint32_t r = 0; r < rounds; ++r) {
        // Integer-valued contributions make the expected sum exact.
        const double got = sum.reduce_scalar(double(w + 1) * (r + 1));
        CHECK(got == double(1 + 2 + 3) * (r + 1));
        const std::vector<double> slice{double(w), double(r)};
        const std::vector<double> all = gather.all_gather(slice);
        REQUIRE(all.size() == 2 * workers);
        for (uint32_t k = 0; k < workers; ++k) {
          CHECK(all[2 * k] == double(k));
          CHECK(all[2 * k + 1] == double(r));
        }
      }
      CHECK(sum.rounds_completed() == rounds);
    });
  }
  for (auto& t : members) t.join();

  {
    Session s(addr);
    close_reduce_channel(s, "t.sum");
    close_reduce_channel(s, "t.gather");
  }
  sum_server.join();
  gather_server.join();
  ps.stop();
}

}  // TEST_SUITE
