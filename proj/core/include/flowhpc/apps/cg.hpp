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
#ifndef FLOWHPC_APPS_CG_HPP_
#define FLOWHPC_APPS_CG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/device.hpp"
#include "flowhpc/tile_io.hpp"

namespace flowhpc {

// Distributed Conjugate Gradient. Each worker owns a dense row block of A
// and the matching slices of x, r, p as variables on its own task server;
// the standard recurrences run as graphs against those variables, and the
// cross-worker dot products go through reduce channels hosted on the ps
// task. One registered graph serves every iteration, so graph size is
// independent of the iteration count.
struct CGConfig {
  uint32_t m = 0;       // logical dimension; padded up to a multiple of W
  uint32_t workers = 1;
  // Fixed mode runs exactly `iters` iterations, the measurement convention.
  // Tolerance mode stops at ||r||/||b|| <= tol and treats `iters` as a cap.
  bool fixed_iters = true;
  uint32_t iters = 500;
  double tol = 1e-8;
  // Recompute r = b - A*x from scratch this often to bound drift. 0 = never.
  uint32_t refresh_interval = 50;
  std::string blocks_dir;
  // Right-hand-side tile file. Defaults to "<blocks_dir>/b_0000.til".
  std::string rhs_path;
  std::string checkpoint_dir;        // empty disables checkpointing
  uint32_t checkpoint_interval = 0;  // iterations between checkpoints
  std::optional<uint64_t> restore_from;
  // Streams x to the driver once per iteration. Costs one extra gather
  // round; meant for convergence-trajectory tests.
  bool trace_x = false;
  uint32_t timeout_ms = 120000;
  std::optional<DeviceName> device;
};

// Flop estimate iters * 2 * N^2: the matvec term only, the reporting
// convention this benchmark family uses.
uint64_t flops_cg(uint64_t n, uint64_t iters);

// Dimension after padding to a multiple of the worker count.
uint32_t cg_padded_dim(uint32_t m, uint32_t workers);

// Writes per-worker row-block files "A_block_%04u.til" and the padded right
// hand side "b_0000.til". Padding adds identity rows and zero b entries, so
// the padded system stays SPD and the extra solution entries are zero.
void split_cg_system(const Tensor& a, const Tensor& b, uint32_t workers, const std::string& dir,
                     TileAudit* audit = nullptr);

// Dense SPD test systems.
// 5-point 2D Poisson matrix on a grid x grid mesh, dimension grid^2.
Tensor poisson2d_matrix(uint32_t grid);
// Diagonally dominant symmetric matrix with off-diagonal entries in [-1,1).
Tensor random_spd_matrix(uint32_t m, uint64_t seed);
Tensor random_vector_f64(uint32_t m, uint64_t seed);

struct CGWorkerResult {
  uint32_t iterations = 0;
  bool converged = false;
  double rtr = 0.0;  // final global r'r
};

// Runs one worker's share of the solve. Reports completion on the ps "done"
// queue before returning; convergence failures are reported, not thrown, so
// the driver can collect every worker first.
CGWorkerResult cg_worker(const CGConfig& config, uint32_t worker_index,
                         const ClusterSpec& cluster, TileAudit* audit = nullptr);

// Serves the three reduce channels (r'r, p'Ap, vector gather) on the ps
// task until their queues close. Returns total rounds served per channel.
struct CGReducerStats {
  uint64_t rtr_rounds = 0;
  uint64_t pap_rounds = 0;
  uint64_t gather_rounds = 0;
};
CGReducerStats cg_reducer(const CGConfig& config, const ClusterSpec& cluster);

struct CGSolveOutcome {
  Tensor x;  // (m,), padding stripped
  uint32_t iterations = 0;
  bool converged = false;
  double rtr = 0.0;
  // (iteration, global r'r) pairs pushed by worker 0.
  std::vector<std::pair<uint32_t, double>> residual_history;
  // Padded x after each iteration; only with trace_x.
  std::vector<Tensor> x_trace;
};

// Driver side: waits for all worker completions, gathers the solution and
// history, and raises NotConverged in tolerance mode if the cap was hit.
CGSolveOutcome cg_collect(const CGConfig& config, const ClusterSpec& cluster);

}  // namespace flowhpc

#endif  // FLOWHPC_APPS_CG_HPP_
