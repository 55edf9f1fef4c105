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
#include "flowhpc/apps/cg.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <thread>

#include "flowhpc/apps/reduce.hpp"
#include "flowhpc/error.hpp"
#include "flowhpc/graph.hpp"
#include "flowhpc/rng.hpp"
#include "flowhpc/session.hpp"

namespace flowhpc {
namespace {

constexpr const char* kRtrChannel = "cg.rtr";
constexpr const char* kPapChannel = "cg.pap";
constexpr const char* kGatherChannel = "cg.gather";
constexpr const char* kDoneQueue = "cg.done";
constexpr const char* kHistoryQueue = "cg.history";
constexpr const char* kTraceQueue = "cg.xtrace";

void check_config(const CGConfig& cfg) {
  if (cfg.m == 0) throw_error(ErrorCode::kInvalidArgument, "system dimension must be positive");
  if (cfg.workers == 0) throw_error(ErrorCode::kInvalidArgument, "need at least one worker");
  if (!cfg.fixed_iters && cfg.iters == 0) {
    throw_error(ErrorCode::kInvalidArgument, "tolerance mode needs a positive iteration cap");
  }
}

uint32_t history_capacity(const CGConfig& cfg) { return cfg.iters + 16; }

std::string block_path(const CGConfig& cfg, uint32_t worker) {
  return vector_tile_path(cfg.blocks_dir, "A_block", worker);
}

std::string rhs_path(const CGConfig& cfg) {
  if (!cfg.rhs_path.empty()) return cfg.rhs_path;
  return vector_tile_path(cfg.blocks_dir, "b", 0);
}

std::string worker_checkpoint_dir(const CGConfig& cfg, uint32_t worker) {
  return cfg.checkpoint_dir + "/worker_" + std::to_string(worker);
}

// Node ids of the single registered worker graph. Every phase of every
// iteration fetches a subset of these; the graph itself never changes.
struct CGGraphIds {
  Graph graph;
  // placeholders
  uint32_t ph_block = 0;  // (mb, mp) row block of A
  uint32_t ph_rhs = 0;    // (mb,) local slice of b
  uint32_t ph_pfull = 0;  // (mp,) gathered p
  uint32_t ph_xfull = 0;  // (mp,) gathered x, refresh only
  uint32_t ph_alpha = 0;
  uint32_t ph_neg_alpha = 0;
  uint32_t ph_beta = 0;
  uint32_t ph_pap_g = 0;  // global p'Ap mirror value
  uint32_t ph_rtr_g = 0;  // global r'r mirror value
  // init fetches
  std::vector<uint32_t> init;
  // variable reads
  uint32_t v_p = 0;
  uint32_t v_x = 0;
  uint32_t v_iter = 0;
  uint32_t v_rtr = 0;  // mirrored global r'r, restore path
  uint32_t btb = 0;    // b'b from the stored variable
  // per-iteration fetch targets
  uint32_t pap = 0;       // local p'q after assigning q = A p_full
  uint32_t a_x = 0;       // x += alpha p
  uint32_t a_iter = 0;    // iter += 1
  uint32_t a_alpha = 0;   // mirror alpha
  uint32_t a_pap = 0;     // mirror global p'Ap
  uint32_t rtr_new = 0;   // r'r after r -= alpha q
  uint32_t a_p = 0;       // p = r + beta p
  uint32_t a_beta = 0;    // mirror beta
  uint32_t a_rtr = 0;     // mirror global r'r
  uint32_t rtr_ref = 0;   // r'r after r = b - A x_full
};

CGGraphIds build_worker_graph(uint32_t mb, uint32_t mp, const std::optional<DeviceName>& dev) {
  CGGraphIds g;
  GraphBuilder b;
  const Shape block_shape = Shape::matrix(mb, mp);
  const Shape slice_shape = Shape::vector(mb);
  const Shape full_shape = Shape::vector(mp);

  g.ph_block = b.placeholder(DType::kF64, block_shape);
  g.ph_rhs = b.placeholder(DType::kF64, slice_shape);
  g.ph_pfull = b.placeholder(DType::kF64, full_shape);
  g.ph_xfull = b.placeholder(DType::kF64, full_shape);
  g.ph_alpha = b.placeholder(DType::kF64, Shape::scalar());
  g.ph_neg_alpha = b.placeholder(DType::kF64, Shape::scalar());
  g.ph_beta = b.placeholder(DType::kF64, Shape::scalar());
  g.ph_pap_g = b.placeholder(DType::kF64, Shape::scalar());
  g.ph_rtr_g = b.placeholder(DType::kF64, Shape::scalar());

  // x0 = 0, r0 = p0 = b.
  const uint32_t zeros = b.constant(Tensor::zeros(DType::kF64, slice_shape));
  const uint32_t zero_scalar = b.constant(Tensor::scalar_f64(0.0));
  g.init.push_back(b.assign("A", g.ph_block, dev));
  g.init.push_back(b.assign("b", g.ph_rhs, dev));
  g.init.push_back(b.assign("x", zeros, dev));
  g.init.push_back(b.assign("r", g.ph_rhs, dev));
  g.init.push_back(b.assign("p", g.ph_rhs, dev));
  g.init.push_back(b.assign("q", zeros, dev));
  g.init.push_back(b.assign("iter", zero_scalar, dev));
  g.init.push_back(b.assign("rtr", zero_scalar, dev));
  g.init.push_back(b.assign("pap", zero_scalar, dev));
  g.init.push_back(b.assign("alpha", zero_scalar, dev));
  g.init.push_back(b.assign("beta", zero_scalar, dev));

  g.v_p = b.variable_read("p", dev);
  g.v_x = b.variable_read("x", dev);
  g.v_iter = b.variable_read("iter", dev);
  g.v_rtr = b.variable_read("rtr", dev);
  const uint32_t v_r = b.variable_read("r", dev);
  const uint32_t v_q = b.variable_read("q", dev);
  const uint32_t v_a = b.variable_read("A", dev);
  const uint32_t v_b = b.variable_read("b", dev);
  g.btb = b.add(OpKind::kDot, {v_b, v_b}, {}, dev);

  // q = A p_full; local contribution p'q.
  const uint32_t mv = b.add(OpKind::kMatVec, {v_a, g.ph_pfull}, {}, dev);
  const uint32_t a_q = b.assign("q", mv, dev);
  g.pap = b.add(OpKind::kDot, {g.v_p, a_q}, {}, dev);

  // x += alpha p; iter += 1; mirror alpha and global p'Ap.
  const uint32_t one_scalar = b.constant(Tensor::scalar_f64(1.0));
  const uint32_t sx = b.add(OpKind::kScale, {g.ph_alpha, g.v_p}, {}, dev);
  g.a_x = b.assign_add("x", sx, dev);
  g.a_iter = b.assign_add("iter", one_scalar, dev);
  g.a_alpha = b.assign("alpha", g.ph_alpha, dev);
  g.a_pap = b.assign("pap", g.ph_pap_g, dev);

  // r -= alpha q, then the new local r'r contribution.
  const uint32_t sr = b.add(OpKind::kScale, {g.ph_neg_alpha, v_q}, {}, dev);
  const uint32_t a_r = b.assign_add("r", sr, dev);
  g.rtr_new = b.add(OpKind::kDot, {a_r, a_r}, {}, dev);

  // p = r + beta p; mirror beta and global r'r.
  const uint32_t ax = b.add(OpKind::kAxpy, {g.ph_beta, g.v_p, v_r}, {}, dev);
  g.a_p = b.assign("p", ax, dev);
  g.a_beta = b.assign("beta", g.ph_beta, dev);
  g.a_rtr = b.assign("rtr", g.ph_rtr_g, dev);

  // Drift refresh: r = b - A x_full, then the local r'r contribution.
  const uint32_t neg_one = b.constant(Tensor::scalar_f64(-1.0));
  const uint32_t mvx = b.add(OpKind::kMatVec, {v_a, g.ph_xfull}, {}, dev);
  const uint32_t axr = b.add(OpKind::kAxpy, {neg_one, mvx, v_b}, {}, dev);
  const uint32_t a_rf = b.assign("r", axr, dev);
  g.rtr_ref = b.add(OpKind::kDot, {a_rf, a_rf}, {}, dev);

  g.graph = b.build();
  return g;
}

Tensor f64_vector(std::span<const double> v) {
  return Tensor::from_f64(Shape::vector(static_cast<int64_t>(v.size())),
                          std::vector<double>(v.begin(), v.end()));
}

}  // namespace

uint64_t flops_cg(uint64_t n, uint64_t iters) { return iters * 2 * n * n; }

uint32_t cg_padded_dim(uint32_t m, uint32_t workers) {
  return ((m + workers - 1) / workers) * workers;
}

void split_cg_system(const Tensor& a, const Tensor& b, uint32_t workers, const std::string& dir,
                     TileAudit* audit) {
  if (a.dtype() != DType::kF64 || a.shape().rank() != 2 ||
      a.shape().dim(0) != a.shape().dim(1)) {
    throw_error(ErrorCode::kInvalidArgument, "A must be a square f64 matrix");
  }
  if (b.dtype() != DType::kF64 || b.shape().rank() != 1 ||
      b.elem_count() != a.shape().dim(0)) {
    throw_error(ErrorCode::kInvalidArgument, "b must be an f64 vector matching A");
  }
  if (workers == 0) throw_error(ErrorCode::kInvalidArgument, "need at least one worker");
  const uint32_t m = static_cast<uint32_t>(a.shape().dim(0));
  const uint32_t mp = cg_padded_dim(m, workers);
  const uint32_t mb = mp / workers;

  // Padded rows are identity rows with zero right-hand side, so the padded
  // system is still SPD and the extra solution entries are exactly zero.
  const auto av = a.f64();
  for (uint32_t w = 0; w < workers; ++w) {
    std::vector<double> block(static_cast<size_t>(mb) * mp, 0.0);
    for (uint32_t r = 0; r < mb; ++r) {
      const uint32_t row = w * mb + r;
      if (row < m) {
        std::memcpy(block.data() + static_cast<size_t>(r) * mp, av.data() + static_cast<size_t>(row) * m,
                    static_cast<size_t>(m) * sizeof(double));
      } else {
        block[static_cast<size_t>(r) * mp + row] = 1.0;
      }
    }
    Tensor t = Tensor::from_f64(Shape::matrix(mb, mp), block);
    write_rect_tile(vector_tile_path(dir, "A_block", w), w, 0, t, audit);
  }

  std::vector<double> rhs(mp, 0.0);
  const auto bv = b.f64();
  std::copy(bv.begin(), bv.end(), rhs.begin());
  write_rect_tile(vector_tile_path(dir, "b", 0), 0, 0,
                  Tensor::from_f64(Shape::vector(mp), rhs), audit);
}

Tensor poisson2d_matrix(uint32_t grid) {
  if (grid == 0) throw_error(ErrorCode::kInvalidArgument, "grid must be positive");
  const uint32_t m = grid * grid;
  std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
  for (uint32_t gy = 0; gy < grid; ++gy) {
    for (uint32_t gx = 0; gx < grid; ++gx) {
      const uint32_t row = gy * grid + gx;
      a[static_cast<size_t>(row) * m + row] = 4.0;
      if (gx > 0) a[static_cast<size_t>(row) * m + (row - 1)] = -1.0;
      if (gx + 1 < grid) a[static_cast<size_t>(row) * m + (row + 1)] = -1.0;
      if (gy > 0) a[static_cast<size_t>(row) * m + (row - grid)] = -1.0;
      if (gy + 1 < grid) a[static_cast<size_t>(row) * m + (row + grid)] = -1.0;
    }
  }
  return Tensor::from_f64(Shape::matrix(m, m), a);
}

Tensor random_spd_matrix(uint32_t m, uint64_t seed) {
  if (m == 0) throw_error(ErrorCode::kInvalidArgument, "dimension must be positive");
  // Symmetric with entries in [-1,1), made strictly diagonally dominant.
  std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
  uint64_t ctr = 0;
  for (uint32_t i = 0; i < m; ++i) {
    for (uint32_t j = i + 1; j < m; ++j) {
      const double v = 2.0 * counter_uniform_f64(seed, ctr++) - 1.0;
      a[static_cast<size_t>(i) * m + j] = v;
      a[static_cast<size_t>(j) * m + i] = v;
    }
  }
  for (uint32_t i = 0; i < m; ++i) {
    double off = 0.0;
    for (uint32_t j = 0; j < m; ++j) {
      if (j != i) off += std::abs(a[static_cast<size_t>(i) * m + j]);
    }
    a[static_cast<size_t>(i) * m + i] = off + 1.0;
  }
  return Tensor::from_f64(Shape::matrix(m, m), a);
}

Tensor random_vector_f64(uint32_t m, uint64_t seed) {
  std::vector<double> v(m);
  for (uint32_t i = 0; i < m; ++i) v[i] = 2.0 * counter_uniform_f64(seed, i) - 1.0;
  return Tensor::from_f64(Shape::vector(m), v);
}

CGWorkerResult cg_worker(const CGConfig& cfg, uint32_t worker_index, const ClusterSpec& cluster,
                         TileAudit* audit) {
  check_config(cfg);
  const uint32_t mp = cg_padded_dim(cfg.m, cfg.workers);
  const uint32_t mb = mp / cfg.workers;

  Session self(cluster.address_of({"worker", worker_index}));
  Session ps(cluster.address_of({"ps", 0}));
  ReduceChannel rtr_ch(&ps, kRtrChannel, cfg.workers, worker_index, cfg.timeout_ms);
  ReduceChannel pap_ch(&ps, kPapChannel, cfg.workers, worker_index, cfg.timeout_ms);
  ReduceChannel gather_ch(&ps, kGatherChannel, cfg.workers, worker_index, cfg.timeout_ms);

  CGGraphIds g = build_worker_graph(mb, mp, cfg.device);
  const uint32_t gid = self.register_graph(g.graph);

  auto run_ack = [&](const std::vector<uint32_t>& fetches, const FeedMap& feeds) {
    self.run_registered(gid, fetches, feeds, /*return_values=*/false);
  };
  auto run_scalar = [&](uint32_t fetch, const FeedMap& feeds = {}) {
    return self.run_registered(gid, {fetch}, feeds)[0].scalar_value();
  };

  uint32_t completed = 0;
  double bnorm2 = 0.0;
  double rtr_g = 0.0;

  if (cfg.restore_from.has_value()) {
    self.checkpoint_restore(worker_checkpoint_dir(cfg, worker_index), *cfg.restore_from);
    completed = static_cast<uint32_t>(run_scalar(g.v_iter));
    if (completed != *cfg.restore_from) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "restored iteration counter " + std::to_string(completed) +
                      " does not match checkpoint id " + std::to_string(*cfg.restore_from));
    }
    // The mirrored scalar carries the broadcast value every worker stored
    // at the checkpointed iteration, so the trajectory resumes with the
    // exact bits an uninterrupted run would have used. Only b'b needs a
    // fresh round, and solely for the stopping threshold.
    rtr_g = run_scalar(g.v_rtr);
    bnorm2 = rtr_ch.reduce_scalar(run_scalar(g.btb));
  } else {
    Tensor block = read_rect_tile(block_path(cfg, worker_index), worker_index, 0, audit);
    if (block.shape().dim(0) != mb || block.shape().dim(1) != mp) {
      throw_error(ErrorCode::kLengthMismatch,
                  "row block " + block.shape().to_string() + " does not match (" +
                      std::to_string(mb) + "," + std::to_string(mp) + ")");
    }
    Tensor rhs_full = read_vector_tile(rhs_path(cfg), 0, audit);
    if (rhs_full.elem_count() != mp) {
      throw_error(ErrorCode::kLengthMismatch, "right-hand side length " +
                                                  std::to_string(rhs_full.elem_count()) +
                                                  ", expected " + std::to_string(mp));
    }
    const auto rv = rhs_full.f64();
    Tensor rhs_local = f64_vector(rv.subspan(static_cast<size_t>(worker_index) * mb, mb));

    run_ack(g.init, {{g.ph_block, block}, {g.ph_rhs, rhs_local}});
    bnorm2 = rtr_ch.reduce_scalar(run_scalar(g.btb));
    // r0 = b, so the initial r'r is exactly b'b.
    rtr_g = bnorm2;
  }

  const double stop2 = cfg.tol * cfg.tol * bnorm2;
  bool converged = !cfg.fixed_iters && rtr_g <= stop2;

  while (completed < cfg.iters && !(converged && !cfg.fixed_iters)) {
    // Assemble p, then q = A p and the local p'q contribution.
    Tensor p_local = self.run_registered(gid, {g.v_p})[0];
    std::vector<double> p_full = gather_ch.all_gather(p_local.f64());
    const double pap_l = run_scalar(g.pap, {{g.ph_pfull, f64_vector(p_full)}});
    const double pap_g = pap_ch.reduce_scalar(pap_l);
    if (pap_g <= 0.0) {
      throw_error(ErrorCode::kBreakdown,
                  "p'Ap = " + std::to_string(pap_g) + " at iteration " +
                      std::to_string(completed) + "; input is not positive definite");
    }
    const double alpha = rtr_g / pap_g;

    run_ack({g.a_x, g.a_iter, g.a_alpha, g.a_pap},
            {{g.ph_alpha, Tensor::scalar_f64(alpha)}, {g.ph_pap_g, Tensor::scalar_f64(pap_g)}});

    const bool refresh =
        cfg.refresh_interval != 0 && (completed + 1) % cfg.refresh_interval == 0;
    double rtr_new_l = 0.0;
    if (refresh) {
      Tensor x_local = self.run_registered(gid, {g.v_x})[0];
      std::vector<double> x_full = gather_ch.all_gather(x_local.f64());
      rtr_new_l = run_scalar(g.rtr_ref, {{g.ph_xfull, f64_vector(x_full)}});
    } else {
      rtr_new_l = run_scalar(g.rtr_new, {{g.ph_neg_alpha, Tensor::scalar_f64(-alpha)}});
    }
    const double rtr_ng = rtr_ch.reduce_scalar(rtr_new_l);
    const double beta = rtr_g > 0.0 ? rtr_ng / rtr_g : 0.0;

    run_ack({g.a_p, g.a_beta, g.a_rtr},
            {{g.ph_beta, Tensor::scalar_f64(beta)}, {g.ph_rtr_g, Tensor::scalar_f64(rtr_ng)}});
    rtr_g = rtr_ng;
    ++completed;

    if (cfg.trace_x) {
      Tensor x_local = self.run_registered(gid, {g.v_x})[0];
      std::vector<double> x_full = gather_ch.all_gather(x_local.f64());
      if (worker_index == 0) {
        ps.enqueue(kTraceQueue, f64_vector(x_full), history_capacity(cfg), cfg.timeout_ms);
      }
    }
    if (worker_index == 0) {
      ps.enqueue(kHistoryQueue,
                 Tensor::from_f64(Shape::vector(2), {static_cast<double>(completed), rtr_g}),
                 history_capacity(cfg), cfg.timeout_ms);
    }
    if (!cfg.fixed_iters && rtr_g <= stop2) converged = true;
    if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_interval != 0 &&
        completed % cfg.checkpoint_interval == 0) {
      self.checkpoint_save(worker_checkpoint_dir(cfg, worker_index), completed);
    }
  }

  CGWorkerResult result;
  result.iterations = completed;
  result.converged = cfg.fixed_iters ? true : converged;
  result.rtr = rtr_g;
  ps.enqueue(kDoneQueue,
             Tensor::from_f64(Shape::vector(4),
                              {static_cast<double>(worker_index),
                               static_cast<double>(completed), result.converged ? 1.0 : 0.0,
                               rtr_g}),
             cfg.workers, cfg.timeout_ms);
  return result;
}

CGReducerStats cg_reducer(const CGConfig& cfg, const ClusterSpec& cluster) {
  check_config(cfg);
  const TaskAddress ps_addr = cluster.address_of({"ps", 0});
  CGReducerStats stats;
  // One session per thread; sessions are not thread safe.
  std::thread rtr_thread([&] {
    Session s(ps_addr);
    stats.rtr_rounds = serve_scalar_reduce(s, kRtrChannel, cfg.workers, cfg.timeout_ms);
  });
  std::thread pap_thread([&] {
    Session s(ps_addr);
    stats.pap_rounds = serve_scalar_reduce(s, kPapChannel, cfg.workers, cfg.timeout_ms);
  });
  std::thread gather_thread([&] {
    Session s(ps_addr);
    stats.gather_rounds = serve_all_gather(s, kGatherChannel, cfg.workers, cfg.timeout_ms);
  });
  rtr_thread.join();
  pap_thread.join();
  gather_thread.join();
  return stats;
}

CGSolveOutcome cg_collect(const CGConfig& cfg, const ClusterSpec& cluster) {
  check_config(cfg);
  const uint32_t mp = cg_padded_dim(cfg.m, cfg.workers);
  const uint32_t mb = mp / cfg.workers;

  Session ps(cluster.address_of({"ps", 0}));
  CGSolveOutcome outcome;
  bool have_first = false;
  for (uint32_t i = 0; i < cfg.workers; ++i) {
    Tensor done = ps.dequeue(kDoneQueue, cfg.workers, cfg.timeout_ms);
    if (done.dtype() != DType::kF64 || done.elem_count() != 4) {
      throw_error(ErrorCode::kSanityCheckFailed, "malformed completion record");
    }
    auto v = done.f64();
    const uint32_t iters = static_cast<uint32_t>(v[1]);
    const bool conv = v[2] != 0.0;
    if (!have_first) {
      outcome.iterations = iters;
      outcome.converged = conv;
      outcome.rtr = v[3];
      have_first = true;
    } else if (outcome.iterations != iters || outcome.converged != conv ||
               outcome.rtr != v[3]) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "workers disagree on the solve outcome; lockstep was broken");
    }
  }

  // Every worker is done with the channels; closing them lets the reducer
  // serve loops drain and return instead of waiting out their timeout.
  close_reduce_channel(ps, kRtrChannel);
  close_reduce_channel(ps, kPapChannel);
  close_reduce_channel(ps, kGatherChannel);

  // Solution slices live on the workers; concatenate and strip padding.
  std::vector<double> x(mp, 0.0);
  for (uint32_t w = 0; w < cfg.workers; ++w) {
    Session worker(cluster.address_of({"worker", w}));
    Tensor slice = worker.read_variable("x");
    if (slice.elem_count() != mb) {
      throw_error(ErrorCode::kLengthMismatch, "x slice of length " +
                                                  std::to_string(slice.elem_count()) +
                                                  ", expected " + std::to_string(mb));
    }
    auto sv = slice.f64();
    std::copy(sv.begin(), sv.end(), x.begin() + static_cast<size_t>(w) * mb);
  }
  x.resize(cfg.m);
  outcome.x = Tensor::from_f64(Shape::vector(cfg.m), x);

  // A restored run replays only the iterations past its checkpoint, so the
  // history queues hold that many entries, not the full count.
  const uint32_t replayed =
      outcome.iterations - (cfg.restore_from ? *cfg.restore_from : 0);
  for (uint32_t i = 0; i < replayed; ++i) {
    Tensor h = ps.dequeue(kHistoryQueue, history_capacity(cfg), cfg.timeout_ms);
    auto hv = h.f64();
    outcome.residual_history.emplace_back(static_cast<uint32_t>(hv[0]), hv[1]);
  }
  if (cfg.trace_x) {
    for (uint32_t i = 0; i < replayed; ++i) {
      outcome.x_trace.push_back(ps.dequeue(kTraceQueue, history_capacity(cfg), cfg.timeout_ms));
    }
  }

  if (!cfg.fixed_iters && !outcome.converged) {
    throw_error(ErrorCode::kNotConverged,
                "no convergence within " + std::to_string(cfg.iters) + " iterations");
  }
  return outcome;
}

}  // namespace flowhpc
