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
// flowhpc: drive the benchmark apps against a simulated, launched, or
// external cluster, or act as a single role of one.

#include <unistd.h>

#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowhpc/error.hpp"
#include "flowhpc/harness.hpp"
#include "flowhpc/kernels.hpp"
#include "flowhpc/resolver.hpp"
#include "flowhpc/rng.hpp"

namespace {

using namespace flowhpc;

std::string self_exe() {
  char buf[4096];
  const ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  return n > 0 ? std::string(buf, static_cast<size_t>(n)) : "";
}

// Shared driver flags. `bin` defaults to this executable so launched mode
// works without extra configuration.
struct DriverFlags {
  std::string mode = "simulated";
  std::string cluster_file;
  std::string bin;
  std::string out_dir = "flowhpc-out";
  uint32_t reps = 5;
  uint64_t seed = 1;

  HarnessOptions options() const {
    HarnessOptions o;
    o.mode = parse_launch_mode(mode);
    o.bin = bin.empty() ? self_exe() : bin;
    o.out_dir = out_dir;
    o.reps = reps;
    o.seed = seed;
    o.cluster_file = cluster_file;
    return o;
  }
};

void add_driver_flags(CLI::App* cmd, DriverFlags& f) {
  cmd->add_option("--mode", f.mode, "simulated, launched, or external")
      ->check(CLI::IsMember({"simulated", "launched", "external"}));
  cmd->add_option("--cluster", f.cluster_file, "cluster spec file (role and external runs)");
  cmd->add_option("--bin", f.bin, "role binary for launched mode (default: this binary)");
  cmd->add_option("--out-dir", f.out_dir, "reports, logs, and scratch space");
  cmd->add_option("--reps", f.reps, "repetitions; the median is reported");
  cmd->add_option("--seed", f.seed, "input generator seed");
}

Tensor random_f32_matrix(uint32_t n, uint64_t seed) {
  return ops::random_uniform(Shape::matrix(n, n), DType::kF32, seed);
}

Tensor random_c128_signal(uint64_t n, uint64_t seed) {
  std::vector<std::complex<double>> x(n);
  for (uint64_t i = 0; i < n; ++i) {
    x[i] = {2.0 * counter_uniform_f64(seed, 2 * i) - 1.0,
            2.0 * counter_uniform_f64(seed, 2 * i + 1) - 1.0};
  }
  return Tensor::from_c128(Shape::vector(static_cast<int64_t>(n)), x);
}

std::optional<DeviceName> parse_device_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return DeviceName::parse(text);
}

int run_stream(CLI::App* cmd, int&) {
  static DriverFlags flags;
  static uint64_t size_bytes = 2000000;
  static uint32_t warmups = 3;
  static uint32_t stream_reps = 100;
  static std::string framing = "eager";
  static bool sweep = false;
  static uint32_t timeout_ms = 30000;

  add_driver_flags(cmd, flags);
  cmd->add_option("--size-bytes", size_bytes, "payload size per push");
  cmd->add_option("--stream-reps", stream_reps, "timed pushes per measurement");
  cmd->add_option("--warmups", warmups, "untimed pushes before the clock starts");
  cmd->add_option("--framing", framing, "eager or staged")
      ->check(CLI::IsMember({"eager", "staged"}));
  cmd->add_flag("--sweep", sweep, "measure 2 MiB through 128 MiB doubling sizes");
  cmd->add_option("--timeout-ms", timeout_ms, "per-operation timeout");

  cmd->callback([&] {
    StreamConfig cfg;
    cfg.size_bytes = size_bytes;
    cfg.repetitions = stream_reps;
    cfg.warmups = warmups;
    cfg.framing = parse_framing_mode(framing);
    cfg.seed = flags.seed;
    cfg.timeout_ms = timeout_ms;

    std::vector<uint64_t> sizes;
    if (sweep) {
      for (uint64_t mib = 2; mib <= 128; mib *= 2) sizes.push_back(mib << 20);
    }
    const StreamOutcome out = harness_stream(flags.options(), cfg, sizes);
    for (const auto& r : out.sweep) {
      std::printf("stream size_bytes=%llu framing=%s median=%.1f MB/s mean=%.1f MB/s ok=%d\n",
                  static_cast<unsigned long long>(r.size_bytes),
                  framing_mode_name(r.framing), r.median_mbps, r.mean_mbps,
                  r.dest_exact && r.max_reply_payload == 0 ? 1 : 0);
    }
  });
  return 0;
}

int run_matmul(CLI::App* cmd, int&) {
  static DriverFlags flags;
  static std::string role = "driver";
  static uint32_t task_index = 0;
  static MatmulPlan plan;
  static std::string device;

  add_driver_flags(cmd, flags);
  cmd->add_option("--role", role, "driver, worker, reducer, or feeder")
      ->check(CLI::IsMember({"driver", "worker", "reducer", "feeder"}));
  cmd->add_option("--task-index", task_index, "role task index");
  cmd->add_option("--n", plan.n, "matrix dimension")->required();
  cmd->add_option("--tile", plan.tile, "tile edge")->required();
  cmd->add_option("--workers", plan.workers, "worker task count");
  cmd->add_option("--reducers", plan.reducers, "reducer task count");
  cmd->add_option("--tiles-dir", plan.tiles_dir, "input tile directory");
  cmd->add_option("--out-tiles", plan.out_dir, "output tile directory");
  cmd->add_option("--timeout-ms", plan.timeout_ms, "per-operation timeout");
  cmd->add_flag("--dynamic", plan.dynamic_shard, "queue-fed work assignment");
  cmd->add_option("--device", device, "placement device, e.g. /dev:0");

  cmd->callback([&] {
    plan.device = parse_device_flag(device);
    if (role != "driver") {
      if (flags.cluster_file.empty()) {
        throw_error(ErrorCode::kInvalidArgument, "role runs need --cluster");
      }
      const ClusterSpec spec = ClusterSpec::load_file(flags.cluster_file);
      if (role == "worker") {
        role_matmul_worker(plan, task_index, spec);
      } else if (role == "reducer") {
        role_matmul_reducer(plan, task_index, spec);
      } else {
        role_matmul_feeder(plan, spec);
      }
      return;
    }
    const Tensor a = random_f32_matrix(plan.n, flags.seed);
    const Tensor b = random_f32_matrix(plan.n, flags.seed + 1);
    const MatmulOutcome out = harness_matmul(flags.options(), plan, a, b);
    std::printf("matmul n=%u tile=%u workers=%u reducers=%u median=%.3f s gflops=%.2f\n",
                plan.n, plan.tile, plan.workers, plan.reducers,
                median_of(out.rep_seconds), out.median_gflops);
  });
  return 0;
}

int run_cg(CLI::App* cmd, int&) {
  static DriverFlags flags;
  static std::string role = "driver";
  static uint32_t task_index = 0;
  static CGConfig cfg;
  static std::string device;
  static uint32_t iters = 0;
  static double tol = 0.0;
  static uint32_t max_iters = 500;
  static uint32_t poisson_grid = 0;
  static int64_t restore_from = -1;

  add_driver_flags(cmd, flags);
  cmd->add_option("--role", role, "driver, worker, or reducer")
      ->check(CLI::IsMember({"driver", "worker", "reducer"}));
  cmd->add_option("--task-index", task_index, "role task index");
  cmd->add_option("--m", cfg.m, "system dimension");
  cmd->add_option("--workers", cfg.workers, "worker task count");
  cmd->add_option("--matrix", cfg.blocks_dir, "row-block tile directory");
  cmd->add_option("--b", cfg.rhs_path, "right-hand-side tile file");
  cmd->add_option("--iters", iters, "fixed iteration count");
  cmd->add_option("--tol", tol, "relative residual target (tolerance mode)");
  cmd->add_option("--max-iters", max_iters, "iteration cap in tolerance mode");
  cmd->add_option("--refresh", cfg.refresh_interval, "true-residual refresh interval");
  cmd->add_option("--checkpoint-dir", cfg.checkpoint_dir, "checkpoint directory");
  cmd->add_option("--checkpoint-interval", cfg.checkpoint_interval,
                  "iterations between checkpoints");
  cmd->add_option("--restore-from", restore_from, "checkpoint id to resume from");
  cmd->add_flag("--trace-x", cfg.trace_x, "stream x to the driver every iteration");
  cmd->add_option("--timeout-ms", cfg.timeout_ms, "per-operation timeout");
  cmd->add_option("--poisson-grid", poisson_grid,
                  "driver input: Poisson grid side, dimension grid^2");
  cmd->add_option("--device", device, "placement device, e.g. /dev:0");

  cmd->callback([&] {
    cfg.device = parse_device_flag(device);
    if (tol > 0.0) {
      cfg.fixed_iters = false;
      cfg.tol = tol;
      cfg.iters = max_iters;
    } else {
      cfg.fixed_iters = true;
      cfg.iters = iters > 0 ? iters : 500;
    }
    if (restore_from >= 0) cfg.restore_from = static_cast<uint64_t>(restore_from);

    if (role != "driver") {
      if (flags.cluster_file.empty()) {
        throw_error(ErrorCode::kInvalidArgument, "role runs need --cluster");
      }
      const ClusterSpec spec = ClusterSpec::load_file(flags.cluster_file);
      if (role == "worker") {
        role_cg_worker(cfg, task_index, spec);
      } else {
        role_cg_reducer(cfg, spec);
      }
      return;
    }

    Tensor a;
    if (poisson_grid > 0) {
      a = poisson2d_matrix(poisson_grid);
      cfg.m = poisson_grid * poisson_grid;
    } else {
      if (cfg.m == 0) {
        throw_error(ErrorCode::kInvalidArgument, "driver needs --m or --poisson-grid");
      }
      a = random_spd_matrix(cfg.m, flags.seed);
    }
    const Tensor b = random_vector_f64(cfg.m, flags.seed + 1);
    const CGOutcome out = harness_cg(flags.options(), cfg, a, b);
    std::printf("cg m=%u workers=%u iters=%u converged=%d residual=%.3e median=%.3f s "
                "gflops=%.2f\n",
                cfg.m, cfg.workers, out.solve.iterations, out.solve.converged ? 1 : 0,
                out.residual, median_of(out.rep_seconds), out.median_gflops);
  });
  return 0;
}

int run_fft(CLI::App* cmd, int&) {
  static DriverFlags flags;
  static std::string role = "driver";
  static uint32_t task_index = 0;
  static FFTPlan plan;
  static std::string device;
  static std::string stats_path;

  add_driver_flags(cmd, flags);
  cmd->add_option("--role", role, "driver, worker, or merger")
      ->check(CLI::IsMember({"driver", "worker", "merger"}));
  cmd->add_option("--task-index", task_index, "role task index");
  cmd->add_option("--n", plan.n, "signal length, power of two")->required();
  cmd->add_option("--tiles", plan.tiles, "interleaved tile count");
  cmd->add_option("--workers", plan.workers, "worker task count");
  cmd->add_option("--tiles-dir", plan.tiles_dir, "input tile directory");
  cmd->add_option("--out", plan.out_path, "spectrum output file");
  cmd->add_flag("--butterfly", plan.butterfly_merge, "log-depth merge instead of direct");
  cmd->add_option("--stats", stats_path, "merge timing JSON (merger role)");
  cmd->add_option("--timeout-ms", plan.timeout_ms, "per-operation timeout");
  cmd->add_option("--device", device, "placement device, e.g. /dev:0");

  cmd->callback([&] {
    plan.device = parse_device_flag(device);
    if (role != "driver") {
      if (flags.cluster_file.empty()) {
        throw_error(ErrorCode::kInvalidArgument, "role runs need --cluster");
      }
      const ClusterSpec spec = ClusterSpec::load_file(flags.cluster_file);
      if (role == "worker") {
        role_fft_worker(plan, task_index, spec);
      } else {
        role_fft_merger(plan, spec, stats_path);
      }
      return;
    }
    const Tensor signal = random_c128_signal(plan.n, flags.seed);
    const FFTOutcome out = harness_fft(flags.options(), plan, signal);
    std::printf("fft n=%llu tiles=%u workers=%u median=%.3f s collect=%.3f s merge=%.3f s "
                "gflops=%.2f\n",
                static_cast<unsigned long long>(plan.n), plan.tiles, plan.workers,
                median_of(out.rep_seconds), median_of(out.collect_seconds),
                median_of(out.merge_seconds), out.median_gflops);
  });
  return 0;
}

int run_split(CLI::App* cmd, int&) {
  static std::string kind;
  static std::string dir;
  static uint32_t n = 0;
  static uint32_t tile = 0;
  static uint32_t tiles = 0;
  static uint32_t workers = 1;
  static uint32_t grid = 0;
  static uint64_t seed = 1;

  cmd->add_option("--kind", kind, "matmul, cg-poisson, cg-random, or fft")
      ->required()
      ->check(CLI::IsMember({"matmul", "cg-poisson", "cg-random", "fft"}));
  cmd->add_option("--dir", dir, "output tile directory")->required();
  cmd->add_option("--n", n, "matrix dimension or signal length");
  cmd->add_option("--tile", tile, "matmul tile edge");
  cmd->add_option("--tiles", tiles, "fft tile count");
  cmd->add_option("--workers", workers, "cg worker count");
  cmd->add_option("--grid", grid, "Poisson grid side");
  cmd->add_option("--seed", seed, "generator seed");

  cmd->callback([&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (kind == "matmul") {
      if (n == 0 || tile == 0) {
        throw_error(ErrorCode::kInvalidArgument, "matmul split needs --n and --tile");
      }
      split_matrix(random_f32_matrix(n, seed), "A", tile, dir, nullptr);
      split_matrix(random_f32_matrix(n, seed + 1), "B", tile, dir, nullptr);
      std::printf("wrote A and B tiles for n=%u tile=%u under %s\n", n, tile, dir.c_str());
    } else if (kind == "cg-poisson" || kind == "cg-random") {
      Tensor a;
      uint32_t m = n;
      if (kind == "cg-poisson") {
        if (grid == 0) throw_error(ErrorCode::kInvalidArgument, "cg-poisson needs --grid");
        a = poisson2d_matrix(grid);
        m = grid * grid;
      } else {
        if (m == 0) throw_error(ErrorCode::kInvalidArgument, "cg-random needs --n");
        a = random_spd_matrix(m, seed);
      }
      split_cg_system(a, random_vector_f64(m, seed + 1), workers, dir, nullptr);
      std::printf("wrote %u row blocks for m=%u under %s\n", workers, m, dir.c_str());
    } else {
      if (n == 0 || tiles == 0) {
        throw_error(ErrorCode::kInvalidArgument, "fft split needs --n and --tiles");
      }
      split_signal(random_c128_signal(n, seed), tiles, dir, nullptr);
      std::printf("wrote %u signal tiles for n=%u under %s\n", tiles, n, dir.c_str());
    }
  });
  return 0;
}

int run_resolve(CLI::App* cmd, int&) {
  static std::string nodelist;
  static std::vector<std::string> job_flags;
  static uint32_t tasks_per_node = 0;
  static uint32_t devices_per_node = 0;
  static bool strict_devices = false;
  static uint16_t base_port = 8888;
  static std::string out_file;

  cmd->add_option("--nodelist", nodelist,
                  "hostlist, e.g. node[0-3]; default $SLURM_JOB_NODELIST");
  cmd->add_option("--job", job_flags, "job shape name=count, repeatable")->required();
  cmd->add_option("--tasks-per-node", tasks_per_node,
                  "slots per node; default $SLURM_NTASKS_PER_NODE or 1");
  cmd->add_option("--devices-per-node", devices_per_node, "dev slots per node");
  cmd->add_flag("--strict-devices", strict_devices,
                "fail when devices do not divide evenly");
  cmd->add_option("--base-port", base_port, "first port on each node");
  cmd->add_option("--out", out_file, "write the spec here instead of stdout");

  cmd->callback([&] {
    ResolverConfig config;
    for (const auto& jf : job_flags) {
      const auto eq = jf.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == jf.size()) {
        throw_error(ErrorCode::kInvalidArgument, "--job wants name=count, got " + jf);
      }
      config.jobs.emplace_back(jf.substr(0, eq),
                               static_cast<uint32_t>(std::stoul(jf.substr(eq + 1))));
    }
    if (nodelist.empty()) {
      const auto env = slurm_nodelist_from_env();
      if (!env) {
        throw_error(ErrorCode::kInvalidArgument,
                    "no --nodelist and SLURM_JOB_NODELIST is unset");
      }
      nodelist = *env;
    }
    if (tasks_per_node == 0) {
      tasks_per_node = slurm_tasks_per_node_from_env().value_or(1);
    }
    config.tasks_per_node = tasks_per_node;
    config.devices_per_node = devices_per_node;
    config.strict_devices = strict_devices;
    config.base_port = base_port;

    const ResolvedCluster cluster = resolve(config, nodelist);
    if (out_file.empty()) {
      std::cout << cluster.spec.to_json() << "\n";
    } else {
      cluster.spec.save_file(out_file);
      std::printf("wrote %zu tasks to %s\n", cluster.tasks.size(), out_file.c_str());
    }
  });
  return 0;
}

int run_serve(CLI::App* cmd, int&) {
  static std::string cluster_file;
  static std::string task_text;
  static std::vector<std::string> device_flags;

  cmd->add_option("--cluster", cluster_file, "cluster spec file")->required();
  cmd->add_option("--task", task_text, "identity, e.g. ps:0")->required();
  cmd->add_option("--devices", device_flags, "dev slots to expose, repeatable");

  cmd->callback([&] {
    const ClusterSpec spec = ClusterSpec::load_file(cluster_file);
    std::vector<DeviceName> devices;
    for (const auto& d : device_flags) devices.push_back(DeviceName::parse(d));
    role_serve(spec, TaskIdentity::parse(task_text), std::move(devices));
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed dataflow benchmark runner"};
  app.set_version_flag("--version", "flowhpc 0.1.0");
  app.require_subcommand(1);

  int unused = 0;
  run_stream(app.add_subcommand("stream", "variable push bandwidth"), unused);
  run_matmul(app.add_subcommand("matmul", "tiled map-reduce matrix multiply"), unused);
  run_cg(app.add_subcommand("cg", "distributed conjugate gradient"), unused);
  run_fft(app.add_subcommand("fft", "tiled one-dimensional FFT"), unused);
  run_split(app.add_subcommand("split", "generate and tile benchmark inputs"), unused);
  run_resolve(app.add_subcommand("resolve", "build a cluster spec from a hostlist"), unused);
  run_serve(app.add_subcommand("serve", "host one task server until shutdown"), unused);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const flowhpc::FlowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
