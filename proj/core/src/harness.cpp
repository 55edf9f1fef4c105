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
#include "flowhpc/harness.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "flowhpc/error.hpp"
#include "flowhpc/kernels.hpp"
#include "flowhpc/rng.hpp"
#include "flowhpc/server.hpp"
#include "flowhpc/session.hpp"
#include "flowhpc/sockets.hpp"

extern char** environ;

namespace flowhpc {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_error(ErrorCode::kIoError, "mkdir " + dir + ": " + ec.message());
}

pid_t spawn_role(const std::string& bin, const std::vector<std::string>& args,
                 const std::string& log_path) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(bin.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, log_path.c_str(),
                                   O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);

  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw_error(ErrorCode::kSpawnFailed,
                "spawn " + bin + ": " + std::string(strerror(rc)));
  }
  return pid;
}

// Builds the cluster and places roles for one orchestrator run. In
// simulated mode roles are threads, in launched mode processes, in
// external mode nobody is started and the spec comes from a file.
class RoleLauncher {
 public:
  RoleLauncher(const HarnessOptions& opts, const std::string& tag) : opts_(opts), tag_(tag) {}

  void init(const std::vector<std::pair<std::string, uint32_t>>& jobs) {
    if (opts_.mode == LaunchMode::kExternal) {
      if (opts_.cluster_file.empty()) {
        throw_error(ErrorCode::kInvalidArgument, "external mode needs --cluster");
      }
      handle.spec = ClusterSpec::load_file(opts_.cluster_file);
      for (const auto& [job, count] : jobs) {
        if (!handle.spec.has_job(job) || handle.spec.tasks(job).size() != count) {
          throw_error(ErrorCode::kInvalidArgument,
                      "cluster file lacks job " + job + " with " + std::to_string(count) +
                          " tasks");
        }
      }
      return;
    }
    handle.spec = make_local_cluster(jobs);
    if (opts_.mode == LaunchMode::kLaunched) {
      if (opts_.bin.empty()) {
        throw_error(ErrorCode::kInvalidArgument,
                    "launched mode needs the flowhpc binary path");
      }
      scratch_ = opts_.out_dir + "/" + tag_;
      ensure_dir(scratch_ + "/logs");
      cluster_file_ = scratch_ + "/cluster.json";
      handle.spec.save_file(cluster_file_);
    }
  }

  const std::string& cluster_file() const { return cluster_file_; }

  // Launched roles get `args`; simulated roles run `body` on a thread.
  void add(const std::string& name, std::function<void()> body,
           const std::vector<std::string>& args) {
    switch (opts_.mode) {
      case LaunchMode::kSimulated:
        handle.add_thread_role(name, std::move(body));
        break;
      case LaunchMode::kLaunched:
        handle.add_process_role(name, opts_.bin, args, scratch_ + "/logs/" + name + ".log");
        break;
      case LaunchMode::kExternal:
        break;
    }
  }

  ClusterHandle handle;

 private:
  const HarnessOptions& opts_;
  std::string tag_;
  std::string scratch_;
  std::string cluster_file_;
};

// Best effort teardown for error paths; never throws.
void abort_cluster(ClusterHandle& handle, LaunchMode mode) noexcept {
  try {
    if (mode != LaunchMode::kExternal) shutdown_cluster(handle.spec);
  } catch (...) {
  }
  try {
    handle.kill_all();
  } catch (...) {
  }
  try {
    handle.join(10000);
  } catch (...) {
  }
}

void finish_cluster(ClusterHandle& handle, const HarnessOptions& opts) {
  if (opts.mode != LaunchMode::kExternal) shutdown_cluster(handle.spec);
  handle.join(opts.join_timeout_ms);
}

void emit_records(const HarnessOptions& opts, std::vector<RunRecord>& records) {
  for (auto& r : records) {
    fill_environment(r);
    append_run_csv(opts.out_dir + "/report.csv", r);
    append_run_jsonl(opts.out_dir + "/report.jsonl", r);
  }
}

std::vector<std::string> serve_args(const std::string& cluster_file, const TaskIdentity& task) {
  return {"serve", "--cluster", cluster_file, "--task", task.to_string()};
}

std::vector<std::string> matmul_role_args(const MatmulPlan& plan, const std::string& role,
                                          uint32_t index, const std::string& cluster_file) {
  std::vector<std::string> a = {"matmul",
                                "--cluster",
                                cluster_file,
                                "--role",
                                role,
                                "--task-index",
                                std::to_string(index),
                                "--n",
                                std::to_string(plan.n),
                                "--tile",
                                std::to_string(plan.tile),
                                "--workers",
                                std::to_string(plan.workers),
                                "--reducers",
                                std::to_string(plan.reducers),
                                "--tiles-dir",
                                plan.tiles_dir,
                                "--out-tiles",
                                plan.out_dir,
                                "--timeout-ms",
                                std::to_string(plan.timeout_ms)};
  if (plan.dynamic_shard) a.push_back("--dynamic");
  if (plan.device) {
    a.push_back("--device");
    a.push_back(plan.device->to_string());
  }
  return a;
}

std::vector<std::string> cg_role_args(const CGConfig& cfg, const std::string& role,
                                      uint32_t index, const std::string& cluster_file) {
  std::vector<std::string> a = {"cg",
                                "--cluster",
                                cluster_file,
                                "--role",
                                role,
                                "--task-index",
                                std::to_string(index),
                                "--m",
                                std::to_string(cfg.m),
                                "--workers",
                                std::to_string(cfg.workers),
                                "--matrix",
                                cfg.blocks_dir,
                                "--b",
                                cfg.rhs_path.empty() ? vector_tile_path(cfg.blocks_dir, "b", 0)
                                                     : cfg.rhs_path,
                                "--refresh",
                                std::to_string(cfg.refresh_interval),
                                "--timeout-ms",
                                std::to_string(cfg.timeout_ms)};
  if (cfg.fixed_iters) {
    a.push_back("--iters");
    a.push_back(std::to_string(cfg.iters));
  } else {
    a.push_back("--tol");
    a.push_back(fmt_double(cfg.tol));
    a.push_back("--max-iters");
    a.push_back(std::to_string(cfg.iters));
  }
  if (!cfg.checkpoint_dir.empty()) {
    a.push_back("--checkpoint-dir");
    a.push_back(cfg.checkpoint_dir);
    a.push_back("--checkpoint-interval");
    a.push_back(std::to_string(cfg.checkpoint_interval));
  }
  if (cfg.restore_from) {
    a.push_back("--restore-from");
    a.push_back(std::to_string(*cfg.restore_from));
  }
  if (cfg.trace_x) a.push_back("--trace-x");
  if (cfg.device) {
    a.push_back("--device");
    a.push_back(cfg.device->to_string());
  }
  return a;
}

std::vector<std::string> fft_role_args(const FFTPlan& plan, const std::string& role,
                                       uint32_t index, const std::string& cluster_file,
                                       const std::string& stats_path) {
  std::vector<std::string> a = {"fft",
                                "--cluster",
                                cluster_file,
                                "--role",
                                role,
                                "--task-index",
                                std::to_string(index),
                                "--n",
                                std::to_string(plan.n),
                                "--tiles",
                                std::to_string(plan.tiles),
                                "--workers",
                                std::to_string(plan.workers),
                                "--tiles-dir",
                                plan.tiles_dir,
                                "--out",
                                plan.out_path,
                                "--timeout-ms",
                                std::to_string(plan.timeout_ms)};
  if (plan.butterfly_merge) a.push_back("--butterfly");
  if (!stats_path.empty()) {
    a.push_back("--stats");
    a.push_back(stats_path);
  }
  if (plan.device) {
    a.push_back("--device");
    a.push_back(plan.device->to_string());
  }
  return a;
}

}  // namespace

LaunchMode parse_launch_mode(const std::string& text) {
  if (text == "simulated") return LaunchMode::kSimulated;
  if (text == "launched") return LaunchMode::kLaunched;
  if (text == "external") return LaunchMode::kExternal;
  throw_error(ErrorCode::kInvalidArgument, "unknown launch mode: " + text);
}

const char* launch_mode_name(LaunchMode mode) {
  switch (mode) {
    case LaunchMode::kSimulated:
      return "simulated";
    case LaunchMode::kLaunched:
      return "launched";
    case LaunchMode::kExternal:
      return "external";
  }
  return "unknown";
}

std::string flowhpc_bin_from_env() {
  const char* v = std::getenv("FLOWHPC_BIN");
  return v ? v : "";
}

ClusterSpec make_local_cluster(const std::vector<std::pair<std::string, uint32_t>>& jobs) {
  ClusterSpec spec;
  for (const auto& [job, count] : jobs) {
    std::vector<TaskAddress> tasks;
    tasks.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
      tasks.push_back({"127.0.0.1", pick_free_port()});
    }
    spec.add_job(job, std::move(tasks));
  }
  return spec;
}

ClusterHandle::~ClusterHandle() {
  kill_all();
  for (auto& t : threads_) {
    if (t.thread.joinable()) t.thread.join();
  }
  for (auto& p : procs_) {
    if (!p.reaped) {
      int st = 0;
      ::waitpid(p.pid, &st, 0);
      p.reaped = true;
    }
  }
}

void ClusterHandle::add_thread_role(const std::string& name, std::function<void()> body) {
  ThreadRole role;
  role.name = name;
  role.error = std::make_shared<std::exception_ptr>();
  auto err = role.error;
  role.thread = std::thread([body = std::move(body), err] {
    try {
      body();
    } catch (...) {
      *err = std::current_exception();
    }
  });
  threads_.push_back(std::move(role));
}

void ClusterHandle::add_process_role(const std::string& name, const std::string& bin,
                                     const std::vector<std::string>& args,
                                     const std::string& log_path) {
  ProcessRole role;
  role.name = name;
  role.log_path = log_path;
  role.pid = spawn_role(bin, args, log_path);
  procs_.push_back(std::move(role));
}

void ClusterHandle::join(uint32_t deadline_ms) {
  for (auto& t : threads_) {
    if (t.thread.joinable()) t.thread.join();
  }

  const auto deadline = Clock::now() + std::chrono::milliseconds(deadline_ms);
  std::vector<std::string> stragglers;
  for (auto& p : procs_) {
    while (!p.reaped) {
      int st = 0;
      const pid_t r = ::waitpid(p.pid, &st, WNOHANG);
      if (r == p.pid) {
        p.reaped = true;
        p.status = st;
        break;
      }
      if (r < 0) {
        p.reaped = true;
        break;
      }
      if (Clock::now() >= deadline) {
        ::kill(p.pid, SIGKILL);
        ::waitpid(p.pid, &st, 0);
        p.reaped = true;
        p.status = st;
        stragglers.push_back(p.name);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  for (auto& t : threads_) {
    if (t.error && *t.error) {
      std::exception_ptr e = *t.error;
      *t.error = nullptr;
      std::rethrow_exception(e);
    }
  }
  if (!stragglers.empty()) {
    std::string names;
    for (const auto& n : stragglers) names += (names.empty() ? "" : ", ") + n;
    throw_error(ErrorCode::kTimeout, "roles still running at the deadline: " + names);
  }
  for (const auto& p : procs_) {
    if (WIFEXITED(p.status) && WEXITSTATUS(p.status) != 0) {
      throw_error(ErrorCode::kSpawnFailed,
                  "role " + p.name + " exited with code " +
                      std::to_string(WEXITSTATUS(p.status)) + ", log: " + p.log_path);
    }
    if (WIFSIGNALED(p.status) && !killed_) {
      throw_error(ErrorCode::kSpawnFailed,
                  "role " + p.name + " killed by signal " +
                      std::to_string(WTERMSIG(p.status)) + ", log: " + p.log_path);
    }
  }
}

void ClusterHandle::kill_all() {
  killed_ = true;
  for (auto& p : procs_) {
    if (!p.reaped) ::kill(p.pid, SIGKILL);
  }
}

void role_serve(const ClusterSpec& spec, const TaskIdentity& task,
                std::vector<DeviceName> devices) {
  Server server(task, spec, std::move(devices));
  server.start();
  server.wait();
}

void role_matmul_worker(const MatmulPlan& plan, uint32_t index, const ClusterSpec& spec) {
  Server server({"worker", index}, spec, {});
  server.start();
  matmul_worker(plan, index, spec, nullptr);
  server.stop();
}

void role_matmul_reducer(const MatmulPlan& plan, uint32_t index, const ClusterSpec& spec) {
  Server server({"reduce", index}, spec, {});
  server.start();
  matmul_reducer(plan, index, spec, nullptr);
  server.stop();
}

void role_matmul_feeder(const MatmulPlan& plan, const ClusterSpec& spec) {
  feed_matmul_work(plan, spec);
}

void role_cg_worker(const CGConfig& config, uint32_t index, const ClusterSpec& spec) {
  Server server({"worker", index}, spec, {});
  server.start();
  cg_worker(config, index, spec, nullptr);
  // The solution slice stays readable until the driver shuts us down.
  server.wait();
}

void role_cg_reducer(const CGConfig& config, const ClusterSpec& spec) {
  Server server({"ps", 0}, spec, {});
  server.start();
  cg_reducer(config, spec);
  // Completion queues stay drainable until the driver shuts us down.
  server.wait();
}

void role_fft_worker(const FFTPlan& plan, uint32_t index, const ClusterSpec& spec) {
  Server server({"worker", index}, spec, {});
  server.start();
  fft_worker(plan, index, spec, nullptr);
  server.stop();
}

void role_fft_merger(const FFTPlan& plan, const ClusterSpec& spec,
                     const std::string& stats_path) {
  Server server({"ps", 0}, spec, {});
  server.start();
  const FFTMergeStats stats = fft_merger(plan, spec, nullptr);
  server.stop();
  if (!stats_path.empty()) {
    nlohmann::json j;
    j["collect_seconds"] = static_cast<double>(stats.collect_ns) / 1e9;
    j["merge_seconds"] = static_cast<double>(stats.merge_ns) / 1e9;
    j["tiles"] = stats.tiles;
    j["markers"] = stats.markers;
    std::ofstream out(stats_path);
    if (!out) throw_error(ErrorCode::kIoError, "cannot write " + stats_path);
    out << j.dump() << "\n";
  }
}

void shutdown_cluster(const ClusterSpec& spec) {
  SessionOptions opts;
  opts.connect_timeout = std::chrono::milliseconds(2000);
  for (const auto& [job, tasks] : spec.jobs()) {
    (void)job;
    for (const auto& addr : tasks) {
      try {
        Session s(addr, opts);
        s.shutdown_server();
      } catch (const FlowError&) {
        // Already gone; teardown must not stall on dead tasks.
      }
    }
  }
}

std::optional<uint64_t> latest_common_checkpoint(const std::string& checkpoint_dir,
                                                 uint32_t workers) {
  std::optional<std::set<uint64_t>> common;
  for (uint32_t w = 0; w < workers; ++w) {
    const fs::path dir = fs::path(checkpoint_dir) / ("worker_" + std::to_string(w));
    std::set<uint64_t> ids;
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
      const std::string name = it->path().filename().string();
      constexpr std::string_view kPrefix = "manifest-";
      if (name.rfind(kPrefix, 0) != 0) continue;
      const std::string digits = name.substr(kPrefix.size());
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        continue;
      }
      ids.insert(std::strtoull(digits.c_str(), nullptr, 10));
    }
    if (!common) {
      common = std::move(ids);
    } else {
      std::set<uint64_t> both;
      for (uint64_t id : *common) {
        if (ids.count(id)) both.insert(id);
      }
      *common = std::move(both);
    }
    if (common->empty()) return std::nullopt;
  }
  if (!common || common->empty()) return std::nullopt;
  return *common->rbegin();
}

StreamOutcome harness_stream(const HarnessOptions& opts, StreamConfig config,
                             const std::vector<uint64_t>& sizes) {
  ensure_dir(opts.out_dir);
  std::vector<uint64_t> plan_sizes = sizes.empty() ? std::vector<uint64_t>{config.size_bytes}
                                                   : sizes;

  RoleLauncher rl(opts, "stream");
  rl.init({{"ps", 1}, {"worker", 1}});
  const ClusterSpec spec = rl.handle.spec;
  rl.add("ps_0", [spec] { role_serve(spec, {"ps", 0}); },
         serve_args(rl.cluster_file(), {"ps", 0}));
  rl.add("worker_0", [spec] { role_serve(spec, {"worker", 0}); },
         serve_args(rl.cluster_file(), {"worker", 0}));

  StreamOutcome out;
  try {
    for (uint64_t size : plan_sizes) {
      StreamConfig cfg = config;
      cfg.size_bytes = size;
      StreamResult r = run_stream(spec, cfg);
      append_stream_csv(opts.out_dir + "/stream.csv", r);

      const std::string params = "size_bytes=" + std::to_string(r.size_bytes) +
                                 " framing=" + framing_mode_name(r.framing) +
                                 " warmups=" + std::to_string(cfg.warmups);
      std::vector<double> rep_walls;
      rep_walls.reserve(r.rep_elapsed_ns.size());
      for (size_t i = 0; i < r.rep_elapsed_ns.size(); ++i) {
        RunRecord rec;
        rec.app = "stream";
        rec.mode = launch_mode_name(opts.mode);
        rec.cluster = cluster_shape(spec);
        rec.params = params;
        rec.rep = static_cast<int32_t>(i);
        rec.wall_seconds = static_cast<double>(r.rep_elapsed_ns[i]) / 1e9;
        rec.metric = "mbps";
        rec.value = (static_cast<double>(r.size_bytes) / rec.wall_seconds) / 1e6;
        rec.sanity_ok = r.dest_exact && r.max_reply_payload == 0;
        rep_walls.push_back(rec.wall_seconds);
        out.records.push_back(rec);
      }
      RunRecord sum;
      sum.app = "stream";
      sum.mode = launch_mode_name(opts.mode);
      sum.cluster = cluster_shape(spec);
      sum.params = params;
      sum.rep = -1;
      sum.phase = "summary";
      sum.wall_seconds = median_of(rep_walls);
      sum.metric = "mbps";
      sum.value = r.median_mbps;
      sum.sanity_ok = r.dest_exact && r.max_reply_payload == 0;
      out.records.push_back(sum);

      out.sweep.push_back(r);
      out.result = std::move(r);
    }
  } catch (...) {
    abort_cluster(rl.handle, opts.mode);
    throw;
  }
  finish_cluster(rl.handle, opts);
  emit_records(opts, out.records);
  return out;
}

MatmulOutcome harness_matmul(const HarnessOptions& opts, MatmulPlan plan, const Tensor& a,
                             const Tensor& b) {
  if (opts.mode == LaunchMode::kExternal) {
    throw_error(ErrorCode::kInvalidArgument,
                "matmul completion is observed by joining roles; external mode "
                "is not supported");
  }
  const std::string base = opts.out_dir + "/matmul";
  if (plan.tiles_dir.empty()) plan.tiles_dir = base + "/tiles";
  if (plan.out_dir.empty()) plan.out_dir = base + "/out";
  ensure_dir(plan.tiles_dir);
  ensure_dir(plan.out_dir);
  split_matrix(a, "A", plan.tile, plan.tiles_dir, nullptr);
  split_matrix(b, "B", plan.tile, plan.tiles_dir, nullptr);

  const uint32_t grid = plan.grid();
  MatmulOutcome out;
  for (uint32_t rep = 0; rep < std::max<uint32_t>(opts.reps, 1); ++rep) {
    RoleLauncher rl(opts, "matmul/rep" + std::to_string(rep));
    rl.init({{"worker", plan.workers}, {"reduce", plan.reducers}});
    const ClusterSpec spec = rl.handle.spec;

    const auto t0 = Clock::now();
    for (uint32_t w = 0; w < plan.workers; ++w) {
      rl.add("worker_" + std::to_string(w),
             [plan, w, spec] { role_matmul_worker(plan, w, spec); },
             matmul_role_args(plan, "worker", w, rl.cluster_file()));
    }
    for (uint32_t r = 0; r < plan.reducers; ++r) {
      rl.add("reduce_" + std::to_string(r),
             [plan, r, spec] { role_matmul_reducer(plan, r, spec); },
             matmul_role_args(plan, "reducer", r, rl.cluster_file()));
    }
    if (plan.dynamic_shard) {
      rl.add("feeder", [plan, spec] { role_matmul_feeder(plan, spec); },
             matmul_role_args(plan, "feeder", 0, rl.cluster_file()));
    }
    try {
      rl.handle.join(opts.join_timeout_ms);
    } catch (...) {
      abort_cluster(rl.handle, opts.mode);
      throw;
    }
    out.rep_seconds.push_back(seconds_since(t0));

    out.c = assemble_matrix(plan.out_dir, "C", plan.n, plan.tile, nullptr);

    // Spot check two output tiles against a locally recomputed product of
    // the input tiles. Catches routing and accumulation mistakes without
    // redoing the whole multiply.
    const auto cv = out.c.f32();
    for (uint32_t check = 0; check < 2; ++check) {
      const uint64_t pick = counter_bits(opts.seed + rep, 1000 + check);
      const uint32_t ti = static_cast<uint32_t>(pick % grid);
      const uint32_t tj = static_cast<uint32_t>((pick / grid) % grid);
      Tensor acc = Tensor::zeros(DType::kF32, Shape::matrix(plan.tile, plan.tile));
      for (uint32_t k = 0; k < grid; ++k) {
        Tensor at = read_square_tile(tile_path(plan.tiles_dir, "A", ti, k), ti, k, nullptr);
        Tensor bt = read_square_tile(tile_path(plan.tiles_dir, "B", k, tj), k, tj, nullptr);
        acc = ops::add(acc, ops::matmul(at, bt));
      }
      const auto ev = acc.f32();
      for (uint32_t r = 0; r < plan.tile; ++r) {
        for (uint32_t col = 0; col < plan.tile; ++col) {
          const double got =
              cv[(static_cast<size_t>(ti) * plan.tile + r) * plan.n + tj * plan.tile + col];
          const double want = ev[static_cast<size_t>(r) * plan.tile + col];
          if (std::abs(got - want) > 1e-4 * std::abs(want) + 1e-3) {
            throw_error(ErrorCode::kSanityCheckFailed,
                        "output tile (" + std::to_string(ti) + "," + std::to_string(tj) +
                            ") entry (" + std::to_string(r) + "," + std::to_string(col) +
                            "): got " + std::to_string(got) + ", want " +
                            std::to_string(want));
          }
        }
      }
    }
  }

  const std::string params = "n=" + std::to_string(plan.n) +
                             " tile=" + std::to_string(plan.tile) +
                             " sharding=" + (plan.dynamic_shard ? "dynamic" : "static");
  std::vector<double> gflops;
  for (size_t i = 0; i < out.rep_seconds.size(); ++i) {
    RunRecord rec;
    rec.app = "matmul";
    rec.mode = launch_mode_name(opts.mode);
    rec.cluster = "worker=" + std::to_string(plan.workers) +
                  ",reduce=" + std::to_string(plan.reducers);
    rec.params = params;
    rec.rep = static_cast<int32_t>(i);
    rec.wall_seconds = out.rep_seconds[i];
    rec.metric = "gflops";
    rec.value = gflops_rate(flops_matmul(plan.n), out.rep_seconds[i]);
    rec.sanity_ok = true;
    gflops.push_back(rec.value);
    out.records.push_back(rec);
  }
  out.median_gflops = median_of(gflops);
  emit_records(opts, out.records);
  return out;
}

ClusterHandle start_cg_cluster(const HarnessOptions& opts, const CGConfig& config,
                               const std::string& tag) {
  RoleLauncher rl(opts, "cg/" + tag);
  rl.init({{"ps", 1}, {"worker", config.workers}});
  const ClusterSpec spec = rl.handle.spec;
  rl.add("ps_0", [config, spec] { role_cg_reducer(config, spec); },
         cg_role_args(config, "reducer", 0, rl.cluster_file()));
  for (uint32_t w = 0; w < config.workers; ++w) {
    rl.add("worker_" + std::to_string(w),
           [config, w, spec] { role_cg_worker(config, w, spec); },
           cg_role_args(config, "worker", w, rl.cluster_file()));
  }
  return std::move(rl.handle);
}

CGOutcome harness_cg(const HarnessOptions& opts, CGConfig config, const Tensor& a,
                     const Tensor& b) {
  const std::string base = opts.out_dir + "/cg";
  if (config.blocks_dir.empty()) config.blocks_dir = base + "/blocks";
  ensure_dir(config.blocks_dir);
  split_cg_system(a, b, config.workers, config.blocks_dir, nullptr);

  const auto av = a.f64();
  const auto bv = b.f64();
  double bnorm = 0.0;
  for (double v : bv) bnorm += v * v;
  bnorm = std::sqrt(bnorm);

  CGOutcome out;
  for (uint32_t rep = 0; rep < std::max<uint32_t>(opts.reps, 1); ++rep) {
    ClusterHandle handle = start_cg_cluster(opts, config, "rep" + std::to_string(rep));
    const auto t0 = Clock::now();
    try {
      out.solve = cg_collect(config, handle.spec);
    } catch (...) {
      abort_cluster(handle, opts.mode);
      throw;
    }
    out.rep_seconds.push_back(seconds_since(t0));
    finish_cluster(handle, opts);

    // Recompute the residual from the returned solution; the solve's own
    // recursion must agree with it and, in tolerance mode, meet the target.
    const auto xv = out.solve.x.f64();
    double rnorm = 0.0;
    for (uint32_t i = 0; i < config.m; ++i) {
      double ax = 0.0;
      for (uint32_t j = 0; j < config.m; ++j) {
        ax += av[static_cast<size_t>(i) * config.m + j] * xv[j];
      }
      const double r = bv[i] - ax;
      rnorm += r * r;
    }
    out.residual = bnorm > 0.0 ? std::sqrt(rnorm) / bnorm : std::sqrt(rnorm);
    const double reported = bnorm > 0.0 ? std::sqrt(out.solve.rtr) / bnorm : 0.0;
    const double gap = std::abs(out.residual - reported);
    if (gap > 1e-6 + 0.5 * std::max(out.residual, reported)) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "recomputed residual " + fmt_double(out.residual) +
                      " disagrees with the solver's " + fmt_double(reported));
    }
    if (!config.fixed_iters && out.residual > 10.0 * config.tol) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "residual " + fmt_double(out.residual) + " misses the target " +
                      fmt_double(config.tol));
    }
  }

  const std::string params =
      "m=" + std::to_string(config.m) + " iters=" + std::to_string(out.solve.iterations) +
      (config.fixed_iters ? " mode=fixed" : " mode=tol tol=" + fmt_double(config.tol));
  std::vector<double> gflops;
  for (size_t i = 0; i < out.rep_seconds.size(); ++i) {
    RunRecord rec;
    rec.app = "cg";
    rec.mode = launch_mode_name(opts.mode);
    rec.cluster = "ps=1,worker=" + std::to_string(config.workers);
    rec.params = params;
    rec.rep = static_cast<int32_t>(i);
    rec.wall_seconds = out.rep_seconds[i];
    rec.metric = "gflops";
    rec.value = gflops_rate(flops_cg(config.m, out.solve.iterations), out.rep_seconds[i]);
    rec.sanity_ok = true;
    gflops.push_back(rec.value);
    out.records.push_back(rec);
  }
  out.median_gflops = median_of(gflops);
  emit_records(opts, out.records);
  return out;
}

FFTOutcome harness_fft(const HarnessOptions& opts, FFTPlan plan, const Tensor& signal) {
  if (opts.mode == LaunchMode::kExternal) {
    throw_error(ErrorCode::kInvalidArgument,
                "fft output is read from the merger's filesystem; external mode "
                "is not supported");
  }
  const std::string base = opts.out_dir + "/fft";
  if (plan.tiles_dir.empty()) plan.tiles_dir = base + "/tiles";
  if (plan.out_path.empty()) plan.out_path = base + "/spectrum.til";
  ensure_dir(plan.tiles_dir);
  ensure_dir(fs::path(plan.out_path).parent_path().string());
  split_signal(signal, plan.tiles, plan.tiles_dir, nullptr);

  FFTOutcome out;
  for (uint32_t rep = 0; rep < std::max<uint32_t>(opts.reps, 1); ++rep) {
    const std::string stats_path = base + "/rep" + std::to_string(rep) + "_stats.json";
    RoleLauncher rl(opts, "fft/rep" + std::to_string(rep));
    rl.init({{"ps", 1}, {"worker", plan.workers}});
    const ClusterSpec spec = rl.handle.spec;

    const auto t0 = Clock::now();
    rl.add("ps_0", [plan, spec, stats_path] { role_fft_merger(plan, spec, stats_path); },
           fft_role_args(plan, "merger", 0, rl.cluster_file(), stats_path));
    for (uint32_t w = 0; w < plan.workers; ++w) {
      rl.add("worker_" + std::to_string(w),
             [plan, w, spec] { role_fft_worker(plan, w, spec); },
             fft_role_args(plan, "worker", w, rl.cluster_file(), ""));
    }
    try {
      rl.handle.join(opts.join_timeout_ms);
    } catch (...) {
      abort_cluster(rl.handle, opts.mode);
      throw;
    }
    out.rep_seconds.push_back(seconds_since(t0));

    std::ifstream stats_in(stats_path);
    if (!stats_in) throw_error(ErrorCode::kIoError, "missing merge stats " + stats_path);
    nlohmann::json stats = nlohmann::json::parse(stats_in);
    out.collect_seconds.push_back(stats.at("collect_seconds").get<double>());
    out.merge_seconds.push_back(stats.at("merge_seconds").get<double>());

    out.spectrum = read_vector_tile(plan.out_path, 0, nullptr);
    if (out.spectrum.dtype() != DType::kC128 ||
        static_cast<uint64_t>(out.spectrum.elem_count()) != plan.n) {
      throw_error(ErrorCode::kSanityCheckFailed, "spectrum has the wrong shape");
    }

    // Parseval: the spectrum's energy over N must match the signal's.
    const auto xs = signal.c128();
    const auto ss = out.spectrum.c128();
    long double ex = 0.0L;
    long double es = 0.0L;
    for (const auto& v : xs) ex += static_cast<long double>(std::norm(v));
    for (const auto& v : ss) es += static_cast<long double>(std::norm(v));
    es /= static_cast<long double>(plan.n);
    const double rel =
        std::abs(static_cast<double>(ex - es)) / std::max(1e-30, static_cast<double>(ex));
    if (rel > 1e-9) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "spectrum energy off by relative " + fmt_double(rel));
    }
  }

  const std::string params = "n=" + std::to_string(plan.n) +
                             " tiles=" + std::to_string(plan.tiles) +
                             " merge=" + (plan.butterfly_merge ? "butterfly" : "direct");
  std::vector<double> gflops;
  for (size_t i = 0; i < out.rep_seconds.size(); ++i) {
    auto base_rec = [&](const char* phase, double wall) {
      RunRecord rec;
      rec.app = "fft";
      rec.mode = launch_mode_name(opts.mode);
      rec.cluster = "ps=1,worker=" + std::to_string(plan.workers);
      rec.params = params;
      rec.rep = static_cast<int32_t>(i);
      rec.phase = phase;
      rec.wall_seconds = wall;
      rec.sanity_ok = true;
      return rec;
    };
    RunRecord total = base_rec("total", out.rep_seconds[i]);
    total.metric = "gflops";
    total.value = gflops_rate(flops_fft(plan.n), out.rep_seconds[i]);
    gflops.push_back(total.value);
    out.records.push_back(total);
    out.records.push_back(base_rec("collect", out.collect_seconds[i]));
    out.records.push_back(base_rec("merge", out.merge_seconds[i]));
  }
  out.median_gflops = median_of(gflops);
  emit_records(opts, out.records);
  return out;
}

}  // namespace flowhpc
