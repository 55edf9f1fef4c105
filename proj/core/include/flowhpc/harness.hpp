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
#ifndef FLOWHPC_HARNESS_HPP_
#define FLOWHPC_HARNESS_HPP_

#include <sys/types.h>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "flowhpc/apps/cg.hpp"
#include "flowhpc/apps/fft.hpp"
#include "flowhpc/apps/matmul.hpp"
#include "flowhpc/apps/stream.hpp"
#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/report.hpp"

namespace flowhpc {

// Simulated clusters run every role as a thread of the calling process.
// Launched clusters spawn one role process per task from the flowhpc
// binary. External clusters attach to tasks somebody else started.
enum class LaunchMode { kSimulated, kLaunched, kExternal };

LaunchMode parse_launch_mode(const std::string& text);
const char* launch_mode_name(LaunchMode mode);

struct HarnessOptions {
  LaunchMode mode = LaunchMode::kSimulated;
  std::string bin;        // role binary, required in launched mode
  std::string out_dir = "flowhpc-out";
  uint32_t reps = 5;
  uint64_t seed = 1;
  std::string cluster_file;  // attach target, required in external mode
  // Deadline for role processes after the drive phase finishes. Roles
  // still alive past it are killed and reported.
  uint32_t join_timeout_ms = 300000;
};

// Path from the FLOWHPC_BIN environment variable, empty when unset.
std::string flowhpc_bin_from_env();

// Loopback spec with a fresh port per task, jobs in the given order.
ClusterSpec make_local_cluster(const std::vector<std::pair<std::string, uint32_t>>& jobs);

// Running role set of one cluster. Thread roles capture their exception;
// process roles record exit status. join() surfaces the first failure.
class ClusterHandle {
 public:
  ClusterHandle() = default;
  ~ClusterHandle();

  ClusterHandle(const ClusterHandle&) = delete;
  ClusterHandle& operator=(const ClusterHandle&) = delete;
  ClusterHandle(ClusterHandle&&) = default;
  ClusterHandle& operator=(ClusterHandle&&) = default;

  ClusterSpec spec;

  void add_thread_role(const std::string& name, std::function<void()> body);
  void add_process_role(const std::string& name, const std::string& bin,
                        const std::vector<std::string>& args, const std::string& log_path);

  size_t roles() const { return threads_.size() + procs_.size(); }

  // Waits for every role. Process roles alive past the deadline are
  // killed. Throws the first captured thread exception, then a SpawnFailed
  // for the first abnormal process exit.
  void join(uint32_t deadline_ms);

  // SIGKILL for every live process role. Thread roles cannot be killed;
  // they end when their timeouts expire.
  void kill_all();

 private:
  struct ThreadRole {
    std::string name;
    std::thread thread;
    std::shared_ptr<std::exception_ptr> error;
  };
  struct ProcessRole {
    std::string name;
    pid_t pid = -1;
    std::string log_path;
    bool reaped = false;
    int status = 0;
  };

  std::vector<ThreadRole> threads_;
  std::vector<ProcessRole> procs_;
  bool killed_ = false;
};

// Role bodies. Each hosts the task's server where the role owns one, runs
// the role logic against the cluster, and returns when the role completes.
// The CLI role subcommands and the simulated mode both come through here,
// so the two modes exercise identical code.
void role_serve(const ClusterSpec& spec, const TaskIdentity& task,
                std::vector<DeviceName> devices = {});

void role_matmul_worker(const MatmulPlan& plan, uint32_t index, const ClusterSpec& spec);
void role_matmul_reducer(const MatmulPlan& plan, uint32_t index, const ClusterSpec& spec);
void role_matmul_feeder(const MatmulPlan& plan, const ClusterSpec& spec);

// Keeps serving after the solve so the driver can read the x slice;
// released by a Shutdown request.
void role_cg_worker(const CGConfig& config, uint32_t index, const ClusterSpec& spec);
// Hosts the ps task (channels plus completion queues), serves the three
// reduce channels, then keeps serving until Shutdown.
void role_cg_reducer(const CGConfig& config, const ClusterSpec& spec);

void role_fft_worker(const FFTPlan& plan, uint32_t index, const ClusterSpec& spec);
// Hosts the ps task and merges. Writes collect/merge timings as a small
// JSON object to stats_path when non-empty.
void role_fft_merger(const FFTPlan& plan, const ClusterSpec& spec, const std::string& stats_path);

// Best-effort Shutdown to every task in the spec; connection failures are
// ignored so an already-dead task cannot stall teardown.
void shutdown_cluster(const ClusterSpec& spec);

// Largest checkpoint id present for every worker under
// dir/worker_<w>/manifest-<id>. Empty when no common id exists.
std::optional<uint64_t> latest_common_checkpoint(const std::string& checkpoint_dir,
                                                 uint32_t workers);

// Orchestrators. Each prepares inputs, runs opts.reps repetitions against a
// cluster built per opts.mode, validates results, and appends one record per
// repetition to report.csv and report.jsonl under opts.out_dir. A failed
// validation throws SanityCheckFailed before any record is written.

struct StreamOutcome {
  StreamResult result;  // last size in sweep order
  std::vector<StreamResult> sweep;
  std::vector<RunRecord> records;
};

// One measurement per entry of `sizes` against a ps/worker pair. The
// repetition count lives in config.repetitions; opts.reps is not used here.
StreamOutcome harness_stream(const HarnessOptions& opts, StreamConfig config,
                             const std::vector<uint64_t>& sizes = {});

struct MatmulOutcome {
  Tensor c;  // assembled product from the last repetition
  std::vector<double> rep_seconds;
  double median_gflops = 0.0;
  std::vector<RunRecord> records;
};

MatmulOutcome harness_matmul(const HarnessOptions& opts, MatmulPlan plan, const Tensor& a,
                             const Tensor& b);

struct CGOutcome {
  CGSolveOutcome solve;  // last repetition
  std::vector<double> rep_seconds;
  double median_gflops = 0.0;
  double residual = 0.0;  // ||A x - b|| / ||b||, recomputed by the driver
  std::vector<RunRecord> records;
};

CGOutcome harness_cg(const HarnessOptions& opts, CGConfig config, const Tensor& a,
                     const Tensor& b);

struct FFTOutcome {
  Tensor spectrum;  // last repetition
  std::vector<double> rep_seconds;
  std::vector<double> collect_seconds;
  std::vector<double> merge_seconds;
  double median_gflops = 0.0;
  std::vector<RunRecord> records;
};

FFTOutcome harness_fft(const HarnessOptions& opts, FFTPlan plan, const Tensor& signal);

// Starts the serving side of a cg cluster (reducer on ps plus the workers)
// without driving it; the caller runs cg_collect against handle.spec and
// then shuts the cluster down. `tag` names the scratch files of this
// launch under opts.out_dir. Restart tests kill such a handle mid-solve.
ClusterHandle start_cg_cluster(const HarnessOptions& opts, const CGConfig& config,
                               const std::string& tag);

}  // namespace flowhpc

#endif  // FLOWHPC_HARNESS_HPP_
