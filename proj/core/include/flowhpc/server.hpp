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
#ifndef FLOWHPC_SERVER_HPP_
#define FLOWHPC_SERVER_HPP_

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/executor.hpp"
#include "flowhpc/sockets.hpp"
#include "flowhpc/state_store.hpp"

namespace flowhpc {

struct ServerOptions {
  uint32_t default_queue_capacity = 32;
  uint32_t default_timeout_ms = 30000;
  unsigned cpu_threads = 0;
};

// One task server: owns the listening socket, a StateStore, and the graphs
// registered by its sessions. Each accepted connection gets a service
// thread; requests on one connection are handled in arrival order.
class Server {
 public:
  // Validates the identity, binds the address from the spec. The device
  // list is what this task exposes to placement; /cpu:0 is always added.
  Server(TaskIdentity identity, ClusterSpec spec, std::vector<DeviceName> devices,
         ServerOptions opts = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  // Blocks until a Shutdown request or stop().
  void wait();
  void stop();

  uint16_t port() const { return port_; }
  const TaskIdentity& identity() const { return identity_; }
  InMemoryStateStore& state() { return *state_; }

 private:
  void accept_loop();
  void serve_connection(Socket sock);
  void signal_stop();
  void teardown();

  TaskIdentity identity_;
  ClusterSpec spec_;
  std::vector<DeviceName> devices_;
  ServerOptions opts_;

  Listener listener_;
  uint16_t port_ = 0;
  std::unique_ptr<InMemoryStateStore> state_;

  std::mutex graphs_mu_;
  std::vector<std::shared_ptr<const Graph>> graphs_;

  std::thread accept_thread_;
  std::thread reaper_thread_;
  std::mutex conns_mu_;
  std::vector<std::thread> conn_threads_;
  std::set<int> live_fds_;

  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stop_signaled_ = false;
  bool stop_done_ = false;
  std::atomic<bool> stopping_{false};
  std::mutex lifecycle_mu_;
};

}  // namespace flowhpc

#endif  // FLOWHPC_SERVER_HPP_
