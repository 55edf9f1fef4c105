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
#include "flowhpc/apps/reduce.hpp"

#include <utility>

#include "flowhpc/error.hpp"

namespace flowhpc {
namespace {

// Contribution layout: [round, worker, body...]. The round tag rides inside
// the element because queues carry tensors only; there is no side channel.
Tensor make_contribution(uint64_t round, uint32_t worker, std::span<const double> body) {
  std::vector<double> elem(2 + body.size());
  elem[0] = static_cast<double>(round);
  elem[1] = static_cast<double>(worker);
  std::copy(body.begin(), body.end(), elem.begin() + 2);
  return Tensor::from_f64(Shape::vector(static_cast<int64_t>(elem.size())), elem);
}

struct Contribution {
  uint64_t round = 0;
  uint32_t worker = 0;
  std::vector<double> body;
};

Contribution parse_contribution(const Tensor& t, const std::string& channel) {
  if (t.dtype() != DType::kF64 || t.shape().rank() != 1 || t.elem_count() < 2) {
    throw_error(ErrorCode::kSanityCheckFailed,
                channel + ": malformed contribution " + t.shape().to_string());
  }
  auto v = t.f64();
  Contribution c;
  c.round = static_cast<uint64_t>(v[0]);
  c.worker = static_cast<uint32_t>(v[1]);
  c.body.assign(v.begin() + 2, v.end());
  return c;
}

// One round of collection on the reducer side. Returns contributions in
// arrival order. Duplicate workers or a stale round tag mean a worker
// escaped the barrier, which is a bug worth failing loudly for.
std::vector<Contribution> collect_round(Session& ps, const std::string& in_name, uint32_t workers,
                                        uint64_t round, uint32_t timeout_ms) {
  std::vector<Contribution> arrived;
  arrived.reserve(workers);
  std::vector<bool> seen(workers, false);
  for (uint32_t i = 0; i < workers; ++i) {
    Tensor elem = ps.dequeue(in_name, reduce_channel_capacity(workers), timeout_ms);
    Contribution c = parse_contribution(elem, in_name);
    if (c.round != round) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  in_name + ": round " + std::to_string(c.round) + " arrived during round " +
                      std::to_string(round));
    }
    if (c.worker >= workers || seen[c.worker]) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  in_name + ": duplicate or unknown worker " + std::to_string(c.worker));
    }
    seen[c.worker] = true;
    arrived.push_back(std::move(c));
  }
  return arrived;
}

void broadcast(Session& ps, const std::string& out_name, uint32_t workers, uint64_t round,
               std::span<const double> result, uint32_t timeout_ms) {
  std::vector<double> elem(1 + result.size());
  elem[0] = static_cast<double>(round);
  std::copy(result.begin(), result.end(), elem.begin() + 1);
  Tensor copy = Tensor::from_f64(Shape::vector(static_cast<int64_t>(elem.size())), elem);
  for (uint32_t i = 0; i < workers; ++i) {
    ps.enqueue(out_name, copy, reduce_channel_capacity(workers), timeout_ms);
  }
}

bool channel_finished(const FlowError& e) {
  return e.code() == ErrorCode::kQueueClosed || e.code() == ErrorCode::kTimeout;
}

template <typename CombineFn>
uint64_t serve_channel(Session& ps, const std::string& name, uint32_t workers,
                       uint32_t timeout_ms, CombineFn combine) {
  const std::string in_name = name + ".in";
  const std::string out_name = name + ".out";
  uint64_t round = 0;
  for (;;) {
    std::vector<Contribution> arrived;
    try {
      arrived = collect_round(ps, in_name, workers, round, timeout_ms);
    } catch (const FlowError& e) {
      if (channel_finished(e)) return round;
      throw;
    }
    std::vector<double> result = combine(arrived);
    broadcast(ps, out_name, workers, round, result, timeout_ms);
    ++round;
  }
}

}  // namespace

ReduceChannel::ReduceChannel(Session* ps, std::string name, uint32_t workers,
                             uint32_t worker_index, uint32_t timeout_ms)
    : ps_(ps),
      in_name_(name + ".in"),
      out_name_(name + ".out"),
      workers_(workers),
      worker_index_(worker_index),
      timeout_ms_(timeout_ms) {}

Tensor ReduceChannel::next_output(uint64_t expect_len) {
  Tensor out = ps_->dequeue(out_name_, reduce_channel_capacity(workers_), timeout_ms_);
  if (out.dtype() != DType::kF64 || out.shape().rank() != 1 ||
      static_cast<uint64_t>(out.elem_count()) != 1 + expect_len) {
    throw_error(ErrorCode::kSanityCheckFailed,
                out_name_ + ": malformed broadcast " + out.shape().to_string());
  }
  const uint64_t got_round = static_cast<uint64_t>(out.f64()[0]);
  if (got_round != round_) {
    throw_error(ErrorCode::kSanityCheckFailed,
                out_name_ + ": broadcast for round " + std::to_string(got_round) +
                    " while in round " + std::to_string(round_));
  }
  return out;
}

double ReduceChannel::reduce_scalar(double value) {
  const double body[1] = {value};
  ps_->enqueue(in_name_, make_contribution(round_, worker_index_, body),
               reduce_channel_capacity(workers_), timeout_ms_);
  Tensor out = next_output(1);
  ++round_;
  return out.f64()[1];
}

std::vector<double> ReduceChannel::all_gather(std::span<const double> slice) {
  ps_->enqueue(in_name_, make_contribution(round_, worker_index_, slice),
               reduce_channel_capacity(workers_), timeout_ms_);
  Tensor out = next_output(slice.size() * workers_);
  ++round_;
  auto v = out.f64();
  return std::vector<double>(v.begin() + 1, v.end());
}

uint64_t serve_scalar_reduce(Session& ps, const std::string& name, uint32_t workers,
                             uint32_t timeout_ms) {
  // The sum runs in arrival order. Every consumer still sees identical bits
  // because the sum is computed once and broadcast.
  return serve_channel(ps, name, workers, timeout_ms,
                       [&](const std::vector<Contribution>& arrived) {
                         double sum = 0.0;
                         for (const auto& c : arrived) {
                           if (c.body.size() != 1) {
                             throw_error(ErrorCode::kSanityCheckFailed,
                                         name + ": scalar contribution of length " +
                                             std::to_string(c.body.size()));
                           }
                           sum += c.body[0];
                         }
                         return std::vector<double>{sum};
                       });
}

uint64_t serve_all_gather(Session& ps, const std::string& name, uint32_t workers,
                          uint32_t timeout_ms) {
  // Slices land at positions fixed by worker index, so the assembled vector
  // is arrival-order independent.
  return serve_channel(ps, name, workers, timeout_ms,
                       [&](const std::vector<Contribution>& arrived) {
                         const size_t len = arrived.empty() ? 0 : arrived[0].body.size();
                         std::vector<double> all(len * arrived.size());
                         for (const auto& c : arrived) {
                           if (c.body.size() != len) {
                             throw_error(ErrorCode::kSanityCheckFailed,
                                         name + ": ragged gather slices");
                           }
                           std::copy(c.body.begin(), c.body.end(),
                                     all.begin() + static_cast<ptrdiff_t>(c.worker * len));
                         }
                         return all;
                       });
}

uint32_t reduce_channel_capacity(uint32_t workers) { return workers; }

void close_reduce_channel(Session& ps, const std::string& name) {
  ps.close_queue(name + ".in");
}

}  // namespace flowhpc
