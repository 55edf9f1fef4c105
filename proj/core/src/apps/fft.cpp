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
#include "flowhpc/apps/fft.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "flowhpc/error.hpp"
#include "flowhpc/graph.hpp"
#include "flowhpc/session.hpp"

namespace flowhpc {
namespace {

using cplx = std::complex<double>;

constexpr const char* kTileQueue = "ffttiles";
constexpr uint32_t kQueueCapacity = 32;

bool power_of_two(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

void check_plan(const FFTPlan& plan) {
  if (!power_of_two(plan.n) || !power_of_two(plan.tiles)) {
    throw_error(ErrorCode::kNonPowerOfTwo, "signal length and tile count must be powers of two");
  }
  if (plan.tiles > plan.n) {
    throw_error(ErrorCode::kIndivisibleTile, "more tiles than samples");
  }
  if (plan.workers == 0 || plan.workers > plan.tiles) {
    throw_error(ErrorCode::kInvalidArgument,
                "worker count must be in [1, T]; tiles=" + std::to_string(plan.tiles) +
                    " workers=" + std::to_string(plan.workers));
  }
}

// Arriving tile t lands at stride T: buf[j*T + t] = Y_t[j]. The merge inner
// loop then reads T consecutive values per output element, and the insertion
// is one strided pass instead of a slicing splice.
void store_tile_strided(std::vector<cplx>& buf, uint32_t t, uint32_t tiles,
                        std::span<const cplx> spectrum) {
  for (size_t j = 0; j < spectrum.size(); ++j) buf[j * tiles + t] = spectrum[j];
}

// X[k] = sum_t exp(-2*pi*i*t*k/N) * Y_t[k mod n]. The per-k twiddle base
// comes from the standard library on demand; consecutive powers of it are
// produced by multiplication, which stays far below the 1e-9 budget for
// desk-scale tile counts.
std::vector<cplx> merge_strided(const std::vector<cplx>& buf, uint64_t n, uint32_t tiles) {
  const uint64_t tile_len = n / tiles;
  std::vector<cplx> out(n);
  const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (uint64_t k = 0; k < n; ++k) {
    const cplx base = std::polar(1.0, step * static_cast<double>(k));
    const cplx* row = buf.data() + (k % tile_len) * tiles;
    cplx w{1.0, 0.0};
    cplx sum{0.0, 0.0};
    for (uint32_t t = 0; t < tiles; ++t) {
      sum += row[t] * w;
      w *= base;
    }
    out[k] = sum;
  }
  return out;
}

std::vector<std::vector<cplx>> tiles_from_tensors(const std::vector<Tensor>& tile_spectra,
                                                  uint64_t n) {
  const uint32_t tiles = static_cast<uint32_t>(tile_spectra.size());
  if (tiles == 0 || !power_of_two(tiles) || n % tiles != 0) {
    throw_error(ErrorCode::kMissingTile,
                "expected a power-of-two tile count dividing N, got " + std::to_string(tiles));
  }
  const uint64_t tile_len = n / tiles;
  std::vector<std::vector<cplx>> t(tiles);
  for (uint32_t i = 0; i < tiles; ++i) {
    const Tensor& spec = tile_spectra[i];
    if (spec.dtype() != DType::kC128 || spec.shape().rank() != 1 ||
        static_cast<uint64_t>(spec.elem_count()) != tile_len) {
      throw_error(ErrorCode::kLengthMismatch,
                  "tile spectrum " + std::to_string(i) + " has shape " +
                      spec.shape().to_string() + ", expected (" + std::to_string(tile_len) + ")");
    }
    auto v = spec.c128();
    t[i].assign(v.begin(), v.end());
  }
  return t;
}

// Remaining log2(T) decimation-in-time stages. Tiles t and t+M/2 hold the
// even and odd stride-(M/2) subsequences, so each stage halves the tile
// count and doubles the spectrum length.
std::vector<cplx> butterfly_stages(std::vector<std::vector<cplx>> cur, uint64_t n) {
  while (cur.size() > 1) {
    const size_t half = cur.size() / 2;
    const uint64_t len = cur[0].size();
    const double step = -2.0 * std::numbers::pi / static_cast<double>(2 * len);
    std::vector<std::vector<cplx>> next(half);
    for (size_t t = 0; t < half; ++t) {
      std::vector<cplx> z(2 * len);
      for (uint64_t k = 0; k < 2 * len; ++k) {
        const cplx tw = std::polar(1.0, step * static_cast<double>(k));
        z[k] = cur[t][k % len] + tw * cur[t + half][k % len];
      }
      next[t] = std::move(z);
    }
    cur = std::move(next);
  }
  if (cur.empty() || cur[0].size() != n) {
    throw_error(ErrorCode::kMissingTile, "butterfly merge ended with the wrong length");
  }
  return std::move(cur[0]);
}

Tensor spectrum_tensor(std::vector<cplx>&& x) {
  const int64_t n = static_cast<int64_t>(x.size());
  return Tensor::from_c128(Shape::vector(n), x);
}

Tensor make_tile_element(uint32_t t, const Tensor& spectrum) {
  auto v = spectrum.c128();
  std::vector<cplx> elem(1 + v.size());
  elem[0] = cplx(static_cast<double>(t), 0.0);
  std::copy(v.begin(), v.end(), elem.begin() + 1);
  return Tensor::from_c128(Shape::vector(static_cast<int64_t>(elem.size())), elem);
}

}  // namespace

uint64_t flops_fft(uint64_t n) {
  uint64_t log2n = 0;
  while ((uint64_t{1} << log2n) < n) ++log2n;
  return 5 * n * log2n;
}

void split_signal(const Tensor& x, uint32_t tiles, const std::string& dir, TileAudit* audit) {
  if (x.dtype() != DType::kC128 || x.shape().rank() != 1) {
    throw_error(ErrorCode::kInvalidArgument, "split_signal wants a rank-1 c128 signal");
  }
  const uint64_t n = static_cast<uint64_t>(x.elem_count());
  if (tiles == 0 || n % tiles != 0) {
    throw_error(ErrorCode::kIndivisibleTile,
                std::to_string(tiles) + " tiles do not divide length " + std::to_string(n));
  }
  const uint64_t tile_len = n / tiles;
  auto v = x.c128();
  for (uint32_t t = 0; t < tiles; ++t) {
    std::vector<cplx> sub(tile_len);
    for (uint64_t j = 0; j < tile_len; ++j) sub[j] = v[t + j * tiles];
    Tensor tile = Tensor::from_c128(Shape::vector(static_cast<int64_t>(tile_len)), sub);
    write_rect_tile(vector_tile_path(dir, "x", t), t, 0, tile, audit);
  }
}

Tensor interleave_tiles(const std::string& dir, uint64_t n, uint32_t tiles, TileAudit* audit) {
  if (tiles == 0 || n % tiles != 0) {
    throw_error(ErrorCode::kIndivisibleTile,
                std::to_string(tiles) + " tiles do not divide length " + std::to_string(n));
  }
  const uint64_t tile_len = n / tiles;
  std::vector<cplx> x(n);
  for (uint32_t t = 0; t < tiles; ++t) {
    Tensor tile = read_vector_tile(vector_tile_path(dir, "x", t), t, audit);
    if (static_cast<uint64_t>(tile.elem_count()) != tile_len) {
      throw_error(ErrorCode::kLengthMismatch, "tile " + std::to_string(t) + " has length " +
                                                  std::to_string(tile.elem_count()));
    }
    auto v = tile.c128();
    for (uint64_t j = 0; j < tile_len; ++j) x[t + j * tiles] = v[j];
  }
  return Tensor::from_c128(Shape::vector(static_cast<int64_t>(n)), x);
}

Tensor fft_merge(const std::vector<Tensor>& tile_spectra, uint64_t n) {
  const auto tiles = tiles_from_tensors(tile_spectra, n);
  const uint32_t count = static_cast<uint32_t>(tiles.size());
  std::vector<cplx> buf(n);
  for (uint32_t t = 0; t < count; ++t) store_tile_strided(buf, t, count, tiles[t]);
  return spectrum_tensor(merge_strided(buf, n, count));
}

Tensor fft_merge_butterfly(const std::vector<Tensor>& tile_spectra, uint64_t n) {
  return spectrum_tensor(butterfly_stages(tiles_from_tensors(tile_spectra, n), n));
}

FFTWorkerStats fft_worker(const FFTPlan& plan, uint32_t worker_index, const ClusterSpec& cluster,
                          TileAudit* audit) {
  check_plan(plan);
  const uint64_t tile_len = plan.tile_len();

  Session self(cluster.address_of({"worker", worker_index}));
  GraphBuilder b;
  const uint32_t ph = b.placeholder(DType::kC128, Shape::vector(static_cast<int64_t>(tile_len)));
  const uint32_t fft = b.add(OpKind::kFFT, {ph}, {}, plan.device);
  const Graph g = b.build();
  const uint32_t gid = self.register_graph(g);

  Session merger(cluster.address_of({"ps", 0}));
  FFTWorkerStats stats;
  for (uint32_t t = worker_index; t < plan.tiles; t += plan.workers) {
    Tensor tile = read_vector_tile(vector_tile_path(plan.tiles_dir, "x", t), t, audit);
    if (static_cast<uint64_t>(tile.elem_count()) != tile_len) {
      throw_error(ErrorCode::kLengthMismatch, "tile " + std::to_string(t) + " has length " +
                                                  std::to_string(tile.elem_count()));
    }
    Tensor spectrum = self.run_registered(gid, {fft}, {{ph, tile}})[0];
    merger.enqueue(kTileQueue, make_tile_element(t, spectrum), kQueueCapacity, plan.timeout_ms);
    stats.tiles_pushed++;
  }
  merger.enqueue(kTileQueue, Tensor::scalar_c128({0.0, 0.0}), kQueueCapacity, plan.timeout_ms);
  return stats;
}

FFTMergeStats fft_merger(const FFTPlan& plan, const ClusterSpec& cluster, TileAudit* audit) {
  check_plan(plan);
  const uint64_t tile_len = plan.tile_len();
  const auto t_launch = std::chrono::steady_clock::now();

  Session self(cluster.address_of({"ps", 0}));
  std::vector<cplx> buf(plan.n);
  std::vector<bool> seen(plan.tiles, false);
  FFTMergeStats stats;
  auto t_collected = t_launch;
  while (stats.tiles < plan.tiles || stats.markers < plan.workers) {
    Tensor elem = self.dequeue(kTileQueue, kQueueCapacity, plan.timeout_ms);
    if (elem.shape().rank() == 0) {
      stats.markers++;
      continue;
    }
    if (elem.dtype() != DType::kC128 || elem.shape().rank() != 1 ||
        static_cast<uint64_t>(elem.elem_count()) != tile_len + 1) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "malformed tile element " + elem.shape().to_string());
    }
    auto v = elem.c128();
    const uint32_t t = static_cast<uint32_t>(v[0].real());
    if (t >= plan.tiles || seen[t]) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "duplicate or out-of-range tile " + std::to_string(t));
    }
    seen[t] = true;
    store_tile_strided(buf, t, plan.tiles, v.subspan(1));
    stats.tiles++;
    if (stats.tiles == plan.tiles) t_collected = std::chrono::steady_clock::now();
  }
  stats.collect_ns = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t_collected - t_launch).count());

  const auto t_merge0 = std::chrono::steady_clock::now();
  std::vector<cplx> spectrum;
  if (plan.butterfly_merge) {
    std::vector<std::vector<cplx>> tiles(plan.tiles);
    for (uint32_t t = 0; t < plan.tiles; ++t) {
      tiles[t].resize(tile_len);
      for (uint64_t j = 0; j < tile_len; ++j) tiles[t][j] = buf[j * plan.tiles + t];
    }
    spectrum = butterfly_stages(std::move(tiles), plan.n);
  } else {
    spectrum = merge_strided(buf, plan.n, plan.tiles);
  }
  const auto t_merge1 = std::chrono::steady_clock::now();
  stats.merge_ns = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t_merge1 - t_merge0).count());

  write_rect_tile(plan.out_path, 0, 0, spectrum_tensor(std::move(spectrum)), audit);
  return stats;
}

}  // namespace flowhpc
