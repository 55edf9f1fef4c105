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
#ifndef FLOWHPC_APPS_FFT_HPP_
#define FLOWHPC_APPS_FFT_HPP_

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/device.hpp"
#include "flowhpc/tile_io.hpp"

namespace flowhpc {

// Distributed 1D FFT by interleaved decomposition. Tile t holds the
// subsequence x[t::T]; workers FFT their tiles and push them to a single
// merger, which applies twiddle factors and assembles the spectrum.
struct FFTPlan {
  uint64_t n = 0;       // signal length N, power of two
  uint32_t tiles = 1;   // T, power of two, divides N, T >= workers
  uint32_t workers = 1; // W; worker w owns tiles {w, w+W, ...}
  std::string tiles_dir;
  std::string out_path;  // spectrum file, rank-1 c128 tile
  // Default merge is the direct O(N*T) twiddle sum. The butterfly variant
  // finishes the remaining log2(T) combine stages in O(N log T).
  bool butterfly_merge = false;
  uint32_t timeout_ms = 120000;
  std::optional<DeviceName> device;

  uint64_t tile_len() const { return tiles == 0 ? 0 : n / tiles; }
};

// Flop estimate 5*N*log2(N) for a length-N transform.
uint64_t flops_fft(uint64_t n);

// Writes T tile files, tile t holding x[t::T]. Interleaving them back
// reproduces the signal bit-exactly.
void split_signal(const Tensor& x, uint32_t tiles, const std::string& dir,
                  TileAudit* audit = nullptr);
Tensor interleave_tiles(const std::string& dir, uint64_t n, uint32_t tiles,
                        TileAudit* audit = nullptr);

// Merges per-tile spectra (index order) into the full spectrum:
// X[k] = sum_t exp(-2*pi*i*t*k/N) * Y_t[k mod N/T].
Tensor fft_merge(const std::vector<Tensor>& tile_spectra, uint64_t n);
Tensor fft_merge_butterfly(const std::vector<Tensor>& tile_spectra, uint64_t n);

struct FFTWorkerStats {
  uint64_t tiles_pushed = 0;
};

// FFTs every tile this worker owns on its own task server and enqueues the
// results to the merger, then pushes a done-marker.
FFTWorkerStats fft_worker(const FFTPlan& plan, uint32_t worker_index, const ClusterSpec& cluster,
                          TileAudit* audit = nullptr);

struct FFTMergeStats {
  // Launch of the merger loop to the T-th tile arrival. The serial merge is
  // reported separately because it is worker-count independent.
  uint64_t collect_ns = 0;
  uint64_t merge_ns = 0;
  uint64_t tiles = 0;
  uint64_t markers = 0;
};

// Collects all T tiles and W markers, merges, and writes the spectrum to
// plan.out_path.
FFTMergeStats fft_merger(const FFTPlan& plan, const ClusterSpec& cluster,
                         TileAudit* audit = nullptr);

}  // namespace flowhpc

#endif  // FLOWHPC_APPS_FFT_HPP_
