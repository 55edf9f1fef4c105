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
#ifndef FLOWHPC_CHECKPOINT_HPP_
#define FLOWHPC_CHECKPOINT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowhpc/tensor.hpp"

namespace flowhpc {

struct CheckpointEntry {
  std::string name;
  DType dtype = DType::kF32;
  Shape shape;
  uint64_t offset = 0;
  uint64_t length = 0;
  uint32_t crc = 0;
};

struct CheckpointManifest {
  uint64_t id = 0;
  std::vector<CheckpointEntry> entries;
  uint64_t payload_bytes = 0;
};

// On-disk layout per checkpoint id inside `dir`:
//   payload-<id>.bin   raw variable payloads, concatenated
//   manifest-<id>      one line per variable:
//                      name \t dtype \t shape \t offset \t length \t crc32c-hex
// The manifest is written last via rename, so its presence implies a
// complete payload. Queues are not checkpointed.
CheckpointManifest checkpoint_save(const std::map<std::string, Tensor>& variables,
                                   const std::string& dir, uint64_t id);

// Verifies every entry's CRC32C before returning. The result replaces a
// store's whole variable map.
std::map<std::string, Tensor> checkpoint_restore(const std::string& dir, uint64_t id);

CheckpointManifest read_manifest(const std::string& dir, uint64_t id);

// Ids with a manifest present, ascending. Missing directory reads as empty.
std::vector<uint64_t> list_checkpoints(const std::string& dir);

}  // namespace flowhpc

#endif  // FLOWHPC_CHECKPOINT_HPP_
