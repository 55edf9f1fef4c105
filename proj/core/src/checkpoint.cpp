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
#include "flowhpc/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowhpc/crc32c.hpp"
#include "flowhpc/error.hpp"

namespace flowhpc {

namespace fs = std::filesystem;

namespace {

std::string manifest_name(uint64_t id) { return "manifest-" + std::to_string(id); }
std::string payload_name(uint64_t id) { return "payload-" + std::to_string(id) + ".bin"; }

std::string shape_text(const Shape& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.dims().size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s.dims()[i]);
  }
  return out + ")";
}

Shape parse_shape_text(const std::string& text) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')')
    throw_error(ErrorCode::kParseError, "bad shape field \"" + text + "\"");
  std::vector<int64_t> dims;
  std::string inner = text.substr(1, text.size() - 2);
  if (!inner.empty()) {
    std::stringstream ss(inner);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        size_t used = 0;
        dims.push_back(std::stoll(part, &used));
        if (used != part.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw_error(ErrorCode::kParseError, "bad shape dimension \"" + part + "\"");
      }
    }
  }
  return Shape(std::move(dims));
}

void atomic_write(const fs::path& final_path, const std::string& bytes) {
  fs::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw_error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec)
    throw_error(ErrorCode::kIoError,
                "rename " + tmp.string() + " -> " + final_path.string() + ": " + ec.message());
}

}  // namespace

CheckpointManifest checkpoint_save(const std::map<std::string, Tensor>& variables,
                                   const std::string& dir, uint64_t id) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());

  CheckpointManifest manifest;
  manifest.id = id;

  std::string payload;
  std::string manifest_text;
  for (const auto& [name, tensor] : variables) {
    if (name.find('\t') != std::string::npos || name.find('\n') != std::string::npos)
      throw_error(ErrorCode::kInvalidArgument,
                  "variable name \"" + name + "\" cannot be checkpointed");
    CheckpointEntry e;
    e.name = name;
    e.dtype = tensor.dtype();
    e.shape = tensor.shape();
    e.offset = payload.size();
    e.length = tensor.byte_size();
    e.crc = crc32c(tensor.raw(), tensor.byte_size());
    payload.append(reinterpret_cast<const char*>(tensor.raw()), tensor.byte_size());

    char crc_hex[9];
    std::snprintf(crc_hex, sizeof crc_hex, "%08x", e.crc);
    manifest_text += e.name;
    manifest_text += '\t';
    manifest_text += dtype_name(e.dtype);
    manifest_text += '\t';
    manifest_text += shape_text(e.shape);
    manifest_text += '\t';
    manifest_text += std::to_string(e.offset);
    manifest_text += '\t';
    manifest_text += std::to_string(e.length);
    manifest_text += '\t';
    manifest_text += crc_hex;
    manifest_text += '\n';
    manifest.entries.push_back(std::move(e));
  }
  manifest.payload_bytes = payload.size();

  // Payload first, manifest last: a crash in between leaves no manifest and
  // therefore no visible checkpoint.
  atomic_write(fs::path(dir) / payload_name(id), payload);
  atomic_write(fs::path(dir) / manifest_name(id), manifest_text);
  return manifest;
}

CheckpointManifest read_manifest(const std::string& dir, uint64_t id) {
  fs::path path = fs::path(dir) / manifest_name(id);
  std::ifstream in(path);
  if (!in)
    throw_error(ErrorCode::kManifestMissing,
                "no checkpoint manifest " + path.string());
  CheckpointManifest manifest;
  manifest.id = id;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 6)
      throw_error(ErrorCode::kParseError, "manifest line " + std::to_string(line_no) + " has " +
                                              std::to_string(fields.size()) + " fields, want 6");
    CheckpointEntry e;
    e.name = fields[0];
    e.dtype = dtype_from_name(fields[1]);
    e.shape = parse_shape_text(fields[2]);
    try {
      e.offset = std::stoull(fields[3]);
      e.length = std::stoull(fields[4]);
      e.crc = static_cast<uint32_t>(std::stoul(fields[5], nullptr, 16));
    } catch (const std::exception&) {
      throw_error(ErrorCode::kParseError,
                  "bad numeric field on manifest line " + std::to_string(line_no));
    }
    manifest.payload_bytes = std::max(manifest.payload_bytes, e.offset + e.length);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::map<std::string, Tensor> checkpoint_restore(const std::string& dir, uint64_t id) {
  CheckpointManifest manifest = read_manifest(dir, id);
  fs::path path = fs::path(dir) / payload_name(id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::kManifestMissing, "no checkpoint payload " + path.string());

  std::map<std::string, Tensor> vars;
  for (const CheckpointEntry& e : manifest.entries) {
    size_t expect = static_cast<size_t>(e.shape.elem_count()) * dtype_size(e.dtype);
    if (expect != e.length)
      throw_error(ErrorCode::kParseError, "entry \"" + e.name + "\" length " +
                                              std::to_string(e.length) + " does not match shape");
    std::vector<uint8_t> bytes(e.length);
    in.seekg(static_cast<std::streamoff>(e.offset));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(e.length));
    if (static_cast<uint64_t>(in.gcount()) != e.length)
      throw_error(ErrorCode::kIoError, "short read of \"" + e.name + "\" from " + path.string());
    uint32_t crc = crc32c(bytes.data(), bytes.size());
    if (crc != e.crc)
      throw_error(ErrorCode::kChecksumMismatch,
                  "variable \"" + e.name + "\" checksum mismatch in checkpoint " +
                      std::to_string(id));
    vars.emplace(e.name, Tensor::take(e.dtype, e.shape, std::move(bytes)));
  }
  return vars;
}

std::vector<uint64_t> list_checkpoints(const std::string& dir) {
  std::vector<uint64_t> ids;
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) return ids;
  for (const auto& entry : it) {
    std::string name = entry.path().filename().string();
    if (name.rfind("manifest-", 0) != 0) continue;
    try {
      size_t used = 0;
      uint64_t id = std::stoull(name.substr(9), &used);
      if (used == name.size() - 9) ids.push_back(id);
    } catch (const std::exception&) {
      continue;
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace flowhpc
