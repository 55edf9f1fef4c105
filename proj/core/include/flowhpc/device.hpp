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
#ifndef FLOWHPC_DEVICE_HPP_
#define FLOWHPC_DEVICE_HPP_

#include <cstdint>
#include <string>

#include "flowhpc/error.hpp"

namespace flowhpc {

// A logical execution slot. "cpu" is the host pool; "dev" is an accelerator
// slot (execution is still host-side, the distinction drives placement).
enum class DeviceKind : uint8_t { kCpu = 0, kDev = 1 };

struct DeviceName {
  DeviceKind kind = DeviceKind::kCpu;
  uint16_t index = 0;

  bool operator==(const DeviceName&) const = default;

  static DeviceName cpu(uint16_t index = 0) { return {DeviceKind::kCpu, index}; }
  static DeviceName dev(uint16_t index) { return {DeviceKind::kDev, index}; }

  // Canonical text form, e.g. "/cpu:0" or "/dev:1". parse(format(d)) == d.
  std::string to_string() const {
    return std::string(kind == DeviceKind::kCpu ? "/cpu:" : "/dev:") + std::to_string(index);
  }

  static DeviceName parse(const std::string& text) {
    auto bad = [&] { throw_error(ErrorCode::kParseError, "bad device name: " + text); };
    DeviceName d;
    std::string digits;
    if (text.rfind("/cpu:", 0) == 0) {
      d.kind = DeviceKind::kCpu;
      digits = text.substr(5);
    } else if (text.rfind("/dev:", 0) == 0) {
      d.kind = DeviceKind::kDev;
      digits = text.substr(5);
    } else {
      bad();
    }
    if (digits.empty() || digits.size() > 5) bad();
    uint32_t v = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') bad();
      v = v * 10 + static_cast<uint32_t>(c - '0');
    }
    if (v > 0xffff) bad();
    if (digits.size() > 1 && digits[0] == '0') bad();
    d.index = static_cast<uint16_t>(v);
    return d;
  }
};

}  // namespace flowhpc

#endif  // FLOWHPC_DEVICE_HPP_
