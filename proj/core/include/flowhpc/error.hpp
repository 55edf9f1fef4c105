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
#ifndef FLOWHPC_ERROR_HPP_
#define FLOWHPC_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace flowhpc {

// Stable error codes. The numeric values travel on the wire inside Error
// frames, so they must not be reordered.
enum class ErrorCode : uint8_t {
  kUnknown = 0,
  kShapeMismatch = 1,
  kDTypeMismatch = 2,
  kNonPowerOfTwo = 3,
  kMissingFeed = 4,
  kCycleDetected = 5,
  kUnsupportedPlacement = 6,
  kUnknownVariable = 7,
  kUnknownQueue = 8,
  kTimeout = 9,
  kQueueClosed = 10,
  kGraphTooLarge = 11,
  kConnectionFailed = 12,
  kRemoteKernel = 13,
  kAddressInUse = 14,
  kIdentityNotInSpec = 15,
  kChecksumMismatch = 16,
  kManifestMissing = 17,
  kParseError = 18,
  kInsufficientNodes = 19,
  kIndivisibleDevices = 20,
  kIndivisibleTile = 21,
  kMissingTileFile = 22,
  kMissingTile = 23,
  kLengthMismatch = 24,
  kUnexpectedTargetParity = 25,
  kSanityCheckFailed = 26,
  kNotConverged = 27,
  kBreakdown = 28,
  kSpawnFailed = 29,
  kPortExhausted = 30,
  kInvalidArgument = 31,
  kIoError = 32,
  kProtocol = 33,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the whole runtime. `node_id` is set when the
// failure is attributable to a specific graph node (kNoNode otherwise).
class FlowError : public std::runtime_error {
 public:
  static constexpr uint32_t kNoNode = 0xffffffffu;

  FlowError(ErrorCode code, std::string message, uint32_t node_id = kNoNode)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        node_id_(node_id) {}

  ErrorCode code() const { return code_; }
  uint32_t node_id() const { return node_id_; }

 private:
  ErrorCode code_;
  uint32_t node_id_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message,
                                     uint32_t node_id = FlowError::kNoNode) {
  throw FlowError(code, message, node_id);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknown: return "Unknown";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDTypeMismatch: return "DTypeMismatch";
    case ErrorCode::kNonPowerOfTwo: return "NonPowerOfTwo";
    case ErrorCode::kMissingFeed: return "MissingFeed";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kUnsupportedPlacement: return "UnsupportedPlacement";
    case ErrorCode::kUnknownVariable: return "UnknownVariable";
    case ErrorCode::kUnknownQueue: return "UnknownQueue";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kQueueClosed: return "QueueClosed";
    case ErrorCode::kGraphTooLarge: return "GraphTooLarge";
    case ErrorCode::kConnectionFailed: return "ConnectionFailed";
    case ErrorCode::kRemoteKernel: return "RemoteKernelError";
    case ErrorCode::kAddressInUse: return "AddressInUse";
    case ErrorCode::kIdentityNotInSpec: return "IdentityNotInSpec";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kManifestMissing: return "ManifestMissing";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInsufficientNodes: return "InsufficientNodes";
    case ErrorCode::kIndivisibleDevices: return "IndivisibleDevices";
    case ErrorCode::kIndivisibleTile: return "IndivisibleTile";
    case ErrorCode::kMissingTileFile: return "MissingTileFile";
    case ErrorCode::kMissingTile: return "MissingTile";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnexpectedTargetParity: return "UnexpectedTargetParity";
    case ErrorCode::kSanityCheckFailed: return "SanityCheckFailed";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kBreakdown: return "Breakdown";
    case ErrorCode::kSpawnFailed: return "SpawnFailed";
    case ErrorCode::kPortExhausted: return "PortExhausted";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kProtocol: return "ProtocolError";
  }
  return "Unknown";
}

}  // namespace flowhpc

#endif  // FLOWHPC_ERROR_HPP_
