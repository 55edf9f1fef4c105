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
#ifndef FLOWHPC_HOSTLIST_HPP_
#define FLOWHPC_HOSTLIST_HPP_

#include <string>
#include <vector>

namespace flowhpc {

// Expands a compressed Slurm nodelist like "t01n[01-03,05],login1" into the
// full hostname list, preserving order and zero padding. Multiple bracket
// groups per name ("r[1-2]n[1-2]") expand like nested loops, leftmost
// slowest.
//
// Failures raise ParseError; the message carries the byte offset of the
// offending character.
std::vector<std::string> expand_hostlist(const std::string& compressed);

}  // namespace flowhpc

#endif  // FLOWHPC_HOSTLIST_HPP_
