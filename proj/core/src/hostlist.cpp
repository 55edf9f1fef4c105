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
#include "flowhpc/hostlist.hpp"

#include <cctype>

#include "flowhpc/error.hpp"

namespace flowhpc {

namespace {

// Guards against range typos like [0-999999999] eating all memory.
constexpr size_t kMaxHosts = 1u << 20;

[[noreturn]] void fail(const std::string& msg, size_t at) {
  throw_error(ErrorCode::kParseError, msg + " at byte " + std::to_string(at));
}

std::string pad_to(unsigned long long value, size_t width) {
  std::string txt = std::to_string(value);
  if (txt.size() < width) txt.insert(0, width - txt.size(), '0');
  return txt;
}

}  // namespace

std::vector<std::string> expand_hostlist(const std::string& input) {
  std::vector<std::string> out;
  const size_t n = input.size();
  size_t i = 0;
  if (n == 0) return out;

  while (i < n) {
    // One segment: literal runs and bracket groups, expanded as nested
    // loops with the leftmost group varying slowest.
    std::vector<std::vector<std::string>> pieces;
    size_t segment_start = i;
    while (i < n && input[i] != ',') {
      if (input[i] == '[') {
        size_t open = i;
        ++i;
        std::vector<std::string> items;
        for (;;) {
          size_t tok = i;
          while (i < n && std::isdigit(static_cast<unsigned char>(input[i]))) ++i;
          if (i == tok) fail("expected digit in range", i);
          if (i - tok > 18) fail("range number too long", tok);
          std::string a = input.substr(tok, i - tok);
          if (i < n && input[i] == '-') {
            ++i;
            size_t tok2 = i;
            while (i < n && std::isdigit(static_cast<unsigned char>(input[i]))) ++i;
            if (i == tok2) fail("expected digit after '-'", i);
            if (i - tok2 > 18) fail("range number too long", tok2);
            unsigned long long lo = std::stoull(a);
            unsigned long long hi = std::stoull(input.substr(tok2, i - tok2));
            if (hi < lo) fail("descending range", tok);
            if (hi - lo + 1 > kMaxHosts) fail("range too large", tok);
            for (unsigned long long v = lo; v <= hi; ++v) items.push_back(pad_to(v, a.size()));
          } else {
            items.push_back(a);
          }
          if (items.size() > kMaxHosts) fail("hostlist too large", open);
          if (i >= n) fail("unclosed '['", open);
          if (input[i] == ',') {
            ++i;
            continue;
          }
          if (input[i] == ']') {
            ++i;
            break;
          }
          fail(std::string("unexpected '") + input[i] + "' in range", i);
        }
        pieces.push_back(std::move(items));
      } else if (input[i] == ']') {
        fail("unmatched ']'", i);
      } else {
        size_t tok = i;
        while (i < n && input[i] != ',' && input[i] != '[' && input[i] != ']') ++i;
        pieces.push_back({input.substr(tok, i - tok)});
      }
    }
    if (pieces.empty()) fail("empty host segment", segment_start);

    std::vector<std::string> names{""};
    for (const auto& piece : pieces) {
      std::vector<std::string> next;
      next.reserve(names.size() * piece.size());
      for (const auto& prefix : names)
        for (const auto& part : piece) next.push_back(prefix + part);
      if (next.size() > kMaxHosts) fail("hostlist too large", segment_start);
      names = std::move(next);
    }
    out.insert(out.end(), names.begin(), names.end());
    if (out.size() > kMaxHosts) fail("hostlist too large", segment_start);

    if (i < n) {
      ++i;  // the separating comma
      if (i == n) fail("trailing comma", n - 1);
    }
  }
  return out;
}

}  // namespace flowhpc
