/* Copyright 2026 The memplan Authors. All Rights Reserved.

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

#ifndef MEMPLAN_TESTS_FIXTURES_H_
#define MEMPLAN_TESTS_FIXTURES_H_

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "memplan/autoswap.h"
#include "memplan/iteration.h"
#include "memplan/trace.h"

namespace memplan::testing {

struct Op {
  OpKind kind;
  std::string var;
  int64_t size = 0;
};

inline Op M(std::string v, int64_t size) { return {OpKind::kMalloc, std::move(v), size}; }
inline Op F(std::string v) { return {OpKind::kFree, std::move(v), 0}; }
inline Op R(std::string v) { return {OpKind::kRead, std::move(v), 0}; }
inline Op W(std::string v) { return {OpKind::kWrite, std::move(v), 0}; }

// Repeats `body` `iterations` times after `setup`; every op lasts `dur_us`.
// Names in the body are suffixed per iteration ("x" -> "x@2").
inline Trace looped_trace(const std::vector<Op>& setup,
                          const std::vector<Op>& body, int iterations,
                          int64_t dur_us = 10) {
  Trace t;
  int64_t idx = 0;
  auto emit = [&](const Op& op, const std::string& name) {
    t.events.push_back({idx, idx * dur_us, op.kind, name, op.size});
    ++idx;
  };
  for (const Op& op : setup) emit(op, op.var);
  for (int k = 0; k < iterations; ++k) {
    for (const Op& op : body) {
      const bool global = !op.var.empty() && op.var[0] == '$';
      emit(op, global ? op.var.substr(1) : op.var + "@" + std::to_string(k));
    }
  }
  return t;
}

constexpr int64_t kMB = 1000 * 1000;

// Three 25 MB buffers written in turn, a 45 MB buffer at the peak, then the
// three read back in reverse order: peak 120 MB.
inline Trace three_buffer_trace() {
  const std::vector<Op> body = {
      M("w1", 25 * kMB), W("w1"), M("w2", 25 * kMB), W("w2"),
      M("w3", 25 * kMB), W("w3"), M("x", 45 * kMB),  W("x"),
      R("x"),            F("x"),  R("w3"),           F("w3"),
      R("w2"),           F("w2"), R("w1"),           F("w1")};
  return looped_trace({}, body, 2);
}

// 25 MB in 20 us.
inline TransferModel three_buffer_transfer() { return {25.0 * kMB / 20e-6, 0.0}; }

}  // namespace memplan::testing

#endif  // MEMPLAN_TESTS_FIXTURES_H_
