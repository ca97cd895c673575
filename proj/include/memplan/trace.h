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

#ifndef MEMPLAN_TRACE_H_
#define MEMPLAN_TRACE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memplan {

enum class OpKind { kMalloc, kFree, kRead, kWrite };

std::string_view op_kind_name(OpKind kind);
std::optional<OpKind> parse_op_kind(std::string_view name);
inline bool is_access(OpKind kind) {
  return kind == OpKind::kRead || kind == OpKind::kWrite;
}

// One recorded operation. `size` is the allocation size for kMalloc and 0
// for every other kind.
struct TraceEvent {
  int64_t index = 0;
  int64_t t_us = 0;
  OpKind kind = OpKind::kMalloc;
  std::string var;
  int64_t size = 0;

  bool operator==(const TraceEvent&) const = default;
};

struct Trace {
  std::vector<TraceEvent> events;
  // Free-form annotations (workload name, batch size, generator ground truth).
  std::map<std::string, std::string> meta;

  bool operator==(const Trace&) const = default;
};

enum class TraceFormat { kJsonl, kCsv };

// Picks the format from a file extension (".jsonl", ".json", ".csv").
std::optional<TraceFormat> trace_format_for_path(std::string_view path);

// Parses and validates. Throws MalformedRecord for syntax errors and
// InvariantViolation when the event sequence breaks the trace model.
Trace parse_trace(std::istream& in, TraceFormat format);
Trace parse_trace_text(std::string_view text, TraceFormat format);

void serialize_trace(const Trace& trace, TraceFormat format, std::ostream& out);
std::string serialize_trace_text(const Trace& trace, TraceFormat format);

// Checks contiguous indices, non-decreasing timestamps, size rules and
// liveness (no use before malloc, no double free, no malloc of a live var).
void validate_trace(const Trace& trace);

// Per-operation duration: fixed cost plus bytes touched over a rate.
// Malloc and Free touch no bytes.
struct DurationModel {
  double fixed_us = 5.0;
  double bytes_per_us = 20000.0;
  // Relative uniform noise in [-jitter, jitter] applied to every duration.
  double jitter = 0.0;
};

// Layered forward/backward workload. Layer i produces an activation of
// layer_bytes[i] and owns a persistent weight of weight_bytes[i] (0 means
// the layer has no weight).
struct WorkloadSpec {
  std::string name = "synthetic";
  std::vector<int64_t> layer_bytes;
  // Empty means max(1, layer_bytes[i] / 8).
  std::vector<int64_t> weight_bytes;
  // Each layer gets a scratch buffer of fraction * U(0.5, 1) * layer_bytes
  // during its forward step; 0 disables scratch buffers.
  double workspace_fraction = 0.0;
  int iterations = 2;
  // Adds seeded extra scratch allocations to the first iteration, like an
  // algorithm search during warm-up.
  bool perturb_first_iteration = false;
  DurationModel durations;
  uint64_t seed = 0;
};

// Emits weights once, then `iterations` forward/backward passes. Meta keys
// "ops_per_iteration" and "warmup_extra_ops" record the ground truth.
Trace generate_synthetic_trace(const WorkloadSpec& spec);

// VGG-style stack on 32x32 inputs: depth 11, 13, 16 or 19 conv layers plus
// pooling and classifier, activations scaled by `batch`.
WorkloadSpec vgg_like_spec(int depth, int batch);

}  // namespace memplan

#endif  // MEMPLAN_TRACE_H_
