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

#ifndef MEMPLAN_ITERATION_H_
#define MEMPLAN_ITERATION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memplan/trace.h"

namespace memplan {

// Half-open range [start, end) of trace indices holding one iteration.
struct IterationWindow {
  int64_t period = 0;
  int64_t start = 0;
  int64_t end = 0;
};

// Position of an access inside the iteration window. `index` and `t_us` are
// relative to the window start.
struct Access {
  int64_t index = 0;
  double t_us = 0;
  OpKind kind = OpKind::kRead;
};

// Lifetime of one variable over a steady-state iteration.
//
// Shapes:
//   alloc and free, free > alloc   -> [alloc, free)
//   alloc and free, free < alloc   -> wraps: [alloc, period) + [0, free)
//   free only                      -> allocated before the window: [0, free)
//   persistent                     -> resident for the whole iteration
//
// `accesses` are listed in circular order starting from the allocation.
struct VariableLifetime {
  std::string var;  // unique within a profile
  int64_t size = 0;
  std::optional<int64_t> alloc_index;
  std::optional<int64_t> free_index;
  std::vector<Access> accesses;
  bool persistent = false;
  // The allocation is a swap-in inserted by combine_with_pool, not a trace
  // malloc.
  bool from_swap_in = false;

  bool wraps() const {
    return !persistent && alloc_index && free_index &&
           *free_index <= *alloc_index;
  }
};

// [begin, end) over operation indices.
struct Arc {
  int64_t begin = 0;
  int64_t end = 0;
};

std::vector<Arc> lifetime_arcs(const VariableLifetime& v, int64_t period);
bool lifetimes_overlap(const VariableLifetime& a, const VariableLifetime& b,
                       int64_t period);

// One operation of the iteration. `var_ref` indexes IterationProfile::variables.
struct ProfileOp {
  OpKind kind = OpKind::kRead;
  int var_ref = -1;
  int64_t size = 0;
  double t_us = 0;
  double dur_us = 0;
};

struct LoadSample {
  int64_t index = 0;
  double t_us = 0;
  int64_t bytes = 0;
};

// Step function: sample k holds from samples[k].t_us until the next sample
// (or end_t_us).
struct LoadProfile {
  std::vector<LoadSample> samples;
  int64_t peak_bytes = 0;
  int64_t peak_index = 0;
  double peak_t_us = 0;
  double end_t_us = 0;

  // Recomputes peak fields; ties go to the earliest sample.
  void refresh_peak();
};

struct IterationProfile {
  int64_t period = 0;
  IterationWindow window;
  double period_duration_us = 0;
  std::vector<ProfileOp> ops;
  std::vector<VariableLifetime> variables;
  LoadProfile load;
};

// Smallest period p whose last 2p events repeat pairwise on (kind, size)
// fingerprints and whose window allocates and frees the same number of bytes.
// Throws NotFound.
IterationWindow detect_iteration(const Trace& trace);

IterationProfile extract_lifetimes(const Trace& trace,
                                   const IterationWindow& window);

LoadProfile compute_load_profile(const IterationProfile& profile);

// detect_iteration + extract_lifetimes.
IterationProfile analyze_trace(const Trace& trace);

// Index of the operation running at relative time t (clamped to the window).
int64_t op_index_at(const IterationProfile& profile, double t_us);

}  // namespace memplan

#endif  // MEMPLAN_ITERATION_H_
