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

#ifndef MEMPLAN_SWAPSIM_H_
#define MEMPLAN_SWAPSIM_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "memplan/autoswap.h"
#include "memplan/iteration.h"

namespace memplan {

// Planned transfers of one swapped variable. Times are microseconds on the
// axis of the iteration holding the swap-out; with `spans_iterations` the
// swap-in times run past the period.
struct SwapEvent {
  std::string var;
  int var_ref = -1;
  int64_t size = 0;
  int64_t out_after_index = 0;
  int64_t in_before_index = 0;
  bool spans_iterations = false;
  double t_start_out = 0;
  double t_end_out = 0;
  double t_start_in = 0;
  double t_end_in = 0;

  // Where the swap-in is released during replay: `anchor_offset_us` after
  // operation `anchor_op` of the iteration `anchor_iteration` steps before
  // the one holding `in_before_index` (0 or negative).
  int anchor_iteration = 0;
  int64_t anchor_op = 0;
  double anchor_offset_us = 0;
};

// Out channel: ascending access time, each transfer starting once the access
// completed and the previous transfer ended. In channel: backwards from each
// deadline so that consecutive swap-ins do not overlap, wrapping around the
// iteration boundary.
std::vector<SwapEvent> build_schedule(std::span<const SwapCandidate> selected,
                                      const IterationProfile& profile);

struct DelayedOp {
  int64_t index = 0;
  double delay_us = 0;
};

// A transfer observed during replay, relative to the start of the reported
// iteration (negative when it began in the previous one).
struct Transfer {
  std::string var;
  bool swap_in = false;
  double start_us = 0;
  double end_us = 0;
  // For swap-ins: operation index of the access it serves in the reported
  // iteration, or -1 when that access lies in another iteration.
  int64_t serves_index = -1;
};

struct SimulationResult {
  LoadProfile load_prime;         // limit ignored
  LoadProfile load_double_prime;  // limit enforced
  double baseline_us = 0;
  double overhead_us = 0;
  double overhead_pct = 0;
  int64_t limit_bytes = 0;
  int64_t achieved_peak_bytes = 0;
  std::vector<DelayedOp> delayed_ops;
  std::vector<Transfer> transfers;
  std::vector<double> op_start_us;  // limit-enforced replay
};

// Replays a few consecutive iterations with both transfer channels and
// reports the last one. Throws Deadlock when the limit-enforced replay
// stalls with nothing left to wait for.
SimulationResult simulate(std::span<const SwapEvent> schedule,
                          const IterationProfile& profile,
                          int64_t limit_bytes);

struct PlannedSimulation {
  std::vector<SwapEvent> schedule;
  SimulationResult result;
  int rounds = 0;
};

// build_schedule + simulate, re-deriving swap-in deadlines from the access
// times observed under the limit until they settle (at most `max_rounds`).
// Keeps the round with the least overhead.
PlannedSimulation plan_and_simulate(std::span<const SwapCandidate> selected,
                                    const IterationProfile& profile,
                                    int64_t limit_bytes, int max_rounds = 100);

// Peak left after every candidate is absent between its two accesses.
int64_t compute_load_min(const IterationProfile& profile,
                         std::span<const SwapCandidate> candidates);

// Splits each swapped variable's lifetime at the swap-out free and the
// swap-in allocation. The re-allocated part is named "<var>~in" and marked
// from_swap_in. The load is recomputed.
IterationProfile combine_with_pool(const IterationProfile& profile,
                                   std::span<const SwapEvent> schedule);

}  // namespace memplan

#endif  // MEMPLAN_SWAPSIM_H_
