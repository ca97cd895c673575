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

#ifndef MEMPLAN_PIPELINE_H_
#define MEMPLAN_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "memplan/autoswap.h"
#include "memplan/iteration.h"
#include "memplan/smartpool.h"
#include "memplan/swapsim.h"

namespace memplan {

struct SwapConfig {
  int64_t threshold_bytes = int64_t{1} << 20;
  TransferModel transfer;
  ScoreKind score = ScoreKind::kCombined;
  int bo_budget = 40;
  uint64_t seed = 0;
  bool bo_seed_pure_corners = false;
  FitPolicy policy = FitPolicy::kBestFit;
  int max_rounds = 100;
};

struct SwapOutcome {
  int64_t limit_bytes = 0;
  std::vector<SwapCandidate> candidates;  // scored
  std::vector<int> order;                 // selected, into `candidates`
  std::vector<SwapCandidate> selected;    // in selection order
  int64_t selection_peak = 0;             // synchronous-swap idealisation
  int64_t load_min = 0;
  std::optional<ScoreWeights> weights;    // set for the combined score
  PlannedSimulation simulation;
  IterationProfile combined;
  PoolPlan combined_plan;
};

// Scored candidates of a profile.
std::vector<SwapCandidate> scored_candidates(const IterationProfile& profile,
                                             const SwapConfig& config);

// Overhead (µs) of simulating a given selection order.
double selection_overhead(const IterationProfile& profile,
                          std::span<const SwapCandidate> candidates,
                          std::span<const int> order, int64_t limit_bytes,
                          int max_rounds = 100);

// Selects with the configured score (searching weights for the combined
// one), simulates under the limit and plans the pool of the swapped
// profile. Throws LimitUnreachable or Deadlock.
SwapOutcome run_swap(const IterationProfile& profile, int64_t limit_bytes,
                     const SwapConfig& config);

}  // namespace memplan

#endif  // MEMPLAN_PIPELINE_H_
