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

#include "memplan/pipeline.h"

#include <map>

#include "memplan/error.h"

namespace memplan {

std::vector<SwapCandidate> scored_candidates(const IterationProfile& profile,
                                             const SwapConfig& config) {
  std::vector<SwapCandidate> cands =
      filter_candidates(profile, config.threshold_bytes, config.transfer);
  compute_scores(cands, profile.load, profile.period);
  return cands;
}

namespace {

std::vector<SwapCandidate> pick(std::span<const SwapCandidate> candidates,
                                std::span<const int> order) {
  std::vector<SwapCandidate> out;
  out.reserve(order.size());
  for (int i : order) out.push_back(candidates[i]);
  return out;
}

}  // namespace

double selection_overhead(const IterationProfile& profile,
                          std::span<const SwapCandidate> candidates,
                          std::span<const int> order, int64_t limit_bytes,
                          int max_rounds) {
  const std::vector<SwapCandidate> sel = pick(candidates, order);
  return plan_and_simulate(sel, profile, limit_bytes, max_rounds)
      .result.overhead_us;
}

SwapOutcome run_swap(const IterationProfile& profile, int64_t limit_bytes,
                     const SwapConfig& config) {
  SwapOutcome out;
  out.limit_bytes = limit_bytes;
  out.candidates = scored_candidates(profile, config);
  out.load_min = compute_load_min(profile, out.candidates);

  SwapSelection sel;
  if (config.score == ScoreKind::kCombined) {
    // Distinct weights often induce the same selection; simulate each
    // selection once.
    std::map<std::vector<int>, double> cache;
    const double penalty = 10.0 * profile.period_duration_us;
    auto evaluate = [&](const ScoreWeights& w) {
      SwapSelection s;
      try {
        s = select_by_score(out.candidates, ScoreKind::kCombined, w,
                            profile.load, profile.period, limit_bytes);
      } catch (const LimitUnreachable&) {
        return penalty;
      }
      auto it = cache.find(s.order);
      if (it != cache.end()) return it->second;
      double y;
      try {
        y = selection_overhead(profile, out.candidates, s.order, limit_bytes,
                               config.max_rounds);
      } catch (const Deadlock&) {
        y = penalty;
      }
      cache.emplace(s.order, y);
      return y;
    };
    WeightSearchOptions opts;
    opts.budget = config.bo_budget;
    opts.seed = config.seed;
    opts.seed_pure_corners = config.bo_seed_pure_corners;
    const WeightSearchResult best = optimize_weights(evaluate, opts);
    out.weights = best.weights;
    sel = select_by_score(out.candidates, ScoreKind::kCombined, best.weights,
                          profile.load, profile.period, limit_bytes);
  } else if (config.score == ScoreKind::kSwdoa) {
    std::vector<SwapCandidate> copy = out.candidates;
    sel = select_by_swdoa(copy, profile.load, profile.period, limit_bytes);
  } else {
    sel = select_by_score(out.candidates, config.score, {}, profile.load,
                          profile.period, limit_bytes);
  }
  out.order = sel.order;
  out.selection_peak = sel.achieved_peak;
  out.selected = pick(out.candidates, out.order);
  out.simulation =
      plan_and_simulate(out.selected, profile, limit_bytes, config.max_rounds);
  out.combined = combine_with_pool(profile, out.simulation.schedule);
  out.combined_plan = plan_pool(build_conflict_graph(out.combined), config.policy);
  return out;
}

}  // namespace memplan
