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

#ifndef MEMPLAN_AUTOSWAP_H_
#define MEMPLAN_AUTOSWAP_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memplan/iteration.h"

namespace memplan {

// Host<->device copy cost: size / bandwidth + fixed latency.
struct TransferModel {
  double bandwidth_bytes_per_s = 12e9;
  double latency_us = 10.0;

  double transfer_us(int64_t bytes) const;
  // Zero-cost transfers (infinite bandwidth, no latency).
  static TransferModel free_transfers();
};

struct AccessPoint {
  int64_t index = 0;
  double t_us = 0;  // start time, relative to the window
};

struct PriorityScores {
  double doa = 0;
  double aoa = 0;
  double wdoa = 0;
  double swdoa = 0;
};

// A variable that may leave device memory after `out_after` and must be back
// before `in_before`. With `spans_iterations`, `in_before` belongs to the
// next iteration.
struct SwapCandidate {
  std::string var;
  int var_ref = -1;
  int64_t size = 0;
  AccessPoint out_after;
  AccessPoint in_before;
  double out_ready_us = 0;  // completion time of the out_after access
  double delta_out_us = 0;
  double delta_in_us = 0;
  bool spans_iterations = false;
  double period_us = 0;
  PriorityScores scores;

  // Deadline of the next access on the unfolded time axis.
  double in_before_unfolded_us() const {
    return in_before.t_us + (spans_iterations ? period_us : 0.0);
  }
  double gap_us() const { return in_before_unfolded_us() - out_after.t_us; }
};

// Keeps variables of at least `threshold_bytes` whose gap between two
// consecutive accesses strictly contains the peak index (circularly).
std::vector<SwapCandidate> filter_candidates(const IterationProfile& profile,
                                             int64_t threshold_bytes,
                                             const TransferModel& transfer);

// Duration of absence: access gap minus the round-trip transfer time.
double score_doa(const SwapCandidate& c);
// Area of absence: size * DOA, or DOA / size when DOA is negative.
double score_aoa(const SwapCandidate& c);
// Area under `load` across the access gap.
double score_wdoa(const SwapCandidate& c, const LoadProfile& load);

// Integral of the load step function over [t0, t1); t1 may exceed
// load.end_t_us by up to one period and then wraps to the start.
double load_integral(const LoadProfile& load, double t0, double t1);

// Subtracts c.size from every sample strictly between the two accesses (the
// synchronous swap-out/swap-in idealisation) and refreshes the peak.
void remove_absence(LoadProfile& load, const SwapCandidate& c, int64_t period);

struct SwapSelection {
  std::vector<int> order;  // indices into the candidate list, pick order
  LoadProfile updated_load;
  int64_t achieved_peak = 0;
};

// Fills doa, aoa and wdoa, and swdoa as the area each candidate has when the
// submodular greedy picks it (run over the whole candidate list).
void compute_scores(std::vector<SwapCandidate>& candidates,
                    const LoadProfile& load, int64_t period);

// Greedy by area under the current load, updating the load after each pick,
// until the peak is at most `limit_bytes`. Writes each pick's area into
// scores.swdoa. Throws LimitUnreachable.
SwapSelection select_by_swdoa(std::vector<SwapCandidate>& candidates,
                              const LoadProfile& load, int64_t period,
                              int64_t limit_bytes);

enum class ScoreKind { kDoa, kAoa, kWdoa, kSwdoa, kCombined };
std::string_view score_kind_name(ScoreKind kind);
std::optional<ScoreKind> parse_score_kind(std::string_view name);

// Linear combination weights for AOA, DOA, WDOA, SWDOA in that order.
struct ScoreWeights {
  double a = 0;
  double b = 0;
  double c = 0;
  double d = 0;
};

// Zero mean, unit population variance; all zeros when the variance is zero.
std::vector<double> standardize(std::span<const double> values);

// Ranking value of each candidate for `kind` (scores must be filled).
std::vector<double> ranking_scores(std::span<const SwapCandidate> candidates,
                                   ScoreKind kind,
                                   const ScoreWeights& weights = {});

// Candidates sorted by descending score (stable on ties) are added one by one
// until the peak is at most `limit_bytes`. Throws LimitUnreachable.
SwapSelection select_by_score(std::span<const SwapCandidate> candidates,
                              ScoreKind kind, const ScoreWeights& weights,
                              const LoadProfile& load, int64_t period,
                              int64_t limit_bytes);

struct WeightSearchOptions {
  int budget = 40;
  int initial_points = 5;
  uint64_t seed = 0;
  double length_scale = 0.5;
  double noise = 1e-6;
  int acquisition_samples = 1024;
  // Also evaluate the four single-score corners before the model-guided
  // phase.
  bool seed_pure_corners = false;
};

struct WeightSearchResult {
  ScoreWeights weights;
  double best_overhead_us = 0;
  std::vector<std::pair<ScoreWeights, double>> history;
};

// Bayesian optimisation of the score weights over [-1, 1]^4 minimising
// `evaluator` (communication overhead per iteration).
WeightSearchResult optimize_weights(
    const std::function<double(const ScoreWeights&)>& evaluator,
    const WeightSearchOptions& options = {});

}  // namespace memplan

#endif  // MEMPLAN_AUTOSWAP_H_
