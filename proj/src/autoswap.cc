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

#include "memplan/autoswap.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "memplan/error.h"

namespace memplan {

double TransferModel::transfer_us(int64_t bytes) const {
  return static_cast<double>(bytes) / (bandwidth_bytes_per_s / 1e6) +
         latency_us;
}

TransferModel TransferModel::free_transfers() {
  return {std::numeric_limits<double>::infinity(), 0.0};
}

std::vector<SwapCandidate> filter_candidates(const IterationProfile& profile,
                                             int64_t threshold_bytes,
                                             const TransferModel& transfer) {
  const int64_t p = profile.period;
  const int64_t peak = profile.load.peak_index;
  std::vector<SwapCandidate> out;
  for (int i = 0; i < static_cast<int>(profile.variables.size()); ++i) {
    const VariableLifetime& v = profile.variables[i];
    if (v.size < threshold_bytes || v.accesses.empty()) continue;

    // Circular positions, increasing along the access list.
    std::vector<int64_t> pos;
    pos.reserve(v.accesses.size());
    for (const Access& a : v.accesses) {
      int64_t x = a.index;
      if (v.alloc_index && x < *v.alloc_index) x += p;
      pos.push_back(x);
    }
    struct Pair {
      size_t from;
      size_t to;
      int64_t x;
      int64_t y;
    };
    std::vector<Pair> pairs;
    for (size_t k = 0; k + 1 < pos.size(); ++k) {
      int64_t x = pos[k], y = pos[k + 1];
      if (x >= p) {
        x -= p;
        y -= p;
      }
      pairs.push_back({k, k + 1, x, y});
    }
    if (v.persistent) {
      int64_t x = pos.back(), y = pos.front() + p;
      if (x >= p) {
        x -= p;
        y -= p;
      }
      pairs.push_back({pos.size() - 1, 0, x, y});
    }
    for (const Pair& pr : pairs) {
      const bool covers =
          (pr.x < peak && peak < pr.y) || (pr.x < peak + p && peak + p < pr.y);
      if (!covers) continue;
      const Access& from = v.accesses[pr.from];
      const Access& to = v.accesses[pr.to];
      SwapCandidate c;
      c.var = v.var;
      c.var_ref = i;
      c.size = v.size;
      c.out_after = {from.index, from.t_us};
      c.in_before = {to.index, to.t_us};
      c.out_ready_us = from.t_us + profile.ops[from.index].dur_us;
      c.spans_iterations = pr.y >= p;
      c.period_us = profile.period_duration_us;
      c.delta_out_us = transfer.transfer_us(v.size);
      c.delta_in_us = transfer.transfer_us(v.size);
      out.push_back(std::move(c));
      break;
    }
  }
  return out;
}

double score_doa(const SwapCandidate& c) {
  return c.gap_us() - (c.delta_out_us + c.delta_in_us);
}

double score_aoa(const SwapCandidate& c) {
  const double doa = score_doa(c);
  const double size = static_cast<double>(c.size);
  return doa >= 0 ? size * doa : doa / size;
}

double load_integral(const LoadProfile& load, double t0, double t1) {
  const double end = load.end_t_us;
  if (t1 > end) return load_integral(load, t0, end) + load_integral(load, 0, t1 - end);
  double area = 0;
  const size_t n = load.samples.size();
  for (size_t k = 0; k < n; ++k) {
    const double a = std::max(t0, load.samples[k].t_us);
    const double b = std::min(t1, k + 1 < n ? load.samples[k + 1].t_us : end);
    if (b > a) area += static_cast<double>(load.samples[k].bytes) * (b - a);
  }
  return area;
}

double score_wdoa(const SwapCandidate& c, const LoadProfile& load) {
  return load_integral(load, c.out_after.t_us, c.in_before_unfolded_us());
}

void remove_absence(LoadProfile& load, const SwapCandidate& c, int64_t period) {
  const int64_t from = c.out_after.index + 1;
  const int64_t to = c.in_before.index + (c.spans_iterations ? period : 0);
  for (int64_t k = from; k < to; ++k) {
    load.samples[k % period].bytes -= c.size;
  }
  load.refresh_peak();
}

namespace {

// Submodular greedy; stops once the peak is at most `limit` (pass the
// lowest int64 to run through every candidate).
SwapSelection greedy_area(std::vector<SwapCandidate>& cands,
                          const LoadProfile& load, int64_t period,
                          int64_t limit) {
  SwapSelection sel;
  sel.updated_load = load;
  std::vector<bool> used(cands.size(), false);
  while (sel.updated_load.peak_bytes > limit) {
    int pick = -1;
    double best = 0;
    for (int i = 0; i < static_cast<int>(cands.size()); ++i) {
      if (used[i]) continue;
      const double area = score_wdoa(cands[i], sel.updated_load);
      if (pick < 0 || area > best) {
        pick = i;
        best = area;
      }
    }
    if (pick < 0) break;
    used[pick] = true;
    cands[pick].scores.swdoa = best;
    sel.order.push_back(pick);
    remove_absence(sel.updated_load, cands[pick], period);
  }
  sel.achieved_peak = sel.updated_load.peak_bytes;
  return sel;
}

}  // namespace

void compute_scores(std::vector<SwapCandidate>& candidates,
                    const LoadProfile& load, int64_t period) {
  for (SwapCandidate& c : candidates) {
    c.scores.doa = score_doa(c);
    c.scores.aoa = score_aoa(c);
    c.scores.wdoa = score_wdoa(c, load);
  }
  greedy_area(candidates, load, period, std::numeric_limits<int64_t>::min());
}

SwapSelection select_by_swdoa(std::vector<SwapCandidate>& candidates,
                              const LoadProfile& load, int64_t period,
                              int64_t limit_bytes) {
  SwapSelection sel = greedy_area(candidates, load, period, limit_bytes);
  if (sel.achieved_peak > limit_bytes) {
    throw LimitUnreachable(limit_bytes, sel.achieved_peak);
  }
  return sel;
}

std::string_view score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kDoa:
      return "doa";
    case ScoreKind::kAoa:
      return "aoa";
    case ScoreKind::kWdoa:
      return "wdoa";
    case ScoreKind::kSwdoa:
      return "swdoa";
    case ScoreKind::kCombined:
      return "bo";
  }
  return "?";
}

std::optional<ScoreKind> parse_score_kind(std::string_view name) {
  if (name == "doa") return ScoreKind::kDoa;
  if (name == "aoa") return ScoreKind::kAoa;
  if (name == "wdoa") return ScoreKind::kWdoa;
  if (name == "swdoa") return ScoreKind::kSwdoa;
  if (name == "bo" || name == "combined") return ScoreKind::kCombined;
  return std::nullopt;
}

std::vector<double> standardize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (!(var > 0)) return out;
  const double sd = std::sqrt(var);
  for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

std::vector<double> ranking_scores(std::span<const SwapCandidate> candidates,
                                   ScoreKind kind, const ScoreWeights& w) {
  const size_t n = candidates.size();
  std::vector<double> doa(n), aoa(n), wdoa(n), swdoa(n);
  for (size_t i = 0; i < n; ++i) {
    doa[i] = candidates[i].scores.doa;
    aoa[i] = candidates[i].scores.aoa;
    wdoa[i] = candidates[i].scores.wdoa;
    swdoa[i] = candidates[i].scores.swdoa;
  }
  switch (kind) {
    case ScoreKind::kDoa:
      return doa;
    case ScoreKind::kAoa:
      return aoa;
    case ScoreKind::kWdoa:
      return wdoa;
    case ScoreKind::kSwdoa:
      return swdoa;
    case ScoreKind::kCombined:
      break;
  }
  const auto za = standardize(aoa), zd = standardize(doa),
             zw = standardize(wdoa), zs = standardize(swdoa);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = w.a * za[i] + w.b * zd[i] + w.c * zw[i] + w.d * zs[i];
  }
  return out;
}

SwapSelection select_by_score(std::span<const SwapCandidate> candidates,
                              ScoreKind kind, const ScoreWeights& weights,
                              const LoadProfile& load, int64_t period,
                              int64_t limit_bytes) {
  const std::vector<double> score = ranking_scores(candidates, kind, weights);
  std::vector<int> rank(candidates.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](int x, int y) { return score[x] > score[y]; });
  SwapSelection sel;
  sel.updated_load = load;
  for (int i : rank) {
    if (sel.updated_load.peak_bytes <= limit_bytes) break;
    sel.order.push_back(i);
    remove_absence(sel.updated_load, candidates[i], period);
  }
  sel.achieved_peak = sel.updated_load.peak_bytes;
  if (sel.achieved_peak > limit_bytes) {
    throw LimitUnreachable(limit_bytes, sel.achieved_peak);
  }
  return sel;
}

}  // namespace memplan
