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

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <map>

#include "fixtures.h"
#include "memplan/autoswap.h"
#include "memplan/error.h"
#include "memplan/iteration.h"
#include "memplan/pipeline.h"
#include "memplan/smartpool.h"
#include "memplan/swapsim.h"

using namespace memplan;
using namespace memplan::testing;

namespace {

constexpr int64_t kNoLimit = std::numeric_limits<int64_t>::max();

std::vector<SwapCandidate> scored(const IterationProfile& p, const TransferModel& m) {
  auto cs = filter_candidates(p, 1 << 20, m);
  compute_scores(cs, p.load, p.period);
  return cs;
}

// Two 10 MB buffers written back to back and a 20 MB buffer at the peak,
// separated by `filler` reads of a small side buffer, then the two read back.
Trace two_buffer_trace(int filler) {
  std::vector<Op> body = {M("s", 1024), W("s"), M("a", 10 * kMB), W("a"),
                          M("b", 10 * kMB), W("b")};
  auto pad = [&] {
    for (int i = 0; i < filler; ++i) body.push_back(R("s"));
  };
  pad();
  body.push_back(M("big", 20 * kMB));
  body.push_back(W("big"));
  pad();
  body.push_back(F("big"));
  pad();
  for (const Op& op : {R("b"), F("b"), R("a"), F("a"), F("s")}) body.push_back(op);
  return looped_trace({}, body, 2);
}

void check_channels(const SimulationResult& r) {
  for (bool in : {false, true}) {
    std::vector<Transfer> ts;
    for (const Transfer& t : r.transfers) {
      if (t.swap_in == in) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end(),
              [](const Transfer& a, const Transfer& b) { return a.start_us < b.start_us; });
    for (size_t i = 1; i < ts.size(); ++i) {
      CHECK(ts[i].start_us >= ts[i - 1].end_us - 1e-6);
    }
  }
}

void check_no_early_access(const SimulationResult& r) {
  for (const Transfer& t : r.transfers) {
    if (!t.swap_in || t.serves_index < 0) continue;
    CHECK(t.end_us <= r.op_start_us[t.serves_index] + 1e-6);
  }
}

}  // namespace

TEST_SUITE("swapsim") {

TEST_CASE("one variable with a wide gap costs nothing") {
  const IterationProfile p = analyze_trace(two_buffer_trace(40));
  const TransferModel m{10.0 * kMB / 50e-6, 0.0};
  const auto cs = scored(p, m);
  REQUIRE(cs.size() == 2);
  const int64_t limit = p.load.peak_bytes - 5 * kMB;
  const std::vector<SwapCandidate> one = {cs[0]};
  const PlannedSimulation s = plan_and_simulate(one, p, limit);
  CHECK(s.result.overhead_us == 0.0);
  CHECK(s.result.achieved_peak_bytes <= limit);
  CHECK(s.result.delayed_ops.empty());
  REQUIRE(s.schedule.size() == 1);
  const SwapEvent& e = s.schedule[0];
  CHECK(e.t_end_out - e.t_start_out == doctest::Approx(50.0));
  CHECK(e.t_end_in - e.t_start_in == doctest::Approx(50.0));
  CHECK(e.t_start_out >= cs[0].out_ready_us);
  CHECK(e.t_end_in <= cs[0].in_before.t_us + 1e-9);
}

TEST_CASE("swap-outs share one channel") {
  const IterationProfile p = analyze_trace(two_buffer_trace(40));
  const TransferModel m{10.0 * kMB / 100e-6, 0.0};
  const auto cs = scored(p, m);
  const auto sched = build_schedule(cs, p);
  REQUIRE(sched.size() == 2);
  const SwapEvent& first = sched[0].t_start_out < sched[1].t_start_out ? sched[0] : sched[1];
  const SwapEvent& second = &first == &sched[0] ? sched[1] : sched[0];
  CHECK(first.var == "a@1");
  // b's write ends at 60 us but the channel is busy until a's transfer ends.
  CHECK(second.t_start_out == doctest::Approx(first.t_end_out));
  CHECK(second.t_start_out > 60.0);
  // Swap-ins are laid out backwards from the deadlines without overlap.
  const SwapEvent& late = sched[0].t_end_in > sched[1].t_end_in ? sched[0] : sched[1];
  const SwapEvent& early = &late == &sched[0] ? sched[1] : sched[0];
  CHECK(early.t_end_in <= late.t_start_in + 1e-9);
  const SimulationResult r = simulate(sched, p, kNoLimit);
  check_channels(r);
  check_no_early_access(r);
}

TEST_CASE("three 25 MB buffers under a 60 MB limit") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  REQUIRE(p.load.peak_bytes == 120 * kMB);
  const auto cs = scored(p, three_buffer_transfer());
  REQUIRE(cs.size() == 3);
  const PlannedSimulation s = plan_and_simulate(cs, p, 60 * kMB);
  std::vector<SwapEvent> by_out = s.schedule;
  std::sort(by_out.begin(), by_out.end(),
            [](const SwapEvent& a, const SwapEvent& b) { return a.t_start_out < b.t_start_out; });
  CHECK(by_out[0].var == "w1@1");
  CHECK(by_out[1].var == "w2@1");
  CHECK(by_out[2].var == "w3@1");
  CHECK(s.result.achieved_peak_bytes <= 60 * kMB);
  REQUIRE_FALSE(s.result.delayed_ops.empty());
  // The 45 MB allocation waits for memory.
  const bool x_delayed =
      std::any_of(s.result.delayed_ops.begin(), s.result.delayed_ops.end(),
                  [](const DelayedOp& d) { return d.index == 6; });
  CHECK(x_delayed);
  CHECK(s.result.overhead_us > 0.0);
  check_channels(s.result);
  check_no_early_access(s.result);
}

TEST_CASE("relaxed limit leaves the load untouched") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  const auto cs = scored(p, three_buffer_transfer());
  const PlannedSimulation s = plan_and_simulate(cs, p, p.load.peak_bytes);
  CHECK(s.result.overhead_us == 0.0);
  REQUIRE(s.result.load_prime.samples.size() == s.result.load_double_prime.samples.size());
  for (size_t i = 0; i < s.result.load_prime.samples.size(); ++i) {
    CHECK(s.result.load_prime.samples[i].bytes == s.result.load_double_prime.samples[i].bytes);
  }
}

TEST_CASE("free transfers never slow the iteration") {
  const IterationProfile p = analyze_trace(generate_synthetic_trace(vgg_like_spec(11, 64)));
  const auto cs = scored(p, TransferModel::free_transfers());
  const int64_t lmin = compute_load_min(p, cs);
  for (int64_t limit : {p.load.peak_bytes, (p.load.peak_bytes + lmin) / 2, lmin}) {
    std::vector<SwapCandidate> copy = cs;
    const SwapSelection sel = select_by_swdoa(copy, p.load, p.period, limit);
    std::vector<SwapCandidate> chosen;
    for (int i : sel.order) chosen.push_back(copy[i]);
    const PlannedSimulation s = plan_and_simulate(chosen, p, limit);
    CHECK(s.result.overhead_us == doctest::Approx(0.0));
    CHECK(s.result.achieved_peak_bytes <= limit);
  }
}

TEST_CASE("minimum load") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  const auto cs = scored(p, three_buffer_transfer());
  // Everything but x and the transfers' end points is gone at the peak.
  std::vector<int64_t> l;
  for (const LoadSample& s : p.load.samples) l.push_back(s.bytes);
  for (const SwapCandidate& c : cs) {
    for (int64_t i = c.out_after.index + 1; i < c.in_before.index; ++i) l[i] -= c.size;
  }
  CHECK(compute_load_min(p, cs) == *std::max_element(l.begin(), l.end()));
  CHECK(compute_load_min(p, cs) == 45 * kMB);
  CHECK(compute_load_min(p, {}) == p.load.peak_bytes);
}

TEST_CASE("limits below the minimum load are unreachable") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  SwapConfig cfg;
  cfg.transfer = three_buffer_transfer();
  cfg.score = ScoreKind::kSwdoa;
  CHECK_THROWS_AS(run_swap(p, 40 * kMB, cfg), LimitUnreachable);
  const SwapOutcome ok = run_swap(p, 60 * kMB, cfg);
  CHECK(ok.load_min == 45 * kMB);
  CHECK(ok.simulation.result.achieved_peak_bytes <= 60 * kMB);
}

TEST_CASE("a stalled replay raises Deadlock") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  CHECK_THROWS_AS(simulate({}, p, 100 * kMB), Deadlock);
  CHECK_NOTHROW(simulate({}, p, 120 * kMB));
}

TEST_CASE("overhead grows with nested selections") {
  const IterationProfile p = analyze_trace(generate_synthetic_trace(vgg_like_spec(16, 64)));
  const auto cs = scored(p, TransferModel{});
  std::vector<SwapCandidate> copy = cs;
  const int64_t lmin = compute_load_min(p, cs);
  const SwapSelection sel = select_by_swdoa(copy, p.load, p.period, lmin);
  std::vector<SwapCandidate> chosen;
  double prev = 0;
  for (int i : sel.order) {
    chosen.push_back(copy[i]);
    const SimulationResult r = simulate(build_schedule(chosen, p), p, kNoLimit);
    CHECK(r.overhead_us >= prev - 1e-6);
    prev = r.overhead_us;
    check_channels(r);
    check_no_early_access(r);
  }
}

TEST_CASE("sweep invariants on a generated trace") {
  const IterationProfile p = analyze_trace(generate_synthetic_trace(vgg_like_spec(11, 128)));
  SwapConfig cfg;
  cfg.score = ScoreKind::kSwdoa;
  const auto cs = scored_candidates(p, cfg);
  const int64_t lmin = compute_load_min(p, cs);
  for (int k = 0; k <= 4; ++k) {
    const int64_t limit = p.load.peak_bytes - (p.load.peak_bytes - lmin) * k / 4;
    const SwapOutcome o = run_swap(p, limit, cfg);
    const SimulationResult& r = o.simulation.result;
    CHECK(r.achieved_peak_bytes <= limit);
    CHECK(r.load_double_prime.peak_bytes <= limit);
    CHECK(r.overhead_us >= 0.0);
    if (o.selected.empty()) CHECK(r.overhead_us == 0.0);
    check_channels(r);
    check_no_early_access(r);
    CHECK_FALSE(check_plan(build_conflict_graph(o.combined), o.combined_plan).has_value());
  }
}

TEST_CASE("combining with the pool") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  const IterationProfile same = combine_with_pool(p, {});
  CHECK(same.variables.size() == p.variables.size());
  CHECK(same.load.peak_bytes == p.load.peak_bytes);

  const auto cs = scored(p, three_buffer_transfer());
  const PlannedSimulation s = plan_and_simulate(cs, p, 60 * kMB);
  const IterationProfile combined = combine_with_pool(p, s.schedule);
  CHECK(combined.variables.size() == p.variables.size() + 3);
  int from_in = 0;
  for (const VariableLifetime& v : combined.variables) from_in += v.from_swap_in;
  CHECK(from_in == 3);

  const ConflictGraph before = build_conflict_graph(p);
  const ConflictGraph after = build_conflict_graph(combined);
  auto degree = [](const ConflictGraph& g, const std::string& name) {
    for (size_t i = 0; i < g.size(); ++i) {
      if (g.vertices[i].var == name) return g.adjacency[i].size();
    }
    return size_t{0};
  };
  for (const char* w : {"w1@1", "w2@1", "w3@1"}) {
    const std::string in = std::string(w) + "~in";
    CHECK(degree(after, w) <= degree(before, w));
    CHECK(degree(after, in) <= degree(before, w));
  }
  const PoolPlan pool_only = plan_pool(before);
  const PoolPlan with_swap = plan_pool(after);
  CHECK_FALSE(check_plan(after, with_swap).has_value());
  CHECK(with_swap.footprint_bytes <= pool_only.footprint_bytes);
  CHECK(with_swap.footprint_bytes >= after.peak_load);
}

}  // TEST_SUITE
