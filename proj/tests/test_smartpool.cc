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
#include <chrono>
#include <functional>
#include <map>
#include <random>

#include "memplan/error.h"
#include "memplan/smartpool.h"
#include "memplan/trace.h"
#include "oracles.h"

using namespace memplan;
using namespace memplan::testing;

namespace {

IterationProfile intervals(int64_t period,
                           std::vector<std::tuple<int64_t, int64_t, int64_t>> vars) {
  IterationProfile p;
  p.period = period;
  p.ops.resize(period);
  for (int64_t i = 0; i < period; ++i) p.ops[i].t_us = static_cast<double>(i);
  p.period_duration_us = static_cast<double>(period);
  int k = 0;
  for (const auto& [size, a, f] : vars) {
    VariableLifetime v;
    v.var = std::string(1, static_cast<char>('A' + k++));
    v.size = size;
    v.alloc_index = a;
    v.free_index = f;
    p.variables.push_back(v);
  }
  p.load = compute_load_profile(p);
  return p;
}

// Exhaustive search over every offset drawn from the subset sums of the
// sizes (any gravity-compacted placement uses only such offsets).
int64_t subset_sum_optimum(const ConflictGraph& g) {
  const int n = static_cast<int>(g.size());
  std::vector<int64_t> sums{0};
  for (const auto& v : g.vertices) {
    const size_t m = sums.size();
    for (size_t i = 0; i < m; ++i) sums.push_back(sums[i] + v.size);
  }
  std::sort(sums.begin(), sums.end());
  sums.erase(std::unique(sums.begin(), sums.end()), sums.end());
  std::vector<int64_t> off(n);
  int64_t best = INT64_MAX;
  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      int64_t top = 0;
      for (int i = 0; i < n; ++i) top = std::max(top, off[i] + g.vertices[i].size);
      best = std::min(best, top);
      return;
    }
    for (int64_t o : sums) {
      bool ok = true;
      for (int u = 0; u < v && ok; ++u) {
        if (g.adjacent(u, v)) {
          ok = off[u] + g.vertices[u].size <= o || o + g.vertices[v].size <= off[u];
        }
      }
      if (!ok) continue;
      off[v] = o;
      rec(v + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_SUITE("smartpool") {

TEST_CASE("touching half-open lifetimes do not conflict") {
  const ConflictGraph g = build_conflict_graph(intervals(10, {{1, 0, 5}, {1, 5, 9}}));
  CHECK_FALSE(g.adjacent(0, 1));
  CHECK(g.edge_count() == 0);
  const ConflictGraph h = build_conflict_graph(intervals(10, {{1, 0, 5}, {1, 3, 9}}));
  CHECK(h.adjacent(0, 1));
  CHECK(h.adjacent(1, 0));
}

TEST_CASE("graph edges and clique weight match independent oracles") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 60);
    const IterationProfile p = random_profile(rng, n, 1, 1000);
    const ConflictGraph g = build_conflict_graph(p);
    const Residency res(p);
    for (int a = 0; a < n; ++a) {
      CHECK_FALSE(g.adjacent(a, a));
      for (int b = a + 1; b < n; ++b) {
        REQUIRE(g.adjacent(a, b) == res.conflict(a, b));
        REQUIRE(g.adjacent(b, a) == g.adjacent(a, b));
      }
    }
    const int64_t omega = sweep_max_clique(p);
    CHECK(g.peak_load == omega);
    CHECK(p.load.peak_bytes == omega);
  }
}

TEST_CASE("two equal variables share or stack") {
  const ConflictGraph apart = ConflictGraph::from_edges({10, 10}, {});
  const PoolPlan a = plan_pool(apart);
  CHECK(a.offsets == std::vector<int64_t>{0, 0});
  CHECK(a.footprint_bytes == 10);
  const ConflictGraph joined = ConflictGraph::from_edges({10, 10}, {{0, 1}});
  const PoolPlan b = plan_pool(joined);
  CHECK(b.offsets == std::vector<int64_t>{0, 10});
  CHECK(b.footprint_bytes == 20);
  CHECK(b.competitive_ratio == doctest::Approx(1.0));
}

TEST_CASE("chain A-B-C") {
  // A(30)-B(20), B-C(25), A and C independent.
  const ConflictGraph g = ConflictGraph::from_edges({30, 20, 25}, {{0, 1}, {1, 2}});
  const PoolPlan plan = plan_pool(g);
  CHECK(plan.offsets[0] == 0);
  CHECK(plan.offsets[2] == 0);
  CHECK(plan.offsets[1] == 30);
  const int64_t optimum = brute_force_optimal_footprint(g);
  CHECK(optimum == subset_sum_optimum(g));
  CHECK(optimum == 50);
  CHECK(plan.footprint_bytes == optimum);
  CHECK(g.peak_load == 50);
}

TEST_CASE("brute force basics") {
  CHECK(brute_force_optimal_footprint(ConflictGraph::from_edges({7, 3, 12, 5}, {})) == 12);
  CHECK(brute_force_optimal_footprint(ConflictGraph::from_edges({10, 20}, {{0, 1}})) == 30);
  CHECK(brute_force_optimal_footprint(ConflictGraph{}) == 0);
  std::vector<int64_t> eleven(11, 1);
  CHECK_THROWS_AS(brute_force_optimal_footprint(ConflictGraph::from_edges(eleven, {})),
                  TooLarge);
}

TEST_CASE("brute force agrees with the subset-sum enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    std::vector<int64_t> sizes(n);
    for (auto& s : sizes) s = 1 + static_cast<int64_t>(rng() % 9);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (rng() % 2) edges.emplace_back(a, b);
      }
    }
    const ConflictGraph g = ConflictGraph::from_edges(sizes, edges);
    CHECK(brute_force_optimal_footprint(g) == subset_sum_optimum(g));
  }
}

TEST_CASE("six random variables: sandwich between clique and heuristic") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const IterationProfile p = random_profile(rng, 6, 1, 100);
    const ConflictGraph g = build_conflict_graph(p);
    const PoolPlan plan = plan_pool(g);
    const int64_t opt = brute_force_optimal_footprint(g);
    CHECK(opt <= plan.footprint_bytes);
    CHECK(opt >= g.peak_load);
    CHECK(plan.footprint_bytes >= g.peak_load);
  }
}

TEST_CASE("plans are safe, tight and deterministic") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const IterationProfile p = random_profile(rng, 5 + static_cast<int>(rng() % 150),
                                              1024, 64 << 20);
    const ConflictGraph g = build_conflict_graph(p);
    const Residency res(p);
    for (FitPolicy policy : {FitPolicy::kFirstFit, FitPolicy::kBestFit}) {
      const PoolPlan plan = plan_pool(g, policy);
      CHECK(plan_is_safe(res, plan));
      CHECK_FALSE(check_plan(g, plan).has_value());
      int64_t top = 0;
      for (size_t i = 0; i < plan.vars.size(); ++i) {
        top = std::max(top, plan.offsets[i] + plan.sizes[i]);
      }
      CHECK(plan.footprint_bytes == top);
      CHECK(plan.footprint_bytes >= plan.peak_load_bytes);
      CHECK(plan.competitive_ratio ==
            doctest::Approx(double(plan.footprint_bytes) / double(plan.peak_load_bytes)));
      // The largest variable rests at the bottom.
      const auto big = std::max_element(plan.sizes.begin(), plan.sizes.end()) -
                       plan.sizes.begin();
      CHECK(plan.offsets[big] == 0);
      const PoolPlan again = plan_pool(g, policy);
      CHECK(again.offsets == plan.offsets);
    }
  }
}

TEST_CASE("best fit takes the smallest hole, first fit the lowest") {
  // Placement order B1(14) B2(8) T(6) V(4) U(3) D(2) gives
  //   B1@0, B2@0, T@14 (above B1), V@8 (above B2), U@0.
  // D sees U [0,3), V [8,12), T [14,20): holes of 5 bytes at 3 and 2 at 12.
  const ConflictGraph g = ConflictGraph::from_edges(
      {14, 8, 6, 4, 3, 2}, {{0, 2}, {1, 3}, {5, 4}, {5, 3}, {5, 2}});
  const PoolPlan bf = plan_pool(g, FitPolicy::kBestFit);
  const PoolPlan ff = plan_pool(g, FitPolicy::kFirstFit);
  CHECK(bf.offsets == std::vector<int64_t>{0, 0, 14, 8, 0, 12});
  CHECK(ff.offsets == std::vector<int64_t>{0, 0, 14, 8, 0, 3});
  CHECK(bf.footprint_bytes == 20);
  CHECK(ff.footprint_bytes == 20);
  CHECK_FALSE(check_plan(g, bf).has_value());
  CHECK_FALSE(check_plan(g, ff).has_value());
}

TEST_CASE("policy names") {
  CHECK(parse_fit_policy("best-fit") == FitPolicy::kBestFit);
  CHECK(parse_fit_policy("first_fit") == FitPolicy::kFirstFit);
  CHECK_FALSE(parse_fit_policy("worst").has_value());
  CHECK(fit_policy_name(FitPolicy::kBestFit) == "best_fit");
}

TEST_CASE("lookup table for a single variable") {
  const IterationProfile p = intervals(4, {{16, 1, 3}});
  const PoolPlan plan = plan_pool(build_conflict_graph(p));
  IterationProfile q = p;
  q.ops[1].kind = OpKind::kMalloc;
  q.ops[1].var_ref = 0;
  q.ops[3].kind = OpKind::kFree;
  q.ops[3].var_ref = 0;
  const LookupTable t = make_lookup_table(plan, q);
  REQUIRE(t.size() == 1);
  CHECK(t.entries()[0] == std::pair<int64_t, int64_t>{1, 0});
  CHECK(t.find(1) == 0);
  CHECK_FALSE(t.find(2).has_value());

  PoolPlan missing = plan;
  missing.vars = {"other"};
  try {
    make_lookup_table(missing, q);
    FAIL("expected MissingVariable");
  } catch (const MissingVariable& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("replaying an iteration against the table never double-books") {
  for (int depth : {11, 19}) {
    WorkloadSpec spec = vgg_like_spec(depth, 8);
    spec.iterations = 3;
    const Trace t = generate_synthetic_trace(spec);
    const IterationProfile p = analyze_trace(t);
    const PoolPlan plan = plan_pool(build_conflict_graph(p));
    const LookupTable table = make_lookup_table(plan, p);

    // Address ranges currently held, keyed by variable name.
    std::map<std::string, std::pair<int64_t, int64_t>> held;
    auto place = [&](const std::string& var, int64_t off, int64_t size) {
      for (const auto& [name, r] : held) {
        REQUIRE_MESSAGE((off + size <= r.first || r.second <= off),
                        var << " collides with " << name);
      }
      held[var] = {off, off + size};
    };
    for (const VariableLifetime& v : p.variables) {
      if (v.persistent || !v.alloc_index || v.wraps()) {
        place(v.var, *plan.offset_of(v.var), v.size);
      }
    }
    for (int64_t i = 0; i < p.period; ++i) {
      const TraceEvent& e = t.events[p.window.start + i];
      const VariableLifetime& v = p.variables[p.ops[i].var_ref];
      if (e.kind == OpKind::kMalloc) {
        const auto off = table.find(i);
        REQUIRE(off.has_value());
        place(v.var, *off, e.size);
      } else if (e.kind == OpKind::kFree) {
        REQUIRE(held.erase(v.var) == 1);
      }
    }
  }
}

TEST_CASE("lookups stay fast on a large table") {
  std::vector<std::pair<int64_t, int64_t>> entries;
  for (int64_t i = 0; i < 10000; ++i) entries.emplace_back(3 * i, 64 * i);
  const LookupTable table(entries);
  std::mt19937_64 rng(1);
  int64_t sink = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < 1000000; ++k) {
    sink += table.find(static_cast<int64_t>(rng() % 30000)).value_or(0);
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(sink > 0);
  CHECK(s < 1.0);
}

}  // TEST_SUITE
