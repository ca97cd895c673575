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
#include <random>
#include <tuple>

#include "fixtures.h"
#include "memplan/error.h"
#include "memplan/iteration.h"
#include "oracles.h"

using namespace memplan;
using namespace memplan::testing;

namespace {

std::vector<Op> twelve_ops() {
  return {M("a", 4), W("a"), M("b", 8), R("a"), W("b"), F("a"),
          M("c", 2), R("b"), W("c"), F("b"), R("c"), F("c")};
}

using Shape = std::tuple<int64_t, int64_t, int64_t, bool>;

std::vector<Shape> shapes(const IterationProfile& p) {
  std::vector<Shape> out;
  for (const VariableLifetime& v : p.variables) {
    out.emplace_back(v.size, v.alloc_index.value_or(-1), v.free_index.value_or(-1),
                     v.persistent);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("iteration") {

TEST_CASE("doubled sequence has period 12") {
  const Trace t = looped_trace({}, twelve_ops(), 2);
  const IterationWindow w = detect_iteration(t);
  CHECK(w.period == 12);
  CHECK(w.start == 12);
  CHECK(w.end == 24);
}

TEST_CASE("aperiodic trace has no iteration") {
  std::vector<Op> ops;
  for (int i = 0; i < 25; ++i) ops.push_back(M("v" + std::to_string(i), i + 1));
  for (int i = 0; i < 25; ++i) ops.push_back(F("v" + std::to_string(i)));
  const Trace t = looped_trace({}, ops, 1);
  REQUIRE(t.events.size() == 50);
  CHECK_THROWS_AS(detect_iteration(t), NotFound);
  CHECK_THROWS_AS(detect_iteration(Trace{}), NotFound);
}

TEST_CASE("warm-up iteration is excluded from the window") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    WorkloadSpec spec = vgg_like_spec(16, 2);
    spec.iterations = 5;
    spec.perturb_first_iteration = true;
    spec.seed = seed;
    const Trace t = generate_synthetic_trace(spec);
    const IterationWindow w = detect_iteration(t);
    const int64_t per = std::stoll(t.meta.at("ops_per_iteration"));
    const int64_t first_end = std::stoll(t.meta.at("setup_ops")) + per +
                              std::stoll(t.meta.at("warmup_extra_ops"));
    CHECK(w.period == per);
    CHECK(w.start >= first_end);
    CHECK(w.end == static_cast<int64_t>(t.events.size()));
  }
}

TEST_CASE("detection ignores variable names") {
  WorkloadSpec spec = vgg_like_spec(11, 2);
  spec.iterations = 4;
  const Trace t = generate_synthetic_trace(spec);
  Trace renamed = t;
  for (TraceEvent& e : renamed.events) e.var = "r_" + e.var + "_x";
  const IterationWindow a = detect_iteration(t), b = detect_iteration(renamed);
  CHECK(a.period == b.period);
  CHECK(a.start == b.start);
}

TEST_CASE("nested repetition reports the smallest period") {
  // Two identical half-iterations make the whole iteration repeat as well.
  std::vector<Op> half = {M("a", 4), W("a"), R("a"), F("a")};
  std::vector<Op> body = half;
  for (Op op : half) {
    op.var += "'";
    body.push_back(op);
  }
  const Trace t = looped_trace({}, body, 3);
  CHECK(detect_iteration(t).period == 4);
}

TEST_CASE("plain lifetime inside the window") {
  const std::vector<Op> body = {W("$g"), R("$g"), M("x", 5), W("x"),
                                R("x"),  R("x"),  R("x"),    F("x")};
  const Trace t = looped_trace({M("g", 3)}, body, 2);
  const IterationProfile p = analyze_trace(t);
  REQUIRE(p.period == 8);
  const auto it = std::find_if(p.variables.begin(), p.variables.end(),
                               [](const VariableLifetime& v) { return v.var == "x@1"; });
  REQUIRE(it != p.variables.end());
  CHECK(it->alloc_index == 2);
  CHECK(it->free_index == 7);
  CHECK_FALSE(it->persistent);
  CHECK_FALSE(it->wraps());
  CHECK(it->accesses.size() == 4);
}

TEST_CASE("weight allocated before the window is persistent") {
  const std::vector<Op> body = {R("$g"), M("x", 5), W("x"), R("$g"), F("x")};
  const Trace t = looped_trace({M("g", 3), W("g")}, body, 3);
  const IterationProfile p = analyze_trace(t);
  const auto g = std::find_if(p.variables.begin(), p.variables.end(),
                              [](const VariableLifetime& v) { return v.var == "g"; });
  REQUIRE(g != p.variables.end());
  CHECK(g->persistent);
  CHECK_FALSE(g->free_index.has_value());
  for (const VariableLifetime& v : p.variables) {
    if (&v != &*g) CHECK(lifetimes_overlap(*g, v, p.period));
  }
}

TEST_CASE("variable freed in the next iteration wraps") {
  // "y" of iteration k is freed early in iteration k+1.
  std::vector<Op> body = {M("x", 4), W("x"), R("x"), F("x"), M("y", 6), W("y")};
  Trace t;
  int64_t idx = 0;
  auto emit = [&](OpKind k, std::string v, int64_t s) {
    t.events.push_back({idx, idx, k, std::move(v), s});
    ++idx;
  };
  for (int k = 0; k < 3; ++k) {
    const std::string s = std::to_string(k);
    emit(OpKind::kMalloc, "x" + s, 4);
    emit(OpKind::kWrite, "x" + s, 0);
    if (k > 0) emit(OpKind::kRead, "y" + std::to_string(k - 1), 0);
    if (k > 0) emit(OpKind::kFree, "y" + std::to_string(k - 1), 0);
    if (k == 0) {
      emit(OpKind::kRead, "x" + s, 0);
      emit(OpKind::kRead, "x" + s, 0);
    }
    emit(OpKind::kFree, "x" + s, 0);
    emit(OpKind::kMalloc, "y" + s, 6);
    emit(OpKind::kWrite, "y" + s, 0);
  }
  const IterationProfile p = analyze_trace(t);
  REQUIRE(p.period == 7);
  const auto y = std::find_if(p.variables.begin(), p.variables.end(),
                              [](const VariableLifetime& v) { return v.var == "y2"; });
  REQUIRE(y != p.variables.end());
  CHECK(y->wraps());
  CHECK(*y->alloc_index == 5);
  CHECK(*y->free_index == 3);
  // Circular access order: own write, then next iteration's read.
  REQUIRE(y->accesses.size() == 2);
  CHECK(y->accesses[0].index == 6);
  CHECK(y->accesses[1].index == 2);
  const auto arcs = lifetime_arcs(*y, p.period);
  REQUIRE(arcs.size() == 2);
  CHECK(arcs[0].begin == 5);
  CHECK(arcs[0].end == 7);
  CHECK(arcs[1].begin == 0);
  CHECK(arcs[1].end == 3);
}

TEST_CASE("load of one variable and of two disjoint ones") {
  IterationProfile p;
  p.period = 6;
  p.ops.resize(6);
  for (int i = 0; i < 6; ++i) p.ops[i].t_us = i;
  p.period_duration_us = 6;
  VariableLifetime a;
  a.var = "a";
  a.size = 10;
  a.alloc_index = 0;
  a.free_index = 4;
  p.variables = {a};
  LoadProfile l = compute_load_profile(p);
  for (int i = 0; i < 6; ++i) CHECK(l.samples[i].bytes == (i < 4 ? 10 : 0));
  CHECK(l.peak_bytes == 10);
  CHECK(l.peak_index == 0);

  VariableLifetime b = a;
  b.var = "b";
  b.alloc_index = 4;
  b.free_index = 0;
  p.variables = {a, b};
  l = compute_load_profile(p);
  CHECK(l.peak_bytes == 10);
  CHECK(l.peak_index == 0);  // plateau resolves to the earliest index
}

TEST_CASE("load profile matches a liveness scan and a trace replay") {
  for (int depth : {11, 16}) {
    WorkloadSpec spec = vgg_like_spec(depth, 4);
    spec.iterations = 4;
    spec.perturb_first_iteration = true;
    spec.seed = static_cast<uint64_t>(depth);
    const Trace t = generate_synthetic_trace(spec);
    const IterationProfile p = analyze_trace(t);
    const auto scan = liveness_scan(p);
    const auto replay = replay_trace_load(t);
    for (int64_t i = 0; i < p.period; ++i) {
      CHECK(p.load.samples[i].bytes == scan[i]);
      CHECK(p.load.samples[i].bytes == replay[p.window.start + i]);
    }
    CHECK(p.load.peak_bytes == *std::max_element(scan.begin(), scan.end()));
  }
}

TEST_CASE("every malloc and free in the window belongs to one variable") {
  WorkloadSpec spec = vgg_like_spec(13, 2);
  spec.iterations = 3;
  const IterationProfile p = analyze_trace(generate_synthetic_trace(spec));
  std::vector<int> mallocs(p.variables.size(), 0), frees(p.variables.size(), 0);
  for (int64_t i = 0; i < p.period; ++i) {
    const ProfileOp& op = p.ops[i];
    REQUIRE(op.var_ref >= 0);
    const VariableLifetime& v = p.variables[op.var_ref];
    if (op.kind == OpKind::kMalloc) {
      ++mallocs[op.var_ref];
      CHECK(v.alloc_index == i);
    }
    if (op.kind == OpKind::kFree) {
      ++frees[op.var_ref];
      CHECK(v.free_index == i);
    }
  }
  for (size_t v = 0; v < p.variables.size(); ++v) {
    CHECK(mallocs[v] <= 1);
    CHECK(frees[v] <= 1);
  }
}

TEST_CASE("two middle windows give the same lifetime shapes") {
  WorkloadSpec spec = vgg_like_spec(16, 2);
  spec.iterations = 6;
  spec.perturb_first_iteration = true;
  const Trace t = generate_synthetic_trace(spec);
  const IterationWindow w = detect_iteration(t);
  const IterationWindow earlier{w.period, w.start - w.period, w.start};
  CHECK(shapes(extract_lifetimes(t, w)) == shapes(extract_lifetimes(t, earlier)));
}

TEST_CASE("reconstructed three-buffer instance peaks at 120 MB") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  CHECK(p.period == 16);
  CHECK(p.load.peak_bytes == 120 * kMB);
  CHECK(p.load.peak_index == 6);
}

TEST_CASE("op_index_at") {
  const IterationProfile p = analyze_trace(three_buffer_trace());
  CHECK(op_index_at(p, -5) == 0);
  CHECK(op_index_at(p, 0) == 0);
  CHECK(op_index_at(p, 19.9) == 1);
  CHECK(op_index_at(p, 20) == 2);
  CHECK(op_index_at(p, 1e9) == 15);
}

}  // TEST_SUITE
