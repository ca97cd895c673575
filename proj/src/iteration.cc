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

#include "memplan/iteration.h"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "memplan/error.h"

namespace memplan {
namespace {

struct Fingerprint {
  OpKind kind;
  int64_t size;
  bool operator==(const Fingerprint&) const = default;
};

// z[i] = length of the longest common prefix of s and s[i..].
std::vector<int64_t> z_function(const std::vector<Fingerprint>& s) {
  const auto n = static_cast<int64_t>(s.size());
  std::vector<int64_t> z(n, 0);
  if (n == 0) return z;
  z[0] = n;
  for (int64_t i = 1, l = 0, r = 0; i < n; ++i) {
    if (i < r) z[i] = std::min(r - i, z[i - l]);
    while (i + z[i] < n && s[z[i]] == s[i + z[i]]) ++z[i];
    if (i + z[i] > r) {
      l = i;
      r = i + z[i];
    }
  }
  return z;
}

struct PendingVar {
  VariableLifetime lt;
  int64_t malloc_abs = -1;  // trace index of the malloc, -1 if unknown
  bool pre_existing = false;
  bool merged = false;
};

}  // namespace

void LoadProfile::refresh_peak() {
  peak_bytes = 0;
  peak_index = 0;
  peak_t_us = 0;
  bool first = true;
  for (const LoadSample& s : samples) {
    if (first || s.bytes > peak_bytes) {
      peak_bytes = s.bytes;
      peak_index = s.index;
      peak_t_us = s.t_us;
      first = false;
    }
  }
}

std::vector<Arc> lifetime_arcs(const VariableLifetime& v, int64_t period) {
  if (v.persistent) return {{0, period}};
  if (v.alloc_index && v.free_index) {
    const int64_t a = *v.alloc_index;
    const int64_t f = *v.free_index;
    if (f > a) return {{a, f}};
    std::vector<Arc> arcs{{a, period}};
    if (f > 0) arcs.push_back({0, f});
    return arcs;
  }
  if (v.alloc_index) return {{*v.alloc_index, period}};
  if (v.free_index && *v.free_index > 0) return {{0, *v.free_index}};
  return {};
}

bool lifetimes_overlap(const VariableLifetime& a, const VariableLifetime& b,
                       int64_t period) {
  for (const Arc& x : lifetime_arcs(a, period)) {
    for (const Arc& y : lifetime_arcs(b, period)) {
      if (x.begin < y.end && y.begin < x.end) return true;
    }
  }
  return false;
}

IterationWindow detect_iteration(const Trace& trace) {
  const auto n = static_cast<int64_t>(trace.events.size());
  std::vector<Fingerprint> fp(n);
  std::vector<int64_t> net(n + 1, 0);
  std::unordered_map<std::string, int64_t> live;
  for (int64_t i = 0; i < n; ++i) {
    const TraceEvent& ev = trace.events[i];
    int64_t size = ev.size;
    int64_t delta = 0;
    if (ev.kind == OpKind::kMalloc) {
      live[ev.var] = ev.size;
      delta = ev.size;
    } else {
      auto it = live.find(ev.var);
      size = it == live.end() ? 0 : it->second;
      if (ev.kind == OpKind::kFree) {
        delta = -size;
        if (it != live.end()) live.erase(it);
      }
    }
    fp[i] = {ev.kind, size};
    net[i + 1] = net[i] + delta;
  }
  // Reversed, the condition "last 2p events repeat" becomes a prefix match
  // at offset p.
  std::reverse(fp.begin(), fp.end());
  const std::vector<int64_t> z = z_function(fp);
  for (int64_t p = 1; 2 * p <= n; ++p) {
    if (z[p] >= p && net[n] - net[n - p] == 0) return {p, n - p, n};
  }
  throw NotFound("no repeating iteration found in " + std::to_string(n) +
                 " events");
}

IterationProfile extract_lifetimes(const Trace& trace,
                                   const IterationWindow& window) {
  const int64_t p = window.period;
  const int64_t start = window.start;
  if (p <= 0 || start < 0 || window.end != start + p ||
      window.end > static_cast<int64_t>(trace.events.size())) {
    throw InvalidSpec("iteration window does not fit the trace");
  }
  const auto& ev = trace.events;

  std::vector<PendingVar> vars;
  std::unordered_map<std::string, int> current;
  {
    std::unordered_map<std::string, std::pair<int64_t, int64_t>> live;
    for (int64_t i = 0; i < start; ++i) {
      if (ev[i].kind == OpKind::kMalloc) {
        live[ev[i].var] = {ev[i].size, i};
      } else if (ev[i].kind == OpKind::kFree) {
        live.erase(ev[i].var);
      }
    }
    std::vector<std::pair<int64_t, std::string>> order;
    for (const auto& [name, info] : live) order.emplace_back(info.second, name);
    std::sort(order.begin(), order.end());
    for (const auto& [malloc_abs, name] : order) {
      PendingVar pv;
      pv.lt.var = name;
      pv.lt.size = live[name].first;
      pv.malloc_abs = malloc_abs;
      pv.pre_existing = true;
      current[name] = static_cast<int>(vars.size());
      vars.push_back(std::move(pv));
    }
  }

  const double t0 = static_cast<double>(ev[start].t_us);
  double last_dur = 0;
  if (start >= 1) {
    last_dur = static_cast<double>(ev[start].t_us - ev[start - 1].t_us);
  } else if (p >= 2) {
    last_dur = static_cast<double>(ev[window.end - 1].t_us -
                                   ev[window.end - 2].t_us);
  }

  IterationProfile prof;
  prof.period = p;
  prof.window = window;
  prof.ops.resize(p);
  for (int64_t i = start; i < window.end; ++i) {
    const TraceEvent& e = ev[i];
    const int64_t rel = i - start;
    ProfileOp& op = prof.ops[rel];
    op.kind = e.kind;
    op.t_us = static_cast<double>(e.t_us) - t0;
    op.dur_us = i + 1 < window.end ? static_cast<double>(ev[i + 1].t_us - e.t_us)
                                   : last_dur;
    if (e.kind == OpKind::kMalloc) {
      PendingVar pv;
      pv.lt.var = e.var;
      pv.lt.size = e.size;
      pv.lt.alloc_index = rel;
      pv.malloc_abs = i;
      current[e.var] = static_cast<int>(vars.size());
      op.var_ref = static_cast<int>(vars.size());
      vars.push_back(std::move(pv));
    } else {
      auto it = current.find(e.var);
      if (it == current.end()) {
        throw InvariantViolation(i, "operation on unallocated variable '" +
                                        e.var + "'");
      }
      op.var_ref = it->second;
      PendingVar& pv = vars[it->second];
      if (e.kind == OpKind::kFree) {
        pv.lt.free_index = rel;
        current.erase(it);
      } else {
        pv.lt.accesses.push_back({rel, op.t_us, e.kind});
      }
    }
    op.size = vars[op.var_ref].lt.size;
  }
  prof.period_duration_us = prof.ops.back().t_us + prof.ops.back().dur_us;

  // A variable still live at the window end continues into the next
  // iteration. Its previous-iteration counterpart (same position one period
  // earlier) was freed inside the window; fold the two into one wrapping
  // lifetime.
  std::unordered_map<int64_t, int> pre_by_malloc;
  for (int i = 0; i < static_cast<int>(vars.size()); ++i) {
    if (vars[i].pre_existing) pre_by_malloc[vars[i].malloc_abs] = i;
  }
  std::vector<int> remap(vars.size());
  for (int i = 0; i < static_cast<int>(vars.size()); ++i) remap[i] = i;
  for (int i = 0; i < static_cast<int>(vars.size()); ++i) {
    PendingVar& pv = vars[i];
    if (pv.pre_existing) {
      if (!pv.lt.free_index) pv.lt.persistent = true;
      continue;
    }
    if (pv.lt.free_index) continue;
    auto it = pre_by_malloc.find(pv.malloc_abs - p);
    if (it != pre_by_malloc.end()) {
      PendingVar& prev = vars[it->second];
      if (!prev.merged && prev.lt.free_index &&
          *prev.lt.free_index <= *pv.lt.alloc_index &&
          prev.lt.size == pv.lt.size) {
        pv.lt.free_index = prev.lt.free_index;
        pv.lt.accesses.insert(pv.lt.accesses.end(), prev.lt.accesses.begin(),
                              prev.lt.accesses.end());
        prev.merged = true;
        remap[it->second] = i;
        continue;
      }
    }
    pv.lt.persistent = true;
  }

  std::vector<int> final_id(vars.size(), -1);
  std::unordered_map<std::string, int> name_count;
  for (int i = 0; i < static_cast<int>(vars.size()); ++i) {
    if (vars[i].merged) continue;
    final_id[i] = static_cast<int>(prof.variables.size());
    VariableLifetime lt = std::move(vars[i].lt);
    int seen = name_count[lt.var]++;
    if (seen > 0) lt.var += "#" + std::to_string(seen + 1);
    prof.variables.push_back(std::move(lt));
  }
  for (ProfileOp& op : prof.ops) op.var_ref = final_id[remap[op.var_ref]];

  prof.load = compute_load_profile(prof);
  return prof;
}

LoadProfile compute_load_profile(const IterationProfile& profile) {
  const int64_t p = profile.period;
  std::vector<int64_t> diff(p + 1, 0);
  for (const VariableLifetime& v : profile.variables) {
    for (const Arc& a : lifetime_arcs(v, p)) {
      diff[a.begin] += v.size;
      diff[a.end] -= v.size;
    }
  }
  LoadProfile load;
  load.samples.reserve(p);
  int64_t bytes = 0;
  for (int64_t i = 0; i < p; ++i) {
    bytes += diff[i];
    const double t = i < static_cast<int64_t>(profile.ops.size())
                         ? profile.ops[i].t_us
                         : 0.0;
    load.samples.push_back({i, t, bytes});
  }
  load.end_t_us = profile.period_duration_us;
  load.refresh_peak();
  return load;
}

IterationProfile analyze_trace(const Trace& trace) {
  return extract_lifetimes(trace, detect_iteration(trace));
}

int64_t op_index_at(const IterationProfile& profile, double t_us) {
  const auto& ops = profile.ops;
  if (ops.empty()) return 0;
  auto it = std::upper_bound(
      ops.begin(), ops.end(), t_us,
      [](double t, const ProfileOp& op) { return t < op.t_us; });
  if (it == ops.begin()) return 0;
  return static_cast<int64_t>(it - ops.begin()) - 1;
}

}  // namespace memplan
