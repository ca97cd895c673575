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

#include "memplan/smartpool.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "memplan/error.h"

namespace memplan {
namespace {

struct Range {
  int64_t begin;
  int64_t end;
};

// Exact maximum-weight clique by branch and bound; small graphs only.
int64_t max_weight_clique(const ConflictGraph& g) {
  const int n = static_cast<int>(g.size());
  int64_t best = 0;
  std::vector<int> chosen;
  std::function<void(int, int64_t)> grow = [&](int next, int64_t weight) {
    best = std::max(best, weight);
    for (int v = next; v < n; ++v) {
      bool ok = std::all_of(chosen.begin(), chosen.end(),
                            [&](int u) { return g.adjacent(u, v); });
      if (!ok) continue;
      chosen.push_back(v);
      grow(v + 1, weight + g.vertices[v].size);
      chosen.pop_back();
    }
  };
  grow(0, 0);
  return best;
}

}  // namespace

bool ConflictGraph::adjacent(int a, int b) const {
  const auto& adj = adjacency[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

size_t ConflictGraph::edge_count() const {
  size_t twice = 0;
  for (const auto& adj : adjacency) twice += adj.size();
  return twice / 2;
}

ConflictGraph ConflictGraph::from_edges(
    std::vector<int64_t> sizes, const std::vector<std::pair<int, int>>& edges) {
  ConflictGraph g;
  g.vertices.resize(sizes.size());
  g.adjacency.resize(sizes.size());
  for (size_t i = 0; i < sizes.size(); ++i) {
    g.vertices[i].var = "v" + std::to_string(i);
    g.vertices[i].size = sizes[i];
    g.vertices[i].alloc_index = static_cast<int64_t>(i);
  }
  for (auto [a, b] : edges) {
    if (a == b) continue;
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  g.peak_load = max_weight_clique(g);
  return g;
}

ConflictGraph build_conflict_graph(const IterationProfile& profile) {
  const int n = static_cast<int>(profile.variables.size());
  const int64_t period = profile.period;
  ConflictGraph g;
  g.vertices.resize(n);
  g.adjacency.resize(n);

  struct Tagged {
    int64_t begin;
    int64_t end;
    int var;
  };
  std::vector<Tagged> arcs;
  std::vector<int> persistent;
  std::vector<int64_t> diff(period + 1, 0);
  for (int i = 0; i < n; ++i) {
    const VariableLifetime& v = profile.variables[i];
    g.vertices[i] = {v.var, v.size, v.persistent,
                     v.alloc_index ? *v.alloc_index : -1};
    if (v.persistent) persistent.push_back(i);
    for (const Arc& a : lifetime_arcs(v, period)) {
      if (a.end <= a.begin) continue;
      diff[a.begin] += v.size;
      diff[a.end] -= v.size;
      if (!v.persistent) arcs.push_back({a.begin, a.end, i});
    }
  }
  int64_t load = 0;
  for (int64_t i = 0; i < period; ++i) {
    load += diff[i];
    g.peak_load = std::max(g.peak_load, load);
  }

  // Sweep: every arc still open when another begins overlaps it.
  std::sort(arcs.begin(), arcs.end(), [](const Tagged& x, const Tagged& y) {
    return x.begin != y.begin ? x.begin < y.begin : x.var < y.var;
  });
  std::vector<Tagged> open;
  for (const Tagged& a : arcs) {
    std::erase_if(open, [&](const Tagged& o) { return o.end <= a.begin; });
    for (const Tagged& o : open) {
      if (o.var == a.var) continue;
      g.adjacency[a.var].push_back(o.var);
      g.adjacency[o.var].push_back(a.var);
    }
    open.push_back(a);
  }
  for (int p : persistent) {
    for (int i = 0; i < n; ++i) {
      if (i == p) continue;
      if (lifetime_arcs(profile.variables[i], period).empty()) continue;
      g.adjacency[p].push_back(i);
      g.adjacency[i].push_back(p);
    }
  }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

std::string_view fit_policy_name(FitPolicy policy) {
  return policy == FitPolicy::kFirstFit ? "first_fit" : "best_fit";
}

std::optional<FitPolicy> parse_fit_policy(std::string_view name) {
  if (name == "first_fit" || name == "first-fit") return FitPolicy::kFirstFit;
  if (name == "best_fit" || name == "best-fit") return FitPolicy::kBestFit;
  return std::nullopt;
}

std::optional<int64_t> PoolPlan::offset_of(std::string_view var) const {
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] == var) return offsets[i];
  }
  return std::nullopt;
}

PoolPlan plan_pool(const ConflictGraph& graph, FitPolicy policy) {
  const int n = static_cast<int>(graph.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& a = graph.vertices[x];
    const auto& b = graph.vertices[y];
    if (a.size != b.size) return a.size > b.size;
    if (a.persistent != b.persistent) return a.persistent;
    if (a.alloc_index != b.alloc_index) return a.alloc_index < b.alloc_index;
    return a.var < b.var;
  });

  PoolPlan plan;
  plan.policy = policy;
  plan.vars.resize(n);
  plan.sizes.resize(n);
  plan.offsets.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    plan.vars[i] = graph.vertices[i].var;
    plan.sizes[i] = graph.vertices[i].size;
  }

  std::vector<Range> taken;
  for (int v : order) {
    const int64_t size = graph.vertices[v].size;
    taken.clear();
    for (int u : graph.adjacency[v]) {
      if (plan.offsets[u] >= 0) {
        taken.push_back({plan.offsets[u], plan.offsets[u] + plan.sizes[u]});
      }
    }
    std::sort(taken.begin(), taken.end(), [](const Range& a, const Range& b) {
      return a.begin < b.begin;
    });

    int64_t chosen = -1;
    int64_t chosen_len = 0;
    auto consider = [&](int64_t begin, int64_t end) {
      const int64_t len = end - begin;
      if (len < size) return;
      if (chosen < 0) {
        chosen = begin;
        chosen_len = len;
      } else if (policy == FitPolicy::kBestFit && len < chosen_len) {
        chosen = begin;
        chosen_len = len;
      }
    };
    int64_t cursor = 0;
    for (const Range& r : taken) {
      if (r.begin > cursor) consider(cursor, r.begin);
      cursor = std::max(cursor, r.end);
    }
    if (plan.footprint_bytes > cursor) consider(cursor, plan.footprint_bytes);
    if (chosen < 0) chosen = cursor;  // extend the pool at the top

    plan.offsets[v] = chosen;
    plan.footprint_bytes = std::max(plan.footprint_bytes, chosen + size);
  }

  plan.peak_load_bytes = graph.peak_load;
  plan.competitive_ratio =
      graph.peak_load > 0 ? static_cast<double>(plan.footprint_bytes) /
                                static_cast<double>(graph.peak_load)
                          : 1.0;
  return plan;
}

std::optional<std::string> check_plan(const ConflictGraph& graph,
                                      const PoolPlan& plan) {
  const int n = static_cast<int>(graph.size());
  if (static_cast<int>(plan.offsets.size()) != n) {
    return "plan covers " + std::to_string(plan.offsets.size()) + " of " +
           std::to_string(n) + " variables";
  }
  int64_t top = 0;
  for (int v = 0; v < n; ++v) {
    if (plan.offsets[v] < 0) return "negative offset for " + plan.vars[v];
    top = std::max(top, plan.offsets[v] + plan.sizes[v]);
    for (int u : graph.adjacency[v]) {
      if (u <= v) continue;
      const int64_t a0 = plan.offsets[v], a1 = a0 + plan.sizes[v];
      const int64_t b0 = plan.offsets[u], b1 = b0 + plan.sizes[u];
      if (a0 < b1 && b0 < a1) {
        return "address overlap between " + plan.vars[v] + " and " +
               plan.vars[u];
      }
    }
  }
  if (top != plan.footprint_bytes) return "footprint is not the top address";
  if (plan.peak_load_bytes > plan.footprint_bytes) {
    return "footprint below peak load";
  }
  return std::nullopt;
}

LookupTable::LookupTable(std::vector<std::pair<int64_t, int64_t>> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
}

std::optional<int64_t> LookupTable::find(int64_t malloc_index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), malloc_index,
      [](const std::pair<int64_t, int64_t>& e, int64_t k) { return e.first < k; });
  if (it == entries_.end() || it->first != malloc_index) return std::nullopt;
  return it->second;
}

LookupTable make_lookup_table(const PoolPlan& plan,
                              const IterationProfile& profile) {
  std::unordered_map<std::string_view, int64_t> by_var;
  for (size_t i = 0; i < plan.vars.size(); ++i) {
    by_var.emplace(plan.vars[i], plan.offsets[i]);
  }
  std::vector<std::pair<int64_t, int64_t>> entries;
  for (size_t i = 0; i < profile.ops.size(); ++i) {
    const ProfileOp& op = profile.ops[i];
    if (op.kind != OpKind::kMalloc) continue;
    const std::string& var = profile.variables.at(op.var_ref).var;
    auto it = by_var.find(var);
    if (it == by_var.end()) {
      throw MissingVariable(static_cast<int64_t>(i), "variable '" + var + "'");
    }
    entries.emplace_back(static_cast<int64_t>(i), it->second);
  }
  return LookupTable(std::move(entries));
}

}  // namespace memplan
