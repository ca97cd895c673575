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

// Exact offline DSA by exhaustive search over "gravity-compacted" placements.
//
// Take any optimal placement and repeatedly lower every block until it rests
// either on address 0 or on the top of a conflicting block. Lowering never
// raises the footprint and never creates an overlap, so some optimum has
// every block at 0 or at off(j) + size(j) for a neighbour j with a smaller
// offset. Enumerating blocks in non-decreasing offset order (ties broken by
// vertex id) therefore reaches that optimum while only trying offsets from
// {0} U {tops of blocks placed so far}.

#include <algorithm>
#include <vector>

#include "memplan/error.h"
#include "memplan/smartpool.h"

namespace memplan {
namespace {

class Search {
 public:
  explicit Search(const ConflictGraph& g)
      : g_(g), n_(static_cast<int>(g.size())), offset_(n_, -1) {
    // Stacking everything is always feasible, so the search finds <= sum.
    best_ = 1;
    for (const auto& v : g.vertices) best_ += v.size;
  }

  int64_t run() {
    dfs(0, 0, -1, 0);
    return best_;
  }

 private:
  bool fits(int v, int64_t off) const {
    const int64_t end = off + g_.vertices[v].size;
    for (int u : g_.adjacency[v]) {
      if (offset_[u] < 0) continue;
      const int64_t u0 = offset_[u];
      const int64_t u1 = u0 + g_.vertices[u].size;
      if (off < u1 && u0 < end) return false;
    }
    return true;
  }

  void dfs(int placed, int64_t last_off, int last_var, int64_t top) {
    if (top >= best_) return;
    if (placed == n_) {
      best_ = top;
      return;
    }
    std::vector<int64_t> cand{0};
    for (int u = 0; u < n_; ++u) {
      if (offset_[u] >= 0) cand.push_back(offset_[u] + g_.vertices[u].size);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int v = 0; v < n_; ++v) {
      if (offset_[v] >= 0) continue;
      for (int64_t off : cand) {
        if (off < last_off) continue;
        if (off == last_off && v < last_var) continue;
        const int64_t new_top = std::max(top, off + g_.vertices[v].size);
        if (new_top >= best_) break;  // offsets only grow from here
        if (!fits(v, off)) continue;
        offset_[v] = off;
        dfs(placed + 1, off, v, new_top);
        offset_[v] = -1;
      }
    }
  }

  const ConflictGraph& g_;
  int n_;
  std::vector<int64_t> offset_;
  int64_t best_;
};

}  // namespace

int64_t brute_force_optimal_footprint(const ConflictGraph& graph,
                                      int max_vars) {
  if (static_cast<int>(graph.size()) > max_vars) {
    throw TooLarge("brute force limited to " + std::to_string(max_vars) +
                   " variables, got " + std::to_string(graph.size()));
  }
  if (graph.size() == 0) return 0;
  return Search(graph).run();
}

}  // namespace memplan
