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

#ifndef MEMPLAN_SMARTPOOL_H_
#define MEMPLAN_SMARTPOOL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memplan/iteration.h"

namespace memplan {

// Weighted conflict graph over variables: vertex weight is the size, an edge
// joins two variables whose lifetimes overlap.
struct ConflictGraph {
  struct Vertex {
    std::string var;
    int64_t size = 0;
    bool persistent = false;
    // Allocation index used for tie-breaking; -1 when allocated before the
    // window.
    int64_t alloc_index = -1;
  };

  std::vector<Vertex> vertices;
  std::vector<std::vector<int>> adjacency;  // sorted neighbour lists
  // Largest total size live at one index. For interval lifetimes this is the
  // maximum-weight clique; it is a lower bound on any footprint in general.
  int64_t peak_load = 0;

  size_t size() const { return vertices.size(); }
  bool adjacent(int a, int b) const;
  size_t edge_count() const;

  // Graph with explicit edges; peak_load becomes the exact maximum-weight
  // clique (exponential, intended for small test graphs).
  static ConflictGraph from_edges(std::vector<int64_t> sizes,
                                  const std::vector<std::pair<int, int>>& edges);
};

ConflictGraph build_conflict_graph(const IterationProfile& profile);

enum class FitPolicy { kFirstFit, kBestFit };
std::string_view fit_policy_name(FitPolicy policy);
std::optional<FitPolicy> parse_fit_policy(std::string_view name);

struct PoolPlan {
  std::vector<std::string> vars;  // parallel to the graph vertices
  std::vector<int64_t> sizes;
  std::vector<int64_t> offsets;
  int64_t footprint_bytes = 0;
  int64_t peak_load_bytes = 0;
  double competitive_ratio = 1.0;
  FitPolicy policy = FitPolicy::kBestFit;

  std::optional<int64_t> offset_of(std::string_view var) const;
};

// Places variables in descending size order (persistent first, then earlier
// allocation, then name) into the hole chosen by `policy` among the address
// ranges left free by already placed neighbours; extends the pool when no
// hole fits.
PoolPlan plan_pool(const ConflictGraph& graph,
                   FitPolicy policy = FitPolicy::kBestFit);

// Returns a description of the first broken plan invariant, or nullopt.
std::optional<std::string> check_plan(const ConflictGraph& graph,
                                      const PoolPlan& plan);

// Exact minimum footprint by exhaustive search. Throws TooLarge above
// max_vars.
int64_t brute_force_optimal_footprint(const ConflictGraph& graph,
                                      int max_vars = 10);

// Immutable malloc-index -> offset table, binary searched.
class LookupTable {
 public:
  LookupTable() = default;
  explicit LookupTable(std::vector<std::pair<int64_t, int64_t>> entries);

  std::optional<int64_t> find(int64_t malloc_index) const;
  size_t size() const { return entries_.size(); }
  const std::vector<std::pair<int64_t, int64_t>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<int64_t, int64_t>> entries_;  // sorted by index
};

// Throws MissingVariable when a malloc in the window has no planned offset.
LookupTable make_lookup_table(const PoolPlan& plan,
                              const IterationProfile& profile);

}  // namespace memplan

#endif  // MEMPLAN_SMARTPOOL_H_
