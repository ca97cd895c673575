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

#include "memplan/report.h"

#include <sstream>

namespace memplan {

using nlohmann::json;

json to_json(const IterationProfile& profile) {
  json vars = json::array();
  for (const VariableLifetime& v : profile.variables) {
    json accesses = json::array();
    for (const Access& a : v.accesses) {
      accesses.push_back({{"index", a.index},
                          {"t_us", a.t_us},
                          {"kind", op_kind_name(a.kind)}});
    }
    vars.push_back({{"var", v.var},
                    {"size", v.size},
                    {"alloc_index", v.alloc_index ? json(*v.alloc_index) : json()},
                    {"free_index", v.free_index ? json(*v.free_index) : json()},
                    {"persistent", v.persistent},
                    {"from_swap_in", v.from_swap_in},
                    {"accesses", accesses}});
  }
  json samples = json::array();
  for (const LoadSample& s : profile.load.samples) {
    samples.push_back({s.index, s.t_us, s.bytes});
  }
  return {{"period", profile.period},
          {"window", {{"start", profile.window.start}, {"end", profile.window.end}}},
          {"period_duration_us", profile.period_duration_us},
          {"peak_load", profile.load.peak_bytes},
          {"peak_index", profile.load.peak_index},
          {"variables", vars},
          {"load", samples}};
}

json to_json(const PoolPlan& plan) {
  json offsets = json::array();
  for (size_t i = 0; i < plan.vars.size(); ++i) {
    offsets.push_back({{"var", plan.vars[i]},
                       {"offset", plan.offsets[i]},
                       {"size", plan.sizes[i]}});
  }
  return {{"footprint", plan.footprint_bytes},
          {"peak_load", plan.peak_load_bytes},
          {"alpha", plan.competitive_ratio},
          {"policy", fit_policy_name(plan.policy)},
          {"offsets", offsets}};
}

json to_json(const SimulationResult& r) {
  json delayed = json::array();
  for (const DelayedOp& d : r.delayed_ops) {
    delayed.push_back({{"index", d.index}, {"delay_us", d.delay_us}});
  }
  json transfers = json::array();
  for (const Transfer& t : r.transfers) {
    transfers.push_back({{"var", t.var},
                         {"direction", t.swap_in ? "in" : "out"},
                         {"start_us", t.start_us},
                         {"end_us", t.end_us}});
  }
  return {{"limit", r.limit_bytes},
          {"baseline_us", r.baseline_us},
          {"overhead_us", r.overhead_us},
          {"overhead_pct", r.overhead_pct},
          {"achieved_peak", r.achieved_peak_bytes},
          {"load_prime_peak", r.load_prime.peak_bytes},
          {"delayed_ops", delayed},
          {"transfers", transfers}};
}

json selection_json(int64_t limit_bytes, std::span<const SwapCandidate> selected,
                    int64_t achieved_peak) {
  json items = json::array();
  for (size_t i = 0; i < selected.size(); ++i) {
    const SwapCandidate& c = selected[i];
    items.push_back({{"var", c.var},
                     {"size", c.size},
                     {"order", i},
                     {"spans_iterations", c.spans_iterations},
                     {"scores",
                      {{"doa", c.scores.doa},
                       {"aoa", c.scores.aoa},
                       {"wdoa", c.scores.wdoa},
                       {"swdoa", c.scores.swdoa}}}});
  }
  return {{"limit", limit_bytes}, {"selected", items}, {"achieved_peak", achieved_peak}};
}

std::string load_csv(const LoadProfile& load) {
  std::ostringstream os;
  os.precision(17);
  os << "index,t_us,bytes\n";
  for (const LoadSample& s : load.samples) {
    os << s.index << ',' << s.t_us << ',' << s.bytes << '\n';
  }
  return os.str();
}

std::string schedule_csv(std::span<const SwapEvent> schedule) {
  std::ostringstream os;
  os.precision(17);
  os << "var,t_so,t_eo,t_si,t_ei\n";
  for (const SwapEvent& e : schedule) {
    os << e.var << ',' << e.t_start_out << ',' << e.t_end_out << ','
       << e.t_start_in << ',' << e.t_end_in << '\n';
  }
  return os.str();
}

}  // namespace memplan
