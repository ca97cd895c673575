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

// Python module memplan._core. Structured results cross the boundary as JSON
// text and are decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <string>

#include "memplan/autoswap.h"
#include "memplan/error.h"
#include "memplan/iteration.h"
#include "memplan/pipeline.h"
#include "memplan/report.h"
#include "memplan/smartpool.h"
#include "memplan/trace.h"

namespace py = pybind11;

namespace {

memplan::Trace read_trace_file(const std::string& path) {
  const auto format = memplan::trace_format_for_path(path);
  if (!format) throw memplan::InvalidSpec("unknown trace extension: " + path);
  std::ifstream in(path);
  if (!in) throw memplan::NotFound("cannot open trace '" + path + "'");
  return memplan::parse_trace(in, *format);
}

memplan::FitPolicy policy_from(const std::string& name) {
  const auto p = memplan::parse_fit_policy(name);
  if (!p) throw memplan::InvalidSpec("unknown policy '" + name + "'");
  return *p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Static memory pool planning and swap scheduling for iterative traces.";

  auto& base = py::register_exception<memplan::Error>(m, "MemplanError");
  py::register_exception<memplan::LimitUnreachable>(m, "LimitUnreachable", base.ptr());
  py::register_exception<memplan::Deadlock>(m, "Deadlock", base.ptr());

  py::class_<memplan::Trace>(m, "Trace")
      .def_property_readonly("num_events",
                             [](const memplan::Trace& t) { return t.events.size(); })
      .def_readonly("meta", &memplan::Trace::meta)
      .def("to_text", [](const memplan::Trace& t, const std::string& fmt) {
        return memplan::serialize_trace_text(
            t, fmt == "csv" ? memplan::TraceFormat::kCsv : memplan::TraceFormat::kJsonl);
      }, py::arg("format") = "jsonl");

  py::class_<memplan::IterationProfile>(m, "Profile")
      .def_readonly("period", &memplan::IterationProfile::period)
      .def_readonly("period_duration_us", &memplan::IterationProfile::period_duration_us)
      .def_property_readonly("peak_bytes",
                             [](const memplan::IterationProfile& p) { return p.load.peak_bytes; })
      .def_property_readonly("num_variables",
                             [](const memplan::IterationProfile& p) { return p.variables.size(); })
      .def("to_json", [](const memplan::IterationProfile& p) {
        return memplan::to_json(p).dump();
      });

  m.def("load_trace", &read_trace_file, py::arg("path"),
        "Parse a .jsonl or .csv trace file.");
  m.def("parse_trace", [](const std::string& text, const std::string& fmt) {
    return memplan::parse_trace_text(
        text, fmt == "csv" ? memplan::TraceFormat::kCsv : memplan::TraceFormat::kJsonl);
  }, py::arg("text"), py::arg("format") = "jsonl");

  m.def("generate_vgg",
        [](int depth, int batch, int iterations, bool warmup, uint64_t seed) {
          memplan::WorkloadSpec spec = memplan::vgg_like_spec(depth, batch);
          spec.iterations = iterations;
          spec.perturb_first_iteration = warmup;
          spec.seed = seed;
          return memplan::generate_synthetic_trace(spec);
        },
        py::arg("depth") = 16, py::arg("batch") = 16, py::arg("iterations") = 3,
        py::arg("warmup") = false, py::arg("seed") = 0);

  m.def("analyze", &memplan::analyze_trace, py::arg("trace"),
        "Detect the steady-state iteration and extract lifetimes.");

  m.def("plan_pool_json",
        [](const memplan::IterationProfile& p, const std::string& policy) {
          const memplan::ConflictGraph g = memplan::build_conflict_graph(p);
          return memplan::to_json(memplan::plan_pool(g, policy_from(policy))).dump();
        },
        py::arg("profile"), py::arg("policy") = "best_fit");

  m.def("swap_json",
        [](const memplan::IterationProfile& p, int64_t limit, const std::string& score,
           double bandwidth, double latency, int budget, uint64_t seed) {
          memplan::SwapConfig cfg;
          const auto kind = memplan::parse_score_kind(score);
          if (!kind) throw memplan::InvalidSpec("unknown score '" + score + "'");
          cfg.score = *kind;
          cfg.transfer = {bandwidth, latency};
          cfg.bo_budget = budget;
          cfg.seed = seed;
          const memplan::SwapOutcome o = memplan::run_swap(p, limit, cfg);
          nlohmann::json j = memplan::to_json(o.simulation.result);
          j["selection"] = memplan::selection_json(limit, o.selected, o.selection_peak);
          j["load_min"] = o.load_min;
          j["combined_footprint"] = o.combined_plan.footprint_bytes;
          return j.dump();
        },
        py::arg("profile"), py::arg("limit"), py::arg("score") = "bo",
        py::arg("bandwidth") = 12e9, py::arg("latency") = 10.0, py::arg("budget") = 40,
        py::arg("seed") = 0);
}
