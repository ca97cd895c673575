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

#include "cli.h"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "memplan/error.h"
#include "memplan/iteration.h"
#include "memplan/pipeline.h"
#include "memplan/report.h"
#include "memplan/smartpool.h"
#include "memplan/trace.h"

namespace memplan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int64_t parse_bytes(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
  if (s.empty()) throw InvalidSpec("empty byte count");
  double scale = 1;
  char unit = static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
  if (unit == 'B') {
    s.pop_back();
    unit = s.empty() ? '\0' : static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
    if (unit == 'I') {  // KiB, MiB, GiB
      s.pop_back();
      unit = s.empty() ? '\0' : static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
    }
  }
  switch (unit) {
    case 'K': scale = 1024.0; break;
    case 'M': scale = 1024.0 * 1024; break;
    case 'G': scale = 1024.0 * 1024 * 1024; break;
    default: break;
  }
  if (scale != 1) s.pop_back();
  size_t used = 0;
  double value = 0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidSpec("bad byte count '" + std::string(text) + "'");
  }
  if (used != s.size() || !(value >= 0)) {
    throw InvalidSpec("bad byte count '" + std::string(text) + "'");
  }
  return static_cast<int64_t>(std::llround(value * scale));
}

std::vector<int64_t> parse_limit_list(std::string_view text) {
  std::vector<int64_t> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = text.find(',', pos);
    const size_t end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_bytes(text.substr(pos, end - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i] >= out[i - 1]) {
      throw InvalidSpec("limit list must be strictly decreasing");
    }
  }
  return out;
}

namespace {

struct RunConfig {
  std::string trace;
  std::string out_dir = ".";
  std::string policy = "best-fit";
  int64_t threshold_bytes = int64_t{1} << 20;
  std::vector<int64_t> limit_bytes;
  int sweep = 0;
  double bandwidth_bytes_per_s = 12e9;
  double latency_us = 10.0;
  std::string score = "bo";
  int bo_budget = 40;
  uint64_t seed = 0;

  // gen
  std::string out;
  std::string preset = "vgg16";
  int batch = 16;
  std::string layers;
  int iterations = 3;
  bool warmup = false;
  std::optional<double> workspace;
  double jitter = 0.0;
  double bytes_per_us = DurationModel{}.bytes_per_us;
};

// Values given on the command line; unset ones fall back to the config file.
struct Flags {
  std::optional<std::string> config, trace, out_dir, policy, threshold, limit,
      score, out, preset, layers;
  std::optional<int> sweep, bo_budget, batch, iterations;
  std::optional<double> bandwidth, latency, workspace, jitter, bytes_per_us;
  std::optional<uint64_t> seed;
  bool warmup = false;
};

template <typename T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key) && !j[key].is_null()) into = j[key].get<T>();
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidSpec("config '" + path + "': " + e.what());
  }
  take(j, "trace", cfg.trace);
  take(j, "out_dir", cfg.out_dir);
  take(j, "policy", cfg.policy);
  if (j.contains("threshold_bytes")) {
    cfg.threshold_bytes = j["threshold_bytes"].is_string()
                              ? parse_bytes(j["threshold_bytes"].get<std::string>())
                              : j["threshold_bytes"].get<int64_t>();
  }
  if (j.contains("limit_bytes")) {
    const json& l = j["limit_bytes"];
    if (l.is_array()) {
      std::string joined;
      for (const json& x : l) {
        if (!joined.empty()) joined += ',';
        joined += x.is_string() ? x.get<std::string>() : std::to_string(x.get<int64_t>());
      }
      cfg.limit_bytes = parse_limit_list(joined);
    } else if (l.is_string()) {
      cfg.limit_bytes = parse_limit_list(l.get<std::string>());
    } else {
      cfg.limit_bytes = {l.get<int64_t>()};
    }
  }
  take(j, "sweep", cfg.sweep);
  take(j, "bandwidth_bytes_per_s", cfg.bandwidth_bytes_per_s);
  take(j, "latency_us", cfg.latency_us);
  take(j, "score", cfg.score);
  take(j, "bo_budget", cfg.bo_budget);
  take(j, "seed", cfg.seed);
  take(j, "out", cfg.out);
  take(j, "preset", cfg.preset);
  take(j, "batch", cfg.batch);
  take(j, "layers", cfg.layers);
  take(j, "iterations", cfg.iterations);
  take(j, "warmup", cfg.warmup);
  if (j.contains("workspace")) cfg.workspace = j["workspace"].get<double>();
  take(j, "jitter", cfg.jitter);
  take(j, "bytes_per_us", cfg.bytes_per_us);
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) apply_config_file(*f.config, cfg);
  if (f.trace) cfg.trace = *f.trace;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.policy) cfg.policy = *f.policy;
  if (f.threshold) cfg.threshold_bytes = parse_bytes(*f.threshold);
  if (f.limit) cfg.limit_bytes = parse_limit_list(*f.limit);
  if (f.sweep) cfg.sweep = *f.sweep;
  if (f.bandwidth) cfg.bandwidth_bytes_per_s = *f.bandwidth;
  if (f.latency) cfg.latency_us = *f.latency;
  if (f.score) cfg.score = *f.score;
  if (f.bo_budget) cfg.bo_budget = *f.bo_budget;
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.preset) cfg.preset = *f.preset;
  if (f.batch) cfg.batch = *f.batch;
  if (f.layers) cfg.layers = *f.layers;
  if (f.iterations) cfg.iterations = *f.iterations;
  if (f.warmup) cfg.warmup = true;
  if (f.workspace) cfg.workspace = *f.workspace;
  if (f.jitter) cfg.jitter = *f.jitter;
  if (f.bytes_per_us) cfg.bytes_per_us = *f.bytes_per_us;
  if (const char* env = std::getenv("MEMPLAN_SEED"); env && *env) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidSpec("MEMPLAN_SEED must be an unsigned integer");
    }
  }
  if (!(cfg.bandwidth_bytes_per_s > 0)) throw InvalidSpec("bandwidth must be positive");
  if (cfg.latency_us < 0) throw InvalidSpec("latency must be non-negative");
  if (cfg.sweep < 0) throw InvalidSpec("sweep must be non-negative");
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << text;
}

Trace load_trace(const std::string& path) {
  if (path.empty()) throw InvalidSpec("--trace is required");
  const auto fmt = trace_format_for_path(path);
  if (!fmt) throw InvalidSpec("unknown trace extension: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open trace '" + path + "'");
  return parse_trace(in, *fmt);
}

FitPolicy policy_of(const RunConfig& cfg) {
  const auto p = parse_fit_policy(cfg.policy);
  if (!p) throw InvalidSpec("unknown policy '" + cfg.policy + "'");
  return *p;
}

SwapConfig swap_config_of(const RunConfig& cfg) {
  SwapConfig sc;
  sc.threshold_bytes = cfg.threshold_bytes;
  sc.transfer.bandwidth_bytes_per_s = cfg.bandwidth_bytes_per_s;
  sc.transfer.latency_us = cfg.latency_us;
  const auto kind = parse_score_kind(cfg.score);
  if (!kind) throw InvalidSpec("unknown score '" + cfg.score + "'");
  sc.score = *kind;
  sc.bo_budget = cfg.bo_budget;
  sc.seed = cfg.seed;
  sc.policy = policy_of(cfg);
  return sc;
}

std::string fmt_mb(int64_t bytes) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << static_cast<double>(bytes) / (1024.0 * 1024.0) << " MiB";
  return os.str();
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw InvalidSpec("--out is required");
  WorkloadSpec spec;
  if (!cfg.layers.empty()) {
    spec.name = "custom";
    std::string_view rest = cfg.layers;
    while (!rest.empty()) {
      const size_t comma = rest.find(',');
      spec.layer_bytes.push_back(parse_bytes(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  } else {
    if (cfg.preset.rfind("vgg", 0) != 0) {
      throw InvalidSpec("unknown preset '" + cfg.preset + "'");
    }
    spec = vgg_like_spec(std::stoi(cfg.preset.substr(3)), cfg.batch);
  }
  spec.iterations = cfg.iterations;
  spec.perturb_first_iteration = cfg.warmup;
  if (cfg.workspace) spec.workspace_fraction = *cfg.workspace;
  spec.durations.jitter = cfg.jitter;
  spec.durations.bytes_per_us = cfg.bytes_per_us;
  spec.seed = cfg.seed;
  const Trace trace = generate_synthetic_trace(spec);
  const auto fmt = trace_format_for_path(cfg.out);
  if (!fmt) throw InvalidSpec("unknown trace extension: " + cfg.out);
  if (fs::path(cfg.out).has_parent_path()) {
    fs::create_directories(fs::path(cfg.out).parent_path());
  }
  write_file(cfg.out, serialize_trace_text(trace, *fmt));
  out << "wrote " << trace.events.size() << " events to " << cfg.out
      << " (ops_per_iteration=" << trace.meta.at("ops_per_iteration") << ")\n";
  return 0;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  const IterationProfile prof = analyze_trace(load_trace(cfg.trace));
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_file(dir / "profile.json", to_json(prof).dump(2) + "\n");
  write_file(dir / "load.csv", load_csv(prof.load));
  out << "period " << prof.period << " ops, window [" << prof.window.start
      << ", " << prof.window.end << "), duration " << prof.period_duration_us
      << " us\n"
      << "peak load " << fmt_mb(prof.load.peak_bytes) << " at op "
      << prof.load.peak_index << ", " << prof.variables.size()
      << " variables\n";
  return 0;
}

int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const IterationProfile prof = analyze_trace(load_trace(cfg.trace));
  const ConflictGraph graph = build_conflict_graph(prof);
  const PoolPlan plan = plan_pool(graph, policy_of(cfg));
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_file(dir / "plan.json", to_json(plan).dump(2) + "\n");
  out << "footprint " << plan.footprint_bytes << " bytes, peak "
      << plan.peak_load_bytes << " bytes, alpha " << plan.competitive_ratio
      << " (" << fit_policy_name(plan.policy) << ")\n";
  if (auto bad = check_plan(graph, plan)) {
    err << "plan invariant violated: " << *bad << "\n";
    return 1;
  }
  make_lookup_table(plan, prof);
  return 0;
}

std::optional<std::string> check_outcome(const SwapOutcome& o) {
  const SimulationResult& r = o.simulation.result;
  if (r.achieved_peak_bytes > o.limit_bytes) return "LOAD'' peak above limit";
  if (r.overhead_us < 0) return "negative overhead";
  if (o.selected.empty() && r.overhead_us != 0) {
    return "overhead without any swapped variable";
  }
  double last_out = -1e300, last_in = -1e300;
  for (const Transfer& t : r.transfers) {
    double& last = t.swap_in ? last_in : last_out;
    if (t.start_us < last) return "overlapping transfers on one channel";
    last = t.end_us;
    if (t.serves_index >= 0 && t.end_us > r.op_start_us[t.serves_index]) {
      return "variable accessed before its swap-in finished";
    }
  }
  if (auto bad = check_plan(build_conflict_graph(o.combined), o.combined_plan)) {
    return "combined plan: " + *bad;
  }
  return std::nullopt;
}

int cmd_swap(const RunConfig& cfg, bool full, std::ostream& out,
             std::ostream& err) {
  const IterationProfile prof = analyze_trace(load_trace(cfg.trace));
  const SwapConfig sc = swap_config_of(cfg);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  std::vector<int64_t> limits = cfg.limit_bytes;
  const int64_t peak = prof.load.peak_bytes;
  const int64_t load_min =
      compute_load_min(prof, scored_candidates(prof, sc));
  if (limits.empty()) {
    if (cfg.sweep <= 0) throw InvalidSpec("--limit or --sweep is required");
    for (int k = 0; k < cfg.sweep; ++k) {
      const int64_t l = peak - (peak - load_min) * k / cfg.sweep;
      if (limits.empty() || l < limits.back()) limits.push_back(l);
    }
  }

  PoolPlan pool_only = plan_pool(build_conflict_graph(prof), sc.policy);
  if (full) write_file(dir / "plan.json", to_json(pool_only).dump(2) + "\n");
  out << "peak " << fmt_mb(peak) << ", load_min " << fmt_mb(load_min)
      << ", pool-only footprint " << fmt_mb(pool_only.footprint_bytes) << "\n";

  std::ostringstream csv;
  csv.precision(10);
  csv << "limit,achieved_peak,combined_footprint,overhead_pct,overhead_us,"
         "reduction_pct,selected,delayed_ops,load_min,status\n";
  int code = 0;
  for (int64_t limit : limits) {
    const std::string tag = std::to_string(limit);
    try {
      const SwapOutcome o = run_swap(prof, limit, sc);
      const SimulationResult& r = o.simulation.result;
      write_file(dir / ("selection_" + tag + ".json"),
                 selection_json(limit, o.selected, o.selection_peak).dump(2) + "\n");
      json sim = to_json(r);
      if (o.weights) {
        sim["weights"] = {o.weights->a, o.weights->b, o.weights->c, o.weights->d};
      }
      sim["load_min"] = o.load_min;
      sim["combined_footprint"] = o.combined_plan.footprint_bytes;
      write_file(dir / ("simulation_" + tag + ".json"), sim.dump(2) + "\n");
      write_file(dir / ("load_prime_" + tag + ".csv"), load_csv(r.load_prime));
      write_file(dir / ("load_double_prime_" + tag + ".csv"),
                 load_csv(r.load_double_prime));
      write_file(dir / ("schedule_" + tag + ".csv"),
                 schedule_csv(o.simulation.schedule));
      if (full) {
        write_file(dir / ("combined_plan_" + tag + ".json"),
                   to_json(o.combined_plan).dump(2) + "\n");
      }
      std::string status = "ok";
      if (auto bad = check_outcome(o)) {
        err << "limit " << limit << ": invariant violated: " << *bad << "\n";
        status = "invariant_violation";
        code = 1;
      }
      const double reduction =
          peak > 0 ? 100.0 * static_cast<double>(peak - r.achieved_peak_bytes) / peak
                   : 0.0;
      csv << limit << ',' << r.achieved_peak_bytes << ','
          << o.combined_plan.footprint_bytes << ',' << r.overhead_pct << ','
          << r.overhead_us << ',' << reduction << ',' << o.selected.size() << ','
          << r.delayed_ops.size() << ',' << o.load_min << ',' << status << '\n';
      out << "limit " << fmt_mb(limit) << ": peak " << fmt_mb(r.achieved_peak_bytes)
          << ", overhead " << r.overhead_pct << "%, " << o.selected.size()
          << " swapped, footprint " << fmt_mb(o.combined_plan.footprint_bytes)
          << "\n";
    } catch (const LimitUnreachable& e) {
      err << "limit " << limit << ": " << e.what() << "\n";
      csv << limit << ",,,,,,,," << load_min << ",limit_unreachable\n";
      code = 1;
    } catch (const Deadlock& e) {
      err << "limit " << limit << ": " << e.what() << "\n";
      csv << limit << ",,,,,,,," << load_min << ",deadlock\n";
      code = 1;
    }
  }
  write_file(dir / "sweep.csv", csv.str());
  return code;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--seed", f.seed, "RNG seed (MEMPLAN_SEED overrides)");
  app->add_option("--out-dir", f.out_dir, "Directory for reports");
}

void add_trace(CLI::App* app, Flags& f) {
  app->add_option("--trace", f.trace, "Trace file (.jsonl or .csv)");
}

void add_swap(CLI::App* app, Flags& f) {
  add_trace(app, f);
  app->add_option("--limit", f.limit, "Load limit(s), e.g. 512M,384M");
  app->add_option("--sweep", f.sweep, "Number of limits from peak towards load_min");
  app->add_option("--policy", f.policy, "best_fit or first_fit");
  app->add_option("--score", f.score, "doa, aoa, wdoa, swdoa or bo");
  app->add_option("--threshold", f.threshold, "Minimum candidate size");
  app->add_option("--bandwidth", f.bandwidth, "Transfer bandwidth, bytes/s");
  app->add_option("--latency", f.latency, "Transfer latency, us");
  app->add_option("--bo-budget", f.bo_budget, "Weight search evaluations");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"memplan: memory pool and swap planning from allocation traces"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic layered trace");
  add_common(gen, f);
  gen->add_option("--out", f.out, "Output trace path");
  gen->add_option("--preset", f.preset, "vgg11, vgg13, vgg16 or vgg19");
  gen->add_option("--batch", f.batch, "Batch size for presets");
  gen->add_option("--layers", f.layers, "Custom activation sizes, e.g. 4M,8M");
  gen->add_option("--iterations", f.iterations, "Iterations to emit");
  gen->add_flag("--warmup", f.warmup, "Perturb the first iteration");
  gen->add_option("--workspace", f.workspace, "Scratch buffer fraction");
  gen->add_option("--jitter", f.jitter, "Relative duration noise");
  gen->add_option("--bytes-per-us", f.bytes_per_us, "Compute rate of the duration model");

  CLI::App* analyze = app.add_subcommand("analyze", "Detect the iteration and write its profile");
  add_common(analyze, f);
  add_trace(analyze, f);

  CLI::App* plan = app.add_subcommand("plan", "Plan a static memory pool");
  add_common(plan, f);
  add_trace(plan, f);
  plan->add_option("--policy", f.policy, "best_fit or first_fit");

  CLI::App* swap = app.add_subcommand("swap", "Select, schedule and simulate swaps");
  add_common(swap, f);
  add_swap(swap, f);

  CLI::App* full = app.add_subcommand("full", "Swap, then plan the pool of the swapped profile");
  add_common(full, f);
  add_swap(full, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int rc = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return rc == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve(f);
    if (gen->parsed()) return cmd_gen(cfg, out);
    if (analyze->parsed()) return cmd_analyze(cfg, out);
    if (plan->parsed()) return cmd_plan(cfg, out, err);
    if (swap->parsed()) return cmd_swap(cfg, false, out, err);
    if (full->parsed()) return cmd_swap(cfg, true, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace memplan::cli
