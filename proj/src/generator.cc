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

#include <algorithm>
#include <cmath>
#include <random>

#include "memplan/error.h"
#include "memplan/trace.h"

namespace memplan {
namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class TraceEmitter {
 public:
  TraceEmitter(const DurationModel& model, std::mt19937_64* rng)
      : model_(model), rng_(rng) {}

  void emit(OpKind kind, const std::string& var, int64_t size,
            int64_t touched) {
    trace_.events.push_back(
        {static_cast<int64_t>(trace_.events.size()), t_us_, kind, var, size});
    double dur = model_.fixed_us +
                 static_cast<double>(touched) / model_.bytes_per_us;
    if (model_.jitter > 0) dur *= 1.0 + model_.jitter * (2 * unit_uniform(*rng_) - 1);
    t_us_ += std::max<int64_t>(1, std::llround(dur));
  }

  int64_t size() const { return static_cast<int64_t>(trace_.events.size()); }
  Trace& trace() { return trace_; }

 private:
  DurationModel model_;
  std::mt19937_64* rng_;
  Trace trace_;
  int64_t t_us_ = 0;
};

void check_spec(const WorkloadSpec& spec) {
  if (spec.layer_bytes.empty()) throw InvalidSpec("workload has zero layers");
  if (spec.iterations < 2) {
    throw InvalidSpec("workload needs at least 2 iterations");
  }
  for (int64_t b : spec.layer_bytes) {
    if (b <= 0) throw InvalidSpec("layer sizes must be positive");
  }
  if (!spec.weight_bytes.empty() &&
      spec.weight_bytes.size() != spec.layer_bytes.size()) {
    throw InvalidSpec("weight_bytes must be empty or match layer_bytes");
  }
  for (int64_t b : spec.weight_bytes) {
    if (b < 0) throw InvalidSpec("weight sizes must be non-negative");
  }
  if (!(spec.durations.bytes_per_us > 0) || spec.durations.fixed_us < 0) {
    throw InvalidSpec("duration model needs bytes_per_us > 0, fixed_us >= 0");
  }
  if (spec.durations.jitter < 0 || spec.durations.jitter >= 1) {
    throw InvalidSpec("jitter must lie in [0, 1)");
  }
  if (spec.workspace_fraction < 0) {
    throw InvalidSpec("workspace_fraction must be non-negative");
  }
}

}  // namespace

Trace generate_synthetic_trace(const WorkloadSpec& spec) {
  check_spec(spec);
  const size_t n = spec.layer_bytes.size();
  std::mt19937_64 rng(spec.seed);

  std::vector<int64_t> weights(n);
  for (size_t l = 0; l < n; ++l) {
    weights[l] = spec.weight_bytes.empty()
                     ? std::max<int64_t>(1, spec.layer_bytes[l] / 8)
                     : spec.weight_bytes[l];
  }
  std::vector<int64_t> scratch(n, 0);
  if (spec.workspace_fraction > 0) {
    for (size_t l = 0; l < n; ++l) {
      double f = spec.workspace_fraction * (0.5 + 0.5 * unit_uniform(rng));
      scratch[l] = std::max<int64_t>(
          1, std::llround(f * static_cast<double>(spec.layer_bytes[l])));
    }
  }
  // layer -> extra scratch sizes allocated during the warm-up forward pass
  std::vector<std::vector<int64_t>> warmup(n);
  if (spec.perturb_first_iteration) {
    int extra = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < extra; ++j) {
      size_t l = rng() % n;
      int64_t act = spec.layer_bytes[l];
      int64_t lo = std::max<int64_t>(1, act / 4);
      int64_t sz = lo + static_cast<int64_t>(unit_uniform(rng) *
                                             static_cast<double>(act - lo));
      warmup[l].push_back(std::max<int64_t>(1, sz));
    }
  }

  TraceEmitter out(spec.durations, &rng);
  auto wname = [](size_t l) { return "W" + std::to_string(l); };
  for (size_t l = 0; l < n; ++l) {
    if (weights[l] == 0) continue;
    out.emit(OpKind::kMalloc, wname(l), weights[l], 0);
    out.emit(OpKind::kWrite, wname(l), 0, weights[l]);
  }
  const int64_t setup_ops = out.size();

  int64_t warmup_ops = 0;
  int64_t steady_ops = 0;
  int tune_id = 0;
  for (int it = 0; it < spec.iterations; ++it) {
    const int64_t begin = out.size();
    const std::string pre = "it" + std::to_string(it) + "/";
    auto h = [&](size_t l) { return pre + "h" + std::to_string(l); };
    for (size_t l = 0; l < n; ++l) {
      if (it == 0) {
        for (int64_t sz : warmup[l]) {
          std::string v = pre + "tune" + std::to_string(tune_id++);
          out.emit(OpKind::kMalloc, v, sz, 0);
          out.emit(OpKind::kWrite, v, 0, sz);
          out.emit(OpKind::kFree, v, 0, 0);
        }
      }
      const int64_t act = spec.layer_bytes[l];
      const std::string ws = pre + "ws" + std::to_string(l);
      if (scratch[l] > 0) out.emit(OpKind::kMalloc, ws, scratch[l], 0);
      out.emit(OpKind::kMalloc, h(l), act, 0);
      if (l > 0) out.emit(OpKind::kRead, h(l - 1), 0, spec.layer_bytes[l - 1]);
      if (weights[l] > 0) out.emit(OpKind::kRead, wname(l), 0, weights[l]);
      if (scratch[l] > 0) out.emit(OpKind::kWrite, ws, 0, scratch[l]);
      out.emit(OpKind::kWrite, h(l), 0, act);
      if (scratch[l] > 0) out.emit(OpKind::kFree, ws, 0, 0);
    }
    for (size_t r = n; r-- > 0;) {
      const int64_t act = spec.layer_bytes[r];
      out.emit(OpKind::kRead, h(r), 0, act);
      if (weights[r] > 0) out.emit(OpKind::kRead, wname(r), 0, weights[r]);
      out.emit(OpKind::kFree, h(r), 0, 0);
      if (weights[r] > 0) {
        const std::string dw = pre + "dW" + std::to_string(r);
        out.emit(OpKind::kMalloc, dw, weights[r], 0);
        out.emit(OpKind::kWrite, dw, 0, weights[r]);
        out.emit(OpKind::kRead, dw, 0, weights[r]);
        out.emit(OpKind::kWrite, wname(r), 0, weights[r]);
        out.emit(OpKind::kFree, dw, 0, 0);
      }
    }
    const int64_t count = out.size() - begin;
    if (it == 0) warmup_ops = count;
    if (it == spec.iterations - 1) steady_ops = count;
  }

  Trace trace = std::move(out.trace());
  trace.meta["name"] = spec.name;
  trace.meta["seed"] = std::to_string(spec.seed);
  trace.meta["layers"] = std::to_string(n);
  trace.meta["iterations"] = std::to_string(spec.iterations);
  trace.meta["setup_ops"] = std::to_string(setup_ops);
  trace.meta["ops_per_iteration"] = std::to_string(steady_ops);
  trace.meta["warmup_extra_ops"] = std::to_string(warmup_ops - steady_ops);
  return trace;
}

WorkloadSpec vgg_like_spec(int depth, int batch) {
  // 0 marks a 2x2 pooling layer.
  std::vector<int> cfg;
  switch (depth) {
    case 11:
      cfg = {64, 0, 128, 0, 256, 256, 0, 512, 512, 0, 512, 512, 0};
      break;
    case 13:
      cfg = {64, 64, 0, 128, 128, 0, 256, 256, 0, 512, 512, 0, 512, 512, 0};
      break;
    case 16:
      cfg = {64,  64,  0,   128, 128, 0,   256, 256, 256,
             0,   512, 512, 512, 0,   512, 512, 512, 0};
      break;
    case 19:
      cfg = {64,  64,  0,   128, 128, 0,   256, 256, 256, 256, 0,
             512, 512, 512, 512, 0,   512, 512, 512, 512, 0};
      break;
    default:
      throw InvalidSpec("vgg depth must be 11, 13, 16 or 19");
  }
  if (batch <= 0) throw InvalidSpec("batch must be positive");
  WorkloadSpec spec;
  spec.name = "vgg" + std::to_string(depth) + "-b" + std::to_string(batch);
  const int64_t b = batch;
  int64_t channels = 3;
  int64_t side = 32;
  for (int c : cfg) {
    if (c == 0) {
      side /= 2;
      spec.layer_bytes.push_back(b * channels * side * side * 4);
      spec.weight_bytes.push_back(0);
    } else {
      spec.layer_bytes.push_back(b * c * side * side * 4);
      spec.weight_bytes.push_back((channels * c * 9 + c) * 4);
      channels = c;
    }
  }
  spec.layer_bytes.push_back(b * 10 * 4);
  spec.weight_bytes.push_back((channels * side * side * 10 + 10) * 4);
  spec.workspace_fraction = 0.5;
  return spec;
}

}  // namespace memplan
