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

#include "memplan/swapsim.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memplan/error.h"

namespace memplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Swap-in times on the circular axis of the iteration holding each deadline.
struct InSlot {
  double start = 0;
  double end = 0;
};

std::vector<InSlot> schedule_swap_ins(std::span<const SwapCandidate> sel,
                                      double period_us) {
  const size_t n = sel.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sel[a].in_before.t_us > sel[b].in_before.t_us;
  });
  std::vector<InSlot> slot(n);
  auto backward = [&](double bound) {
    double prev = bound;
    for (int i : order) {
      slot[i].end = std::min(sel[i].in_before.t_us, prev);
      slot[i].start = slot[i].end - sel[i].delta_in_us;
      prev = slot[i].start;
    }
  };
  backward(kInf);
  if (n == 0) return slot;

  double total = 0;
  for (const SwapCandidate& c : sel) total += c.delta_in_us;
  if (total > period_us) return slot;
  // The earliest swap-ins may start before the iteration does and then
  // compete with the latest ones of the previous iteration.
  for (int round = 0; round < 100; ++round) {
    const double s_min = slot[order.back()].start;
    const double latest_end = slot[order.front()].end;
    if (s_min >= 0 || latest_end <= s_min + period_us) break;
    backward(s_min + period_us);
  }
  return slot;
}

}  // namespace

std::vector<SwapEvent> build_schedule(std::span<const SwapCandidate> selected,
                                      const IterationProfile& profile) {
  const double period = profile.period_duration_us;
  const size_t n = selected.size();
  std::vector<SwapEvent> events(n);

  std::vector<int> out_order(n);
  std::iota(out_order.begin(), out_order.end(), 0);
  std::stable_sort(out_order.begin(), out_order.end(), [&](int a, int b) {
    return selected[a].out_after.t_us < selected[b].out_after.t_us;
  });
  double prev_end = -kInf;
  for (int i : out_order) {
    const SwapCandidate& c = selected[i];
    SwapEvent& e = events[i];
    e.var = c.var;
    e.var_ref = c.var_ref;
    e.size = c.size;
    e.out_after_index = c.out_after.index;
    e.in_before_index = c.in_before.index;
    e.spans_iterations = c.spans_iterations;
    e.t_start_out = std::max(c.out_ready_us, prev_end);
    e.t_end_out = e.t_start_out + c.delta_out_us;
    prev_end = e.t_end_out;
  }

  const std::vector<InSlot> slots = schedule_swap_ins(selected, period);
  for (size_t i = 0; i < n; ++i) {
    const SwapCandidate& c = selected[i];
    SwapEvent& e = events[i];
    const double shift = c.spans_iterations ? period : 0.0;
    e.t_start_in = std::max(slots[i].start + shift, e.t_end_out);
    e.t_end_in = e.t_start_in + c.delta_in_us;

    double rel = e.t_start_in - shift;
    int iteration = 0;
    while (rel < 0 && period > 0) {
      rel += period;
      --iteration;
    }
    if (iteration == 0 && (rel >= c.in_before.t_us ||
                           op_index_at(profile, rel) >= c.in_before.index)) {
      // Too late to wait on an earlier operation: release the swap-in when
      // the operation just before the access completes.
      const int64_t prev = c.in_before.index - 1;
      e.anchor_iteration = prev < 0 ? -1 : 0;
      e.anchor_op = prev < 0 ? profile.period - 1 : prev;
      e.anchor_offset_us = profile.ops[e.anchor_op].dur_us;
    } else {
      e.anchor_iteration = iteration;
      e.anchor_op = op_index_at(profile, rel);
      e.anchor_offset_us = rel - profile.ops[e.anchor_op].t_us;
    }
  }
  return events;
}

namespace {

constexpr int kReplayIterations = 3;

struct Replay {
  LoadProfile load;
  double duration_us = 0;
  std::vector<double> op_start;  // reported iteration, relative
  std::vector<DelayedOp> delayed;
  std::vector<Transfer> transfers;
};

class Replayer {
 public:
  // With `lookahead`, a swap-in waits until the operations preceding its
  // access fit under the limit next to it.
  Replayer(std::span<const SwapEvent> schedule, const IterationProfile& profile,
           int64_t limit, bool lookahead)
      : sched_(schedule),
        prof_(profile),
        limit_(limit),
        p_(profile.period),
        lookahead_(lookahead) {}

  Replay run();

 private:
  struct OutJob {
    int ev;
    int iteration;
    int64_t gate_op;  // global op index whose completion releases the job
  };
  struct InJob {
    int ev;
    int iteration;       // iteration of the access it serves
    int64_t anchor_op;   // global, may be negative (already released)
    double offset = 0;
    int out_job = -1;    // swap-out that must finish first, -1 if none
  };
  struct RawTransfer {
    int ev;
    bool swap_in;
    int iteration;
    double start;
    double end;
  };

  double release_time(const InJob& j) const {
    if (j.anchor_op < 0) return 0;
    // Anchors past the replayed window are never reached.
    if (j.anchor_op >= static_cast<int64_t>(started_.size()) ||
        !started_[j.anchor_op]) {
      return kInf;
    }
    return op_start_[j.anchor_op] + j.offset;
  }

  std::span<const SwapEvent> sched_;
  const IterationProfile& prof_;
  int64_t limit_;
  int64_t p_;
  bool lookahead_;
  std::vector<char> started_;
  std::vector<double> op_start_;
};

Replay Replayer::run() {
  const int64_t total = p_ * kReplayIterations;
  const int nev = static_cast<int>(sched_.size());
  started_.assign(total, 0);
  op_start_.assign(total, 0);
  std::vector<char> completed(total, 0);
  std::vector<double> op_end(total, 0);

  const auto& vars = prof_.variables;
  std::vector<char> held(vars.size(), 0);
  for (size_t v = 0; v < vars.size(); ++v) {
    held[v] = vars[v].persistent || !vars[v].alloc_index || vars[v].wraps();
  }

  std::vector<int> out_order(nev);
  std::iota(out_order.begin(), out_order.end(), 0);
  std::stable_sort(out_order.begin(), out_order.end(), [&](int a, int b) {
    return sched_[a].t_start_out < sched_[b].t_start_out;
  });
  std::vector<OutJob> outs;
  std::vector<std::vector<int>> out_id(kReplayIterations,
                                       std::vector<int>(nev, -1));
  for (int k = 0; k < kReplayIterations; ++k) {
    for (int e : out_order) {
      out_id[k][e] = static_cast<int>(outs.size());
      outs.push_back({e, k, k * p_ + sched_[e].out_after_index});
    }
  }

  std::vector<InJob> ins;
  for (int k = 0; k <= kReplayIterations; ++k) {
    for (int e = 0; e < nev; ++e) {
      const SwapEvent& ev = sched_[e];
      InJob j;
      j.ev = e;
      j.iteration = k;
      j.anchor_op = (k + ev.anchor_iteration) * p_ + ev.anchor_op;
      j.offset = ev.anchor_offset_us;
      const int src = k - (ev.spans_iterations ? 1 : 0);
      if (src >= 0 && src < kReplayIterations) j.out_job = out_id[src][e];
      ins.push_back(j);
    }
  }
  std::stable_sort(ins.begin(), ins.end(), [](const InJob& a, const InJob& b) {
    if (a.anchor_op != b.anchor_op) return a.anchor_op < b.anchor_op;
    return a.offset < b.offset;
  });

  // The previous iteration is assumed to have left every cross-iteration
  // variable on the host.
  for (const SwapEvent& ev : sched_) {
    if (ev.spans_iterations) held[ev.var_ref] = 0;
  }
  int64_t resident = 0;
  for (size_t v = 0; v < vars.size(); ++v) {
    if (held[v]) resident += vars[v].size;
  }

  std::vector<int> waits_for(total, -1);  // op -> in job it needs
  for (int i = 0; i < static_cast<int>(ins.size()); ++i) {
    const InJob& j = ins[i];
    if (j.iteration < kReplayIterations) {
      waits_for[j.iteration * p_ + sched_[j.ev].in_before_index] = i;
    }
  }
  // Nominal bytes allocated by operations [0, g).
  std::vector<int64_t> net(total + 1, 0);
  for (int64_t g = 0; g < total; ++g) {
    const ProfileOp& op = prof_.ops[g % p_];
    int64_t d = 0;
    if (op.var_ref >= 0 && !vars[op.var_ref].persistent) {
      if (op.kind == OpKind::kMalloc) d = op.size;
      if (op.kind == OpKind::kFree) d = -op.size;
    }
    net[g + 1] = net[g] + d;
  }
  auto headroom_needed = [&](int64_t from, int64_t access) {
    int64_t worst = 0;
    for (int64_t h = from + 1; h <= std::min(access, total); ++h) {
      worst = std::max(worst, net[h] - net[from]);
    }
    return worst;
  };

  std::vector<char> out_done(outs.size(), 0), arrived(ins.size(), 0);
  std::vector<RawTransfer> raw;

  struct Point {
    double t;
    int64_t op;
    int64_t bytes;
  };
  std::vector<Point> points;

  double now = 0;
  int64_t next_op = 0, running = -1;
  size_t out_ptr = 0, in_ptr = 0;
  int out_cur = -1, in_cur = -1;
  double out_end = 0, in_end = 0, in_begin = 0, out_begin = 0;

  while (next_op < total || running >= 0) {
    bool changed = true;
    while (changed) {
      changed = false;
      if (out_cur >= 0 && out_end <= now) {
        const SwapEvent& ev = sched_[outs[out_cur].ev];
        held[ev.var_ref] = 0;
        resident -= ev.size;
        out_done[out_cur] = 1;
        raw.push_back({outs[out_cur].ev, false, outs[out_cur].iteration,
                       out_begin, out_end});
        out_cur = -1;
        changed = true;
      }
      if (in_cur >= 0 && in_end <= now) {
        arrived[in_cur] = 1;
        raw.push_back({ins[in_cur].ev, true, ins[in_cur].iteration, in_begin,
                       in_end});
        in_cur = -1;
        changed = true;
      }
      if (running >= 0 && op_end[running] <= now) {
        completed[running] = 1;
        running = -1;
        changed = true;
      }
      if (running < 0 && next_op < total) {
        const int64_t g = next_op;
        const ProfileOp& op = prof_.ops[g % p_];
        bool ready = waits_for[g] < 0 || arrived[waits_for[g]];
        const bool allocates = op.kind == OpKind::kMalloc && !held[op.var_ref];
        if (ready && allocates && resident + op.size > limit_) ready = false;
        if (ready) {
          if (allocates) {
            held[op.var_ref] = 1;
            resident += op.size;
          } else if (op.kind == OpKind::kFree && held[op.var_ref] &&
                     !vars[op.var_ref].persistent) {
            held[op.var_ref] = 0;
            resident -= op.size;
          }
          started_[g] = 1;
          op_start_[g] = now;
          op_end[g] = now + op.dur_us;
          running = g;
          ++next_op;
          changed = true;
        }
      }
      if (out_cur < 0 && out_ptr < outs.size() &&
          completed[outs[out_ptr].gate_op]) {
        out_cur = static_cast<int>(out_ptr++);
        out_begin = now;
        out_end = now + (sched_[outs[out_cur].ev].t_end_out -
                         sched_[outs[out_cur].ev].t_start_out);
        changed = true;
      }
      if (in_cur < 0 && in_ptr < ins.size()) {
        const InJob& j = ins[in_ptr];
        const SwapEvent& ev = sched_[j.ev];
        const int64_t access = j.iteration * p_ + ev.in_before_index;
        const int64_t reserve =
            lookahead_ ? headroom_needed(next_op, access) : 0;
        if (release_time(j) <= now && (j.out_job < 0 || out_done[j.out_job]) &&
            resident + ev.size + reserve <= limit_) {
          in_cur = static_cast<int>(in_ptr++);
          held[ev.var_ref] = 1;
          resident += ev.size;
          in_begin = now;
          in_end = now + (ev.t_end_in - ev.t_start_in);
          changed = true;
        }
      }
    }
    const int64_t cur_op = running >= 0 ? running : std::min(next_op, total - 1);
    if (!points.empty() && points.back().t == now) {
      points.back() = {now, cur_op, resident};
    } else {
      points.push_back({now, cur_op, resident});
    }
    if (next_op >= total && running < 0) break;

    double next = kInf;
    if (running >= 0) next = std::min(next, op_end[running]);
    if (out_cur >= 0) next = std::min(next, out_end);
    if (in_cur >= 0) next = std::min(next, in_end);
    if (in_cur < 0 && in_ptr < ins.size()) {
      const double r = release_time(ins[in_ptr]);
      if (r > now) next = std::min(next, r);
    }
    if (next == kInf) {
      throw Deadlock(next_op % p_,
                     "replay stalled with " + std::to_string(resident) +
                         " bytes resident under a limit of " +
                         std::to_string(limit_));
    }
    now = next;
  }

  const int64_t first = (kReplayIterations - 1) * p_;
  const double begin = op_end[first - 1];
  const double end = op_end[total - 1];

  Replay out;
  out.duration_us = end - begin;
  out.op_start.resize(p_);
  for (int64_t i = 0; i < p_; ++i) {
    const int64_t g = first + i;
    out.op_start[i] = op_start_[g] - begin;
    const double ready = op_end[g - 1];
    if (op_start_[g] > ready) out.delayed.push_back({i, op_start_[g] - ready});
  }

  // Value in force at `begin`, then every change inside the iteration.
  size_t k = 0;
  while (k + 1 < points.size() && points[k + 1].t <= begin) ++k;
  for (; k < points.size() && points[k].t < end; ++k) {
    const Point& pt = points[k];
    const double t = std::max(pt.t, begin) - begin;
    const int64_t idx = std::clamp<int64_t>(pt.op - first, 0, p_ - 1);
    out.load.samples.push_back({idx, t, pt.bytes});
  }
  out.load.end_t_us = out.duration_us;
  out.load.refresh_peak();

  for (const RawTransfer& r : raw) {
    if (r.end <= begin || r.start >= end) continue;
    Transfer t;
    t.var = sched_[r.ev].var;
    t.swap_in = r.swap_in;
    t.start_us = r.start - begin;
    t.end_us = r.end - begin;
    if (r.swap_in && r.iteration == kReplayIterations - 1) {
      t.serves_index = sched_[r.ev].in_before_index;
    }
    out.transfers.push_back(std::move(t));
  }
  return out;
}

}  // namespace

SimulationResult simulate(std::span<const SwapEvent> schedule,
                          const IterationProfile& profile,
                          int64_t limit_bytes) {
  if (profile.period <= 0) throw InvalidSpec("empty iteration profile");
  SimulationResult res;
  res.limit_bytes = limit_bytes;
  res.baseline_us = profile.period_duration_us;

  Replay free_run = Replayer(schedule, profile,
                             std::numeric_limits<int64_t>::max(), false)
                        .run();
  res.load_prime = std::move(free_run.load);

  Replay limited;
  try {
    limited = Replayer(schedule, profile, limit_bytes, false).run();
  } catch (const Deadlock&) {
    limited = Replayer(schedule, profile, limit_bytes, true).run();
  }
  if (limited.load.peak_bytes > limit_bytes) {
    throw Deadlock(limited.load.peak_index,
                   "steady-state load stays above the limit");
  }
  res.load_double_prime = std::move(limited.load);
  res.achieved_peak_bytes = res.load_double_prime.peak_bytes;
  res.overhead_us = std::max(0.0, limited.duration_us - res.baseline_us);
  res.overhead_pct =
      res.baseline_us > 0 ? 100.0 * res.overhead_us / res.baseline_us : 0.0;
  res.delayed_ops = std::move(limited.delayed);
  res.transfers = std::move(limited.transfers);
  res.op_start_us = std::move(limited.op_start);
  return res;
}

namespace {

SwapCandidate retime(const SwapCandidate& c, const IterationProfile& timeline) {
  SwapCandidate r = c;
  const ProfileOp& out = timeline.ops[c.out_after.index];
  r.out_after.t_us = out.t_us;
  r.out_ready_us = out.t_us + out.dur_us;
  r.in_before.t_us = timeline.ops[c.in_before.index].t_us;
  r.period_us = timeline.period_duration_us;
  return r;
}

}  // namespace

PlannedSimulation plan_and_simulate(std::span<const SwapCandidate> selected,
                                    const IterationProfile& profile,
                                    int64_t limit_bytes, int max_rounds) {
  IterationProfile timeline = profile;
  PlannedSimulation best;
  bool have = false;
  for (int round = 0; round < std::max(1, max_rounds); ++round) {
    std::vector<SwapCandidate> cands;
    cands.reserve(selected.size());
    for (const SwapCandidate& c : selected) cands.push_back(retime(c, timeline));
    std::vector<SwapEvent> schedule = build_schedule(cands, timeline);
    SimulationResult res;
    try {
      res = simulate(schedule, profile, limit_bytes);
    } catch (const Deadlock&) {
      if (!have) throw;
      break;
    }
    const bool better = !have || res.overhead_us < best.result.overhead_us;
    if (better) {
      best.schedule = std::move(schedule);
      best.result = res;
      have = true;
    }
    best.rounds = round + 1;
    if (res.overhead_us == 0) break;

    bool moved = false;
    for (int64_t i = 0; i < profile.period; ++i) {
      if (timeline.ops[i].t_us != res.op_start_us[i]) moved = true;
      timeline.ops[i].t_us = res.op_start_us[i];
    }
    timeline.period_duration_us = res.baseline_us + res.overhead_us;
    if (!moved) break;
  }
  return best;
}

int64_t compute_load_min(const IterationProfile& profile,
                         std::span<const SwapCandidate> candidates) {
  LoadProfile load = profile.load;
  for (const SwapCandidate& c : candidates) {
    remove_absence(load, c, profile.period);
  }
  return load.peak_bytes;
}

IterationProfile combine_with_pool(const IterationProfile& profile,
                                   std::span<const SwapEvent> schedule) {
  IterationProfile out = profile;
  const int64_t p = profile.period;
  const double period = profile.period_duration_us;
  if (schedule.empty() || p <= 0 || period <= 0) return out;

  for (const SwapEvent& ev : schedule) {
    const VariableLifetime& orig = profile.variables.at(ev.var_ref);

    // First operation starting at or after the swap-out completes.
    double q = ev.t_end_out;
    int64_t base = 0;
    while (q >= period) {
      q -= period;
      base += p;
    }
    const auto lb = std::lower_bound(
        profile.ops.begin(), profile.ops.end(), q,
        [](const ProfileOp& op, double t) { return op.t_us < t; });
    const int64_t free_pos = base + (lb - profile.ops.begin());

    // Last operation starting at or before the swap-in begins.
    double r = ev.t_start_in;
    int64_t rbase = 0;
    while (r < 0) {
      r += period;
      rbase -= p;
    }
    while (r >= period) {
      r -= period;
      rbase += p;
    }
    const int64_t alloc_pos = rbase + op_index_at(profile, r);

    const int64_t out_pos = ev.out_after_index;
    const int64_t in_pos = ev.in_before_index + (ev.spans_iterations ? p : 0);
    // A split piece may be re-allocated at the operation that frees the
    // other one; a persistent variable needs a real hole to stay circular.
    const bool hole = orig.persistent ? free_pos < alloc_pos : free_pos <= alloc_pos;
    if (!(out_pos < free_pos && hole && alloc_pos <= in_pos)) continue;

    // Split the access list after the swap-out access.
    size_t cut = 0;
    for (size_t k = 0; k < orig.accesses.size(); ++k) {
      if (orig.accesses[k].index == ev.out_after_index) cut = k + 1;
    }
    std::vector<Access> head(orig.accesses.begin(), orig.accesses.begin() + cut);
    std::vector<Access> tail(orig.accesses.begin() + cut, orig.accesses.end());

    VariableLifetime& first = out.variables[ev.var_ref];
    if (orig.persistent) {
      first.persistent = false;
      first.from_swap_in = true;
      first.alloc_index = alloc_pos % p;
      first.free_index = free_pos % p;
      tail.insert(tail.end(), head.begin(), head.end());
      first.accesses = std::move(tail);
      continue;
    }
    VariableLifetime second = orig;
    first.free_index = free_pos % p;
    first.accesses = std::move(head);
    second.var = orig.var + "~in";
    second.alloc_index = alloc_pos % p;
    second.from_swap_in = true;
    second.accesses = std::move(tail);
    const int ref = static_cast<int>(out.variables.size());
    for (const Access& a : second.accesses) out.ops[a.index].var_ref = ref;
    if (orig.free_index) out.ops[*orig.free_index].var_ref = ref;
    out.variables.push_back(std::move(second));
  }
  out.load = compute_load_profile(out);
  return out;
}

}  // namespace memplan
