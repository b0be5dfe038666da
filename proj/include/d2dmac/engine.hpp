// Frame-based discrete-time simulation: poll-schedule-transmit frames,
// per-packet delivery accounting, and the delay/throughput metrics.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "d2dmac/model.hpp"
#include "d2dmac/optimal.hpp"
#include "d2dmac/pathsel.hpp"
#include "d2dmac/sched.hpp"

namespace d2dmac {

struct FrameConfig {
  double slot_seconds = 5e-6;
  std::int64_t overhead_slots = 3;        // poll + compute + push, per frame
  std::int64_t delay_threshold = 10000;   // slots; TH
  double sim_length_s = 0.5;
  bool validate_schedules = false;        // structural check of every frame

  std::int64_t horizon_slots() const {
    return static_cast<std::int64_t>(sim_length_s / slot_seconds + 0.5);
  }
};

struct PacketRecord {
  int flow = -1;
  std::int64_t arrival_slot = 0;
  std::optional<std::int64_t> delivery_slot;
  bool discarded = false;

  std::optional<std::int64_t> delay() const {
    if (!delivery_slot) return std::nullopt;
    return *delivery_slot - arrival_slot;
  }
};

struct MetricsReport {
  std::optional<double> avg_delay_slots;   // over delivered packets
  std::int64_t network_throughput = 0;     // delivered with delay <= TH
  std::optional<double> flow_delay_bw;     // WN-WN flows
  std::optional<double> flow_delay_in;     // Internet flows
  std::optional<double> flow_tp_bw;        // mean successes per WN-WN flow
  std::optional<double> flow_tp_in;        // mean successes per Internet flow
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t discarded = 0;
};

/// A flow is Internet-bound when either endpoint is the gateway;
/// otherwise it runs between WNs.
inline bool is_internet_flow(const Flow& f, const std::vector<NodeKind>& kinds) {
  return kinds[f.src] == NodeKind::Gateway || kinds[f.dst] == NodeKind::Gateway;
}

inline MetricsReport compute_metrics(const std::vector<PacketRecord>& log,
                                     const std::vector<Flow>& flows,
                                     const std::vector<NodeKind>& kinds,
                                     std::int64_t delay_threshold) {
  MetricsReport rep;
  std::map<int, bool> internet;
  int n_bw = 0, n_in = 0;
  for (const auto& f : flows) {
    const bool in = is_internet_flow(f, kinds);
    internet[f.id] = in;
    (in ? n_in : n_bw)++;
  }

  std::int64_t sum_all = 0, cnt_all = 0;
  std::int64_t sum_bw = 0, cnt_bw = 0, sum_in = 0, cnt_in = 0;
  std::int64_t ok_all = 0, ok_bw = 0, ok_in = 0;
  for (const auto& p : log) {
    ++rep.arrivals;
    if (p.discarded) {
      ++rep.discarded;
      continue;
    }
    if (!p.delivery_slot) continue;
    ++rep.delivered;
    const std::int64_t y = *p.delivery_slot - p.arrival_slot;
    sum_all += y;
    ++cnt_all;
    const bool ok = y <= delay_threshold;
    if (ok) ++ok_all;
    if (internet.at(p.flow)) {
      sum_in += y;
      ++cnt_in;
      if (ok) ++ok_in;
    } else {
      sum_bw += y;
      ++cnt_bw;
      if (ok) ++ok_bw;
    }
  }
  rep.network_throughput = ok_all;
  if (cnt_all > 0)
    rep.avg_delay_slots = static_cast<double>(sum_all) / static_cast<double>(cnt_all);
  if (cnt_bw > 0)
    rep.flow_delay_bw = static_cast<double>(sum_bw) / static_cast<double>(cnt_bw);
  if (cnt_in > 0)
    rep.flow_delay_in = static_cast<double>(sum_in) / static_cast<double>(cnt_in);
  if (n_bw > 0) rep.flow_tp_bw = static_cast<double>(ok_bw) / n_bw;
  if (n_in > 0) rep.flow_tp_in = static_cast<double>(ok_in) / n_in;
  return rep;
}

/// Protocol selection for a run. D2dmac/Odmac/Rpdmac share the greedy
/// scheduler and differ in path policy; FdmacE uses the phase-separated
/// scheduler with the beta = 2 path rule; Optimal solves each frame
/// exactly (desk-scale scenarios only).
struct ProtocolConfig {
  enum class Kind { D2dmac, Odmac, Rpdmac, FdmacE, Optimal } kind = Kind::D2dmac;
  double beta = 2.0;
  ExactLimits exact_limits{};
  // RPDMAC only: redraw the coin every frame (the default; matches
  // re-evaluating paths each frame with current rates) or once per flow
  // for the whole run.
  bool rpdmac_per_frame = true;

  static ProtocolConfig d2dmac(double beta) { return {Kind::D2dmac, beta, {}}; }
  static ProtocolConfig odmac() { return {Kind::Odmac, 0.0, {}}; }
  static ProtocolConfig rpdmac(bool per_frame = true) {
    ProtocolConfig p{Kind::Rpdmac, 0.0, {}};
    p.rpdmac_per_frame = per_frame;
    return p;
  }
  static ProtocolConfig fdmac_e() { return {Kind::FdmacE, 2.0, {}}; }
  static ProtocolConfig optimal(ExactLimits lim = {}) {
    return {Kind::Optimal, 0.0, lim};
  }

  const char* name() const {
    switch (kind) {
      case Kind::D2dmac: return "d2dmac";
      case Kind::Odmac: return "odmac";
      case Kind::Rpdmac: return "rpdmac";
      case Kind::FdmacE: return "fdmac_e";
      case Kind::Optimal: return "optimal";
    }
    return "?";
  }
};

struct SimulationResult {
  MetricsReport metrics;
  std::vector<PacketRecord> packets;
  std::int64_t frames = 0;
  std::int64_t end_slot = 0;
  std::int64_t validated_schedules = 0;
  std::int64_t validation_failures = 0;
};

class ScheduleInvalidError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run one scenario: frames of poll -> select paths -> schedule ->
/// overhead -> staged transmission, until the simulated clock reaches the
/// configured length. Packets advance one hop in the stage that activates
/// that hop, and a hop only forwards packets that reached its transmitter
/// in an earlier stage; the m-th packet a final link carries is delivered
/// at stage_start + ceil(m / rate). Deterministic given (flows, arrivals,
/// seed).
inline SimulationResult run_simulation(const std::vector<Flow>& flows,
                                       const std::vector<NodeKind>& node_kinds,
                                       const ProtocolConfig& protocol,
                                       const std::vector<std::vector<std::int64_t>>& arrivals,
                                       const FrameConfig& cfg,
                                       const FeasibilityCheck& feasible = {},
                                       std::uint64_t seed = 1) {
  const std::int64_t horizon = cfg.horizon_slots();
  SimulationResult res;

  // Flow ids must be dense 0..N-1 for the per-flow bookkeeping.
  std::vector<Flow> fl = flows;
  std::sort(fl.begin(), fl.end(), [](const Flow& a, const Flow& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < fl.size(); ++i)
    if (fl[i].id != static_cast<int>(i))
      throw ConfigError("run_simulation: flow ids must be dense 0..N-1");
  const int n_flows = static_cast<int>(fl.size());
  if (static_cast<int>(arrivals.size()) != n_flows)
    throw ConfigError("run_simulation: arrivals/flows size mismatch");

  std::vector<std::size_t> next_arrival(n_flows, 0);
  std::vector<std::vector<std::size_t>> queue(n_flows);

  std::mt19937_64 rpdmac_rng(seed ^ 0xd2d0acULL);
  std::optional<std::map<int, PathChoice>> fixed_rpdmac_choices;
  if (protocol.kind == ProtocolConfig::Kind::Rpdmac && !protocol.rpdmac_per_frame)
    fixed_rpdmac_choices = select_all(fl, PathPolicy::random_per_flow(), &rpdmac_rng);

  // packets join their source queue as soon as they arrive
  auto admit_up_to = [&](std::int64_t slot) {
    for (int f = 0; f < n_flows; ++f) {
      auto& idx = next_arrival[f];
      while (idx < arrivals[f].size() && arrivals[f][idx] <= slot) {
        res.packets.push_back({f, arrivals[f][idx], std::nullopt, false});
        queue[f].push_back(res.packets.size() - 1);
        ++idx;
      }
    }
  };

  std::int64_t clock = 0;
  while (clock < horizon) {
    admit_up_to(clock);

    // poll: demand = queue length at frame start
    std::vector<Flow> frame_flows = fl;
    bool any_demand = false;
    for (int f = 0; f < n_flows; ++f) {
      frame_flows[f].demand = static_cast<std::int64_t>(queue[f].size());
      if (frame_flows[f].demand > 0) any_demand = true;
    }

    ++res.frames;
    std::int64_t frame_end = clock + cfg.overhead_slots;

    if (any_demand) {
      Schedule sched;
      if (protocol.kind == ProtocolConfig::Kind::Optimal) {
        ExactInstance inst{frame_flows, node_kinds, feasible};
        sched = solve_exact(inst, protocol.exact_limits).schedule;
      } else {
        PathPolicy policy;
        switch (protocol.kind) {
          case ProtocolConfig::Kind::D2dmac:
            policy = PathPolicy::beta_rule(protocol.beta);
            break;
          case ProtocolConfig::Kind::Odmac:
            policy = PathPolicy::always_ordinary();
            break;
          case ProtocolConfig::Kind::Rpdmac:
            policy = PathPolicy::random_per_flow();
            break;
          case ProtocolConfig::Kind::FdmacE:
            policy = PathPolicy::beta_rule(2.0);
            break;
          default:
            break;
        }
        const auto choices = fixed_rpdmac_choices
                                 ? *fixed_rpdmac_choices
                                 : select_all(frame_flows, policy, &rpdmac_rng);
        const auto inst = make_instance(frame_flows, choices, node_kinds, feasible);
        sched = protocol.kind == ProtocolConfig::Kind::FdmacE ? fdmac_e_schedule(inst)
                                                              : d2dmac_schedule(inst);
      }

      if (cfg.validate_schedules) {
        ++res.validated_schedules;
        const auto rep = validate_schedule(sched, frame_flows,
                                           static_cast<int>(node_kinds.size()));
        if (!rep.ok()) {
          ++res.validation_failures;
          throw ScheduleInvalidError("frame " + std::to_string(res.frames) + ": " +
                                     rep.violations.front().detail);
        }
      }

      // route lengths this frame, per flow (direct = 1 hop)
      std::vector<int> route_len(n_flows, 0);
      for (const auto& st : sched.stages)
        for (const auto& sl : st.links)
          route_len[sl.flow] = std::max(
              route_len[sl.flow],
              sl.hop == kDirectHop ? 1 : sl.hop + 1);

      // transmission phase
      const std::int64_t tx_start = clock + cfg.overhead_slots;
      std::vector<std::vector<int>> position(n_flows), advanced_at(n_flows);
      for (int f = 0; f < n_flows; ++f) {
        position[f].assign(queue[f].size(), 0);
        advanced_at[f].assign(queue[f].size(), -1);
      }
      std::int64_t stage_start = tx_start;
      for (std::size_t k = 0; k < sched.stages.size(); ++k) {
        const Stage& st = sched.stages[k];
        for (const auto& sl : st.links) {
          const int f = sl.flow;
          const int hop_pos = sl.hop == kDirectHop ? 0 : sl.hop;
          const std::int64_t cap = st.slots * sl.link.rate;
          std::int64_t moved = 0;
          for (std::size_t q = 0; q < queue[f].size() && moved < cap; ++q) {
            if (position[f][q] != hop_pos) continue;
            if (advanced_at[f][q] == static_cast<int>(k)) continue;
            ++moved;
            position[f][q] += 1;
            advanced_at[f][q] = static_cast<int>(k);
            if (position[f][q] == route_len[f]) {
              const std::int64_t done =
                  stage_start + (moved + sl.link.rate - 1) / sl.link.rate;
              res.packets[queue[f][q]].delivery_slot = done;
            }
          }
        }
        stage_start += st.slots;
      }
      frame_end = stage_start;

      // drop delivered packets from the queues (they all complete: every
      // scheduled hop has capacity >= the polled demand)
      for (int f = 0; f < n_flows; ++f) {
        std::vector<std::size_t> rest;
        for (std::size_t q = 0; q < queue[f].size(); ++q)
          if (!res.packets[queue[f][q]].delivery_slot) rest.push_back(queue[f][q]);
        queue[f] = std::move(rest);
      }
    }

    // idle frames still consume the scheduling overhead; never stall
    if (frame_end <= clock) frame_end = clock + 1;
    clock = frame_end;

    // packets that arrived while the frame ran are waiting at their
    // sources now; stale ones fall to the threshold check below
    admit_up_to(clock);

    // discard queued packets that aged beyond the threshold
    for (int f = 0; f < n_flows; ++f) {
      std::vector<std::size_t> rest;
      for (std::size_t q = 0; q < queue[f].size(); ++q) {
        PacketRecord& p = res.packets[queue[f][q]];
        if (clock - p.arrival_slot > cfg.delay_threshold)
          p.discarded = true;
        else
          rest.push_back(queue[f][q]);
      }
      queue[f] = std::move(rest);
    }
  }
  // arrivals inside the horizon that never saw a poll stay queued, so
  // arrival conservation holds
  admit_up_to(horizon - 1);

  res.end_slot = clock;
  res.metrics = compute_metrics(res.packets, fl, node_kinds, cfg.delay_threshold);
  return res;
}

}  // namespace d2dmac
