// Heuristic schedulers: the greedy concurrent-transmission algorithm used
// by D2DMAC (and, with forced path policies, ODMAC/RPDMAC), plus the
// phase-separated FDMAC-E benchmark.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "d2dmac/model.hpp"
#include "d2dmac/pathsel.hpp"
#include "d2dmac/radio.hpp"

namespace d2dmac {

/// One flow's selected route for a frame: the hop sequence actually used
/// (the full ordinary path, or the single direct link) plus the demand to
/// carry.
struct PlannedPath {
  int flow_id = -1;
  bool direct = false;
  std::vector<DirectionalLink> hops;
  std::int64_t demand = 0;

  std::int64_t weight(std::size_t hop) const {
    return hop_weight(demand, hops[hop].rate);
  }
  int hop_tag(std::size_t hop) const {
    return direct ? kDirectHop : static_cast<int>(hop);
  }
};

struct SchedulingInstance {
  std::vector<PlannedPath> paths;
  std::vector<NodeKind> node_kinds;  // indexed by NodeId; size = node count
  FeasibilityCheck feasible;         // default: always pass

  int node_count() const { return static_cast<int>(node_kinds.size()); }
};

/// Route a flow along the chosen path kind.
inline PlannedPath plan_path(const Flow& f, PathChoice choice) {
  PlannedPath p;
  p.flow_id = f.id;
  p.demand = f.demand;
  if (choice == PathChoice::Direct) {
    if (!f.direct_unblocked())
      throw UnschedulableFlowError("flow " + std::to_string(f.id) +
                                   ": direct path unavailable");
    p.direct = true;
    p.hops = {*f.direct_link};
  } else {
    if (!f.ordinary_unblocked())
      throw UnschedulableFlowError("flow " + std::to_string(f.id) +
                                   ": ordinary path unavailable");
    p.direct = false;
    p.hops = f.ordinary_path;
  }
  return p;
}

inline SchedulingInstance make_instance(const std::vector<Flow>& flows,
                                        const std::map<int, PathChoice>& choices,
                                        std::vector<NodeKind> kinds,
                                        FeasibilityCheck feasible = {}) {
  SchedulingInstance inst;
  inst.node_kinds = std::move(kinds);
  inst.feasible = std::move(feasible);
  for (const auto& f : flows) {
    if (f.demand <= 0) continue;
    inst.paths.push_back(plan_path(f, choices.at(f.id)));
  }
  return inst;
}

/// Work counters for the complexity smoke checks.
struct SchedStats {
  std::uint64_t candidates_examined = 0;
  std::uint64_t stages = 0;
};

namespace detail {

// Shared stage-filling loop. Per stage, repeatedly pick the
// largest-weight first-unscheduled hop among unvisited paths (ties:
// lowest flow id, then lowest hop index), admit it when node-disjoint
// from the stage and the concurrency check passes, and mark the path
// visited either way. A stage closes when every path has been visited or
// it holds floor(n/2) links. A stage that holds a single link is always
// admissible, which guarantees progress.
inline Schedule greedy_stage_fill(const SchedulingInstance& inst,
                                  std::vector<std::size_t> next_hop,
                                  SchedStats* stats) {
  const auto& paths = inst.paths;
  const int max_links = std::max(1, inst.node_count() / 2);

  std::size_t remaining = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t h = next_hop[i]; h < paths[i].hops.size(); ++h)
      if (paths[i].hops[h].rate <= 0)
        throw UnavailableLinkError("flow " + std::to_string(paths[i].flow_id) +
                                   " hop " + std::to_string(h) + " has rate 0");
    remaining += paths[i].hops.size() - next_hop[i];
  }

  Schedule sched;
  while (remaining > 0) {
    Stage stage;
    std::vector<bool> visited(paths.size(), false);
    std::vector<bool> in_stage_node(inst.node_kinds.size(), false);
    std::size_t unvisited = 0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (next_hop[i] >= paths[i].hops.size()) visited[i] = true;
      else ++unvisited;
    }

    while (unvisited > 0 && static_cast<int>(stage.links.size()) < max_links) {
      // Largest-weight first-unscheduled hop among unvisited paths; ties
      // go to the lowest flow id, then the earliest path position.
      int pick = -1;
      std::int64_t pick_w = -1;
      for (std::size_t i = 0; i < paths.size(); ++i) {
        if (visited[i]) continue;
        const std::int64_t w = paths[i].weight(next_hop[i]);
        if (w > pick_w ||
            (w == pick_w && paths[i].flow_id < paths[pick].flow_id)) {
          pick = static_cast<int>(i);
          pick_w = w;
        }
      }
      if (stats) ++stats->candidates_examined;
      const PlannedPath& p = paths[pick];
      const DirectionalLink& link = p.hops[next_hop[pick]];

      bool admitted = false;
      if (!in_stage_node[link.tx] && !in_stage_node[link.rx]) {
        stage.links.push_back({p.flow_id, p.hop_tag(next_hop[pick]), link});
        if (inst.feasible(stage.links)) {
          admitted = true;
          in_stage_node[link.tx] = in_stage_node[link.rx] = true;
          stage.slots = std::max(stage.slots, pick_w);
          ++next_hop[pick];
          --remaining;
        } else {
          stage.links.pop_back();
        }
      }
      (void)admitted;
      visited[pick] = true;
      --unvisited;
    }

    if (stage.links.empty())
      throw UnschedulableFlowError("scheduler made no progress in a stage");
    if (stats) ++stats->stages;
    sched.stages.push_back(std::move(stage));
  }
  return sched;
}

}  // namespace detail

/// The D2DMAC transmission scheduling algorithm: greedy concurrent
/// scheduling of the first unscheduled hops of all selected paths, stage
/// by stage, in non-increasing weight order.
inline Schedule d2dmac_schedule(const SchedulingInstance& inst,
                                SchedStats* stats = nullptr) {
  return detail::greedy_stage_fill(inst, std::vector<std::size_t>(inst.paths.size(), 0),
                                   stats);
}

struct WeightedLink {
  int flow = -1;
  int hop = kDirectHop;
  DirectionalLink link;
  std::int64_t weight = 0;
};

/// Greedy coloring over a flat link set (no hop ordering): each link is
/// treated as a one-hop path and the stage-filling loop runs unchanged.
/// The per-link weights must already account for the demand they carry.
inline Schedule greedy_coloring(const std::vector<WeightedLink>& links,
                                std::vector<NodeKind> kinds,
                                const FeasibilityCheck& feasible = {}) {
  SchedulingInstance inst;
  inst.node_kinds = std::move(kinds);
  inst.feasible = feasible;
  for (const auto& wl : links) {
    PlannedPath p;
    p.flow_id = wl.flow;
    p.direct = (wl.hop == kDirectHop);
    p.hops = {wl.link};
    // demand chosen so the hop weight reproduces wl.weight exactly
    p.demand = wl.weight * wl.link.rate;
    inst.paths.push_back(std::move(p));
  }
  // restore the original hop tags lost by the one-hop repacking
  Schedule sched = d2dmac_schedule(inst);
  for (auto& stage : sched.stages)
    for (auto& sl : stage.links)
      for (const auto& wl : links)
        if (wl.flow == sl.flow && wl.link == sl.link) {
          sl.hop = wl.hop;
          break;
        }
  return sched;
}

/// FDMAC-E: access and backhaul are scheduled separately. Links
/// transmitted by a WN form one greedy-coloring phase, AP-to-AP backhaul
/// hops are served by serial TDMA (one link per stage, flow-id order,
/// hop order within a flow), and AP-to-WN links form a final
/// greedy-coloring phase. Direct links fall into the phase matching
/// their transmitter.
inline Schedule fdmac_e_schedule(const SchedulingInstance& inst) {
  std::vector<WeightedLink> wn_phase, ap_phase;
  struct BackhaulHop {
    int flow;
    int hop;
    DirectionalLink link;
    std::int64_t weight;
  };
  std::vector<BackhaulHop> backhaul;

  for (const auto& p : inst.paths) {
    for (std::size_t h = 0; h < p.hops.size(); ++h) {
      const DirectionalLink& link = p.hops[h];
      const WeightedLink wl{p.flow_id, p.hop_tag(h), link, p.weight(h)};
      const bool tx_ap = is_ap_like(inst.node_kinds[link.tx]);
      const bool rx_ap = is_ap_like(inst.node_kinds[link.rx]);
      if (!tx_ap)
        wn_phase.push_back(wl);
      else if (rx_ap)
        backhaul.push_back({wl.flow, wl.hop, wl.link, wl.weight});
      else
        ap_phase.push_back(wl);
    }
  }

  std::stable_sort(backhaul.begin(), backhaul.end(),
                   [](const BackhaulHop& a, const BackhaulHop& b) {
                     if (a.flow != b.flow) return a.flow < b.flow;
                     return a.hop < b.hop;
                   });

  Schedule out = greedy_coloring(wn_phase, inst.node_kinds, inst.feasible);
  for (const auto& bh : backhaul) {
    Stage st;
    st.links.push_back({bh.flow, bh.hop, bh.link});
    st.slots = bh.weight;
    out.stages.push_back(std::move(st));
  }
  Schedule down = greedy_coloring(ap_phase, inst.node_kinds, inst.feasible);
  for (auto& st : down.stages) out.stages.push_back(std::move(st));
  return out;
}

}  // namespace d2dmac
