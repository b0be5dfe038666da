// Core domain types for joint access/backhaul transmission scheduling:
// nodes, directional links, flows, stage-based schedules, and the
// structural checks every scheduler output must satisfy.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2dmac {

using NodeId = int;

enum class NodeKind { Ap, Wn, Gateway };

/// The gateway is an AP with wired Internet connectivity.
inline bool is_ap_like(NodeKind k) { return k != NodeKind::Wn; }

struct Node {
  NodeId id = -1;
  NodeKind kind = NodeKind::Wn;
  double x = 0.0;
  double y = 0.0;
  std::optional<NodeId> associated_ap;  // WNs only
};

enum class LinkKind { Access, Backhaul, Direct };

/// A directional transmitter->receiver link. rate is in integer
/// packets per slot; rate == 0 encodes an unavailable link.
struct DirectionalLink {
  NodeId tx = -1;
  NodeId rx = -1;
  int rate = 0;
  LinkKind kind = LinkKind::Access;

  friend bool operator==(const DirectionalLink& a, const DirectionalLink& b) {
    return a.tx == b.tx && a.rx == b.rx && a.rate == b.rate && a.kind == b.kind;
  }
};

/// One traffic flow. The ordinary path chains access and backhaul hops
/// through the APs; the direct link is the one-hop device-to-device
/// alternative. A flow whose route collapses to a single access link
/// (e.g. a WN talking to its own gateway AP) carries no ordinary path
/// and hop_count is 1.
struct Flow {
  int id = -1;
  NodeId src = -1;
  NodeId dst = -1;
  std::vector<DirectionalLink> ordinary_path;
  std::optional<DirectionalLink> direct_link;
  std::int64_t demand = 0;
  int hop_count = 1;  // max(1, ordinary_path.size())

  bool has_ordinary() const { return !ordinary_path.empty(); }
  bool ordinary_unblocked() const {
    if (ordinary_path.empty()) return false;
    for (const auto& h : ordinary_path)
      if (h.rate <= 0) return false;
    return true;
  }
  bool direct_unblocked() const { return direct_link && direct_link->rate > 0; }
};

class UnavailableLinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnschedulableFlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Slots needed to move `demand` packets over a link of rate
/// `rate` packets/slot: ceil(demand / rate).
inline std::int64_t hop_weight(std::int64_t demand, int rate) {
  if (rate <= 0) throw UnavailableLinkError("hop_weight: link rate is 0");
  if (demand < 0) throw std::invalid_argument("hop_weight: negative demand");
  return (demand + rate - 1) / rate;
}

/// Two links are adjacent iff they share at least one endpoint node;
/// adjacent links can never transmit in the same stage (half-duplex,
/// one connection per node).
inline bool are_adjacent(const DirectionalLink& a, const DirectionalLink& b) {
  return a.tx == b.tx || a.tx == b.rx || a.rx == b.tx || a.rx == b.rx;
}

/// Hop index of a scheduled link within its flow's ordinary path;
/// kDirectHop marks the flow's direct link instead.
constexpr int kDirectHop = -1;

struct ScheduledLink {
  int flow = -1;
  int hop = kDirectHop;  // 0-based ordinary hop index, or kDirectHop
  DirectionalLink link;
};

/// One stage: a set of concurrently transmitting links held active for
/// `slots` consecutive time slots.
struct Stage {
  std::vector<ScheduledLink> links;
  std::int64_t slots = 0;
};

struct Schedule {
  std::vector<Stage> stages;

  std::int64_t total_slots() const {
    std::int64_t t = 0;
    for (const auto& s : stages) t += s.slots;
    return t;
  }
};

enum class ViolationKind {
  DemandCoverage,    // a scheduled link's slots * rate < flow demand
  MissingActivation, // a flow with demand has no complete activation
  DoubleActivation,  // same (flow, hop) scheduled more than once
  MixedPaths,        // flow uses both its direct link and ordinary hops
  Adjacency,         // two links in one stage share a node
  SamePath,          // two hops of one flow in the same stage
  HopOrdering,       // hop j+1 not strictly after hop j
  StageSize,         // more than floor(n/2) links in a stage
  NegativeSlots,
  UnknownReference,  // link references a flow/hop that does not exist
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Structural schedule check: demand coverage, single activation,
/// stage adjacency, same-path exclusivity, hop ordering and the
/// floor(n/2) matching bound. Report-only; never throws.
inline ValidationReport validate_schedule(const Schedule& sched,
                                          const std::vector<Flow>& flows,
                                          int node_count) {
  ValidationReport rep;
  auto add = [&rep](ViolationKind k, std::string d) {
    rep.violations.push_back({k, std::move(d)});
  };

  // Index flows by id.
  std::vector<const Flow*> by_id;
  for (const auto& f : flows) {
    if (f.id >= static_cast<int>(by_id.size())) by_id.resize(f.id + 1, nullptr);
    if (f.id >= 0) by_id[f.id] = &f;
  }
  auto flow_of = [&by_id](int id) -> const Flow* {
    return (id >= 0 && id < static_cast<int>(by_id.size())) ? by_id[id] : nullptr;
  };

  const int max_links = node_count / 2;
  // stage index where each (flow, hop) appears; hop kDirectHop stored at slot H.
  struct Seen {
    std::vector<int> hop_stage;  // -1 = unseen
    int direct_stage = -1;
  };
  std::vector<Seen> seen(by_id.size());
  for (std::size_t i = 0; i < by_id.size(); ++i)
    if (by_id[i]) seen[i].hop_stage.assign(by_id[i]->ordinary_path.size(), -1);

  for (std::size_t k = 0; k < sched.stages.size(); ++k) {
    const Stage& st = sched.stages[k];
    if (st.slots < 0)
      add(ViolationKind::NegativeSlots, "stage " + std::to_string(k));
    if (max_links > 0 && static_cast<int>(st.links.size()) > max_links)
      add(ViolationKind::StageSize,
          "stage " + std::to_string(k) + " has " + std::to_string(st.links.size()) +
              " links, bound " + std::to_string(max_links));

    for (std::size_t a = 0; a < st.links.size(); ++a) {
      for (std::size_t b = a + 1; b < st.links.size(); ++b) {
        if (are_adjacent(st.links[a].link, st.links[b].link))
          add(ViolationKind::Adjacency,
              "stage " + std::to_string(k) + ": links " + std::to_string(a) + " and " +
                  std::to_string(b) + " share a node");
        if (st.links[a].flow == st.links[b].flow)
          add(ViolationKind::SamePath,
              "stage " + std::to_string(k) + ": flow " + std::to_string(st.links[a].flow) +
                  " appears twice");
      }
    }

    for (const ScheduledLink& sl : st.links) {
      const Flow* f = flow_of(sl.flow);
      if (!f) {
        add(ViolationKind::UnknownReference, "flow " + std::to_string(sl.flow));
        continue;
      }
      if (sl.hop == kDirectHop) {
        if (!f->direct_link) {
          add(ViolationKind::UnknownReference,
              "flow " + std::to_string(sl.flow) + " has no direct link");
          continue;
        }
        if (seen[sl.flow].direct_stage >= 0)
          add(ViolationKind::DoubleActivation,
              "flow " + std::to_string(sl.flow) + " direct link");
        seen[sl.flow].direct_stage = static_cast<int>(k);
        if (f->demand > 0 && st.slots * sl.link.rate < f->demand)
          add(ViolationKind::DemandCoverage,
              "flow " + std::to_string(sl.flow) + " direct: " + std::to_string(st.slots) +
                  " slots x rate " + std::to_string(sl.link.rate) + " < demand " +
                  std::to_string(f->demand));
      } else {
        if (sl.hop < 0 || sl.hop >= static_cast<int>(f->ordinary_path.size())) {
          add(ViolationKind::UnknownReference,
              "flow " + std::to_string(sl.flow) + " hop " + std::to_string(sl.hop));
          continue;
        }
        if (seen[sl.flow].hop_stage[sl.hop] >= 0)
          add(ViolationKind::DoubleActivation,
              "flow " + std::to_string(sl.flow) + " hop " + std::to_string(sl.hop));
        seen[sl.flow].hop_stage[sl.hop] = static_cast<int>(k);
        if (f->demand > 0 && st.slots * sl.link.rate < f->demand)
          add(ViolationKind::DemandCoverage,
              "flow " + std::to_string(sl.flow) + " hop " + std::to_string(sl.hop) + ": " +
                  std::to_string(st.slots) + " slots x rate " + std::to_string(sl.link.rate) +
                  " < demand " + std::to_string(f->demand));
      }
    }
  }

  // Per-flow activation pattern: exactly one of {direct once, every
  // ordinary hop once} for flows with demand; nothing for idle flows.
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    const Flow* f = by_id[i];
    if (!f) continue;
    const Seen& s = seen[i];
    int hops_seen = 0;
    for (int st : s.hop_stage)
      if (st >= 0) ++hops_seen;
    const bool any_direct = s.direct_stage >= 0;
    if (f->demand > 0) {
      if (any_direct && hops_seen > 0)
        add(ViolationKind::MixedPaths, "flow " + std::to_string(f->id));
      else if (!any_direct && hops_seen == 0)
        add(ViolationKind::MissingActivation, "flow " + std::to_string(f->id));
      else if (!any_direct && hops_seen != static_cast<int>(f->ordinary_path.size()))
        add(ViolationKind::MissingActivation,
            "flow " + std::to_string(f->id) + ": only " + std::to_string(hops_seen) + " of " +
                std::to_string(f->ordinary_path.size()) + " hops scheduled");
    } else if (any_direct || hops_seen > 0) {
      add(ViolationKind::DoubleActivation,
          "flow " + std::to_string(f->id) + " has no demand but is scheduled");
    }
    // Hop ordering: strictly increasing stage indices along the path.
    for (std::size_t j = 0; j + 1 < s.hop_stage.size(); ++j) {
      if (s.hop_stage[j] >= 0 && s.hop_stage[j + 1] >= 0 &&
          s.hop_stage[j] >= s.hop_stage[j + 1])
        add(ViolationKind::HopOrdering,
            "flow " + std::to_string(f->id) + ": hop " + std::to_string(j + 1) +
                " not after hop " + std::to_string(j));
    }
  }
  return rep;
}

/// Node count inferred from the node ids appearing in a flow set,
/// for callers that do not know the network size.
inline int infer_node_count(const std::vector<Flow>& flows) {
  NodeId max_id = -1;
  auto upd = [&max_id](NodeId n) {
    if (n > max_id) max_id = n;
  };
  for (const auto& f : flows) {
    upd(f.src);
    upd(f.dst);
    for (const auto& h : f.ordinary_path) {
      upd(h.tx);
      upd(h.rx);
    }
    if (f.direct_link) {
      upd(f.direct_link->tx);
      upd(f.direct_link->rx);
    }
  }
  return static_cast<int>(max_id + 1);
}

}  // namespace d2dmac
