// Deployment generation, WN association, min-hop backhaul routing and
// distance-based rate assignment.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "d2dmac/model.hpp"
#include "d2dmac/radio.hpp"

namespace d2dmac {

/// Distance -> rate map for access and direct links, plus the fixed rate
/// used on backhaul links. Breakpoints are (max distance, rate) pairs
/// sorted ascending by distance; beyond the last breakpoint the fallback
/// rate applies.
struct RatePolicy {
  std::vector<std::pair<double, int>> breakpoints = {{3.0, 3}, {12.0, 2}};
  int fallback_rate = 1;
  int backhaul_rate = 3;

  int rate_for_distance(double d) const {
    for (const auto& [max_d, r] : breakpoints)
      if (d <= max_d) return r;
    return fallback_rate;
  }
};

struct Deployment {
  double area_side = 50.0;
  std::vector<Node> nodes;                        // APs first, then WNs
  std::vector<std::pair<NodeId, NodeId>> backhaul_edges;  // undirected AP pairs
  NodeId gateway = -1;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int ap_count() const {
    int c = 0;
    for (const auto& n : nodes)
      if (is_ap_like(n.kind)) ++c;
    return c;
  }
  Point position(NodeId id) const { return {nodes[id].x, nodes[id].y}; }
  std::vector<Point> positions() const {
    std::vector<Point> p(nodes.size());
    for (const auto& n : nodes) p[n.id] = {n.x, n.y};
    return p;
  }
  std::vector<NodeKind> kinds() const {
    std::vector<NodeKind> k(nodes.size());
    for (const auto& n : nodes) k[n.id] = n.kind;
    return k;
  }
};

inline double node_distance(const Deployment& d, NodeId a, NodeId b) {
  return distance(d.position(a), d.position(b));
}

/// APs on a regular sqrt(ap_grid) x sqrt(ap_grid) grid with the gateway at
/// the center cell; WNs i.i.d. uniform over the square. Node ids are dense:
/// APs 0..A-1 row-major, then WNs.
inline Deployment generate_deployment(int ap_grid, int wn_count, double area_side,
                                      std::uint64_t seed) {
  if (ap_grid < 1) throw ConfigError("generate_deployment: ap_grid must be >= 1");
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(ap_grid))));
  if (side * side != ap_grid)
    throw ConfigError("generate_deployment: ap_grid must be a perfect square");
  if (wn_count < 0) throw ConfigError("generate_deployment: negative wn_count");

  Deployment d;
  d.area_side = area_side;
  const double cell = area_side / side;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      Node n;
      n.id = row * side + col;
      n.kind = NodeKind::Ap;
      n.x = (col + 0.5) * cell;
      n.y = (row + 0.5) * cell;
      d.nodes.push_back(n);
    }
  }
  // Gateway: the AP closest to the area center (the exact center cell for
  // odd grids).
  const Point center{area_side / 2.0, area_side / 2.0};
  NodeId gw = 0;
  double best = distance(d.position(0), center);
  for (int i = 1; i < side * side; ++i) {
    const double dist = distance(d.position(i), center);
    if (dist < best) {
      best = dist;
      gw = i;
    }
  }
  d.gateway = gw;
  d.nodes[gw].kind = NodeKind::Gateway;

  // 4-neighbor grid backhaul adjacency.
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const int id = row * side + col;
      if (col + 1 < side) d.backhaul_edges.emplace_back(id, id + 1);
      if (row + 1 < side) d.backhaul_edges.emplace_back(id, id + side);
    }
  }

  std::mt19937_64 rng(seed);
  auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < wn_count; ++i) {
    Node n;
    n.id = side * side + i;
    n.kind = NodeKind::Wn;
    n.x = unit() * area_side;
    n.y = unit() * area_side;
    d.nodes.push_back(n);
  }
  return d;
}

/// Associate every WN with its nearest AP (Euclidean); ties go to the
/// lowest AP id.
inline Deployment associate(Deployment d) {
  std::vector<NodeId> aps;
  for (const auto& n : d.nodes)
    if (is_ap_like(n.kind)) aps.push_back(n.id);
  if (aps.empty()) throw ConfigError("associate: no APs");
  std::sort(aps.begin(), aps.end());
  for (auto& n : d.nodes) {
    if (n.kind != NodeKind::Wn) continue;
    NodeId best = aps.front();
    double best_d = node_distance(d, n.id, best);
    for (std::size_t i = 1; i < aps.size(); ++i) {
      const double dist = node_distance(d, n.id, aps[i]);
      if (dist < best_d) {
        best_d = dist;
        best = aps[i];
      }
    }
    n.associated_ap = best;
  }
  return d;
}

class RoutingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimum-hop path between two APs over the backhaul graph, as a list of
/// directional links at the backhaul rate. Among equal-hop paths the
/// lexicographically smallest node-id sequence wins. Empty when
/// src == dst.
inline std::vector<DirectionalLink> backhaul_route(const Deployment& d,
                                                   const RatePolicy& policy,
                                                   NodeId src_ap, NodeId dst_ap) {
  if (src_ap == dst_ap) return {};
  const int n = d.node_count();
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [a, b] : d.backhaul_edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());

  // BFS distances to dst, then greedy descent picking the smallest-id
  // neighbor one step closer: lexicographically least min-hop sequence.
  std::vector<int> dist(n, -1);
  std::vector<NodeId> queue{dst_ap};
  dist[dst_ap] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const NodeId u = queue[h];
    for (NodeId v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  if (dist[src_ap] < 0)
    throw RoutingError("backhaul_route: no path from AP " + std::to_string(src_ap) +
                       " to AP " + std::to_string(dst_ap));

  std::vector<DirectionalLink> path;
  NodeId cur = src_ap;
  while (cur != dst_ap) {
    NodeId next = -1;
    for (NodeId v : adj[cur])
      if (dist[v] == dist[cur] - 1) {
        next = v;
        break;
      }
    path.push_back({cur, next, policy.backhaul_rate, LinkKind::Backhaul});
    cur = next;
  }
  return path;
}

/// Build a flow between two endpoints (WNs, or the gateway for
/// Internet-bound flows). The ordinary path is access-up + backhaul +
/// access-down with AP-side segments dropped when an endpoint is itself
/// the gateway; a route that collapses to a single access link is
/// represented as "no ordinary path" with hop_count 1, carried by the
/// direct link instead. Rates come from the policy applied to node
/// distances.
inline Flow build_flow(const Deployment& d, const RatePolicy& policy, int flow_id,
                       NodeId src, NodeId dst) {
  if (src == dst) throw ConfigError("build_flow: src == dst");
  Flow f;
  f.id = flow_id;
  f.src = src;
  f.dst = dst;

  auto ap_side = [&d](NodeId node) -> NodeId {
    const Node& n = d.nodes[node];
    if (is_ap_like(n.kind)) return node;
    if (!n.associated_ap) throw ConfigError("build_flow: WN without association");
    return *n.associated_ap;
  };
  const NodeId src_ap = ap_side(src);
  const NodeId dst_ap = ap_side(dst);

  std::vector<DirectionalLink> path;
  if (src != src_ap)
    path.push_back({src, src_ap, policy.rate_for_distance(node_distance(d, src, src_ap)),
                    LinkKind::Access});
  for (const auto& hop : backhaul_route(d, policy, src_ap, dst_ap)) path.push_back(hop);
  if (dst != dst_ap)
    path.push_back({dst_ap, dst, policy.rate_for_distance(node_distance(d, dst_ap, dst)),
                    LinkKind::Access});

  f.direct_link = DirectionalLink{
      src, dst, policy.rate_for_distance(node_distance(d, src, dst)), LinkKind::Direct};

  if (path.size() >= 2) {
    f.ordinary_path = std::move(path);
    f.hop_count = static_cast<int>(f.ordinary_path.size());
  } else {
    // Single-link route (endpoint associated with the gateway AP): the
    // one hop and the direct link coincide, so only the direct path is
    // kept and hop_count stays 1.
    f.hop_count = 1;
  }
  return f;
}

/// Randomly sampled flow endpoints for generated scenarios: wn_flows WN
/// pairs plus inet_flows gateway flows (random WN, random direction).
/// Device-to-device partners are proximity-biased: the destination is
/// drawn uniformly among the source's nearest_k nearest WNs (nearest_k
/// <= 0 means any other WN), so denser deployments yield shorter pair
/// distances. Flow ids are 0..count-1, WN pairs first.
inline std::vector<Flow> sample_flows(const Deployment& d, const RatePolicy& policy,
                                      int wn_flows, int inet_flows,
                                      std::uint64_t seed, int nearest_k = 5,
                                      int src_pool = 0) {
  std::vector<NodeId> wns;
  for (const auto& n : d.nodes)
    if (n.kind == NodeKind::Wn) wns.push_back(n.id);
  if (wn_flows > 0 && wns.size() < 2)
    throw ConfigError("sample_flows: need at least two WNs for WN-WN flows");
  if (inet_flows > 0 && wns.empty())
    throw ConfigError("sample_flows: need at least one WN for Internet flows");
  // src_pool caps the WNs eligible as flow sources / Internet endpoints.
  // Density sweeps pass the smallest sweep count so that, per seed, all
  // densities share sources and rng draws; only the partner pool grows.
  std::size_t pool = wns.size();
  if (src_pool > 0) pool = std::min<std::size_t>(pool, src_pool);

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  // Endpoint selection is usage-balanced: one rng draw fixes a starting
  // index, then the least-loaded candidate from that index onward (cyclic)
  // wins. Uniform while loads are even, but a single node never ends up
  // hosting a pile of flows by lottery; the fixed draw count also keeps
  // sweeps over different WN counts on a shared rng sequence.
  std::vector<int> usage(d.node_count(), 0);
  auto balanced = [&usage](const std::vector<NodeId>& cands, std::size_t start) {
    NodeId best = cands[start];
    for (std::size_t t = 1; t < cands.size(); ++t) {
      const NodeId c = cands[(start + t) % cands.size()];
      if (usage[c] < usage[best]) best = c;
    }
    return best;
  };

  std::vector<NodeId> sources(wns.begin(), wns.begin() + pool);
  std::vector<Flow> flows;
  int id = 0;
  for (int i = 0; i < wn_flows; ++i) {
    const NodeId a = balanced(sources, pick(pool));
    // D2D partners are nearby devices: the nearest_k nearest co-cell WNs,
    // or the nearest_k nearest WNs overall when the cell has no other
    // member.
    std::vector<NodeId> partners;
    for (NodeId w : wns)
      if (w != a && d.nodes[w].associated_ap == d.nodes[a].associated_ap)
        partners.push_back(w);
    if (partners.empty())
      for (NodeId w : wns)
        if (w != a) partners.push_back(w);
    const int k = nearest_k > 0 ? nearest_k : static_cast<int>(partners.size());
    if (static_cast<int>(partners.size()) > k) {
      std::sort(partners.begin(), partners.end(), [&](NodeId x, NodeId y) {
        const double dx = node_distance(d, a, x), dy = node_distance(d, a, y);
        if (dx != dy) return dx < dy;
        return x < y;
      });
      partners.resize(k);
    }
    const NodeId b = balanced(partners, pick(partners.size()));
    ++usage[a];
    ++usage[b];
    flows.push_back(build_flow(d, policy, id++, a, b));
  }
  for (int i = 0; i < inet_flows; ++i) {
    const NodeId w = balanced(sources, pick(pool));
    ++usage[w];
    const bool uplink = (rng() & 1) != 0;
    if (uplink)
      flows.push_back(build_flow(d, policy, id++, w, d.gateway));
    else
      flows.push_back(build_flow(d, policy, id++, d.gateway, w));
  }
  return flows;
}

}  // namespace d2dmac
