#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <queue>
#include <random>
#include <set>

#include "d2dmac/fixture.hpp"
#include "d2dmac/topology.hpp"

using namespace d2dmac;

TEST_CASE("generate_deployment lays out the default scenario", "[topology]") {
  const auto d = generate_deployment(9, 30, 50.0, 42);
  CHECK(d.node_count() == 39);
  CHECK(d.ap_count() == 9);
  CHECK(d.gateway == 4);  // center of the 3x3 grid
  CHECK(d.nodes[4].x == Catch::Approx(25.0));
  CHECK(d.nodes[4].y == Catch::Approx(25.0));
  for (const auto& n : d.nodes) {
    CHECK(n.x >= 0.0);
    CHECK(n.x <= 50.0);
    CHECK(n.y >= 0.0);
    CHECK(n.y <= 50.0);
  }
  // 3x3 grid adjacency: 12 undirected edges
  CHECK(d.backhaul_edges.size() == 12);
}

TEST_CASE("generate_deployment degenerate and error cases", "[topology]") {
  const auto single = generate_deployment(1, 0, 50.0, 1);
  CHECK(single.node_count() == 1);
  CHECK(single.gateway == 0);
  CHECK(single.nodes[0].kind == NodeKind::Gateway);
  CHECK_THROWS_AS(generate_deployment(8, 10, 50.0, 1), ConfigError);
}

TEST_CASE("generate_deployment is reproducible from the seed", "[topology]") {
  const auto a = generate_deployment(9, 30, 50.0, 7);
  const auto b = generate_deployment(9, 30, 50.0, 7);
  REQUIRE(a.node_count() == b.node_count());
  for (int i = 0; i < a.node_count(); ++i) {
    CHECK(a.nodes[i].x == b.nodes[i].x);
    CHECK(a.nodes[i].y == b.nodes[i].y);
  }
}

TEST_CASE("associate picks the nearest AP with id tie-break", "[topology]") {
  Deployment d = generate_deployment(4, 0, 40.0, 1);
  Node at_ap;
  at_ap.id = 4;
  at_ap.kind = NodeKind::Wn;
  at_ap.x = d.nodes[2].x;
  at_ap.y = d.nodes[2].y;
  d.nodes.push_back(at_ap);
  Node mid;  // equidistant to all four APs
  mid.id = 5;
  mid.kind = NodeKind::Wn;
  mid.x = 20.0;
  mid.y = 20.0;
  d.nodes.push_back(mid);
  d = associate(d);
  CHECK(d.nodes[4].associated_ap == 2);
  CHECK(d.nodes[5].associated_ap == 0);  // lowest id wins the tie
}

TEST_CASE("associate agrees with the exhaustive scan oracle", "[topology]") {
  const auto d = associate(generate_deployment(9, 40, 50.0, 99));
  for (const auto& n : d.nodes) {
    if (n.kind != NodeKind::Wn) continue;
    NodeId best = -1;
    double best_d = 1e18;
    for (const auto& ap : d.nodes) {
      if (!is_ap_like(ap.kind)) continue;
      const double dist = node_distance(d, n.id, ap.id);
      if (dist < best_d || (dist == best_d && ap.id < best)) {
        best_d = dist;
        best = ap.id;
      }
    }
    CHECK(n.associated_ap == best);
  }
}

namespace {

// plain BFS hop-count oracle over the undirected backhaul graph
int bfs_hops(const Deployment& d, NodeId src, NodeId dst) {
  std::vector<std::vector<NodeId>> adj(d.node_count());
  for (const auto& [a, b] : d.backhaul_edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> dist(d.node_count(), -1);
  std::queue<NodeId> q;
  q.push(src);
  dist[src] = 0;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist[dst];
}

}  // namespace

TEST_CASE("backhaul_route finds minimum-hop chained paths", "[topology]") {
  const auto d = generate_deployment(9, 0, 50.0, 3);
  const RatePolicy policy;

  CHECK(backhaul_route(d, policy, 4, 4).empty());
  const auto one = backhaul_route(d, policy, 4, 5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].tx == 4);
  CHECK(one[0].rx == 5);
  CHECK(one[0].rate == policy.backhaul_rate);

  for (NodeId s = 0; s < 9; ++s) {
    for (NodeId t = 0; t < 9; ++t) {
      if (s == t) continue;
      const auto path = backhaul_route(d, policy, s, t);
      CHECK(static_cast<int>(path.size()) == bfs_hops(d, s, t));
      // chained, no repeated nodes
      std::set<NodeId> seen{path[0].tx};
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) CHECK(path[i].tx == path[i - 1].rx);
        CHECK_FALSE(seen.count(path[i].rx));
        seen.insert(path[i].rx);
      }
    }
  }
  // corner to corner: Manhattan distance on the grid
  CHECK(backhaul_route(d, policy, 0, 8).size() == 4);
  // lexicographically smallest node sequence among min-hop paths
  const auto corner = backhaul_route(d, policy, 0, 8);
  CHECK(corner[0].rx == 1);
  CHECK(corner[1].rx == 2);
  CHECK(corner[2].rx == 5);
}

TEST_CASE("backhaul_route reports disconnected graphs", "[topology]") {
  Deployment d = generate_deployment(4, 0, 40.0, 1);
  d.backhaul_edges.clear();
  CHECK_THROWS_AS(backhaul_route(d, RatePolicy{}, 0, 3), RoutingError);
}

TEST_CASE("build_flow assembles chained ordinary paths", "[topology]") {
  const auto d = associate(generate_deployment(9, 30, 50.0, 11));
  const RatePolicy policy;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const NodeId src = 9 + static_cast<int>(rng() % 30);
    NodeId dst = src;
    while (dst == src) dst = 9 + static_cast<int>(rng() % 30);
    const Flow f = build_flow(d, policy, trial, src, dst);

    REQUIRE(f.direct_link.has_value());
    CHECK(f.direct_link->rate == policy.rate_for_distance(node_distance(d, src, dst)));
    if (f.has_ordinary()) {
      CHECK(f.ordinary_path.front().tx == src);
      CHECK(f.ordinary_path.back().rx == dst);
      for (std::size_t i = 1; i < f.ordinary_path.size(); ++i)
        CHECK(f.ordinary_path[i].tx == f.ordinary_path[i - 1].rx);
      CHECK(f.hop_count == static_cast<int>(f.ordinary_path.size()));
    } else {
      CHECK(f.hop_count == 1);
    }
  }
}

TEST_CASE("build_flow same-AP pair yields the two-hop path", "[topology]") {
  Deployment d = generate_deployment(9, 0, 50.0, 1);
  for (int i = 0; i < 2; ++i) {
    Node n;
    n.id = 9 + i;
    n.kind = NodeKind::Wn;
    n.x = 24.0 + i;
    n.y = 25.0;
    d.nodes.push_back(n);
  }
  d = associate(d);
  const Flow f = build_flow(d, RatePolicy{}, 0, 9, 10);
  REQUIRE(f.ordinary_path.size() == 2);
  CHECK(f.ordinary_path[0].rx == 4);
  CHECK(f.ordinary_path[1].tx == 4);
}

TEST_CASE("build_flow gateway-local endpoint collapses to the direct link", "[topology]") {
  Deployment d = generate_deployment(9, 0, 50.0, 1);
  Node n;
  n.id = 9;
  n.kind = NodeKind::Wn;
  n.x = 26.0;
  n.y = 25.0;
  d.nodes.push_back(n);
  d = associate(d);
  REQUIRE(d.nodes[9].associated_ap == d.gateway);
  const Flow up = build_flow(d, RatePolicy{}, 0, 9, d.gateway);
  CHECK_FALSE(up.has_ordinary());
  CHECK(up.hop_count == 1);
  CHECK(up.direct_unblocked());
}

TEST_CASE("rate assignment is a pure function of distance", "[topology]") {
  const RatePolicy policy;
  CHECK(policy.rate_for_distance(2.0) == 3);
  CHECK(policy.rate_for_distance(3.0) == 3);
  CHECK(policy.rate_for_distance(10.0) == 2);
  CHECK(policy.rate_for_distance(12.0) == 2);
  CHECK(policy.rate_for_distance(30.0) == 1);
}

TEST_CASE("sample_flows is deterministic and well-formed", "[topology]") {
  const auto d = associate(generate_deployment(9, 30, 50.0, 21));
  const RatePolicy policy;
  const auto a = sample_flows(d, policy, 25, 5, 77);
  const auto b = sample_flows(d, policy, 25, 5, 77);
  REQUIRE(a.size() == 30);
  REQUIRE(b.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].src == b[i].src);
    CHECK(a[i].dst == b[i].dst);
    CHECK(a[i].id == static_cast<int>(i));
  }
  for (std::size_t i = 25; i < 30; ++i) {
    const bool touches_gw = a[i].src == d.gateway || a[i].dst == d.gateway;
    CHECK(touches_gw);
  }
}

TEST_CASE("fixture round-trips through JSON", "[topology]") {
  const auto fx = worked_example();
  const auto j = fixture_to_json(fx);
  const auto back = fixture_from_json(j);
  CHECK(fixture_to_json(back) == j);
  REQUIRE(back.flows.size() == 4);
  CHECK(back.flows[0].ordinary_path.size() == 3);
  CHECK(back.flows[0].ordinary_path[1].rate == 3);
  CHECK(back.flows[3].hop_count == 1);
}

TEST_CASE("checked-in fixture equals the built-in example", "[topology]") {
  const auto fx = load_fixture(std::string(D2DMAC_FIXTURE_DIR) + "/worked_example.json");
  CHECK(fixture_to_json(fx) == fixture_to_json(worked_example()));
  // the worked example's verbatim rate rows
  CHECK(fx.flows[0].ordinary_path[0].rate == 2);
  CHECK(fx.flows[0].ordinary_path[1].rate == 3);
  CHECK(fx.flows[0].ordinary_path[2].rate == 2);
  CHECK(fx.flows[1].ordinary_path[1].rate == 4);
  CHECK(fx.flows[2].ordinary_path[0].rate == 4);
  REQUIRE(fx.flows[1].direct_link);
  CHECK(fx.flows[1].direct_link->rate == 2);
  CHECK(fx.flows[2].direct_link->rate == 3);
  CHECK(fx.flows[3].direct_link->rate == 3);
  const std::vector<std::int64_t> demands{5, 6, 7, 8};
  for (int i = 0; i < 4; ++i) CHECK(fx.flows[i].demand == demands[i]);
}
