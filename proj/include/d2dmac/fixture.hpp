// Instance fixtures: a deployment plus fully specified flows (paths,
// rates, demands), loadable from JSON so hand-built scenarios are
// checked-in artifacts rather than generated ones.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2dmac/model.hpp"
#include "d2dmac/topology.hpp"

namespace d2dmac {

struct InstanceFixture {
  std::string name;
  Deployment deployment;
  std::vector<Flow> flows;

  std::vector<NodeKind> node_kinds() const { return deployment.kinds(); }
};

namespace detail {

inline NodeKind kind_from_string(const std::string& s) {
  if (s == "ap") return NodeKind::Ap;
  if (s == "wn") return NodeKind::Wn;
  if (s == "gateway") return NodeKind::Gateway;
  throw ConfigError("fixture: unknown node kind '" + s + "'");
}

inline std::string kind_to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Ap: return "ap";
    case NodeKind::Wn: return "wn";
    case NodeKind::Gateway: return "gateway";
  }
  return "?";
}

inline LinkKind link_kind_from_string(const std::string& s) {
  if (s == "access") return LinkKind::Access;
  if (s == "backhaul") return LinkKind::Backhaul;
  if (s == "direct") return LinkKind::Direct;
  throw ConfigError("fixture: unknown link kind '" + s + "'");
}

inline std::string link_kind_to_string(LinkKind k) {
  switch (k) {
    case LinkKind::Access: return "access";
    case LinkKind::Backhaul: return "backhaul";
    case LinkKind::Direct: return "direct";
  }
  return "?";
}

}  // namespace detail

inline nlohmann::ordered_json fixture_to_json(const InstanceFixture& fx) {
  nlohmann::ordered_json j;
  j["name"] = fx.name;
  j["area_side_m"] = fx.deployment.area_side;
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : fx.deployment.nodes) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["kind"] = detail::kind_to_string(n.kind);
    jn["pos"] = {n.x, n.y};
    if (n.associated_ap) jn["ap"] = *n.associated_ap;
    nodes.push_back(std::move(jn));
  }
  auto& edges = j["backhaul_edges"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : fx.deployment.backhaul_edges) edges.push_back({a, b});
  auto& flows = j["flows"] = nlohmann::ordered_json::array();
  for (const auto& f : fx.flows) {
    nlohmann::ordered_json jf;
    jf["id"] = f.id;
    jf["src"] = f.src;
    jf["dst"] = f.dst;
    jf["demand"] = f.demand;
    auto& hops = jf["ordinary_path"] = nlohmann::ordered_json::array();
    for (const auto& h : f.ordinary_path)
      hops.push_back({{"tx", h.tx},
                      {"rx", h.rx},
                      {"rate", h.rate},
                      {"kind", detail::link_kind_to_string(h.kind)}});
    if (f.direct_link) jf["direct_rate"] = f.direct_link->rate;
    flows.push_back(std::move(jf));
  }
  return j;
}

inline InstanceFixture fixture_from_json(const nlohmann::json& j) {
  InstanceFixture fx;
  fx.name = j.at("name").get<std::string>();
  fx.deployment.area_side = j.at("area_side_m").get<double>();
  for (const auto& jn : j.at("nodes")) {
    Node n;
    n.id = jn.at("id").get<int>();
    n.kind = detail::kind_from_string(jn.at("kind").get<std::string>());
    n.x = jn.at("pos").at(0).get<double>();
    n.y = jn.at("pos").at(1).get<double>();
    if (jn.contains("ap")) n.associated_ap = jn.at("ap").get<int>();
    if (n.kind == NodeKind::Gateway) fx.deployment.gateway = n.id;
    fx.deployment.nodes.push_back(n);
  }
  if (fx.deployment.gateway < 0) throw ConfigError("fixture: no gateway node");
  for (const auto& je : j.at("backhaul_edges"))
    fx.deployment.backhaul_edges.emplace_back(je.at(0).get<int>(), je.at(1).get<int>());
  for (const auto& jf : j.at("flows")) {
    Flow f;
    f.id = jf.at("id").get<int>();
    f.src = jf.at("src").get<int>();
    f.dst = jf.at("dst").get<int>();
    f.demand = jf.at("demand").get<std::int64_t>();
    for (const auto& jh : jf.at("ordinary_path")) {
      DirectionalLink h;
      h.tx = jh.at("tx").get<int>();
      h.rx = jh.at("rx").get<int>();
      h.rate = jh.at("rate").get<int>();
      h.kind = detail::link_kind_from_string(jh.at("kind").get<std::string>());
      f.ordinary_path.push_back(h);
    }
    f.hop_count = f.ordinary_path.empty() ? 1 : static_cast<int>(f.ordinary_path.size());
    if (jf.contains("direct_rate"))
      f.direct_link =
          DirectionalLink{f.src, f.dst, jf.at("direct_rate").get<int>(), LinkKind::Direct};
    fx.flows.push_back(std::move(f));
  }
  return fx;
}

inline InstanceFixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("fixture: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return fixture_from_json(j);
}

inline void save_fixture(const InstanceFixture& fx, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("fixture: cannot write " + path);
  out << fixture_to_json(fx).dump(2) << '\n';
}

/// The hand-built seven-node example: three cells, gateway AP1 in the
/// middle cell, four flows (A->B, B->C, gateway->B, D->gateway) with
/// demands [5, 6, 7, 8], verbatim per-hop rates and direct rates
/// [1, 2, 3, 3].
inline InstanceFixture worked_example() {
  InstanceFixture fx;
  fx.name = "worked-example";
  Deployment& d = fx.deployment;
  d.area_side = 50.0;
  d.gateway = 0;
  auto add_node = [&d](NodeId id, NodeKind k, double x, double y,
                       std::optional<NodeId> ap = std::nullopt) {
    Node n;
    n.id = id;
    n.kind = k;
    n.x = x;
    n.y = y;
    n.associated_ap = ap;
    d.nodes.push_back(n);
  };
  // AP1 is the gateway; A lives in AP2's cell, B in AP3's, C and D in AP1's.
  add_node(0, NodeKind::Gateway, 25.0, 15.0);
  add_node(1, NodeKind::Ap, 8.0, 40.0);
  add_node(2, NodeKind::Ap, 42.0, 40.0);
  add_node(3, NodeKind::Wn, 5.0, 36.0, 1);   // A
  add_node(4, NodeKind::Wn, 38.0, 37.0, 2);  // B
  add_node(5, NodeKind::Wn, 28.0, 18.0, 0);  // C
  add_node(6, NodeKind::Wn, 21.0, 12.0, 0);  // D
  d.backhaul_edges = {{0, 2}, {1, 2}};

  const NodeId ap1 = 0, ap2 = 1, ap3 = 2, a = 3, b = 4, c = 5, dd = 6;
  auto access = [](NodeId tx, NodeId rx, int rate) {
    return DirectionalLink{tx, rx, rate, LinkKind::Access};
  };
  auto backhaul = [](NodeId tx, NodeId rx, int rate) {
    return DirectionalLink{tx, rx, rate, LinkKind::Backhaul};
  };

  Flow f0;  // A -> B through AP2, AP3
  f0.id = 0;
  f0.src = a;
  f0.dst = b;
  f0.demand = 5;
  f0.ordinary_path = {access(a, ap2, 2), backhaul(ap2, ap3, 3), access(ap3, b, 2)};
  f0.hop_count = 3;
  f0.direct_link = DirectionalLink{a, b, 1, LinkKind::Direct};

  Flow f1;  // B -> C through AP3, AP1
  f1.id = 1;
  f1.src = b;
  f1.dst = c;
  f1.demand = 6;
  f1.ordinary_path = {access(b, ap3, 2), backhaul(ap3, ap1, 4), access(ap1, c, 2)};
  f1.hop_count = 3;
  f1.direct_link = DirectionalLink{b, c, 2, LinkKind::Direct};

  Flow f2;  // gateway -> B through AP3
  f2.id = 2;
  f2.src = ap1;
  f2.dst = b;
  f2.demand = 7;
  f2.ordinary_path = {backhaul(ap1, ap3, 4), access(ap3, b, 2)};
  f2.hop_count = 2;
  f2.direct_link = DirectionalLink{ap1, b, 3, LinkKind::Direct};

  Flow f3;  // D -> gateway: the single access hop is the direct path
  f3.id = 3;
  f3.src = dd;
  f3.dst = ap1;
  f3.demand = 8;
  f3.hop_count = 1;
  f3.direct_link = DirectionalLink{dd, ap1, 3, LinkKind::Direct};

  fx.flows = {f0, f1, f2, f3};
  return fx;
}

}  // namespace d2dmac
