// Exact joint path-selection + scheduling: the RLT-linearized MILP
// builder with portable LP-text export, and a desk-scale
// branch-and-bound oracle that proves optimal slot totals.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "d2dmac/model.hpp"
#include "d2dmac/pathsel.hpp"
#include "d2dmac/radio.hpp"
#include "d2dmac/sched.hpp"

namespace d2dmac {

// ---------------------------------------------------------------------
// MILP model representation and LP export
// ---------------------------------------------------------------------

struct MilpVariable {
  std::string name;
  double lb = 0.0;
  double ub = 0.0;
  bool binary = false;
  bool integer = false;  // general integer (non-binary)
};

struct MilpTerm {
  int var = -1;
  double coef = 0.0;
};

enum class ConstraintSense { Le, Ge, Eq };

struct MilpConstraint {
  std::string name;
  std::vector<MilpTerm> terms;
  ConstraintSense sense = ConstraintSense::Le;
  double rhs = 0.0;
};

struct MilpModel {
  std::vector<MilpVariable> vars;
  std::vector<MilpConstraint> cons;
  std::vector<MilpTerm> objective;  // minimized

  int add_var(std::string name, double lb, double ub, bool binary,
              bool integer = false) {
    vars.push_back({std::move(name), lb, ub, binary, integer});
    return static_cast<int>(vars.size()) - 1;
  }
  int var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name == name) return static_cast<int>(i);
    return -1;
  }

  /// Evaluate one constraint at a full assignment (index -> value).
  bool satisfied(const MilpConstraint& c, const std::vector<double>& x,
                 double tol = 1e-9) const {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    switch (c.sense) {
      case ConstraintSense::Le: return lhs <= c.rhs + tol;
      case ConstraintSense::Ge: return lhs >= c.rhs - tol;
      case ConstraintSense::Eq: return std::abs(lhs - c.rhs) <= tol;
    }
    return false;
  }

  double objective_value(const std::vector<double>& x) const {
    double v = 0.0;
    for (const auto& t : objective) v += t.coef * x[t.var];
    return v;
  }
};

namespace detail {

inline std::string format_coef(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void append_terms(std::string& out, const std::vector<MilpTerm>& terms,
                         const std::vector<MilpVariable>& vars) {
  bool first = true;
  for (const auto& t : terms) {
    const double c = t.coef;
    if (c == 0.0) continue;
    const double mag = std::abs(c);
    if (first) {
      if (c < 0.0) out += "- ";
      first = false;
    } else {
      out += (c < 0.0) ? " - " : " + ";
    }
    if (mag != 1.0) {
      out += format_coef(mag);
      out += ' ';
    }
    out += vars[t.var].name;
  }
  if (first) out += "0";
}

}  // namespace detail

/// Canonical LP-format text (CPLEX LP dialect): byte-identical for a
/// given model.
inline std::string export_lp(const MilpModel& m) {
  std::string out;
  out += "Minimize\n obj: ";
  detail::append_terms(out, m.objective, m.vars);
  out += "\nSubject To\n";
  for (const auto& c : m.cons) {
    out += ' ';
    out += c.name;
    out += ": ";
    detail::append_terms(out, c.terms, m.vars);
    switch (c.sense) {
      case ConstraintSense::Le: out += " <= "; break;
      case ConstraintSense::Ge: out += " >= "; break;
      case ConstraintSense::Eq: out += " = "; break;
    }
    out += detail::format_coef(c.rhs);
    out += '\n';
  }
  out += "Bounds\n";
  for (const auto& v : m.vars) {
    out += ' ';
    if (v.lb == v.ub) {
      out += v.name;
      out += " = ";
      out += detail::format_coef(v.lb);
    } else {
      out += detail::format_coef(v.lb);
      out += " <= ";
      out += v.name;
      out += " <= ";
      out += detail::format_coef(v.ub);
    }
    out += '\n';
  }
  bool any_gen = false;
  for (const auto& v : m.vars)
    if (v.integer && !v.binary) {
      if (!any_gen) {
        out += "Generals\n";
        any_gen = true;
      }
      out += ' ';
      out += v.name;
      out += '\n';
    }
  bool any_bin = false;
  for (const auto& v : m.vars)
    if (v.binary) {
      if (!any_bin) {
        out += "Binaries\n";
        any_bin = true;
      }
      out += ' ';
      out += v.name;
      out += '\n';
    }
  out += "End\n";
  return out;
}

// ---------------------------------------------------------------------
// MILP builder
// ---------------------------------------------------------------------

/// Instance for the exact solver: flows with both path options open.
struct ExactInstance {
  std::vector<Flow> flows;
  std::vector<NodeKind> node_kinds;
  FeasibilityCheck feasible;  // stage admission; always-pass by default

  int node_count() const { return static_cast<int>(node_kinds.size()); }
};

/// Geometry needed to emit the SINR constraints; only consulted when
/// sinr_mode is Geometric.
struct MilpSinrOptions {
  enum class Mode { Omit, Geometric } mode = Mode::Omit;
  RadioParams params;
  MsTable ms = MsTable::defaults();
  BeamModel beams = BeamModel::always_zero();
  std::vector<Point> positions;
};

/// Maximum possible stage length: max over ceil(d_i / c) for every
/// nonzero ordinary-hop and direct rate of flows with demand.
inline std::int64_t delta_max(const std::vector<Flow>& flows) {
  std::int64_t m = 0;
  for (const auto& f : flows) {
    if (f.demand <= 0) continue;
    for (const auto& h : f.ordinary_path)
      if (h.rate > 0) m = std::max(m, hop_weight(f.demand, h.rate));
    if (f.direct_link && f.direct_link->rate > 0)
      m = std::max(m, hop_weight(f.demand, f.direct_link->rate));
  }
  return m;
}

/// Default stage budget: enough stages to serialize every hop of every
/// flow's longer path option, so the optimum is always representable.
inline int default_stage_count(const std::vector<Flow>& flows) {
  int k = 0;
  for (const auto& f : flows) {
    if (f.demand <= 0) continue;
    k += std::max<std::size_t>(f.ordinary_path.size(), 1);
  }
  return std::max(k, 1);
}

/// Build the linearized scheduling MILP over K stages: demand coverage
/// via the RLT substitution variables u = delta*b and v = delta*a,
/// single activation, pairwise adjacency exclusion, same-path
/// exclusivity, hop ordering prefix constraints, and the RLT bound-factor
/// products. SINR constraints are emitted only in geometric mode (with
/// products of the endpoint activation variables); the default omits
/// them, which matches treating nonadjacent links as non-interfering.
inline MilpModel build_milp(const ExactInstance& inst, int stage_count,
                            const MilpSinrOptions& sinr = {}) {
  if (stage_count < 1) throw ConfigError("build_milp: need at least one stage");
  const int K = stage_count;
  const auto& flows = inst.flows;
  const std::int64_t dmax = delta_max(flows);

  MilpModel m;
  auto num = [](std::int64_t v) { return std::to_string(v); };

  // delta_k: stage lengths are whole time slots, so the stage variables
  // are general integers (a continuous relaxation admits fractional stage
  // lengths and understates the optimum).
  std::vector<int> delta(K);
  for (int k = 0; k < K; ++k)
    delta[k] = m.add_var("delta_" + num(k + 1), 0.0, static_cast<double>(dmax), false,
                         /*integer=*/true);
  for (int k = 0; k < K; ++k) m.objective.push_back({delta[k], 1.0});

  struct FlowVars {
    std::vector<int> a, v;               // per stage
    std::vector<std::vector<int>> b, u;  // per hop, per stage
  };
  std::vector<FlowVars> fv(flows.size());

  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    const std::string fi = num(f.id + 1);
    const bool a_free = f.demand > 0 && f.direct_unblocked();
    fv[i].a.resize(K);
    fv[i].v.resize(K);
    for (int k = 0; k < K; ++k) {
      fv[i].a[k] =
          m.add_var("a_" + fi + "_" + num(k + 1), 0.0, a_free ? 1.0 : 0.0, true);
      fv[i].v[k] = m.add_var("v_" + fi + "_" + num(k + 1), 0.0,
                             static_cast<double>(dmax), false);
    }
    fv[i].b.resize(f.ordinary_path.size());
    fv[i].u.resize(f.ordinary_path.size());
    for (std::size_t j = 0; j < f.ordinary_path.size(); ++j) {
      const bool b_free = f.demand > 0 && f.ordinary_path[j].rate > 0;
      for (int k = 0; k < K; ++k) {
        fv[i].b[j].push_back(m.add_var("b_" + fi + "_" + num(j + 1) + "_" + num(k + 1),
                                       0.0, b_free ? 1.0 : 0.0, true));
        fv[i].u[j].push_back(m.add_var("u_" + fi + "_" + num(j + 1) + "_" + num(k + 1),
                                       0.0, static_cast<double>(dmax), false));
      }
    }
  }

  auto add_con = [&m](std::string name, std::vector<MilpTerm> terms,
                      ConstraintSense s, double rhs) {
    m.cons.push_back({std::move(name), std::move(terms), s, rhs});
  };

  // Demand coverage, linearized: sum_k (u_ij^k c_ij + v_i^k c_i^d) >= d_i
  // for every hop position j of flows with positive demand (j = 1 alone
  // for flows without an ordinary path).
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    if (f.demand <= 0) continue;
    const int hops = std::max<int>(static_cast<int>(f.ordinary_path.size()), 1);
    for (int j = 0; j < hops; ++j) {
      std::vector<MilpTerm> t;
      if (j < static_cast<int>(f.ordinary_path.size()) && f.ordinary_path[j].rate > 0)
        for (int k = 0; k < K; ++k)
          t.push_back({fv[i].u[j][k], static_cast<double>(f.ordinary_path[j].rate)});
      if (f.direct_link && f.direct_link->rate > 0)
        for (int k = 0; k < K; ++k)
          t.push_back({fv[i].v[k], static_cast<double>(f.direct_link->rate)});
      add_con("cover_" + num(f.id + 1) + "_" + num(j + 1), std::move(t),
              ConstraintSense::Ge, static_cast<double>(f.demand));
    }
  }

  // Single activation: sum_k (b_ij^k + a_i^k) = 1 per hop position.
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    if (f.demand <= 0) continue;
    const int hops = std::max<int>(static_cast<int>(f.ordinary_path.size()), 1);
    for (int j = 0; j < hops; ++j) {
      std::vector<MilpTerm> t;
      if (j < static_cast<int>(f.ordinary_path.size()))
        for (int k = 0; k < K; ++k) t.push_back({fv[i].b[j][k], 1.0});
      for (int k = 0; k < K; ++k) t.push_back({fv[i].a[k], 1.0});
      add_con("act_" + num(f.id + 1) + "_" + num(j + 1), std::move(t),
              ConstraintSense::Eq, 1.0);
    }
  }

  // Adjacency exclusion, for every stage and every adjacent pair of
  // schedulable links (ordinary-ordinary, direct-direct, direct-ordinary).
  struct LinkRef {
    int flow_pos;
    int hop;  // kDirectHop for direct
    DirectionalLink link;
  };
  std::vector<LinkRef> refs;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    if (f.demand <= 0) continue;
    for (std::size_t j = 0; j < f.ordinary_path.size(); ++j)
      if (f.ordinary_path[j].rate > 0)
        refs.push_back({static_cast<int>(i), static_cast<int>(j), f.ordinary_path[j]});
    if (f.direct_unblocked())
      refs.push_back({static_cast<int>(i), kDirectHop, *f.direct_link});
  }
  auto var_of = [&](const LinkRef& r, int k) {
    return r.hop == kDirectHop ? fv[r.flow_pos].a[k] : fv[r.flow_pos].b[r.hop][k];
  };
  auto ref_name = [&](const LinkRef& r) {
    const std::string fi = num(flows[r.flow_pos].id + 1);
    return r.hop == kDirectHop ? "d" + fi : "b" + fi + "_" + num(r.hop + 1);
  };
  for (std::size_t x = 0; x < refs.size(); ++x) {
    for (std::size_t y = x + 1; y < refs.size(); ++y) {
      if (refs[x].flow_pos == refs[y].flow_pos) continue;  // handled below
      if (!are_adjacent(refs[x].link, refs[y].link)) continue;
      for (int k = 0; k < K; ++k)
        add_con("adj_" + ref_name(refs[x]) + "_" + ref_name(refs[y]) + "_" + num(k + 1),
                {{var_of(refs[x], k), 1.0}, {var_of(refs[y], k), 1.0}},
                ConstraintSense::Le, 1.0);
    }
  }

  // Same-path exclusivity: at most one hop of a flow per stage.
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    if (f.demand <= 0 || f.ordinary_path.size() < 2) continue;
    for (int k = 0; k < K; ++k) {
      std::vector<MilpTerm> t;
      for (std::size_t j = 0; j < f.ordinary_path.size(); ++j)
        t.push_back({fv[i].b[j][k], 1.0});
      add_con("path_" + num(f.id + 1) + "_" + num(k + 1), std::move(t),
              ConstraintSense::Le, 1.0);
    }
  }

  // Hop ordering prefix constraints, one per prefix length.
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    if (f.demand <= 0 || f.ordinary_path.size() < 2) continue;
    for (std::size_t j = 0; j + 1 < f.ordinary_path.size(); ++j) {
      for (int kstar = 1; kstar <= K; ++kstar) {
        std::vector<MilpTerm> t;
        for (int k = 0; k < kstar; ++k) {
          t.push_back({fv[i].b[j][k], 1.0});
          t.push_back({fv[i].b[j + 1][k], -1.0});
        }
        add_con("order_" + num(f.id + 1) + "_" + num(j + 1) + "_" + num(kstar),
                std::move(t), ConstraintSense::Ge, 0.0);
      }
    }
  }

  // RLT bound-factor products for u = delta*b and v = delta*a:
  //   dmax*b - u >= 0;  delta - u >= 0;  dmax - delta - dmax*b + u >= 0.
  // (u >= 0 is the variable bound.)
  auto rlt = [&](const std::string& tag, int prod, int bin, int k) {
    const double dm = static_cast<double>(dmax);
    add_con("rlt1_" + tag, {{bin, dm}, {prod, -1.0}}, ConstraintSense::Ge, 0.0);
    add_con("rlt2_" + tag, {{delta[k], 1.0}, {prod, -1.0}}, ConstraintSense::Ge, 0.0);
    add_con("rlt3_" + tag, {{delta[k], -1.0}, {bin, -dm}, {prod, 1.0}},
            ConstraintSense::Ge, -dm);
  };
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    const std::string fi = num(f.id + 1);
    for (std::size_t j = 0; j < f.ordinary_path.size(); ++j)
      for (int k = 0; k < K; ++k)
        rlt("u_" + fi + "_" + num(j + 1) + "_" + num(k + 1), fv[i].u[j][k],
            fv[i].b[j][k], k);
    for (int k = 0; k < K; ++k)
      rlt("v_" + fi + "_" + num(k + 1), fv[i].v[k], fv[i].a[k], k);
  }

  // SINR constraints (geometric mode only). For a target link t active in
  // stage k, with constant beam indicators f and pairwise products z of
  // the activation binaries:
  //   (l_t^-g - MS*W*N0/(k0*Pt)) x_t - MS*rho * sum_s f_st l_st^-g z_st >= 0.
  if (sinr.mode == MilpSinrOptions::Mode::Geometric) {
    const auto& pos = sinr.positions;
    const double g = sinr.params.path_loss_exponent;
    const double noise_scaled =
        sinr.params.noise_w() / (sinr.params.k0 * sinr.params.transmit_power_w);
    std::map<std::pair<int, int>, int> prod;  // (min var, max var) -> z var
    auto product_var = [&](int x, int y) {
      const auto key = std::minmax(x, y);
      auto it = prod.find(key);
      if (it != prod.end()) return it->second;
      const int z = m.add_var("z_" + m.vars[key.first].name + "__" +
                                  m.vars[key.second].name,
                              0.0, 1.0, false);
      // z = x*y via the binary bound-factor products
      add_con("zp1_" + m.vars[z].name, {{x, 1.0}, {z, -1.0}}, ConstraintSense::Ge, 0.0);
      add_con("zp2_" + m.vars[z].name, {{y, 1.0}, {z, -1.0}}, ConstraintSense::Ge, 0.0);
      add_con("zp3_" + m.vars[z].name, {{x, -1.0}, {y, -1.0}, {z, 1.0}},
              ConstraintSense::Ge, -1.0);
      prod.emplace(key, z);
      return z;
    };
    for (const auto& target : refs) {
      const double l_t = distance(pos[target.link.tx], pos[target.link.rx]);
      const double ms = sinr.ms.min_sinr(target.link.rate);
      const double self = std::pow(l_t, -g) - ms * noise_scaled;
      for (int k = 0; k < K; ++k) {
        std::vector<MilpTerm> t;
        t.push_back({var_of(target, k), self});
        bool any = false;
        for (const auto& other : refs) {
          if (&other == &target) continue;
          if (are_adjacent(target.link, other.link)) continue;  // never concurrent
          const int f = sinr.beams.indicator(pos[other.link.tx], pos[other.link.rx],
                                             pos[target.link.rx], pos[target.link.tx]);
          if (f == 0) continue;
          const double l_st = distance(pos[other.link.tx], pos[target.link.rx]);
          t.push_back({product_var(var_of(target, k), var_of(other, k)),
                       -ms * sinr.params.mui_factor * std::pow(l_st, -g)});
          any = true;
        }
        if (any)
          add_con("sinr_" + ref_name(target) + "_" + num(k + 1), std::move(t),
                  ConstraintSense::Ge, 0.0);
      }
    }
  }

  return m;
}

/// Embed a concrete schedule into the MILP's variable space
/// (u = delta*b, v = delta*a). Used to cross-check model soundness:
/// every valid schedule must satisfy every constraint.
inline std::vector<double> embed_schedule(const MilpModel& m,
                                          const Schedule& sched) {
  std::vector<double> x(m.vars.size(), 0.0);
  for (std::size_t k = 0; k < sched.stages.size(); ++k) {
    const auto& st = sched.stages[k];
    const std::string ks = std::to_string(k + 1);
    const int dvar = m.var_index("delta_" + ks);
    if (dvar < 0) throw ConfigError("embed_schedule: schedule has more stages than model");
    x[dvar] = static_cast<double>(st.slots);
    for (const auto& sl : st.links) {
      const std::string fi = std::to_string(sl.flow + 1);
      if (sl.hop == kDirectHop) {
        x[m.var_index("a_" + fi + "_" + ks)] = 1.0;
        x[m.var_index("v_" + fi + "_" + ks)] = static_cast<double>(st.slots);
      } else {
        const std::string tag = fi + "_" + std::to_string(sl.hop + 1) + "_" + ks;
        x[m.var_index("b_" + tag)] = 1.0;
        x[m.var_index("u_" + tag)] = static_cast<double>(st.slots);
      }
    }
  }
  // product variables, when present
  for (std::size_t v = 0; v < m.vars.size(); ++v) {
    const std::string& n = m.vars[v].name;
    if (n.rfind("z_", 0) == 0) {
      const auto sep = n.find("__");
      const int a = m.var_index(n.substr(2, sep - 2));
      const int b = m.var_index(n.substr(sep + 2));
      x[v] = x[a] * x[b];
    }
  }
  return x;
}

// ---------------------------------------------------------------------
// Branch-and-bound oracle
// ---------------------------------------------------------------------

struct ExactLimits {
  int max_flows = 6;
  int max_total_hops = 14;
  double time_budget_s = 60.0;
};

struct ExactSolution {
  std::int64_t total_slots = 0;
  Schedule schedule;
  std::map<int, PathChoice> choices;
  std::uint64_t nodes_explored = 0;
  std::uint64_t assignments_tried = 0;
  bool proven_optimal = true;
};

class LimitsExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Cost-to-go over "per-path progress" states for one fixed path
// assignment. Depth-first over stage compositions with memoization; the
// admissible bound used for reporting/pruning is the largest per-flow sum
// of remaining hop weights (a flow's hops occupy distinct stages).
class StageSearch {
 public:
  StageSearch(const std::vector<PlannedPath>& paths, int node_count,
              const FeasibilityCheck& feasible)
      : paths_(paths), max_links_(std::max(1, node_count / 2)), feasible_(feasible) {
    radix_.resize(paths.size());
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      radix_[i] = r;
      r *= paths[i].hops.size() + 1;
    }
  }

  std::uint64_t nodes() const { return nodes_; }

  std::int64_t lower_bound(const std::vector<std::size_t>& next) const {
    std::int64_t lb = 0;
    for (std::size_t i = 0; i < paths_.size(); ++i) {
      std::int64_t chain = 0;
      for (std::size_t h = next[i]; h < paths_[i].hops.size(); ++h)
        chain += paths_[i].weight(h);
      lb = std::max(lb, chain);
    }
    return lb;
  }

  // Exact minimum total slots from `next`, with the best first stage per
  // state recorded for witness reconstruction.
  std::int64_t solve(std::vector<std::size_t>& next) {
    ++nodes_;
    const std::uint64_t key = encode(next);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second.cost;

    std::vector<int> avail;
    for (std::size_t i = 0; i < paths_.size(); ++i)
      if (next[i] < paths_[i].hops.size()) avail.push_back(static_cast<int>(i));
    if (avail.empty()) {
      memo_[key] = {0, 0};
      return 0;
    }

    std::int64_t best = kInf;
    std::uint32_t best_mask = 0;
    const std::uint32_t full = (1u << avail.size()) - 1u;
    std::vector<ScheduledLink> stage;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      if (static_cast<int>(popcount(mask)) > max_links_) continue;
      stage.clear();
      std::int64_t dstage = 0;
      bool ok = true;
      for (std::size_t s = 0; s < avail.size() && ok; ++s) {
        if (!(mask & (1u << s))) continue;
        const PlannedPath& p = paths_[avail[s]];
        const DirectionalLink& link = p.hops[next[avail[s]]];
        for (const auto& placed : stage)
          if (are_adjacent(placed.link, link)) {
            ok = false;
            break;
          }
        if (!ok) break;
        stage.push_back({p.flow_id, p.hop_tag(next[avail[s]]), link});
        dstage = std::max(dstage, p.weight(next[avail[s]]));
      }
      if (!ok || !feasible_(stage)) continue;

      for (std::size_t s = 0; s < avail.size(); ++s)
        if (mask & (1u << s)) ++next[avail[s]];
      const std::int64_t rest = solve(next);
      for (std::size_t s = 0; s < avail.size(); ++s)
        if (mask & (1u << s)) --next[avail[s]];

      if (rest < kInf && dstage + rest < best) {
        best = dstage + rest;
        best_mask = mask;
      }
    }
    memo_[key] = {best, best_mask};
    return best;
  }

  Schedule reconstruct(std::vector<std::size_t> next) const {
    Schedule sched;
    while (true) {
      std::vector<int> avail;
      for (std::size_t i = 0; i < paths_.size(); ++i)
        if (next[i] < paths_[i].hops.size()) avail.push_back(static_cast<int>(i));
      if (avail.empty()) break;
      const auto& entry = memo_.at(encode(next));
      Stage st;
      for (std::size_t s = 0; s < avail.size(); ++s) {
        if (!(entry.mask & (1u << s))) continue;
        const PlannedPath& p = paths_[avail[s]];
        st.links.push_back({p.flow_id, p.hop_tag(next[avail[s]]), p.hops[next[avail[s]]]});
        st.slots = std::max(st.slots, p.weight(next[avail[s]]));
      }
      for (std::size_t s = 0; s < avail.size(); ++s)
        if (entry.mask & (1u << s)) ++next[avail[s]];
      sched.stages.push_back(std::move(st));
    }
    return sched;
  }

  static constexpr std::int64_t kInf = (1LL << 62);

 private:
  static int popcount(std::uint32_t v) {
    int c = 0;
    while (v) {
      v &= v - 1;
      ++c;
    }
    return c;
  }
  std::uint64_t encode(const std::vector<std::size_t>& next) const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < next.size(); ++i) k += radix_[i] * next[i];
    return k;
  }

  struct Entry {
    std::int64_t cost;
    std::uint32_t mask;
  };
  const std::vector<PlannedPath>& paths_;
  int max_links_;
  const FeasibilityCheck& feasible_;
  std::vector<std::uint64_t> radix_;
  std::unordered_map<std::uint64_t, Entry> memo_;
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

/// Provably optimal total slot count over both the per-flow path
/// assignment and the stage composition, with a witness schedule.
/// Instances beyond the limits are refused; an exhausted time budget
/// returns the best solution found with proven_optimal = false.
inline ExactSolution solve_exact(const ExactInstance& inst,
                                 const ExactLimits& limits = {}) {
  std::vector<const Flow*> active;
  int total_hops = 0;
  for (const auto& f : inst.flows) {
    if (f.demand <= 0) continue;
    active.push_back(&f);
    total_hops += std::max<int>(static_cast<int>(f.ordinary_path.size()), 1);
  }
  if (static_cast<int>(active.size()) > limits.max_flows)
    throw LimitsExceededError("solve_exact: " + std::to_string(active.size()) +
                              " flows exceed the limit of " +
                              std::to_string(limits.max_flows));
  if (total_hops > limits.max_total_hops)
    throw LimitsExceededError("solve_exact: " + std::to_string(total_hops) +
                              " total hops exceed the limit of " +
                              std::to_string(limits.max_total_hops));

  ExactSolution sol;
  sol.total_slots = detail::StageSearch::kInf;
  if (active.empty()) {
    sol.total_slots = 0;
    return sol;
  }

  // Path options per flow, ordinary first so equal-cost optima prefer the
  // ordinary assignment deterministically.
  std::vector<std::vector<PathChoice>> options(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]->ordinary_unblocked()) options[i].push_back(PathChoice::Ordinary);
    if (active[i]->direct_unblocked()) options[i].push_back(PathChoice::Direct);
    if (options[i].empty())
      throw UnschedulableFlowError("flow " + std::to_string(active[i]->id) +
                                   ": both paths blocked");
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
           limits.time_budget_s;
  };

  std::vector<std::size_t> choice(active.size(), 0);
  while (true) {
    ++sol.assignments_tried;
    std::vector<PlannedPath> paths;
    paths.reserve(active.size());
    for (std::size_t i = 0; i < active.size(); ++i)
      paths.push_back(plan_path(*active[i], options[i][choice[i]]));

    detail::StageSearch search(paths, inst.node_count(), inst.feasible);
    std::vector<std::size_t> next(paths.size(), 0);
    if (search.lower_bound(next) < sol.total_slots) {
      const std::int64_t total = search.solve(next);
      sol.nodes_explored += search.nodes();
      if (total < sol.total_slots) {
        sol.total_slots = total;
        sol.schedule = search.reconstruct(next);
        sol.choices.clear();
        for (std::size_t i = 0; i < active.size(); ++i)
          sol.choices[active[i]->id] = options[i][choice[i]];
      }
    }

    if (out_of_time()) {
      sol.proven_optimal = false;
      break;
    }
    // next assignment (mixed-radix increment)
    std::size_t pos = 0;
    while (pos < choice.size()) {
      if (++choice[pos] < options[pos].size()) break;
      choice[pos] = 0;
      ++pos;
    }
    if (pos == choice.size()) break;
  }

  if (sol.total_slots >= detail::StageSearch::kInf)
    throw UnschedulableFlowError("solve_exact: no feasible schedule found");
  return sol;
}

}  // namespace d2dmac
