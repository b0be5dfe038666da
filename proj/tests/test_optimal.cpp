#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "d2dmac/fixture.hpp"
#include "d2dmac/optimal.hpp"

using namespace d2dmac;

namespace {

ExactInstance random_exact_instance(std::mt19937_64& rng, int max_flows,
                                    int max_hops_per_flow) {
  ExactInstance inst;
  const int nodes = 6 + static_cast<int>(rng() % 6);
  inst.node_kinds.assign(nodes, NodeKind::Wn);
  inst.node_kinds[0] = NodeKind::Gateway;
  const int flows = 1 + static_cast<int>(rng() % max_flows);
  for (int f = 0; f < flows; ++f) {
    Flow fl;
    fl.id = f;
    fl.demand = 1 + static_cast<int>(rng() % 8);
    const int hops = 1 + static_cast<int>(rng() % max_hops_per_flow);
    NodeId cur = static_cast<int>(rng() % nodes);
    fl.src = cur;
    for (int h = 0; h < hops; ++h) {
      NodeId next = cur;
      while (next == cur) next = static_cast<int>(rng() % nodes);
      fl.ordinary_path.push_back({cur, next, 1 + static_cast<int>(rng() % 3),
                                  LinkKind::Access});
      cur = next;
    }
    fl.dst = cur;
    fl.hop_count = hops;
    if (rng() & 1)
      fl.direct_link = DirectionalLink{fl.src, fl.dst, 1 + static_cast<int>(rng() % 3),
                                       LinkKind::Direct};
    if (hops == 1 && !fl.direct_link) {
      // keep single-hop flows schedulable on at least one route
      fl.direct_link = DirectionalLink{fl.src, fl.dst, 1, LinkKind::Direct};
    }
    inst.flows.push_back(std::move(fl));
  }
  return inst;
}

int total_hops(const ExactInstance& inst) {
  int h = 0;
  for (const auto& f : inst.flows) h += std::max<int>(1, f.ordinary_path.size());
  return h;
}

// Unpruned enumeration over (path assignment) x (stage sequences): the
// plain-recursion oracle the solver is checked against. Exponential, so
// callers keep total hop counts small.
struct Enumerator {
  const std::vector<PlannedPath>& paths;
  int max_links;

  std::int64_t best = detail::StageSearch::kInf;

  void run(std::vector<std::size_t>& next, std::int64_t cost) {
    std::vector<int> avail;
    for (std::size_t i = 0; i < paths.size(); ++i)
      if (next[i] < paths[i].hops.size()) avail.push_back(static_cast<int>(i));
    if (avail.empty()) {
      best = std::min(best, cost);
      return;
    }
    const std::uint32_t full = (1u << avail.size()) - 1u;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      std::vector<DirectionalLink> stage;
      std::int64_t dstage = 0;
      bool ok = true;
      int picked = 0;
      for (std::size_t s = 0; s < avail.size() && ok; ++s) {
        if (!(mask & (1u << s))) continue;
        ++picked;
        if (picked > max_links) {
          ok = false;
          break;
        }
        const auto& p = paths[avail[s]];
        const auto& link = p.hops[next[avail[s]]];
        for (const auto& placed : stage)
          if (are_adjacent(placed, link)) ok = false;
        stage.push_back(link);
        dstage = std::max(dstage, p.weight(next[avail[s]]));
      }
      if (!ok) continue;
      for (std::size_t s = 0; s < avail.size(); ++s)
        if (mask & (1u << s)) ++next[avail[s]];
      run(next, cost + dstage);
      for (std::size_t s = 0; s < avail.size(); ++s)
        if (mask & (1u << s)) --next[avail[s]];
    }
  }
};

std::int64_t enumerate_optimum(const ExactInstance& inst) {
  std::vector<std::vector<PathChoice>> options(inst.flows.size());
  for (std::size_t i = 0; i < inst.flows.size(); ++i) {
    if (inst.flows[i].ordinary_unblocked()) options[i].push_back(PathChoice::Ordinary);
    if (inst.flows[i].direct_unblocked()) options[i].push_back(PathChoice::Direct);
    REQUIRE_FALSE(options[i].empty());
  }
  std::int64_t best = detail::StageSearch::kInf;
  std::vector<std::size_t> choice(inst.flows.size(), 0);
  while (true) {
    std::vector<PlannedPath> paths;
    for (std::size_t i = 0; i < inst.flows.size(); ++i)
      paths.push_back(plan_path(inst.flows[i], options[i][choice[i]]));
    Enumerator e{paths, std::max(1, inst.node_count() / 2)};
    std::vector<std::size_t> next(paths.size(), 0);
    e.run(next, 0);
    best = std::min(best, e.best);
    std::size_t pos = 0;
    while (pos < choice.size()) {
      if (++choice[pos] < options[pos].size()) break;
      choice[pos] = 0;
      ++pos;
    }
    if (pos == choice.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("exact solver reproduces the worked-example optimum", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  const auto sol = solve_exact(inst);
  CHECK(sol.total_slots == 9);
  CHECK(sol.proven_optimal);
  CHECK(sol.choices.at(0) == PathChoice::Ordinary);
  CHECK(sol.choices.at(1) == PathChoice::Direct);
  CHECK(sol.choices.at(2) == PathChoice::Direct);
  CHECK(sol.choices.at(3) == PathChoice::Direct);
  CHECK(sol.schedule.total_slots() == 9);
  CHECK(validate_schedule(sol.schedule, fx.flows, 7).ok());
}

TEST_CASE("exact solver trivial cases", "[optimal]") {
  ExactInstance inst;
  inst.node_kinds.assign(2, NodeKind::Wn);
  Flow f;
  f.id = 0;
  f.src = 0;
  f.dst = 1;
  f.demand = 4;
  f.direct_link = DirectionalLink{0, 1, 2, LinkKind::Direct};
  inst.flows.push_back(f);
  CHECK(solve_exact(inst).total_slots == 2);

  ExactInstance empty;
  empty.node_kinds.assign(2, NodeKind::Wn);
  CHECK(solve_exact(empty).total_slots == 0);

  // zero-demand flows are ignored
  inst.flows[0].demand = 0;
  CHECK(solve_exact(inst).total_slots == 0);
}

TEST_CASE("exact solver refuses oversized instances", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  ExactLimits limits;
  limits.max_flows = 2;
  CHECK_THROWS_AS(solve_exact(inst, limits), LimitsExceededError);
  limits.max_flows = 6;
  limits.max_total_hops = 3;
  CHECK_THROWS_AS(solve_exact(inst, limits), LimitsExceededError);
}

TEST_CASE("exhausted time budget returns best-found unproven", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  ExactLimits limits;
  limits.time_budget_s = 0.0;  // stop after the first assignment
  const auto sol = solve_exact(inst, limits);
  CHECK_FALSE(sol.proven_optimal);
  CHECK(sol.total_slots >= 9);
  CHECK(validate_schedule(sol.schedule, fx.flows, 7).ok());
}

TEST_CASE("exact solver matches exhaustive enumeration", "[optimal]") {
  std::mt19937_64 rng(101);
  int checked = 0;
  while (checked < 100) {
    const auto inst = random_exact_instance(rng, 3, 2);
    if (total_hops(inst) > 6) continue;
    ++checked;
    const auto sol = solve_exact(inst);
    CHECK(sol.total_slots == enumerate_optimum(inst));
    CHECK(validate_schedule(sol.schedule, inst.flows, inst.node_count()).ok());
  }
}

TEST_CASE("exact optimum never exceeds the greedy schedule", "[optimal]") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_exact_instance(rng, 4, 3);
    const auto sol = solve_exact(inst);

    std::map<int, PathChoice> greedy_choices;
    for (const auto& f : inst.flows) greedy_choices[f.id] = select_path(f, 2.0);
    const auto ginst = make_instance(inst.flows, greedy_choices, inst.node_kinds);
    const Schedule greedy = d2dmac_schedule(ginst);
    CHECK(sol.total_slots <= greedy.total_slots());
    CHECK(validate_schedule(sol.schedule, inst.flows, inst.node_count()).ok());
  }
}

TEST_CASE("milp builder emits the deterministic variable family", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  const int K = default_stage_count(fx.flows);
  CHECK(K == 9);  // 3 + 3 + 2 + 1 hop positions
  const auto m = build_milp(inst, K);

  CHECK(m.var_index("delta_1") >= 0);
  CHECK(m.var_index("b_1_1_1") >= 0);
  CHECK(m.var_index("u_1_3_9") >= 0);
  CHECK(m.var_index("a_4_9") >= 0);
  CHECK(m.var_index("v_4_1") >= 0);
  CHECK(m.var_index("b_4_1_1") < 0);  // no ordinary path for flow 4

  // counts from the index-set definitions: delta K; per flow K a's and
  // K v's; per ordinary hop K b's and K u's
  int hops = 0;
  for (const auto& f : fx.flows) hops += static_cast<int>(f.ordinary_path.size());
  CHECK(static_cast<int>(m.vars.size()) == K + 2 * 4 * K + 2 * hops * K);

  // constraint families, counted the same way the builder indexes them
  int cover = 0, act = 0, adj = 0, path = 0, order = 0, rlt = 0;
  struct Ref {
    int flow;
    DirectionalLink link;
  };
  std::vector<Ref> refs;
  for (const auto& f : fx.flows) {
    const int positions = std::max<int>(1, f.ordinary_path.size());
    cover += positions;
    act += positions;
    if (f.ordinary_path.size() >= 2) {
      path += K;
      order += static_cast<int>(f.ordinary_path.size() - 1) * K;
    }
    for (const auto& h : f.ordinary_path) refs.push_back({f.id, h});
    if (f.direct_link) refs.push_back({f.id, *f.direct_link});
    rlt += 3 * K * (1 + static_cast<int>(f.ordinary_path.size()));
  }
  for (std::size_t a = 0; a < refs.size(); ++a)
    for (std::size_t b = a + 1; b < refs.size(); ++b)
      if (refs[a].flow != refs[b].flow && are_adjacent(refs[a].link, refs[b].link))
        adj += K;
  CHECK(static_cast<int>(m.cons.size()) == cover + act + adj + path + order + rlt);
}

TEST_CASE("valid schedules satisfy every milp constraint", "[optimal]") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_exact_instance(rng, 3, 3);
    const auto sol = solve_exact(inst);
    const int K = std::max<int>(default_stage_count(inst.flows),
                                static_cast<int>(sol.schedule.stages.size()));
    const auto m = build_milp(inst, K);
    const auto x = embed_schedule(m, sol.schedule);
    for (const auto& c : m.cons) {
      INFO(c.name);
      CHECK(m.satisfied(c, x));
    }
    CHECK(m.objective_value(x) == Catch::Approx(sol.total_slots));
  }
}

TEST_CASE("padding the stage budget keeps embeddings feasible", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  const auto sol = solve_exact(inst);
  for (int extra : {0, 3}) {
    const auto m = build_milp(inst, default_stage_count(fx.flows) + extra);
    const auto x = embed_schedule(m, sol.schedule);
    for (const auto& c : m.cons) {
      INFO(c.name);
      CHECK(m.satisfied(c, x));
    }
    CHECK(m.objective_value(x) == Catch::Approx(9.0));
  }
}

TEST_CASE("lp export is byte-stable and matches the golden file", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  const auto m = build_milp(inst, default_stage_count(fx.flows));
  const std::string text_a = export_lp(m);
  const std::string text_b = export_lp(build_milp(inst, default_stage_count(fx.flows)));
  CHECK(text_a == text_b);

  std::ifstream golden(std::string(D2DMAC_FIXTURE_DIR) + "/worked_example.lp",
                       std::ios::binary);
  REQUIRE(golden.good());
  std::stringstream buf;
  buf << golden.rdbuf();
  CHECK(text_a == buf.str());
}

TEST_CASE("empty instances export a trivial model", "[optimal]") {
  ExactInstance empty;
  empty.node_kinds.assign(2, NodeKind::Wn);
  const auto m = build_milp(empty, 1);
  const std::string text = export_lp(m);
  CHECK(text.find("Minimize") == 0);
  CHECK(text.find("delta_1") != std::string::npos);
  CHECK(m.cons.empty());
  CHECK(m.vars.size() == 1);
  CHECK(m.vars[0].ub == 0.0);  // delta_max of an empty instance
}

namespace {

// minimal parser for the exporter's own dialect, used to check the text
// round-trips into an equivalent model
struct ParsedLp {
  std::map<std::string, std::map<std::string, double>> rows;  // name -> terms
  std::map<std::string, std::pair<char, double>> senses;      // name -> sense, rhs
  std::map<std::string, std::pair<double, double>> bounds;
  std::set<std::string> integers;
  std::map<std::string, double> objective;
};

ParsedLp parse_lp(const std::string& text) {
  ParsedLp lp;
  std::istringstream in(text);
  std::string line, section;
  auto parse_terms = [](const std::string& expr) {
    std::map<std::string, double> terms;
    std::istringstream ts(expr);
    std::string tok;
    double sign = 1.0, coef = 1.0;
    bool have_coef = false;
    while (ts >> tok) {
      if (tok == "+") {
        sign = 1.0;
        coef = 1.0;
        have_coef = false;
      } else if (tok == "-") {
        sign = -1.0;
        coef = 1.0;
        have_coef = false;
      } else if (std::isdigit(tok[0]) || tok[0] == '.') {
        coef = std::stod(tok);
        have_coef = true;
        (void)have_coef;
      } else {
        terms[tok] += sign * coef;
        sign = 1.0;
        coef = 1.0;
      }
    }
    return terms;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "Minimize" || line == "Subject To" || line == "Bounds" ||
        line == "Generals" || line == "Binaries" || line == "End") {
      section = line;
      continue;
    }
    const std::string body = line.substr(1);  // leading space
    if (section == "Minimize") {
      lp.objective = parse_terms(body.substr(body.find(':') + 1));
    } else if (section == "Subject To") {
      const auto colon = body.find(':');
      const std::string name = body.substr(0, colon);
      std::string rest = body.substr(colon + 1);
      char sense;
      std::size_t pos;
      if ((pos = rest.find("<=")) != std::string::npos) sense = 'L';
      else if ((pos = rest.find(">=")) != std::string::npos) sense = 'G';
      else {
        pos = rest.find(" = ");
        sense = 'E';
      }
      const double rhs = std::stod(rest.substr(pos + (sense == 'E' ? 3 : 2)));
      lp.rows[name] = parse_terms(rest.substr(0, pos));
      lp.senses[name] = {sense, rhs};
    } else if (section == "Bounds") {
      if (body.find("<=") != std::string::npos) {
        std::istringstream bs(body);
        double lo, hi;
        std::string le1, name, le2;
        bs >> lo >> le1 >> name >> le2 >> hi;
        lp.bounds[name] = {lo, hi};
      } else {
        std::istringstream bs(body);
        std::string name, eq;
        double v;
        bs >> name >> eq >> v;
        lp.bounds[name] = {v, v};
      }
    } else if (section == "Generals" || section == "Binaries") {
      lp.integers.insert(body);
    }
  }
  return lp;
}

}  // namespace

TEST_CASE("lp text round-trips into an equivalent model", "[optimal]") {
  const auto fx = worked_example();
  ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  const auto m = build_milp(inst, 4);
  const auto lp = parse_lp(export_lp(m));

  REQUIRE(lp.rows.size() == m.cons.size());
  REQUIRE(lp.bounds.size() == m.vars.size());
  for (const auto& v : m.vars) {
    const auto& [lo, hi] = lp.bounds.at(v.name);
    CHECK(lo == v.lb);
    CHECK(hi == v.ub);
    CHECK(lp.integers.count(v.name) == static_cast<std::size_t>(v.binary || v.integer));
  }
  for (const auto& c : m.cons) {
    const auto& terms = lp.rows.at(c.name);
    std::map<std::string, double> want;
    for (const auto& t : c.terms)
      if (t.coef != 0.0) want[m.vars[t.var].name] += t.coef;
    CHECK(terms == want);
    const auto& [sense, rhs] = lp.senses.at(c.name);
    CHECK(rhs == c.rhs);
    CHECK(sense == (c.sense == ConstraintSense::Le
                        ? 'L'
                        : c.sense == ConstraintSense::Ge ? 'G' : 'E'));
  }
  std::map<std::string, double> obj;
  for (const auto& t : m.objective) obj[m.vars[t.var].name] += t.coef;
  CHECK(lp.objective == obj);
}

TEST_CASE("geometric-mode milp carries linearized sinr rows", "[optimal]") {
  std::vector<Point> pos = {{0, 0}, {2, 0}, {-4, 0}, {-2, 0}};
  ExactInstance inst;
  inst.node_kinds.assign(4, NodeKind::Wn);
  for (int f = 0; f < 2; ++f) {
    Flow fl;
    fl.id = f;
    fl.src = f == 0 ? 0 : 2;
    fl.dst = f == 0 ? 1 : 3;
    fl.demand = 6;
    fl.direct_link = DirectionalLink{fl.src, fl.dst, 3, LinkKind::Direct};
    inst.flows.push_back(fl);
  }
  MilpSinrOptions sinr;
  sinr.mode = MilpSinrOptions::Mode::Geometric;
  sinr.beams = BeamModel::geometric(30.0);
  sinr.positions = pos;
  const auto m = build_milp(inst, 2, sinr);

  bool has_sinr = false, has_product = false;
  for (const auto& c : m.cons) {
    if (c.name.rfind("sinr_", 0) == 0) has_sinr = true;
    if (c.name.rfind("zp", 0) == 0) has_product = true;
  }
  CHECK(has_sinr);
  CHECK(has_product);

  // the two links conflict at rate 3, so the one-stage-each schedule
  // embeds feasibly while forcing them together violates a sinr row
  inst.feasible = FeasibilityCheck(RadioParams{}, MsTable::defaults(),
                                   BeamModel::geometric(30.0), pos);
  const auto sol = solve_exact(inst);
  CHECK(sol.total_slots == 4);  // two stages of ceil(6/3) = 2
  const auto x = embed_schedule(m, sol.schedule);
  for (const auto& c : m.cons) {
    INFO(c.name);
    CHECK(m.satisfied(c, x));
  }

  Schedule joint;
  joint.stages.resize(1);
  joint.stages[0].slots = 2;
  joint.stages[0].links = {{0, kDirectHop, *inst.flows[0].direct_link},
                           {1, kDirectHop, *inst.flows[1].direct_link}};
  const auto bad = embed_schedule(m, joint);
  bool violated = false;
  for (const auto& c : m.cons)
    if (c.name.rfind("sinr_", 0) == 0 && !m.satisfied(c, bad)) violated = true;
  CHECK(violated);
}
