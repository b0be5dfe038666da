// Named end-to-end golden checks runnable from the CLI: the worked
// three-cell example (path choices, greedy schedule, exact optimum), the
// FDMAC-E decomposition on the same instance, and the interference-radius
// trend table.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "d2dmac/fixture.hpp"
#include "d2dmac/optimal.hpp"
#include "d2dmac/pathsel.hpp"
#include "d2dmac/radio.hpp"
#include "d2dmac/sched.hpp"

namespace d2dmac {

struct GoldenReport {
  std::string name;
  bool passed = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "  ok: " : "  FAIL: ") + what);
    passed = passed && ok;
  }
};

inline std::string describe_stage(const Stage& st) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < st.links.size(); ++i) {
    if (i) os << ", ";
    os << st.links[i].link.tx << "->" << st.links[i].link.rx;
  }
  os << "} x" << st.slots;
  return os.str();
}

inline std::string describe_schedule(const Schedule& s) {
  std::ostringstream os;
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    if (k) os << "; ";
    os << "stage " << (k + 1) << " " << describe_stage(s.stages[k]);
  }
  os << " (total " << s.total_slots() << ")";
  return os.str();
}

inline GoldenReport golden_worked_example() {
  GoldenReport rep;
  rep.name = "worked-example";
  const InstanceFixture fx = worked_example();
  const auto kinds = fx.node_kinds();

  const auto choices = select_all(fx.flows, PathPolicy::beta_rule(2.0));
  rep.check(choices.at(0) == PathChoice::Ordinary, "flow A->B chooses ordinary");
  rep.check(choices.at(1) == PathChoice::Direct, "flow B->C chooses direct");
  rep.check(choices.at(2) == PathChoice::Direct, "flow gateway->B chooses direct");
  rep.check(choices.at(3) == PathChoice::Direct, "flow D->gateway chooses direct");

  const auto inst = make_instance(fx.flows, choices, kinds);
  const Schedule sched = d2dmac_schedule(inst);
  rep.lines.push_back("  schedule: " + describe_schedule(sched));
  rep.check(sched.stages.size() == 3, "3 stages");
  rep.check(sched.total_slots() == 9, "9 slots total");
  rep.check(validate_schedule(sched, fx.flows, static_cast<int>(kinds.size())).ok(),
            "schedule valid");

  ExactInstance ex{fx.flows, kinds, {}};
  const auto sol = solve_exact(ex);
  rep.lines.push_back("  exact optimum: " + std::to_string(sol.total_slots));
  rep.check(sol.total_slots == 9, "exact optimum is 9");
  rep.check(sol.choices.at(0) == PathChoice::Ordinary &&
                sol.choices.at(1) == PathChoice::Direct &&
                sol.choices.at(2) == PathChoice::Direct &&
                sol.choices.at(3) == PathChoice::Direct,
            "exact path assignment matches the greedy one");
  return rep;
}

inline GoldenReport golden_fdmac_e() {
  GoldenReport rep;
  rep.name = "fdmac-e-example";
  const InstanceFixture fx = worked_example();
  const auto kinds = fx.node_kinds();
  const auto choices = select_all(fx.flows, PathPolicy::beta_rule(2.0));
  const auto inst = make_instance(fx.flows, choices, kinds);
  const Schedule sched = fdmac_e_schedule(inst);
  rep.lines.push_back("  schedule: " + describe_schedule(sched));
  rep.check(sched.total_slots() == 11, "11 slots total");
  rep.check(validate_schedule(sched, fx.flows, static_cast<int>(kinds.size())).ok(),
            "schedule valid");
  const Schedule joint = d2dmac_schedule(inst);
  rep.check(joint.total_slots() <= sched.total_slots(),
            "joint schedule no longer than the phase-separated one");
  return rep;
}

inline GoldenReport golden_radius_sweep() {
  GoldenReport rep;
  rep.name = "radius-sweep";
  RadioParams p;  // defaults: 1760 MHz, 0.1 mW, gamma 2, rho 1
  const MsTable ms = MsTable::defaults();
  const double l = 2.0;
  bool monotone_f = true, monotone_ms = true;
  double prev_ms = 0.0;
  for (int rate = 1; rate <= 3; ++rate) {
    double prev = 0.0;
    for (int F = 1; F <= 10; ++F) {
      const double r = interference_radius(l, rate, F, p, ms);
      if (r <= prev) monotone_f = false;
      prev = r;
    }
    const double r1 = interference_radius(l, rate, 1, p, ms);
    if (r1 <= prev_ms) monotone_ms = false;
    prev_ms = r1;
  }
  rep.check(monotone_f, "radius strictly increasing in interferer count");
  rep.check(monotone_ms, "radius strictly increasing in the SINR threshold");
  const double r4 = interference_radius(l, 2, 4, p, ms);
  const double r16 = interference_radius(l, 2, 16, p, ms);
  rep.check(std::abs(r16 - 2.0 * r4) <= 1e-9 * r4,
            "scaling F by 2^gamma doubles the radius");
  return rep;
}

inline GoldenReport run_golden(const std::string& name) {
  if (name == "worked-example") return golden_worked_example();
  if (name == "fdmac-e-example") return golden_fdmac_e();
  if (name == "radius-sweep") return golden_radius_sweep();
  throw ConfigError("unknown golden '" + name +
                    "' (names: worked-example, fdmac-e-example, radius-sweep)");
}

inline std::vector<std::string> golden_names() {
  return {"worked-example", "fdmac-e-example", "radius-sweep"};
}

}  // namespace d2dmac
