// Command-line front end: scenario sweeps, golden checks, instance/LP
// export, the interference-radius table, and the exact solver.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "d2dmac/fixture.hpp"
#include "d2dmac/golden.hpp"
#include "d2dmac/optimal.hpp"
#include "d2dmac/sweep.hpp"

namespace {

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::vector<std::uint64_t> seeds, std::vector<double> loads,
              int workers, const std::string& packet_log_dir) {
  d2dmac::ScenarioConfig cfg = config_path.empty()
                                   ? d2dmac::ScenarioConfig{}
                                   : d2dmac::load_scenario(config_path);
  if (!seeds.empty()) cfg.seeds = std::move(seeds);
  if (!loads.empty()) cfg.loads = std::move(loads);
  if (workers > 0) cfg.workers = workers;

  const auto out = d2dmac::run_sweep(cfg, packet_log_dir);
  const std::string prefix = out_dir.empty() ? "" : out_dir + "/";
  d2dmac::write_file(prefix + cfg.results_csv, out.results_csv);
  d2dmac::write_file(prefix + cfg.summary_csv, out.summary_csv);
  std::cout << "wrote " << prefix + cfg.results_csv << " (" << out.results.size()
            << " rows) and " << prefix + cfg.summary_csv << "\n";
  return 0;
}

int cmd_golden(const std::string& name) {
  std::vector<std::string> names =
      name == "all" ? d2dmac::golden_names() : std::vector<std::string>{name};
  bool all_ok = true;
  for (const auto& n : names) {
    const auto rep = d2dmac::run_golden(n);
    std::cout << "[" << (rep.passed ? "PASS" : "FAIL") << "] " << rep.name << "\n";
    for (const auto& line : rep.lines) std::cout << line << "\n";
    all_ok = all_ok && rep.passed;
  }
  return all_ok ? 0 : 1;
}

int cmd_export(const std::string& instance_path, const std::string& format,
               const std::string& out_path, int stage_count) {
  const d2dmac::InstanceFixture fx = instance_path.empty()
                                         ? d2dmac::worked_example()
                                         : d2dmac::load_fixture(instance_path);
  if (format == "lp") {
    d2dmac::ExactInstance inst{fx.flows, fx.node_kinds(), {}};
    const int k = stage_count > 0 ? stage_count : d2dmac::default_stage_count(fx.flows);
    const auto model = d2dmac::build_milp(inst, k);
    const std::string text = d2dmac::export_lp(model);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      d2dmac::write_file(out_path, text);
      std::cout << "wrote " << out_path << " (" << model.vars.size() << " variables, "
                << model.cons.size() << " constraints)\n";
    }
  } else if (format == "fixture") {
    if (out_path.empty()) {
      std::cout << d2dmac::fixture_to_json(fx).dump(2) << "\n";
    } else {
      d2dmac::save_fixture(fx, out_path);
      std::cout << "wrote " << out_path << "\n";
    }
  } else {
    std::cerr << "unknown format '" << format << "' (lp, fixture)\n";
    return 2;
  }
  return 0;
}

int cmd_radius(double link_len, std::vector<int> rates, std::vector<double> gammas,
               int f_max, double pt_mw, double rho, double bw_mhz,
               const std::string& out_path) {
  d2dmac::RadioParams p;
  p.transmit_power_w = pt_mw * 1e-3;
  p.mui_factor = rho;
  p.bandwidth_hz = bw_mhz * 1e6;
  const auto ms = d2dmac::MsTable::defaults();
  std::string csv = "rate,ms_db,gamma,F,radius_m\n";
  for (int rate : rates) {
    const double ms_db = d2dmac::linear_to_db(ms.min_sinr(rate));
    for (double g : gammas) {
      p.path_loss_exponent = g;
      for (int F = 1; F <= f_max; ++F) {
        const double r = d2dmac::interference_radius(link_len, rate, F, p, ms);
        csv += std::to_string(rate) + "," + d2dmac::format_double(ms_db) + "," +
               d2dmac::format_double(g) + "," + std::to_string(F) + "," +
               d2dmac::format_double(r) + "\n";
      }
    }
  }
  if (out_path.empty()) std::cout << csv;
  else {
    d2dmac::write_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_optimal(const std::string& instance_path, int max_flows, int max_hops,
                double budget_s) {
  const d2dmac::InstanceFixture fx = instance_path.empty()
                                         ? d2dmac::worked_example()
                                         : d2dmac::load_fixture(instance_path);
  d2dmac::ExactInstance inst{fx.flows, fx.node_kinds(), {}};
  d2dmac::ExactLimits lim;
  lim.max_flows = max_flows;
  lim.max_total_hops = max_hops;
  lim.time_budget_s = budget_s;
  const auto sol = d2dmac::solve_exact(inst, lim);
  std::cout << "instance: " << fx.name << "\n"
            << "optimum: " << sol.total_slots << " slots"
            << (sol.proven_optimal ? "" : " (time budget hit; not proven)") << "\n"
            << "nodes explored: " << sol.nodes_explored << " ("
            << sol.assignments_tried << " path assignments)\n";
  for (const auto& [flow, choice] : sol.choices)
    std::cout << "  flow " << flow << ": "
              << (choice == d2dmac::PathChoice::Direct ? "direct" : "ordinary") << "\n";
  std::cout << "schedule: " << d2dmac::describe_schedule(sol.schedule) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint access/backhaul scheduling simulator for mmWave small cells"};
  app.require_subcommand(1);

  // sweep
  std::string config_path, out_dir, packet_log_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<double> loads;
  int workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Run the configured experiment sweep");
  sweep->add_option("-c,--config", config_path, "Scenario config JSON (defaults used if omitted)");
  sweep->add_option("-o,--out-dir", out_dir, "Directory for the CSV outputs");
  sweep->add_option("--seeds", seeds, "Override the seed list");
  sweep->add_option("--loads", loads, "Override the load list");
  sweep->add_option("--workers", workers, "Worker pool size (0 = hardware)");
  sweep->add_option("--packet-log-dir", packet_log_dir,
                    "Also write one per-packet CSV (flow, arrival, delivery, discarded) per cell");

  // golden
  std::string golden_name = "all";
  auto* golden = app.add_subcommand("golden", "Run a named golden check");
  golden->add_option("name", golden_name, "worked-example | fdmac-e-example | radius-sweep | all");

  // export
  std::string instance_path, format = "lp", out_path;
  int stage_count = 0;
  auto* exp = app.add_subcommand("export", "Export an instance as LP text or a fixture");
  exp->add_option("-i,--instance", instance_path, "Instance fixture JSON (built-in example if omitted)");
  exp->add_option("-f,--format", format, "lp | fixture");
  exp->add_option("-o,--out", out_path, "Output file (stdout if omitted)");
  exp->add_option("-k,--stages", stage_count, "Stage budget K (default: one per hop)");

  // radius
  double link_len = 2.0, pt_mw = 0.1, rho = 1.0, bw_mhz = 1760.0;
  std::vector<int> rates = {1, 2, 3};
  std::vector<double> gammas = {2.0};
  int f_max = 10;
  std::string radius_out;
  auto* radius = app.add_subcommand("radius", "Interference-radius table (CSV)");
  radius->add_option("--link-len", link_len, "Link length in meters");
  radius->add_option("--rates", rates, "Rates (packets/slot) to tabulate");
  radius->add_option("--gammas", gammas, "Path loss exponents");
  radius->add_option("--f-max", f_max, "Max interferer count");
  radius->add_option("--pt-mw", pt_mw, "Transmit power in mW");
  radius->add_option("--rho", rho, "MUI factor");
  radius->add_option("--bw-mhz", bw_mhz, "Bandwidth in MHz");
  radius->add_option("-o,--out", radius_out, "Output file (stdout if omitted)");

  // optimal
  std::string opt_instance;
  int opt_max_flows = 6, opt_max_hops = 14;
  double opt_budget = 60.0;
  auto* optimal = app.add_subcommand("optimal", "Exact optimum for a small instance");
  optimal->add_option("-i,--instance", opt_instance, "Instance fixture JSON (built-in example if omitted)");
  optimal->add_option("--max-flows", opt_max_flows, "Flow-count limit");
  optimal->add_option("--max-hops", opt_max_hops, "Total-hop limit");
  optimal->add_option("--time-budget", opt_budget, "Time budget in seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep)
      return cmd_sweep(config_path, out_dir, seeds, loads, workers, packet_log_dir);
    if (*golden) return cmd_golden(golden_name);
    if (*exp) return cmd_export(instance_path, format, out_path, stage_count);
    if (*radius) return cmd_radius(link_len, rates, gammas, f_max, pt_mw, rho, bw_mhz, radius_out);
    if (*optimal) return cmd_optimal(opt_instance, opt_max_flows, opt_max_hops, opt_budget);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
