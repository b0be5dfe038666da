// Experiment sweeps: the (protocol x load x wn_count x seed) grid, a
// bounded worker pool, and deterministic CSV emission.
#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "d2dmac/scenario.hpp"
#include "d2dmac/util.hpp"

namespace d2dmac {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << content;
}

struct SweepCell {
  std::size_t protocol_idx = 0;
  double load = 0.0;
  int wn_count = 0;
  std::uint64_t seed = 0;
};

struct CellResult {
  SweepCell cell;
  MetricsReport metrics;
};

inline std::vector<SweepCell> enumerate_cells(const ScenarioConfig& c) {
  std::vector<SweepCell> cells;
  for (std::size_t p = 0; p < c.protocols.size(); ++p)
    for (double load : c.loads)
      for (int wn : c.wn_counts)
        for (std::uint64_t seed : c.seeds) cells.push_back({p, load, wn, seed});
  return cells;
}

/// Run one sweep cell. Per seed, the deployment and flow endpoints are
/// shared by every protocol and load (common random numbers), and the
/// arrival streams additionally do not depend on the WN count, so
/// density sweeps compare identical traffic.
inline SimulationResult run_cell_full(const ScenarioConfig& c, const SweepCell& cell) {
  const auto& proto = c.protocols[cell.protocol_idx];

  Deployment dep = associate(
      generate_deployment(c.ap_grid, cell.wn_count, c.area_side_m, mix_seed(cell.seed, 1)));
  const int inet = c.inet_flows_for(cell.wn_count);
  const int pairs = c.wn_pair_flows_for(cell.wn_count);
  const int src_pool =
      *std::min_element(c.wn_counts.begin(), c.wn_counts.end());
  std::vector<Flow> flows = sample_flows(dep, c.rate_policy, pairs, inet,
                                         mix_seed(cell.seed, 2), c.nearest_k, src_pool);

  const TrafficSpec spec = traffic_for_load(c, cell.load, static_cast<int>(flows.size()));
  const auto arrivals =
      generate_arrivals(spec, static_cast<int>(flows.size()), c.frame.horizon_slots(),
                        c.frame.slot_seconds, mix_seed(cell.seed, 3));

  FeasibilityCheck feasible;
  if (c.sinr_mode == ScenarioConfig::SinrMode::Geometric)
    feasible = FeasibilityCheck(c.radio, c.ms, BeamModel::geometric(c.beam_half_angle_deg),
                                dep.positions());

  return run_simulation(flows, dep.kinds(), proto.config, arrivals, c.frame,
                        feasible, mix_seed(cell.seed, 4));
}

inline MetricsReport run_cell(const ScenarioConfig& c, const SweepCell& cell) {
  return run_cell_full(c, cell).metrics;
}

/// Per-packet log of one run (also the arrival trace: every packet row
/// carries its arrival slot).
inline std::string packet_log_csv(const SimulationResult& res) {
  std::string csv = "flow,arrival_slot,delivery_slot,discarded\n";
  for (const auto& p : res.packets) {
    csv += std::to_string(p.flow);
    csv += ',';
    csv += std::to_string(p.arrival_slot);
    csv += ',';
    if (p.delivery_slot) csv += std::to_string(*p.delivery_slot);
    csv += ',';
    csv += p.discarded ? '1' : '0';
    csv += '\n';
  }
  return csv;
}

namespace detail {

inline std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace detail

inline const char* results_csv_header() {
  return "protocol,beta,load,traffic_mode,wn_count,seed,avg_delay_slots,"
         "network_throughput,flow_delay_bw,flow_delay_in,flow_tp_bw,flow_tp_in";
}

inline std::string results_csv_row(const ScenarioConfig& c, const CellResult& r) {
  const auto& proto = c.protocols[r.cell.protocol_idx];
  std::string row;
  row += proto.label;
  row += ',';
  if (proto.config.kind == ProtocolConfig::Kind::D2dmac ||
      proto.config.kind == ProtocolConfig::Kind::FdmacE)
    row += format_double(proto.config.beta);
  row += ',';
  row += format_double(r.cell.load);
  row += ',';
  row += c.traffic_mode_name();
  row += ',';
  row += std::to_string(r.cell.wn_count);
  row += ',';
  row += std::to_string(r.cell.seed);
  row += ',';
  row += detail::opt_field(r.metrics.avg_delay_slots);
  row += ',';
  row += std::to_string(r.metrics.network_throughput);
  row += ',';
  row += detail::opt_field(r.metrics.flow_delay_bw);
  row += ',';
  row += detail::opt_field(r.metrics.flow_delay_in);
  row += ',';
  row += detail::opt_field(r.metrics.flow_tp_bw);
  row += ',';
  row += detail::opt_field(r.metrics.flow_tp_in);
  return row;
}

struct SweepOutput {
  std::vector<CellResult> results;  // canonical cell order
  std::string results_csv;
  std::string summary_csv;
};

/// Execute every cell on the worker pool and render both CSVs. Rows are
/// emitted in canonical enumeration order regardless of completion order,
/// so repeated runs of one config are byte-identical. A non-empty
/// packet_log_dir additionally writes one per-packet CSV per cell.
inline SweepOutput run_sweep(const ScenarioConfig& c,
                             const std::string& packet_log_dir = {}) {
  const auto cells = enumerate_cells(c);
  SweepOutput out;
  out.results.resize(cells.size());
  parallel_for(cells.size(), c.workers, [&](std::size_t i) {
    if (packet_log_dir.empty()) {
      out.results[i] = {cells[i], run_cell(c, cells[i])};
    } else {
      const auto res = run_cell_full(c, cells[i]);
      out.results[i] = {cells[i], res.metrics};
      const auto& cell = cells[i];
      const std::string name = packet_log_dir + "/packets_" +
                               c.protocols[cell.protocol_idx].label + "_" +
                               format_double(cell.load) + "_" +
                               std::to_string(cell.wn_count) + "_" +
                               std::to_string(cell.seed) + ".csv";
      write_file(name, packet_log_csv(res));
    }
  });

  out.results_csv = results_csv_header();
  out.results_csv += '\n';
  for (const auto& r : out.results) {
    out.results_csv += results_csv_row(c, r);
    out.results_csv += '\n';
  }

  // summary: per (protocol, load, wn_count) means across seeds
  struct Acc {
    int n = 0;
    double tp = 0.0;
    double delay = 0.0;
    int delay_n = 0;
    double d_bw = 0.0, d_in = 0.0, t_bw = 0.0, t_in = 0.0;
    int d_bw_n = 0, d_in_n = 0, t_bw_n = 0, t_in_n = 0;
  };
  std::map<std::tuple<std::size_t, double, int>, Acc> groups;
  for (const auto& r : out.results) {
    Acc& a = groups[{r.cell.protocol_idx, r.cell.load, r.cell.wn_count}];
    ++a.n;
    a.tp += static_cast<double>(r.metrics.network_throughput);
    if (r.metrics.avg_delay_slots) {
      a.delay += *r.metrics.avg_delay_slots;
      ++a.delay_n;
    }
    if (r.metrics.flow_delay_bw) { a.d_bw += *r.metrics.flow_delay_bw; ++a.d_bw_n; }
    if (r.metrics.flow_delay_in) { a.d_in += *r.metrics.flow_delay_in; ++a.d_in_n; }
    if (r.metrics.flow_tp_bw) { a.t_bw += *r.metrics.flow_tp_bw; ++a.t_bw_n; }
    if (r.metrics.flow_tp_in) { a.t_in += *r.metrics.flow_tp_in; ++a.t_in_n; }
  }
  out.summary_csv =
      "protocol,beta,load,traffic_mode,wn_count,seeds,mean_avg_delay_slots,"
      "mean_network_throughput,mean_flow_delay_bw,mean_flow_delay_in,"
      "mean_flow_tp_bw,mean_flow_tp_in\n";
  auto mean = [](double sum, int n) {
    return n > 0 ? std::optional<double>(sum / n) : std::nullopt;
  };
  for (const auto& [key, a] : groups) {
    const auto& [pidx, load, wn] = key;
    const auto& proto = c.protocols[pidx];
    out.summary_csv += proto.label;
    out.summary_csv += ',';
    if (proto.config.kind == ProtocolConfig::Kind::D2dmac ||
        proto.config.kind == ProtocolConfig::Kind::FdmacE)
      out.summary_csv += format_double(proto.config.beta);
    out.summary_csv += ',';
    out.summary_csv += format_double(load);
    out.summary_csv += ',';
    out.summary_csv += c.traffic_mode_name();
    out.summary_csv += ',';
    out.summary_csv += std::to_string(wn);
    out.summary_csv += ',';
    out.summary_csv += std::to_string(a.n);
    out.summary_csv += ',';
    out.summary_csv += detail::opt_field(mean(a.delay, a.delay_n));
    out.summary_csv += ',';
    out.summary_csv += format_double(a.n > 0 ? a.tp / a.n : 0.0);
    out.summary_csv += ',';
    out.summary_csv += detail::opt_field(mean(a.d_bw, a.d_bw_n));
    out.summary_csv += ',';
    out.summary_csv += detail::opt_field(mean(a.d_in, a.d_in_n));
    out.summary_csv += ',';
    out.summary_csv += detail::opt_field(mean(a.t_bw, a.t_bw_n));
    out.summary_csv += ',';
    out.summary_csv += detail::opt_field(mean(a.t_in, a.t_in_n));
    out.summary_csv += '\n';
  }
  return out;
}

}  // namespace d2dmac
