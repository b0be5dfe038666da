// Scenario configuration: a strict JSON schema covering deployment, rate
// policy, radio parameters, protocol list, traffic, frame timing and the
// sweep axes (loads, WN counts, seeds).
#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2dmac/engine.hpp"
#include "d2dmac/radio.hpp"
#include "d2dmac/topology.hpp"
#include "d2dmac/traffic.hpp"

namespace d2dmac {

struct ProtocolSpec {
  ProtocolConfig config;
  std::string label;  // e.g. "d2dmac" or "d2dmac-b3"
};

struct ScenarioConfig {
  // deployment
  int ap_grid = 9;
  std::vector<int> wn_counts = {30};
  double area_side_m = 50.0;
  // flows
  int flow_count = 30;
  bool flows_per_wn = false;  // density sweeps: one flow per WN instead
  double wn_flow_fraction = 0.85;
  int nearest_k = 2;  // D2D partner pool size; <= 0 for all candidates
  // rates & radio
  RatePolicy rate_policy{};
  RadioParams radio{};
  MsTable ms = MsTable::defaults();
  enum class SinrMode { AlwaysPass, Geometric } sinr_mode = SinrMode::AlwaysPass;
  double beam_half_angle_deg = 15.0;
  // protocols
  std::vector<ProtocolSpec> protocols = {
      {ProtocolConfig::d2dmac(2.0), "d2dmac"},
      {ProtocolConfig::fdmac_e(), "fdmac_e"},
      {ProtocolConfig::rpdmac(), "rpdmac"},
      {ProtocolConfig::odmac(), "odmac"},
  };
  // traffic
  TrafficSpec::Mode traffic_mode = TrafficSpec::Mode::Poisson;
  std::vector<double> loads = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  int packet_bytes = 1000;
  int burst_max = 5;
  double reference_rate_bps = 2e9;
  // Flow count the load definition refers to; 0 = the actual flow count.
  // Density sweeps pin this to the default count so per-flow rates stay
  // constant while the flow population grows with the WN count.
  int load_reference_flows = 0;
  double ipp_ratio = 10.0;  // lambda1 : lambda2
  double ipp_p1 = 0.5;
  // frame
  FrameConfig frame{};
  // sweep
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string results_csv = "results.csv";
  std::string summary_csv = "summary.csv";
  int workers = 0;  // 0 = hardware concurrency

  int flows_for(int wn_count) const { return flows_per_wn ? wn_count : flow_count; }
  int inet_flows_for(int wn_count) const {
    return static_cast<int>(flows_for(wn_count) * (1.0 - wn_flow_fraction) + 0.5);
  }
  int wn_pair_flows_for(int wn_count) const {
    return flows_for(wn_count) - inet_flows_for(wn_count);
  }
  const char* traffic_mode_name() const {
    return traffic_mode == TrafficSpec::Mode::Poisson ? "poisson" : "ipp";
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + path + key + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, const std::string& path,
         T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: bad value at '" + path + key + "': " + e.what());
  }
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::get_or;
  ScenarioConfig c;
  check_keys(j, "", {"deployment", "rate_policy", "radio", "flows", "protocols",
                     "traffic", "frame", "seeds", "output", "workers"});

  if (j.contains("deployment")) {
    const auto& d = j.at("deployment");
    check_keys(d, "deployment.", {"ap_grid", "wn_counts", "wn_count", "area_side_m"});
    c.ap_grid = get_or(d, "ap_grid", "deployment.", c.ap_grid);
    c.area_side_m = get_or(d, "area_side_m", "deployment.", c.area_side_m);
    if (d.contains("wn_count")) c.wn_counts = {d.at("wn_count").get<int>()};
    if (d.contains("wn_counts")) c.wn_counts = d.at("wn_counts").get<std::vector<int>>();
  }
  if (j.contains("rate_policy")) {
    const auto& r = j.at("rate_policy");
    check_keys(r, "rate_policy.", {"breakpoints", "fallback_rate", "backhaul_rate"});
    if (r.contains("breakpoints")) {
      c.rate_policy.breakpoints.clear();
      for (const auto& bp : r.at("breakpoints"))
        c.rate_policy.breakpoints.emplace_back(bp.at(0).get<double>(),
                                               bp.at(1).get<int>());
    }
    c.rate_policy.fallback_rate =
        get_or(r, "fallback_rate", "rate_policy.", c.rate_policy.fallback_rate);
    c.rate_policy.backhaul_rate =
        get_or(r, "backhaul_rate", "rate_policy.", c.rate_policy.backhaul_rate);
  }
  if (j.contains("radio")) {
    const auto& r = j.at("radio");
    check_keys(r, "radio.",
               {"k0", "reference_path_loss_db", "transmit_power_mw",
                "path_loss_exponent", "mui_factor", "bandwidth_mhz",
                "noise_psd_dbm_per_mhz", "ms_db", "sinr_check",
                "beam_half_angle_deg"});
    if (r.contains("reference_path_loss_db"))
      c.radio.k0 = k0_from_path_loss_db(r.at("reference_path_loss_db").get<double>());
    if (r.contains("k0")) c.radio.k0 = r.at("k0").get<double>();
    if (r.contains("transmit_power_mw"))
      c.radio.transmit_power_w = r.at("transmit_power_mw").get<double>() * 1e-3;
    c.radio.path_loss_exponent =
        get_or(r, "path_loss_exponent", "radio.", c.radio.path_loss_exponent);
    c.radio.mui_factor = get_or(r, "mui_factor", "radio.", c.radio.mui_factor);
    if (r.contains("bandwidth_mhz"))
      c.radio.bandwidth_hz = r.at("bandwidth_mhz").get<double>() * 1e6;
    if (r.contains("noise_psd_dbm_per_mhz"))
      c.radio.noise_psd_w_per_hz =
          1e-9 * std::pow(10.0, r.at("noise_psd_dbm_per_mhz").get<double>() / 10.0);
    if (r.contains("ms_db")) {
      std::map<int, double> db;
      for (const auto& [rate, v] : r.at("ms_db").items())
        db[std::stoi(rate)] = v.get<double>();
      c.ms = MsTable::from_db(db);
    }
    if (r.contains("sinr_check")) {
      const std::string mode = r.at("sinr_check").get<std::string>();
      if (mode == "always_pass") c.sinr_mode = ScenarioConfig::SinrMode::AlwaysPass;
      else if (mode == "geometric") c.sinr_mode = ScenarioConfig::SinrMode::Geometric;
      else throw ConfigError("config: radio.sinr_check must be always_pass or geometric");
    }
    c.beam_half_angle_deg =
        get_or(r, "beam_half_angle_deg", "radio.", c.beam_half_angle_deg);
  }
  if (j.contains("flows")) {
    const auto& f = j.at("flows");
    check_keys(f, "flows.", {"count", "per_wn", "wn_fraction", "nearest_k"});
    c.flow_count = get_or(f, "count", "flows.", c.flow_count);
    c.flows_per_wn = get_or(f, "per_wn", "flows.", c.flows_per_wn);
    c.wn_flow_fraction = get_or(f, "wn_fraction", "flows.", c.wn_flow_fraction);
    c.nearest_k = get_or(f, "nearest_k", "flows.", c.nearest_k);
    if (c.flow_count < 0) throw ConfigError("config: flows.count must be >= 0");
    if (c.wn_flow_fraction < 0.0 || c.wn_flow_fraction > 1.0)
      throw ConfigError("config: flows.wn_fraction must be in [0, 1]");
  }
  if (j.contains("protocols")) {
    c.protocols.clear();
    int idx = 0;
    for (const auto& p : j.at("protocols")) {
      check_keys(p, "protocols[" + std::to_string(idx) + "].",
                 {"name", "beta", "label", "max_flows", "max_total_hops",
                  "time_budget_s"});
      const std::string name = p.at("name").get<std::string>();
      ProtocolSpec spec;
      if (name == "d2dmac") {
        spec.config = ProtocolConfig::d2dmac(get_or(p, "beta", "protocols.", 2.0));
      } else if (name == "odmac") {
        spec.config = ProtocolConfig::odmac();
      } else if (name == "rpdmac") {
        spec.config = ProtocolConfig::rpdmac();
      } else if (name == "fdmac_e") {
        spec.config = ProtocolConfig::fdmac_e();
      } else if (name == "optimal") {
        ExactLimits lim;
        lim.max_flows = get_or(p, "max_flows", "protocols.", lim.max_flows);
        lim.max_total_hops =
            get_or(p, "max_total_hops", "protocols.", lim.max_total_hops);
        lim.time_budget_s = get_or(p, "time_budget_s", "protocols.", lim.time_budget_s);
        spec.config = ProtocolConfig::optimal(lim);
      } else {
        throw ConfigError("config: unknown protocol '" + name + "'");
      }
      spec.label = get_or<std::string>(p, "label", "protocols.", name);
      c.protocols.push_back(std::move(spec));
      ++idx;
    }
  }
  if (j.contains("traffic")) {
    const auto& t = j.at("traffic");
    check_keys(t, "traffic.",
               {"mode", "loads", "packet_bytes", "burst_max", "reference_rate_gbps",
                "load_reference_flows", "ipp_ratio", "ipp_p1"});
    if (t.contains("mode")) {
      const std::string mode = t.at("mode").get<std::string>();
      if (mode == "poisson") c.traffic_mode = TrafficSpec::Mode::Poisson;
      else if (mode == "ipp") c.traffic_mode = TrafficSpec::Mode::Ipp;
      else throw ConfigError("config: traffic.mode must be poisson or ipp");
    }
    if (t.contains("loads")) c.loads = t.at("loads").get<std::vector<double>>();
    c.packet_bytes = get_or(t, "packet_bytes", "traffic.", c.packet_bytes);
    c.burst_max = get_or(t, "burst_max", "traffic.", c.burst_max);
    if (t.contains("reference_rate_gbps"))
      c.reference_rate_bps = t.at("reference_rate_gbps").get<double>() * 1e9;
    c.load_reference_flows =
        get_or(t, "load_reference_flows", "traffic.", c.load_reference_flows);
    c.ipp_ratio = get_or(t, "ipp_ratio", "traffic.", c.ipp_ratio);
    c.ipp_p1 = get_or(t, "ipp_p1", "traffic.", c.ipp_p1);
    if (c.ipp_p1 < 0.0 || c.ipp_p1 > 1.0)
      throw ConfigError("config: traffic.ipp_p1 must be in [0, 1]");
  }
  if (j.contains("frame")) {
    const auto& f = j.at("frame");
    check_keys(f, "frame.",
               {"slot_us", "overhead_slots", "delay_threshold_slots", "sim_length_s"});
    if (f.contains("slot_us")) c.frame.slot_seconds = f.at("slot_us").get<double>() * 1e-6;
    c.frame.overhead_slots =
        get_or(f, "overhead_slots", "frame.", c.frame.overhead_slots);
    c.frame.delay_threshold =
        get_or(f, "delay_threshold_slots", "frame.", c.frame.delay_threshold);
    c.frame.sim_length_s = get_or(f, "sim_length_s", "frame.", c.frame.sim_length_s);
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, "output.", {"results_csv", "summary_csv"});
    c.results_csv = get_or<std::string>(o, "results_csv", "output.", c.results_csv);
    c.summary_csv = get_or<std::string>(o, "summary_csv", "output.", c.summary_csv);
  }
  c.workers = detail::get_or(j, "workers", "", c.workers);
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

/// Traffic spec for one sweep load under this scenario. The per-flow rate
/// follows the load definition with N = the reference flow count (the
/// actual count unless load_reference_flows pins it).
inline TrafficSpec traffic_for_load(const ScenarioConfig& c, double load,
                                    int actual_flows) {
  TrafficSpec spec;
  spec.mode = c.traffic_mode;
  spec.packet_bits = c.packet_bytes * 8;
  spec.burst_max = c.burst_max;
  const int ref_flows =
      c.load_reference_flows > 0 ? c.load_reference_flows : actual_flows;
  if (c.traffic_mode == TrafficSpec::Mode::Poisson) {
    spec.lambda = load <= 0.0 ? 0.0
                              : poisson_rate_for_load(load, spec.packet_bits,
                                                      ref_flows, c.reference_rate_bps);
  } else {
    if (load > 0.0) {
      const auto [l1, l2] = ipp_scale_for_load(load, c.ipp_ratio, c.ipp_p1,
                                               1.0 - c.ipp_p1, spec.packet_bits,
                                               ref_flows, c.reference_rate_bps);
      spec.lambda1 = l1;
      spec.lambda2 = l2;
    }
    spec.p1 = c.ipp_p1;
    spec.p2 = 1.0 - c.ipp_p1;
  }
  return spec;
}

}  // namespace d2dmac
