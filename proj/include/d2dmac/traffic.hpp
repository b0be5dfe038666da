// Arrival generation: Poisson and IPP (hyper-exponential renewal)
// traffic, and the load <-> rate conversions.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "d2dmac/model.hpp"

namespace d2dmac {

/// Per-flow arrival model. Poisson draws exponential inter-arrival times
/// at rate lambda; Ipp draws from the two-phase hyper-exponential mixture
/// (rate lambda1 w.p. p1, rate lambda2 w.p. p2).
struct TrafficSpec {
  enum class Mode { Poisson, Ipp } mode = Mode::Poisson;
  double lambda = 0.0;        // Poisson arrivals/s per flow
  double lambda1 = 0.0;       // IPP phase rates
  double lambda2 = 0.0;
  double p1 = 0.5;
  double p2 = 0.5;
  int packet_bits = 8000;     // 1000-byte packets
  int burst_max = 5;          // initial packets per flow, uniform 0..burst_max
};

/// Poisson arrival rate per flow for a target load:
/// T_l = lambda * L * N / R  =>  lambda = T_l * R / (L * N).
inline double poisson_rate_for_load(double load, int packet_bits, int flow_count,
                                    double ref_rate_bps) {
  if (packet_bits <= 0 || flow_count <= 0 || ref_rate_bps <= 0.0)
    throw std::invalid_argument("poisson_rate_for_load: nonpositive parameter");
  return load * ref_rate_bps /
         (static_cast<double>(packet_bits) * static_cast<double>(flow_count));
}

/// Mean inter-arrival time of the hyper-exponential mixture:
/// E(X) = p1/lambda1 + p2/lambda2.
inline double ipp_mean_interval(double lambda1, double lambda2, double p1, double p2) {
  if (lambda1 <= 0.0 || lambda2 <= 0.0)
    throw std::invalid_argument("ipp_mean_interval: nonpositive rate");
  if (std::abs(p1 + p2 - 1.0) > 1e-12)
    throw std::invalid_argument("ipp_mean_interval: p1 + p2 must be 1");
  return p1 / lambda1 + p2 / lambda2;
}

/// Scale (lambda1, lambda2) jointly, preserving their ratio and the phase
/// probabilities, so that T_l = L * N / (E(X) * R) hits the target load.
inline std::pair<double, double> ipp_scale_for_load(double load, double rate_ratio,
                                                    double p1, double p2,
                                                    int packet_bits, int flow_count,
                                                    double ref_rate_bps) {
  if (rate_ratio <= 0.0) throw std::invalid_argument("ipp_scale_for_load: ratio <= 0");
  if (load < 0.0) throw std::invalid_argument("ipp_scale_for_load: negative load");
  // E(X) target from the load definition; lambda1 = (p1 + p2*ratio)/E(X)
  // keeps lambda1/lambda2 = ratio.
  const double mean_target = static_cast<double>(packet_bits) *
                             static_cast<double>(flow_count) /
                             (load * ref_rate_bps);
  const double l1 = (p1 + p2 * rate_ratio) / mean_target;
  return {l1, l1 / rate_ratio};
}

namespace detail {

inline double unit_open(std::mt19937_64& rng) {
  // uniform in (0, 1]; never 0 so -log stays finite
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Per-flow ordered arrival slots over the horizon: an initial burst of
/// uniform(0..burst_max) packets at slot 0, then the renewal process
/// discretized by floor(t / slot_seconds). Deterministic per seed; flow f
/// uses a sub-stream derived from (seed, f) so streams are independent of
/// the flow count.
inline std::vector<std::vector<std::int64_t>> generate_arrivals(
    const TrafficSpec& spec, int flow_count, std::int64_t horizon_slots,
    double slot_seconds, std::uint64_t seed) {
  if (horizon_slots < 0) throw std::invalid_argument("generate_arrivals: negative horizon");
  std::vector<std::vector<std::int64_t>> out(flow_count);
  const double horizon_s = static_cast<double>(horizon_slots) * slot_seconds;
  for (int f = 0; f < flow_count; ++f) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(f) + 1);
    auto& slots = out[f];
    if (spec.burst_max > 0) {
      const std::uint64_t burst = rng() % (static_cast<std::uint64_t>(spec.burst_max) + 1);
      slots.insert(slots.end(), burst, 0);
    }
    if (horizon_slots == 0) continue;
    double t = 0.0;
    while (true) {
      double gap;
      switch (spec.mode) {
        case TrafficSpec::Mode::Poisson: {
          if (spec.lambda <= 0.0) gap = -1.0;
          else gap = -std::log(detail::unit_open(rng)) / spec.lambda;
          break;
        }
        case TrafficSpec::Mode::Ipp: {
          const double u = detail::unit_open(rng);
          const double rate = (u <= spec.p1) ? spec.lambda1 : spec.lambda2;
          if (rate <= 0.0) gap = -1.0;
          else gap = -std::log(detail::unit_open(rng)) / rate;
          break;
        }
        default:
          gap = -1.0;
      }
      if (gap < 0.0) break;  // zero-rate process: no arrivals
      t += gap;
      if (t >= horizon_s) break;
      slots.push_back(static_cast<std::int64_t>(t / slot_seconds));
    }
  }
  return out;
}

}  // namespace d2dmac
