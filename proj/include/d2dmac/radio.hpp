// Propagation, SINR, concurrent-transmission feasibility, and the
// spatial-reuse / interference-radius analysis quantities.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "d2dmac/model.hpp"

namespace d2dmac {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Link-budget parameters. k0 is the linear received-power factor at the
/// 1 m reference distance (it absorbs the reference path loss and any
/// fixed antenna gains); noise_psd is the one-sided PSD in W/Hz.
struct RadioParams {
  double transmit_power_w = 1e-4;                    // 0.1 mW
  double k0 = std::pow(10.0, -6.8);                  // 68 dB reference loss at 1 m
  double path_loss_exponent = 2.0;
  double mui_factor = 1.0;                           // rho
  double bandwidth_hz = 1760e6;
  double noise_psd_w_per_hz = 1e-9 * std::pow(10.0, -13.4);  // -134 dBm/MHz

  double noise_w() const { return bandwidth_hz * noise_psd_w_per_hz; }
};

/// Reference factor from a path loss PL(d0) given in (positive) dB.
inline double k0_from_path_loss_db(double pl_db) {
  return std::pow(10.0, -pl_db / 10.0);
}

/// Minimum SINR (linear) required to sustain each transmission rate.
class MsTable {
 public:
  MsTable() = default;
  explicit MsTable(std::map<int, double> linear) : table_(std::move(linear)) {}

  static MsTable from_db(const std::map<int, double>& db) {
    std::map<int, double> lin;
    for (const auto& [rate, v] : db) lin[rate] = db_to_linear(v);
    return MsTable(std::move(lin));
  }
  // QPSK/LDPC thresholds for the three rate steps.
  static MsTable defaults() { return from_db({{1, 5.0}, {2, 8.0}, {3, 10.0}}); }

  double min_sinr(int rate) const {
    auto it = table_.find(rate);
    if (it == table_.end())
      throw ConfigError("MsTable: no threshold for rate " + std::to_string(rate));
    return it->second;
  }
  const std::map<int, double>& linear() const { return table_; }

 private:
  std::map<int, double> table_;
};

/// Beam indicator model f(s_i, r_j): whether transmitter s_i leaks power
/// into the foreign receiver r_j. AlwaysZero matches the assumption that
/// nonadjacent links never interfere; Geometric evaluates beam cones with
/// each transmitter aimed at its own receiver and each receiver listening
/// toward its own transmitter.
struct BeamModel {
  enum class Kind { AlwaysZero, Geometric } kind = Kind::AlwaysZero;
  double half_angle_rad = 15.0 * 3.14159265358979323846 / 180.0;

  static BeamModel always_zero() { return {Kind::AlwaysZero, 0.0}; }
  static BeamModel geometric(double half_angle_deg) {
    return {Kind::Geometric, half_angle_deg * 3.14159265358979323846 / 180.0};
  }

  // f for transmitter tx (serving own_rx) seen at foreign receiver rx
  // (listening toward its own transmitter own_tx).
  int indicator(const Point& tx, const Point& own_rx, const Point& rx,
                const Point& own_tx) const {
    if (kind == Kind::AlwaysZero) return 0;
    auto within = [this](const Point& from, const Point& aim, const Point& at) {
      const double ax = aim.x - from.x, ay = aim.y - from.y;
      const double bx = at.x - from.x, by = at.y - from.y;
      const double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
      if (na == 0.0 || nb == 0.0) return true;  // coincident nodes: assume aligned
      double c = (ax * bx + ay * by) / (na * nb);
      c = std::min(1.0, std::max(-1.0, c));
      return std::acos(c) <= half_angle_rad;
    };
    return (within(tx, own_rx, rx) && within(rx, own_tx, tx)) ? 1 : 0;
  }
};

/// Received power at distance `dist` with beam indicator f:
/// f * k0 * Pt * dist^-gamma.
inline double received_power(int f, const RadioParams& p, double dist) {
  if (dist <= 0.0)
    throw std::domain_error("received_power: nonpositive distance");
  if (f == 0) return 0.0;
  return p.k0 * p.transmit_power_w * std::pow(dist, -p.path_loss_exponent);
}

/// SINR (linear) at the receiver of `link`, with the other concurrently
/// active links as interference sources.
inline double sinr(const ScheduledLink& link,
                   const std::vector<ScheduledLink>& interferers,
                   const BeamModel& beams, const RadioParams& p,
                   const std::vector<Point>& pos) {
  const Point& tx = pos[link.link.tx];
  const Point& rx = pos[link.link.rx];
  const double signal = received_power(1, p, distance(tx, rx));
  double interference = 0.0;
  for (const auto& other : interferers) {
    if (other.link.tx == link.link.tx && other.link.rx == link.link.rx) continue;
    const Point& itx = pos[other.link.tx];
    const int f = beams.indicator(itx, pos[other.link.rx], rx, tx);
    if (f == 0) continue;
    interference += received_power(1, p, distance(itx, rx));
  }
  return signal / (p.noise_w() + p.mui_factor * interference);
}

/// True iff every link in the stage reaches the minimum SINR for its rate.
inline bool stage_feasible(const std::vector<ScheduledLink>& stage,
                           const BeamModel& beams, const RadioParams& p,
                           const MsTable& ms, const std::vector<Point>& pos) {
  for (const auto& l : stage) {
    if (sinr(l, stage, beams, p, pos) < ms.min_sinr(l.link.rate)) return false;
  }
  return true;
}

/// Interference budget of a link: an interferer-distance configuration
/// {l_m} is admissible iff sum f_m * l_m^-gamma <= budget.
/// Returns +inf-signalled failure as an exception-free infinity when the
/// link cannot meet its threshold even without interference.
inline double spatial_reuse_budget(double link_len, int rate,
                                   const RadioParams& p, const MsTable& ms) {
  const double msv = ms.min_sinr(rate);
  const double num =
      p.k0 * p.transmit_power_w * std::pow(link_len, -p.path_loss_exponent) / msv -
      p.noise_w();
  if (num <= 0.0) return -std::numeric_limits<double>::infinity();
  return num / (p.mui_factor * p.k0 * p.transmit_power_w);
}

inline bool within_reuse_budget(const std::vector<double>& interferer_dists,
                                double link_len, int rate, const RadioParams& p,
                                const MsTable& ms) {
  const double budget = spatial_reuse_budget(link_len, rate, p, ms);
  double load = 0.0;
  for (double d : interferer_dists) load += std::pow(d, -p.path_loss_exponent);
  return load <= budget;
}

/// Minimum distance F equal interferers must keep from the receiver so the
/// link still supports its rate:
///   (rho k0 Pt F)^(1/gamma) / (k0 Pt l^-gamma / MS - W N0)^(1/gamma).
/// Infinite when the link is infeasible even in isolation.
inline double interference_radius(double link_len, int rate, int interferer_count,
                                  const RadioParams& p, const MsTable& ms) {
  const double msv = ms.min_sinr(rate);
  const double den =
      p.k0 * p.transmit_power_w * std::pow(link_len, -p.path_loss_exponent) / msv -
      p.noise_w();
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  const double num = p.mui_factor * p.k0 * p.transmit_power_w *
                     static_cast<double>(interferer_count);
  const double inv_gamma = 1.0 / p.path_loss_exponent;
  return std::pow(num, inv_gamma) / std::pow(den, inv_gamma);
}

/// Monte-Carlo estimate of the probability that a link sustains its rate
/// against M interferers whose distances to the receiver are i.i.d.
/// uniform over a disk of the given radius. The distance law is an
/// interpretation knob; uniform-disk is the default.
inline double concurrent_support_probability(double link_len, int rate,
                                             int interferer_count,
                                             double disk_radius_m,
                                             const RadioParams& p,
                                             const MsTable& ms,
                                             int samples, std::uint64_t seed) {
  const double budget = spatial_reuse_budget(link_len, rate, p, ms);
  if (budget < 0.0) return 0.0;
  std::mt19937_64 rng(seed);
  auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    double load = 0.0;
    for (int m = 0; m < interferer_count; ++m) {
      // uniform over disk area: r = R*sqrt(u)
      const double r = disk_radius_m * std::sqrt(unit());
      load += std::pow(std::max(r, 1e-9), -p.path_loss_exponent);
    }
    if (load <= budget) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// Stage admission oracle handed to the schedulers. AlwaysPass mirrors
/// the assumption that nonadjacent links can always run concurrently;
/// Geometric evaluates the SINR condition with the beam-cone model.
class FeasibilityCheck {
 public:
  FeasibilityCheck() = default;  // always pass
  FeasibilityCheck(RadioParams params, MsTable ms, BeamModel beams,
                   std::vector<Point> positions)
      : enabled_(true),
        params_(params),
        ms_(std::move(ms)),
        beams_(beams),
        pos_(std::move(positions)) {}

  static FeasibilityCheck always_pass() { return FeasibilityCheck(); }

  bool enabled() const { return enabled_; }

  bool operator()(const std::vector<ScheduledLink>& stage) const {
    if (!enabled_ || stage.size() <= 1) return true;
    return stage_feasible(stage, beams_, params_, ms_, pos_);
  }

 private:
  bool enabled_ = false;
  RadioParams params_;
  MsTable ms_;
  BeamModel beams_;
  std::vector<Point> pos_;
};

}  // namespace d2dmac
