// Per-flow choice between the direct path and the ordinary path.
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "d2dmac/model.hpp"

namespace d2dmac {

enum class PathChoice { Direct, Ordinary };

/// Path-selection policy. Beta applies the transmission-capability ratio
/// test with parameter beta >= 1; AlwaysOrdinary forces ordinary paths
/// (falling back to the direct link for flows that have none); RandomPerFlow
/// draws uniformly between the available paths.
struct PathPolicy {
  enum class Mode { Beta, AlwaysOrdinary, RandomPerFlow } mode = Mode::Beta;
  double beta = 2.0;

  static PathPolicy beta_rule(double beta) { return {Mode::Beta, beta}; }
  static PathPolicy always_ordinary() { return {Mode::AlwaysOrdinary, 0.0}; }
  static PathPolicy random_per_flow() { return {Mode::RandomPerFlow, 0.0}; }
};

/// Transmission capability of a path: the harmonic aggregate
/// 1 / sum_j (1 / c_j). Zero-rate hops make the path unusable.
inline double capability(const std::vector<int>& rates) {
  if (rates.empty()) throw UnavailableLinkError("capability: empty path");
  double inv = 0.0;
  for (int c : rates) {
    if (c <= 0) throw UnavailableLinkError("capability: blocked hop (rate 0)");
    inv += 1.0 / static_cast<double>(c);
  }
  return 1.0 / inv;
}

/// Ratio test: choose the direct path when
/// A(direct) / A(ordinary) >= beta; with only one path available, choose
/// it. Both paths blocked is an error.
inline PathChoice select_path(const Flow& f, double beta) {
  const bool direct_ok = f.direct_unblocked();
  const bool ordinary_ok = f.ordinary_unblocked();
  if (!direct_ok && !ordinary_ok)
    throw UnschedulableFlowError("flow " + std::to_string(f.id) +
                                 ": both paths blocked");
  if (!ordinary_ok) return PathChoice::Direct;
  if (!direct_ok) return PathChoice::Ordinary;

  double inv_ordinary = 0.0;
  for (const auto& h : f.ordinary_path) inv_ordinary += 1.0 / h.rate;
  // A(d)/A(b) = c_d * sum(1/c_j); keeps the comparison free of an extra
  // division.
  const double ratio = f.direct_link->rate * inv_ordinary;
  return ratio >= beta ? PathChoice::Direct : PathChoice::Ordinary;
}

/// Apply a policy to a flow set. RandomPerFlow consumes one draw per flow
/// with both paths available, in flow order, so choices are reproducible
/// from the rng state.
inline std::map<int, PathChoice> select_all(const std::vector<Flow>& flows,
                                            const PathPolicy& policy,
                                            std::mt19937_64* rng = nullptr) {
  std::map<int, PathChoice> out;
  std::mt19937_64 local(0);
  std::mt19937_64& gen = rng ? *rng : local;
  for (const auto& f : flows) {
    switch (policy.mode) {
      case PathPolicy::Mode::Beta:
        out[f.id] = select_path(f, policy.beta);
        break;
      case PathPolicy::Mode::AlwaysOrdinary:
        if (f.ordinary_unblocked())
          out[f.id] = PathChoice::Ordinary;
        else if (f.direct_unblocked())
          out[f.id] = PathChoice::Direct;
        else
          throw UnschedulableFlowError("flow " + std::to_string(f.id) +
                                       ": both paths blocked");
        break;
      case PathPolicy::Mode::RandomPerFlow: {
        const bool d_ok = f.direct_unblocked();
        const bool o_ok = f.ordinary_unblocked();
        if (!d_ok && !o_ok)
          throw UnschedulableFlowError("flow " + std::to_string(f.id) +
                                       ": both paths blocked");
        if (d_ok && o_ok)
          out[f.id] = (gen() & 1) ? PathChoice::Direct : PathChoice::Ordinary;
        else
          out[f.id] = d_ok ? PathChoice::Direct : PathChoice::Ordinary;
        break;
      }
    }
  }
  return out;
}

}  // namespace d2dmac
