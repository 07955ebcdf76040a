#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rde/env_field.hpp"
#include "rde/sde_sim.hpp"

namespace rde {

enum class CouplingMode { forced_bridge, thinning };

// Path plus the auxiliary Bernoulli marks, one per integer time 0..floor(horizon).
// forced[m] records whether the unit interval [m, m+1] was replaced by a
// guided bridge; forced[m] implies marks[m] = 1 and the interval satisfies
// the bridge geometry (confinement and endpoint ball) by construction.
struct CoupledTrajectory {
  Trajectory traj;
  std::vector<std::uint8_t> marks;
  std::vector<std::uint8_t> forced;
  double success_prob = 0.0;
  CouplingMode mode = CouplingMode::forced_bridge;

  std::int64_t mark_count() const { return static_cast<std::int64_t>(marks.size()); }
};

// One-unit guided segment from x: the endpoint is drawn uniformly on the
// ball B(x + 9R l, R) up front and never rejected, so the endpoint law is
// exact; the interior is an Euler scheme with a bridge pull toward the
// endpoint, resampled until every grid point stays strictly inside
// B(x + 5R l, 6R). The final step lands on the endpoint exactly.
struct BridgeSegment {
  std::vector<double> points;  // (steps_per_unit + 1) * dimension, starts at x
  int attempts = 0;            // proposals consumed (>= 1)
};

// Throws CouplingError (interval -1) when the retry cap is exhausted.
BridgeSegment sample_forced_bridge(const Environment& env, std::span<const double> x,
                                   std::span<const double> l, double dt,
                                   std::uint64_t seed);

// Couple Bernoulli(success_prob) marks to the quenched path.
//
// forced_bridge: marks are drawn i.i.d. up front; marked unit intervals are
// replaced by sample_forced_bridge segments, unmarked ones follow the
// unconditional dynamics with step-indexed noise, so success_prob = 0
// reproduces simulate_path(env, cfg, replicate_seed) bit-exactly. The
// unmarked branch uses the unconditional law instead of the complement
// kernel, an O(success_prob) marginal distortion per interval that the
// statistical layers measure against coupling-free estimates.
//
// thinning: the path is fully unconditional; marks[m] = 1 iff an independent
// coin succeeds and the realized interval happens to satisfy the bridge
// geometry. No interval is replaced, so the path law is exact while the
// conditional endpoint law is only reported, not constructed.
CoupledTrajectory attach_bernoulli(const Environment& env, const SimConfig& cfg,
                                   std::span<const double> l, double success_prob,
                                   CouplingMode mode, std::uint64_t replicate_seed);

std::string to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(const std::string& s);

}  // namespace rde
