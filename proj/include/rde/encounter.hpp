#pragma once

#include <cstdint>
#include <span>

#include "rde/env_field.hpp"
#include "rde/sde_sim.hpp"
#include "rde/stats.hpp"

namespace rde {

// Two independent walkers share one environment: X starts at the origin, Y at
// y_start with l.y_start >= 3 * level. An encounter is a pair of times at
// which both interpolated paths project into the window
// [level, l.y_start - level] and sit within 2 * ball_radius of each other.
struct EncounterConfig {
  double level = 0.0;  // window floor L, at least 4 * ball_radius
  Vec y_start;
  std::int64_t replicates = 0;
};

void validate_encounter_config(const EncounterConfig& cfg, std::span<const double> l,
                               double ball_radius);

// Exact segment-pair minimum distance over the two polylines, restricted to
// the parts of each segment whose projection lies in the window; a spatial
// hash at cell size 2 * ball_radius prunes far-apart pairs.
bool pair_encounter(const Trajectory& x, const Trajectory& y, std::span<const double> l,
                    double level, double y_level, double ball_radius);

struct EncounterEstimate {
  WilsonInterval rate;
  std::int64_t encounters = 0;
  // pairs whose X walker reached the far window edge; when this is close to
  // the replicate count, the horizon truncation is immaterial on the X side
  std::int64_t traversals = 0;
};

// Fresh environment per replicate pair, two independent driving noises on the
// same environment; the fraction of pairs with pair_encounter true.
EncounterEstimate encounter_probability(const EnvironmentSpec& spec,
                                        const EncounterConfig& cfg, const SimConfig& sim,
                                        std::span<const double> l, double ball_radius,
                                        std::uint64_t master_seed);

}  // namespace rde
