#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rde/coupling.hpp"
#include "rde/path_events.hpp"

namespace rde {

// Outcome of the backtrack check started at an integer time: the first later
// time at which the projection drops R below its starting level, rounded up
// to the grid of whole time units.
struct DStatus {
  enum class Kind { finite, infinite_within_horizon, censored };
  Kind kind = Kind::censored;
  std::int64_t value = 0;  // backtrack duration in whole units; finite only

  bool finite() const { return kind == Kind::finite; }
  bool infinite() const { return kind == Kind::infinite_within_horizon; }
  bool censored() const { return kind == Kind::censored; }
};

// One ascent candidate inside a settle scan: the first passage above the
// current threshold together with the oscillation test on the bracket from
// that passage to the next whole unit.
struct AscentCandidate {
  double time = 0.0;              // threshold passage, absolute units
  std::int64_t bracket_end = 0;   // passage rounded up to a whole unit
  double oscillation = 0.0;       // sup |projection - value at passage| on the bracket
  bool accepted = false;          // oscillation < R/2
};

// One settle scan: from an integer origin, raise the threshold past each
// rejected candidate until a bracket stays within R/2 of its start.
struct SettleScan {
  std::int64_t origin = 0;
  double gap = 0.0;  // initial rise required above the origin level
  std::vector<AscentCandidate> candidates;
  std::optional<std::int64_t> settle_time;  // bracket end of the accepted candidate
  bool marked = false;                      // coupling mark at the settle time
};

// Chain of settle scans from time 0 until one ends at a marked unit.
struct HierarchyTrace {
  std::vector<SettleScan> scans;
  std::optional<std::int64_t> first_marked;
};

HierarchyTrace compute_hierarchy(const CoupledTrajectory& coupled, std::span<const double> l,
                                 double dependence_range, double initial_gap);

// Backtrack check from an integer time.  guard_gap < 0 selects the default
// of 10 * dependence_range: with no drop observed, the check only counts as
// conclusive when the terminal level sits at least guard_gap above the start.
DStatus compute_D(const CoupledTrajectory& coupled, std::int64_t from_time,
                  std::span<const double> l, double dependence_range,
                  double guard_gap = -1.0);

// Path statistics over one renewal block [start, start + duration].
struct BlockSummary {
  std::int64_t start = 0;
  std::int64_t duration = 0;
  Vec displacement;                // position change over the block
  double min_forward_dip = 0.0;    // min of projected change from the block start
  double max_level_gain = 0.0;     // max of projected change from the block start
};

struct RegenerationRecord {
  std::vector<std::int64_t> regen_times;  // strictly increasing whole units
  std::vector<Vec> positions;             // path position at each regeneration
  std::vector<BlockSummary> blocks;       // block k ends at regen_times[k]
  DStatus first_block_status;             // backtrack check from time 0
  bool last_block_censored = false;       // final candidate check was horizon-truncated
};

RegenerationRecord find_regenerations(const CoupledTrajectory& coupled,
                                      std::span<const double> l, double dependence_range,
                                      double guard_gap = -1.0);

}  // namespace rde
