#include "rde/regeneration.hpp"

#include <cmath>

#include "rde/errors.hpp"

namespace rde {

namespace {

std::int64_t whole_units(double horizon) {
  return static_cast<std::int64_t>(std::floor(horizon + 1e-9));
}

void check_inputs(const CoupledTrajectory& coupled, double dependence_range) {
  if (!(dependence_range > 0.0))
    throw ConfigError("dependence_range", "must be positive");
  if (coupled.marks.size() != static_cast<std::size_t>(whole_units(coupled.traj.horizon)) + 1)
    throw ConfigError("marks", "need one mark per whole time unit");
}

// One settle scan from an integer origin: raise the threshold past each
// rejected ascent until a bracket stays within half the dependence range of
// its start.  Returns the accepted bracket end, or none when the path is
// exhausted first.  Thresholds grow by at least the dependence range per
// rejection, so the scan terminates.
std::optional<std::int64_t> settle_scan(const ProjectedPath& q, std::int64_t origin,
                                        double gap, double range,
                                        std::vector<AscentCandidate>* trace) {
  const double t0 = static_cast<double>(origin);
  double threshold = q.value_at(t0) + gap;
  double cursor = t0;
  while (true) {
    const auto passage = q.first_ge(cursor, threshold);
    if (!passage) return std::nullopt;
    const auto bracket_end = origin + static_cast<std::int64_t>(std::ceil(*passage - t0));
    const double end_time = static_cast<double>(bracket_end);
    if (end_time > q.horizon()) return std::nullopt;  // bracket runs past the path
    const double start_value = q.value_at(*passage);
    const double osc = std::max(q.interval_max(*passage, end_time) - start_value,
                                start_value - q.interval_min(*passage, end_time));
    const bool accepted = osc < range / 2.0;
    if (trace) trace->push_back({*passage, bracket_end, osc, accepted});
    if (accepted) return bracket_end;
    threshold = q.interval_max(t0, end_time) + range;
    cursor = end_time;
  }
}

// Chain settle scans until one ends on a marked unit.  The first scan uses
// the caller's gap; every later one restarts from the previous settle time
// with a gap of three dependence ranges.
std::optional<std::int64_t> first_marked_settle(const ProjectedPath& q,
                                                const std::vector<std::uint8_t>& marks,
                                                std::int64_t origin, double gap, double range,
                                                std::vector<SettleScan>* trace) {
  std::int64_t cur = origin;
  double g = gap;
  while (true) {
    SettleScan scan;
    scan.origin = cur;
    scan.gap = g;
    const auto settle =
        settle_scan(q, cur, g, range, trace ? &scan.candidates : nullptr);
    scan.settle_time = settle;
    scan.marked = settle && marks[static_cast<std::size_t>(*settle)] != 0;
    const bool marked = scan.marked;
    if (trace) trace->push_back(std::move(scan));
    if (!settle) return std::nullopt;
    if (marked) return settle;
    cur = *settle;
    g = 3.0 * range;
  }
}

}  // namespace

HierarchyTrace compute_hierarchy(const CoupledTrajectory& coupled, std::span<const double> l,
                                 double dependence_range, double initial_gap) {
  check_inputs(coupled, dependence_range);
  if (!(initial_gap > 0.0)) throw ConfigError("initial_gap", "must be positive");
  const ProjectedPath q(coupled.traj, l);
  HierarchyTrace out;
  out.first_marked = first_marked_settle(q, coupled.marks, 0, initial_gap,
                                         dependence_range, &out.scans);
  return out;
}

DStatus compute_D(const CoupledTrajectory& coupled, std::int64_t from_time,
                  std::span<const double> l, double dependence_range, double guard_gap) {
  check_inputs(coupled, dependence_range);
  if (guard_gap < 0.0) guard_gap = 10.0 * dependence_range;
  if (from_time < 0 || from_time > whole_units(coupled.traj.horizon))
    throw ConfigError("from_time", "must be a whole unit within the horizon");
  const ProjectedPath q(coupled.traj, l);
  const double start = static_cast<double>(from_time);
  const double base = q.value_at(start);

  DStatus out;
  const auto drop = q.first_le(start, base - dependence_range);
  if (drop) {
    out.kind = DStatus::Kind::finite;
    out.value = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(*drop - start)));
    return out;
  }
  const double terminal = q.value_at(q.horizon());
  out.kind = terminal >= base + guard_gap ? DStatus::Kind::infinite_within_horizon
                                          : DStatus::Kind::censored;
  return out;
}

RegenerationRecord find_regenerations(const CoupledTrajectory& coupled,
                                      std::span<const double> l, double dependence_range,
                                      double guard_gap) {
  check_inputs(coupled, dependence_range);
  const ProjectedPath q(coupled.traj, l);
  const double range = dependence_range;
  const std::int64_t last_unit = whole_units(coupled.traj.horizon);
  const std::int64_t spu = coupled.traj.steps_per_unit();

  RegenerationRecord rec;
  rec.first_block_status = compute_D(coupled, 0, l, range, guard_gap);

  std::int64_t origin = 0;
  while (true) {
    std::optional<std::int64_t> tau;
    bool censored = false;
    std::int64_t cur = origin;
    double gap = 3.0 * range;
    while (true) {
      const auto settled =
          first_marked_settle(q, coupled.marks, cur, gap, range, nullptr);
      if (!settled) break;
      const std::int64_t candidate = *settled + 1;
      if (candidate > last_unit) {
        censored = true;  // no room to run the backtrack check at all
        break;
      }
      const DStatus d = compute_D(coupled, candidate, l, range, guard_gap);
      if (d.finite()) {
        const std::int64_t restart = candidate + d.value;
        if (restart > last_unit) break;  // check concluded, but no path left to search
        gap = q.interval_max(static_cast<double>(origin), static_cast<double>(restart)) -
              q.value_at(static_cast<double>(restart)) + range;
        cur = restart;
        continue;
      }
      if (d.infinite()) {
        tau = candidate;
      } else {
        censored = true;
      }
      break;
    }
    if (!tau) {
      rec.last_block_censored = censored;
      break;
    }
    rec.regen_times.push_back(*tau);
    origin = *tau;
  }

  const int d = coupled.traj.dimension;
  for (std::size_t k = 0; k < rec.regen_times.size(); ++k) {
    const std::int64_t end = rec.regen_times[k];
    const std::int64_t start = k == 0 ? 0 : rec.regen_times[k - 1];
    const auto p_end = coupled.traj.point(end * spu);
    const auto p_start = coupled.traj.point(start * spu);

    Vec pos(static_cast<std::size_t>(d));
    BlockSummary block;
    block.start = start;
    block.duration = end - start;
    block.displacement.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      pos[static_cast<std::size_t>(i)] = p_end[static_cast<std::size_t>(i)];
      block.displacement[static_cast<std::size_t>(i)] =
          p_end[static_cast<std::size_t>(i)] - p_start[static_cast<std::size_t>(i)];
    }
    const double s = static_cast<double>(start);
    const double e = static_cast<double>(end);
    const double base = q.value_at(s);
    block.min_forward_dip = q.interval_min(s, e) - base;
    block.max_level_gain = q.interval_max(s, e) - base;
    rec.positions.push_back(std::move(pos));
    rec.blocks.push_back(std::move(block));
  }
  return rec;
}

}  // namespace rde
