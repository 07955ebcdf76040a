#include "rde/path_events.hpp"

#include <algorithm>
#include <cmath>

#include "rde/errors.hpp"

namespace rde {

namespace {

void check_direction(std::span<const double> l, int dimension) {
  if (l.size() != static_cast<std::size_t>(dimension))
    throw ConfigError("direction", "size must equal dimension");
  if (std::abs(norm2(l) - 1.0) > 1e-12)
    throw ConfigError("direction", "must be a unit vector");
}

// Linear crossing time of level u inside a segment; snaps onto the segment
// ends so a level attained exactly at a grid point yields that grid time.
double crossing(double ts, double te, double vs, double ve, double u) {
  const double frac = (u - vs) / (ve - vs);
  if (frac >= 1.0) return te;
  if (frac <= 0.0) return ts;
  return ts + frac * (te - ts);
}

}  // namespace

ProjectedPath::ProjectedPath(const Trajectory& traj, std::span<const double> l) {
  check_direction(l, traj.dimension);
  dt_ = traj.dt;
  const std::int64_t n = traj.steps();
  q_.resize(static_cast<std::size_t>(n + 1));
  prefix_max_.resize(q_.size());
  double m = -1e300;
  for (std::int64_t i = 0; i <= n; ++i) {
    const double v = dot(traj.point(i), l);
    q_[static_cast<std::size_t>(i)] = v;
    m = std::max(m, v);
    prefix_max_[static_cast<std::size_t>(i)] = m;
  }
}

std::int64_t ProjectedPath::segment_of(double t) const {
  std::int64_t i = static_cast<std::int64_t>(std::floor(t / dt_));
  const std::int64_t last = segments() - 1;
  if (i < 0) i = 0;
  if (i > last) i = last;
  if (i > 0 && t < static_cast<double>(i) * dt_) --i;
  if (i < last && t >= static_cast<double>(i + 1) * dt_) ++i;
  return i;
}

double ProjectedPath::value_at(double t) const {
  const std::int64_t i = segment_of(t);
  const double ts = static_cast<double>(i) * dt_;
  const double frac = std::clamp((t - ts) / dt_, 0.0, 1.0);
  const double qs = q_[static_cast<std::size_t>(i)];
  return qs + frac * (q_[static_cast<std::size_t>(i + 1)] - qs);
}

double ProjectedPath::running_max(double t) const {
  const std::int64_t i = segment_of(t);
  double m = prefix_max_[static_cast<std::size_t>(i)];
  if (t > static_cast<double>(i) * dt_) m = std::max(m, value_at(t));
  return m;
}

double ProjectedPath::interval_max(double t1, double t2) const {
  if (t2 < t1) t2 = t1;
  double m = std::max(value_at(t1), value_at(t2));
  const std::int64_t lo = segment_of(t1) + 1;
  const std::int64_t hi = segment_of(t2);
  for (std::int64_t g = lo; g <= hi; ++g) {
    if (static_cast<double>(g) * dt_ <= t1 || static_cast<double>(g) * dt_ >= t2) continue;
    m = std::max(m, q_[static_cast<std::size_t>(g)]);
  }
  return m;
}

double ProjectedPath::interval_min(double t1, double t2) const {
  if (t2 < t1) t2 = t1;
  double m = std::min(value_at(t1), value_at(t2));
  const std::int64_t lo = segment_of(t1) + 1;
  const std::int64_t hi = segment_of(t2);
  for (std::int64_t g = lo; g <= hi; ++g) {
    if (static_cast<double>(g) * dt_ <= t1 || static_cast<double>(g) * dt_ >= t2) continue;
    m = std::min(m, q_[static_cast<std::size_t>(g)]);
  }
  return m;
}

std::optional<double> ProjectedPath::first_ge(double t0, double u) const {
  if (t0 > horizon()) return std::nullopt;
  const std::int64_t start = segment_of(t0);
  double ts = std::max(t0, static_cast<double>(start) * dt_);
  double vs = value_at(ts);
  if (vs >= u) return ts;
  for (std::int64_t i = start; i < segments(); ++i) {
    const double te = static_cast<double>(i + 1) * dt_;
    const double ve = q_[static_cast<std::size_t>(i + 1)];
    if (ve >= u) return crossing(ts, te, vs, ve, u);
    ts = te;
    vs = ve;
  }
  return std::nullopt;
}

std::optional<double> ProjectedPath::first_le(double t0, double u) const {
  if (t0 > horizon()) return std::nullopt;
  const std::int64_t start = segment_of(t0);
  double ts = std::max(t0, static_cast<double>(start) * dt_);
  double vs = value_at(ts);
  if (vs <= u) return ts;
  for (std::int64_t i = start; i < segments(); ++i) {
    const double te = static_cast<double>(i + 1) * dt_;
    const double ve = q_[static_cast<std::size_t>(i + 1)];
    if (ve <= u) return crossing(ts, te, vs, ve, u);
    ts = te;
    vs = ve;
  }
  return std::nullopt;
}

std::optional<double> ProjectedPath::first_in_closed(double t0, double a, double b) const {
  if (t0 > horizon()) return std::nullopt;
  const std::int64_t start = segment_of(t0);
  double ts = std::max(t0, static_cast<double>(start) * dt_);
  double vs = value_at(ts);
  if (vs >= a && vs <= b) return ts;
  for (std::int64_t i = start; i < segments(); ++i) {
    const double te = static_cast<double>(i + 1) * dt_;
    const double ve = q_[static_cast<std::size_t>(i + 1)];
    if (vs < a && ve >= a) return crossing(ts, te, vs, ve, a);
    if (vs > b && ve <= b) return crossing(ts, te, vs, ve, b);
    ts = te;
    vs = ve;
  }
  return std::nullopt;
}

std::optional<double> ProjectedPath::first_out_open(double t0, double a, double b) const {
  if (t0 > horizon()) return std::nullopt;
  const std::int64_t start = segment_of(t0);
  double ts = std::max(t0, static_cast<double>(start) * dt_);
  double vs = value_at(ts);
  if (vs <= a || vs >= b) return ts;
  for (std::int64_t i = start; i < segments(); ++i) {
    const double te = static_cast<double>(i + 1) * dt_;
    const double ve = q_[static_cast<std::size_t>(i + 1)];
    if (ve <= a) return crossing(ts, te, vs, ve, a);
    if (ve >= b) return crossing(ts, te, vs, ve, b);
    ts = te;
    vs = ve;
  }
  return std::nullopt;
}

std::optional<double> ProjectedPath::first_out_closed(double t0, double a, double b) const {
  if (t0 > horizon()) return std::nullopt;
  const std::int64_t start = segment_of(t0);
  double ts = std::max(t0, static_cast<double>(start) * dt_);
  double vs = value_at(ts);
  if (vs < a || vs > b) return ts;
  for (std::int64_t i = start; i < segments(); ++i) {
    const double te = static_cast<double>(i + 1) * dt_;
    const double ve = q_[static_cast<std::size_t>(i + 1)];
    if (ve < a) return crossing(ts, te, vs, ve, a);
    if (ve > b) return crossing(ts, te, vs, ve, b);
    ts = te;
    vs = ve;
  }
  return std::nullopt;
}

void validate_slab(const SlabSpec& slab, int dimension) {
  check_direction(slab.direction, dimension);
  if (!(slab.lo < slab.hi)) throw ConfigError("slab", "lower level must be below upper level");
}

std::optional<double> hitting_time(const Trajectory& traj, std::span<const double> l,
                                   double u, CrossMode mode) {
  const ProjectedPath q(traj, l);
  switch (mode) {
    case CrossMode::abs_ge:
      return q.first_ge(0.0, u);
    case CrossMode::abs_le:
      return q.first_le(0.0, u);
    case CrossMode::rel_ge:
      return q.first_ge(0.0, q.at_grid(0) + u);
    case CrossMode::rel_le:
      return q.first_le(0.0, q.at_grid(0) + u);
  }
  return std::nullopt;
}

std::optional<double> slab_exit_time(const Trajectory& traj, const SlabSpec& slab) {
  validate_slab(slab, traj.dimension);
  const ProjectedPath q(traj, slab.direction);
  return slab.closed ? q.first_out_closed(0.0, slab.lo, slab.hi)
                     : q.first_out_open(0.0, slab.lo, slab.hi);
}

double running_max(const Trajectory& traj, std::span<const double> l, double t) {
  const ProjectedPath q(traj, l);
  if (t < 0.0 || t > q.horizon() * (1.0 + 1e-12))
    throw ConfigError("t", "must lie in [0, horizon]");
  return q.running_max(std::min(t, q.horizon()));
}

OscillationStats oscillation_stats(const Trajectory& traj, std::span<const double> l,
                                   double level_scale, int slab_index, int look_ahead) {
  if (!(level_scale > 0.0)) throw ConfigError("level_scale", "must be positive");
  if (look_ahead < 2) throw ConfigError("look_ahead", "must be an integer >= 2");
  if (slab_index < 0) throw ConfigError("slab_index", "must be nonnegative");

  const ProjectedPath q(traj, l);
  const double L = level_scale;
  const double Lp = L / 3.0;
  const double base = static_cast<double>(slab_index) * L;

  OscillationStats out;
  out.slab_index = slab_index;
  out.look_ahead = look_ahead;

  const auto target = q.first_ge(0.0, base + static_cast<double>(look_ahead) * L);
  if (!target) return out;  // settle_time stays none

  // Alternating entrances into the closed inner slab and exits from the open
  // outer slab, starting from time 0.
  double cursor = 0.0;
  double last_qualifying_exit = 0.0;
  int index = 0;
  while (true) {
    const auto entrance = q.first_in_closed(cursor, base + Lp, base + 2.0 * Lp);
    if (!entrance) break;
    const auto exit = q.first_out_open(*entrance, base, base + L);
    if (!exit) break;
    ++index;
    if (*entrance + 1.0 <= *exit && *exit < *target) {
      ++out.long_visit_count;
      out.last_long_visit = index;
      last_qualifying_exit = *exit;
    }
    if (*exit <= cursor) break;  // no progress; defensive against flat paths
    cursor = *exit;
  }

  const auto first_passage = q.first_ge(0.0, base);
  const double t_base = first_passage ? *first_passage : 0.0;
  out.settle_time = out.last_long_visit == 0 ? 0.0 : last_qualifying_exit - t_base;
  return out;
}

double oscillation_fraction(const Trajectory& traj, std::span<const double> l,
                            double level_scale, double settle_bound, int look_ahead,
                            int max_index) {
  if (max_index < 0) throw ConfigError("max_index", "must be nonnegative");
  int hits = 0;
  for (int m = 0; m <= max_index; ++m) {
    const OscillationStats s = oscillation_stats(traj, l, level_scale, m, look_ahead);
    if (s.settle_time && *s.settle_time <= settle_bound) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(max_index + 1);
}

double oscillation_fraction(std::span<const Trajectory> trajs, std::span<const double> l,
                            double level_scale, double settle_bound, int look_ahead,
                            int max_index) {
  if (trajs.empty()) throw ConfigError("trajectories", "need at least one");
  double sum = 0.0;
  for (const Trajectory& t : trajs)
    sum += oscillation_fraction(t, l, level_scale, settle_bound, look_ahead, max_index);
  return sum / static_cast<double>(trajs.size());
}

bool event_Cm(const Trajectory& traj, std::span<const double> l, int slab_index,
              double level_scale, double inner_scale, double hold_time, int level_count,
              int look_ahead) {
  if (!(level_scale > 0.0)) throw ConfigError("level_scale", "must be positive");
  if (std::abs(level_scale - 3.0 * inner_scale) > 1e-9)
    throw ConfigError("inner_scale", "level_scale must equal 3 * inner_scale");
  if (hold_time < 1.0) throw ConfigError("hold_time", "must be >= 1");
  if (level_count < 1) throw ConfigError("level_count", "must be a positive integer");

  const ProjectedPath q(traj, l);
  const double base = static_cast<double>(slab_index) * level_scale;
  const double floor_level = base + 2.0 * inner_scale;
  const double target_level = base + static_cast<double>(look_ahead) * level_scale;

  const auto entry = q.first_ge(0.0, base);
  if (!entry) return false;
  const double t_hold = *entry + hold_time;
  if (t_hold > q.horizon()) return false;

  const double pos = q.value_at(t_hold);
  if (!(pos > floor_level && pos < base + static_cast<double>(level_count) * level_scale))
    return false;

  const auto target_from_zero = q.first_ge(0.0, target_level);
  if (target_from_zero && !(t_hold < *target_from_zero)) return false;

  const auto reach_up = q.first_ge(t_hold, target_level);
  if (!reach_up) return false;
  const auto drop_down = q.first_le(t_hold, floor_level);
  return !drop_down || *reach_up < *drop_down;
}

}  // namespace rde
