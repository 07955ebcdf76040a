#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rde/sde_sim.hpp"

namespace rde {

// Scalar projection l . X_t of a sampled trajectory, interpolated linearly
// between grid points. All event times below live on the interpolated path,
// which removes the O(dt) staircase bias of grid-snapped first passages.
// Excursions that start and end strictly inside one step are invisible.
class ProjectedPath {
 public:
  ProjectedPath(const Trajectory& traj, std::span<const double> l);

  double dt() const { return dt_; }
  double horizon() const { return static_cast<double>(segments()) * dt_; }
  std::int64_t segments() const { return static_cast<std::int64_t>(q_.size()) - 1; }
  double at_grid(std::int64_t i) const { return q_[static_cast<std::size_t>(i)]; }

  double value_at(double t) const;

  // max of the interpolated projection over [0, t]; prefix cached, O(1)
  double running_max(double t) const;

  // extrema of the interpolated projection over [t1, t2]
  double interval_max(double t1, double t2) const;
  double interval_min(double t1, double t2) const;

  // first t >= t0 with value >= u (resp. <= u); none if not reached
  std::optional<double> first_ge(double t0, double u) const;
  std::optional<double> first_le(double t0, double u) const;

  // first t >= t0 with value in [a, b]
  std::optional<double> first_in_closed(double t0, double a, double b) const;

  // first t >= t0 with value outside (a, b) (i.e. <= a or >= b)
  std::optional<double> first_out_open(double t0, double a, double b) const;

  // first t >= t0 with value outside [a, b] (i.e. < a or > b); the reported
  // time is the boundary-crossing instant
  std::optional<double> first_out_closed(double t0, double a, double b) const;

 private:
  std::int64_t segment_of(double t) const;

  double dt_ = 0.0;
  std::vector<double> q_;
  std::vector<double> prefix_max_;
};

struct SlabSpec {
  Vec direction;      // unit vector, |direction| = 1 within 1e-12
  double lo = 0.0;    // a
  double hi = 0.0;    // b, a < b
  bool closed = false;
};

void validate_slab(const SlabSpec& slab, int dimension);

enum class CrossMode { abs_ge, abs_le, rel_ge, rel_le };

// First time the projection (absolute l . X_t, or relative l . (X_t - X_0))
// crosses the level u; none if not reached by the horizon.
std::optional<double> hitting_time(const Trajectory& traj, std::span<const double> l,
                                   double u, CrossMode mode);

// First exit from the slab; 0 if the path starts outside.
std::optional<double> slab_exit_time(const Trajectory& traj, const SlabSpec& slab);

// Maximum of the interpolated projection over [0, t].
// Throws ConfigError if t is outside [0, horizon].
double running_max(const Trajectory& traj, std::span<const double> l, double t);

// Slab-oscillation summary around level slab_index * level_scale. Built from
// the alternating entrance times into the closed inner third of the slab and
// exit times from the open full slab.
struct OscillationStats {
  int slab_index = 0;        // m
  int look_ahead = 0;        // alpha
  int long_visit_count = 0;  // entrances followed by >= 1 time unit inside the slab
  int last_long_visit = 0;   // index of the last such entrance; 0 if none
  // Time after the slab's first-passage time at which long visits stop;
  // 0 when there are none, nullopt when level (m+alpha)*L is never reached.
  std::optional<double> settle_time;
};

// level_scale = L = 3 L'; the inner slab is [mL + L', mL + 2L'], the outer
// slab is (mL, (m+1)L), and qualification requires an exit-minus-entrance
// dwell >= 1 completed before the first passage to level (m+alpha)L.
// Ties (dwell exactly 1) qualify.
OscillationStats oscillation_stats(const Trajectory& traj, std::span<const double> l,
                                   double level_scale, int slab_index, int look_ahead);

// Fraction of slab indices m = 0..max_index with settle_time <= settle_bound;
// unreached look-ahead levels (settle_time = none) never qualify.
double oscillation_fraction(const Trajectory& traj, std::span<const double> l,
                            double level_scale, double settle_bound, int look_ahead,
                            int max_index);
double oscillation_fraction(std::span<const Trajectory> trajs, std::span<const double> l,
                            double level_scale, double settle_bound, int look_ahead,
                            int max_index);

// True iff, writing t* for the first passage to level m*L plus hold_time:
// the path at t* sits strictly inside the slab (mL + 2L', (m+K)L), t* precedes
// the first passage to level (m+alpha)L, and after t* that level is reached
// before the projection ever drops to mL + 2L'.
bool event_Cm(const Trajectory& traj, std::span<const double> l, int slab_index,
              double level_scale, double inner_scale, double hold_time, int level_count,
              int look_ahead);

}  // namespace rde
