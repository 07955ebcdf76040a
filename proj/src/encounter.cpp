#include "rde/encounter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rde/errors.hpp"
#include "rde/linalg.hpp"
#include "rde/path_events.hpp"
#include "rde/rng.hpp"

namespace rde {

namespace {

struct Seg {
  Vec a, b;
};

// Parts of each polyline segment whose projection lies in [lo, hi].
std::vector<Seg> window_segments(const Trajectory& t, std::span<const double> l,
                                 double lo, double hi) {
  std::vector<Seg> out;
  const int d = t.dimension;
  for (std::int64_t i = 0; i < t.steps(); ++i) {
    const auto p = t.point(i);
    const auto q = t.point(i + 1);
    const double pa = dot(p, l);
    const double pb = dot(q, l);
    double s0 = 0.0, s1 = 1.0;
    if (pa == pb) {
      if (pa < lo || pa > hi) continue;
    } else {
      double u = (lo - pa) / (pb - pa);
      double v = (hi - pa) / (pb - pa);
      if (u > v) std::swap(u, v);
      s0 = std::max(0.0, u);
      s1 = std::min(1.0, v);
      if (s0 > s1) continue;
    }
    Seg seg;
    seg.a.resize(static_cast<std::size_t>(d));
    seg.b.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      seg.a[ju] = p[ju] + s0 * (q[ju] - p[ju]);
      seg.b[ju] = p[ju] + s1 * (q[ju] - p[ju]);
    }
    out.push_back(std::move(seg));
  }
  return out;
}

double seg_seg_dist2(const Seg& sx, const Seg& sy) {
  const std::size_t d = sx.a.size();
  double a = 0.0, e = 0.0, f = 0.0, c = 0.0, b = 0.0, rr = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double d1 = sx.b[j] - sx.a[j];
    const double d2 = sy.b[j] - sy.a[j];
    const double r = sx.a[j] - sy.a[j];
    a += d1 * d1;
    e += d2 * d2;
    f += d2 * r;
    c += d1 * r;
    b += d1 * d2;
    rr += r * r;
  }
  constexpr double eps = 1e-30;
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) {
    s = t = 0.0;
  } else if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else if (e <= eps) {
    s = std::clamp(-c / a, 0.0, 1.0);
  } else {
    const double denom = a * e - b * b;
    s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
    t = (b * s + f) / e;
    if (t < 0.0) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1.0) {
      t = 1.0;
      s = std::clamp((b - c) / a, 0.0, 1.0);
    }
  }
  double out = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = (sx.a[j] + s * (sx.b[j] - sx.a[j])) -
                        (sy.a[j] + t * (sy.b[j] - sy.a[j]));
    out += diff * diff;
  }
  return out;
}

std::uint64_t cell_key(std::span<const std::int64_t> cell) {
  std::uint64_t k = 0x243f6a8885a308d3ull;
  for (const auto v : cell) k = derive_key(k, static_cast<std::uint64_t>(v));
  return k;
}

// Uniform-grid broad phase; a hash collision only merges two far-apart cells,
// adding candidates without ever dropping one.
class SegmentHash {
 public:
  SegmentHash(std::span<const Seg> segs, double cell) : cell_(cell), stamp_(segs.size(), -1) {
    std::vector<std::int64_t> lo, hi, cur;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      bounds(segs[i], 0.0, lo, hi);
      cur = lo;
      insert_box(i, lo, hi, cur, 0);
    }
  }

  // indices of stored segments sharing a cell with the query box inflated by
  // one cell on every side
  const std::vector<std::size_t>& query(const Seg& s) {
    found_.clear();
    ++round_;
    std::vector<std::int64_t> lo, hi, cur;
    bounds(s, cell_, lo, hi);
    cur = lo;
    gather_box(lo, hi, cur, 0);
    return found_;
  }

 private:
  void bounds(const Seg& s, double pad, std::vector<std::int64_t>& lo,
              std::vector<std::int64_t>& hi) const {
    const std::size_t d = s.a.size();
    lo.resize(d);
    hi.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double a = std::min(s.a[j], s.b[j]) - pad;
      const double b = std::max(s.a[j], s.b[j]) + pad;
      lo[j] = static_cast<std::int64_t>(std::floor(a / cell_));
      hi[j] = static_cast<std::int64_t>(std::floor(b / cell_));
    }
  }

  void insert_box(std::size_t idx, const std::vector<std::int64_t>& lo,
                  const std::vector<std::int64_t>& hi, std::vector<std::int64_t>& cur,
                  std::size_t dim) {
    if (dim == cur.size()) {
      cells_[cell_key(cur)].push_back(idx);
      return;
    }
    for (std::int64_t v = lo[dim]; v <= hi[dim]; ++v) {
      cur[dim] = v;
      insert_box(idx, lo, hi, cur, dim + 1);
    }
  }

  void gather_box(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                  std::vector<std::int64_t>& cur, std::size_t dim) {
    if (dim == cur.size()) {
      const auto it = cells_.find(cell_key(cur));
      if (it == cells_.end()) return;
      for (const auto idx : it->second)
        if (stamp_[idx] != round_) {
          stamp_[idx] = round_;
          found_.push_back(idx);
        }
      return;
    }
    for (std::int64_t v = lo[dim]; v <= hi[dim]; ++v) {
      cur[dim] = v;
      gather_box(lo, hi, cur, dim + 1);
    }
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
  std::vector<std::int64_t> stamp_;
  std::int64_t round_ = 0;
  std::vector<std::size_t> found_;
};

}  // namespace

void validate_encounter_config(const EncounterConfig& cfg, std::span<const double> l,
                               double ball_radius) {
  if (!(ball_radius > 0.0)) throw ConfigError("ball_radius", "must be positive");
  if (!(cfg.level >= 4.0 * ball_radius))
    throw ConfigError("level", "window floor must be at least four ball radii");
  if (cfg.y_start.size() != l.size())
    throw ConfigError("y_start", "dimension mismatch with the direction");
  if (!(dot(cfg.y_start, l) >= 3.0 * cfg.level))
    throw ConfigError("y_start", "second walker must start at least three levels out");
  if (cfg.replicates < 1) throw ConfigError("replicates", "need at least one pair");
}

bool pair_encounter(const Trajectory& x, const Trajectory& y, std::span<const double> l,
                    double level, double y_level, double ball_radius) {
  if (!(ball_radius > 0.0)) throw ConfigError("ball_radius", "must be positive");
  if (x.dimension != y.dimension || static_cast<std::size_t>(x.dimension) != l.size())
    throw ConfigError("trajectory", "dimension mismatch");
  const double lo = level;
  const double hi = y_level - level;
  if (!(hi > lo)) throw ConfigError("level", "projection window is empty");

  const auto xs = window_segments(x, l, lo, hi);
  const auto ys = window_segments(y, l, lo, hi);
  if (xs.empty() || ys.empty()) return false;

  const double thr2 = 4.0 * ball_radius * ball_radius;
  SegmentHash hash(ys, 2.0 * ball_radius);
  for (const auto& sx : xs)
    for (const auto idx : hash.query(sx))
      if (seg_seg_dist2(sx, ys[idx]) < thr2) return true;
  return false;
}

EncounterEstimate encounter_probability(const EnvironmentSpec& spec,
                                        const EncounterConfig& cfg, const SimConfig& sim,
                                        std::span<const double> l, double ball_radius,
                                        std::uint64_t master_seed) {
  validate_encounter_config(cfg, l, ball_radius);
  const double y_level = dot(cfg.y_start, l);
  const auto d = static_cast<std::size_t>(spec.dimension);
  if (cfg.y_start.size() != d) throw ConfigError("y_start", "dimension mismatch");

  SimConfig sim_x = sim;
  sim_x.x0.assign(d, 0.0);
  SimConfig sim_y = sim;
  sim_y.x0 = cfg.y_start;

  EncounterEstimate out;
  for (std::int64_t i = 0; i < cfg.replicates; ++i) {
    EnvironmentSpec shared = spec;
    shared.master_seed = derive_key(master_seed, stream::environment,
                                    static_cast<std::uint64_t>(i));
    const Environment env = make_environment(shared);
    const auto seed_x = derive_key(master_seed, stream::replicate,
                                   2 * static_cast<std::uint64_t>(i));
    const auto seed_y = derive_key(master_seed, stream::replicate,
                                   2 * static_cast<std::uint64_t>(i) + 1);
    const Trajectory tx = simulate_path(env, sim_x, seed_x);
    const Trajectory ty = simulate_path(env, sim_y, seed_y);
    if (pair_encounter(tx, ty, l, cfg.level, y_level, ball_radius)) ++out.encounters;
    if (running_max(tx, l, tx.horizon) >= y_level - cfg.level) ++out.traversals;
  }
  out.rate = wilson_interval(out.encounters, cfg.replicates);
  return out;
}

}  // namespace rde
