#include "rde/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "rde/errors.hpp"
#include "rde/rng.hpp"

namespace rde {

namespace {

constexpr int kBridgeRetryCap = 100000;

void check_unit(std::span<const double> l, int dimension) {
  if (l.size() != static_cast<std::size_t>(dimension))
    throw ConfigError("direction", "size must equal dimension");
  if (std::abs(norm2(l) - 1.0) > 1e-12)
    throw ConfigError("direction", "must be a unit vector");
}

// Uniform point in the unit ball by rejection from the cube; counters advance
// monotonically so the draw is a pure function of the rng key.
void unit_ball_point(const CounterRng& rng, int d, std::span<double> out) {
  std::uint64_t c = 0;
  while (true) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) {
      out[static_cast<std::size_t>(j)] = rng.sym(c++);
      r2 += out[static_cast<std::size_t>(j)] * out[static_cast<std::size_t>(j)];
    }
    if (r2 < 1.0) return;
  }
}

double dist2(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dxi = x[i] - y[i];
    s += dxi * dxi;
  }
  return s;
}

// Writes the segment into out ((n_sub+1) * d doubles, out[0..d) = x).
// Returns attempts used, or 0 when the cap was exhausted.
int bridge_into(SdeStepper& stepper, std::span<const double> x, std::span<const double> l,
                double dt, std::uint64_t seed, std::span<double> out) {
  const Environment& env = stepper.env();
  const int d = env.spec.dimension;
  const double R = env.spec.dependence_range;
  const auto n_sub = static_cast<std::int64_t>(std::llround(1.0 / dt));

  const CounterRng target_rng(derive_key(seed, stream::bridge_target));
  const CounterRng noise_rng(derive_key(seed, stream::bridge_noise));

  double target[8], center[8], ball[8];
  unit_ball_point(target_rng, d, std::span<double>(ball, static_cast<std::size_t>(d)));
  for (int j = 0; j < d; ++j) {
    target[j] = x[static_cast<std::size_t>(j)] + 9.0 * R * l[static_cast<std::size_t>(j)] +
                R * ball[j];
    center[j] = x[static_cast<std::size_t>(j)] + 5.0 * R * l[static_cast<std::size_t>(j)];
  }
  const double confine2 = 36.0 * R * R;

  double xi[8], dw[8];
  for (int attempt = 0; attempt < kBridgeRetryCap; ++attempt) {
    std::copy(x.begin(), x.end(), out.begin());
    bool ok = true;
    for (std::int64_t k = 0; k < n_sub && ok; ++k) {
      const auto remaining = n_sub - k;  // tau_k = remaining * dt
      const double pull = 1.0 / static_cast<double>(remaining);
      std::span<const double> cur(out.data() + k * d, static_cast<std::size_t>(d));
      std::span<double> nxt(out.data() + (k + 1) * d, static_cast<std::size_t>(d));
      if (remaining == 1) {
        std::copy(target, target + d, nxt.begin());
      } else {
        const double f = static_cast<double>(remaining - 1) / static_cast<double>(remaining);
        stepper.refresh_at(cur);
        const Vec& b = stepper.drift();
        const Mat& sigma = stepper.sigma();
        const double root = std::sqrt(dt * f);
        const std::uint64_t base =
            (static_cast<std::uint64_t>(attempt) * static_cast<std::uint64_t>(n_sub) +
             static_cast<std::uint64_t>(k)) *
            static_cast<std::uint64_t>(d);
        for (int j = 0; j < d; ++j) xi[j] = noise_rng.normal(base + static_cast<std::uint64_t>(j));
        for (int i = 0; i < d; ++i) {
          double v = 0.0;
          for (int j = 0; j < d; ++j) v += sigma(i, j) * xi[j];
          dw[i] = root * v;
        }
        // X' = X + b dt f + (Y - X) dt / tau + sigma sqrt(dt f) xi, tau = remaining dt
        for (int i = 0; i < d; ++i)
          nxt[static_cast<std::size_t>(i)] =
              cur[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)] * (dt * f) +
              (target[i] - cur[static_cast<std::size_t>(i)]) * pull + dw[i];
      }
      if (dist2(nxt, std::span<const double>(center, static_cast<std::size_t>(d))) >= confine2)
        ok = false;
    }
    if (ok) return attempt + 1;
  }
  return 0;
}

}  // namespace

BridgeSegment sample_forced_bridge(const Environment& env, std::span<const double> x,
                                   std::span<const double> l, double dt,
                                   std::uint64_t seed) {
  const int d = env.spec.dimension;
  check_unit(l, d);
  if (x.size() != static_cast<std::size_t>(d))
    throw ConfigError("x", "size must equal dimension");
  SimConfig probe;
  probe.dt = dt;
  probe.horizon = 1.0;
  probe.x0.assign(x.begin(), x.end());
  validate_sim_config(probe, d);

  const auto n_sub = static_cast<std::int64_t>(std::llround(1.0 / dt));
  BridgeSegment seg;
  seg.points.resize(static_cast<std::size_t>(n_sub + 1) * d);
  SdeStepper stepper(env);
  seg.attempts = bridge_into(stepper, x, l, dt, seed, seg.points);
  if (seg.attempts == 0)
    throw CouplingError(-1, "bridge proposal cap exhausted");
  return seg;
}

CoupledTrajectory attach_bernoulli(const Environment& env, const SimConfig& cfg,
                                   std::span<const double> l, double success_prob,
                                   CouplingMode mode, std::uint64_t replicate_seed) {
  const int d = env.spec.dimension;
  validate_sim_config(cfg, d);
  check_unit(l, d);
  if (!(success_prob >= 0.0 && success_prob <= 1.0))
    throw ConfigError("success_prob", "must lie in [0, 1]");

  const double R = env.spec.dependence_range;
  const auto n_sub = cfg.steps_per_unit();
  const std::int64_t steps = cfg.total_steps();
  const auto whole_units = static_cast<std::int64_t>(std::floor(cfg.horizon + 1e-9));
  const std::int64_t mark_count = whole_units + 1;

  CoupledTrajectory out;
  out.success_prob = success_prob;
  out.mode = mode;
  out.marks.assign(static_cast<std::size_t>(mark_count), 0);
  out.forced.assign(static_cast<std::size_t>(mark_count), 0);

  Trajectory& traj = out.traj;
  traj.dimension = d;
  traj.dt = cfg.dt;
  traj.horizon = cfg.horizon;
  traj.x0 = cfg.x0;
  traj.points.resize(static_cast<std::size_t>(steps + 1) * d);
  std::copy(cfg.x0.begin(), cfg.x0.end(), traj.points.begin());

  const CounterRng mark_rng(derive_key(replicate_seed, stream::marks));
  const CounterRng noise(derive_key(replicate_seed, stream::sde_noise));
  const double root_dt = std::sqrt(cfg.dt);
  SdeStepper stepper(env);

  const bool force = mode == CouplingMode::forced_bridge;
  if (force)
    for (std::int64_t m = 0; m < mark_count; ++m)
      out.marks[static_cast<std::size_t>(m)] =
          mark_rng.u01(static_cast<std::uint64_t>(m)) < success_prob ? 1 : 0;

  double dw[8];
  std::int64_t i = 0;
  while (i < steps) {
    const std::int64_t unit = i / n_sub;
    const bool unit_complete = (unit + 1) * n_sub <= steps;
    const bool bridged = force && unit_complete && i == unit * n_sub &&
                         out.marks[static_cast<std::size_t>(unit)] == 1;
    if (bridged) {
      std::span<double> seg(traj.points.data() + i * d,
                            static_cast<std::size_t>(n_sub + 1) * d);
      const std::uint64_t seed =
          derive_key(replicate_seed, stream::bridge_interval, static_cast<std::uint64_t>(unit));
      const int attempts = bridge_into(stepper, traj.point(i), l, cfg.dt, seed, seg);
      if (attempts == 0) throw CouplingError(unit, "bridge proposal cap exhausted");
      out.forced[static_cast<std::size_t>(unit)] = 1;
      i += n_sub;
    } else {
      for (int j = 0; j < d; ++j)
        dw[j] = root_dt * noise.normal(static_cast<std::uint64_t>(i * d + j));
      stepper.step(traj.point(i), std::span<const double>(dw, static_cast<std::size_t>(d)),
                   cfg.dt, traj.point_mut(i + 1));
      ++i;
    }
  }

  if (!force) {
    // thinning: the coin and the realized geometry must both succeed
    for (std::int64_t m = 0; m < mark_count; ++m) {
      if (!(mark_rng.u01(static_cast<std::uint64_t>(m)) < success_prob)) continue;
      if ((m + 1) * n_sub > steps) continue;
      std::span<const double> x0 = traj.point(m * n_sub);
      double btr[8], ctr[8];
      for (int j = 0; j < d; ++j) {
        btr[j] = x0[static_cast<std::size_t>(j)] + 9.0 * R * l[static_cast<std::size_t>(j)];
        ctr[j] = x0[static_cast<std::size_t>(j)] + 5.0 * R * l[static_cast<std::size_t>(j)];
      }
      bool ok = dist2(traj.point((m + 1) * n_sub),
                      std::span<const double>(btr, static_cast<std::size_t>(d))) < R * R;
      for (std::int64_t k = 0; ok && k <= n_sub; ++k)
        ok = dist2(traj.point(m * n_sub + k),
                   std::span<const double>(ctr, static_cast<std::size_t>(d))) < 36.0 * R * R;
      if (ok) out.marks[static_cast<std::size_t>(m)] = 1;
    }
  }
  return out;
}

std::string to_string(CouplingMode mode) {
  return mode == CouplingMode::forced_bridge ? "forced_bridge" : "thinning";
}

CouplingMode coupling_mode_from_string(const std::string& s) {
  if (s == "forced_bridge") return CouplingMode::forced_bridge;
  if (s == "thinning") return CouplingMode::thinning;
  throw ConfigError("coupling_mode", "unknown coupling mode '" + s + "'");
}

}  // namespace rde
