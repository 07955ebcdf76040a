#include "rde/renewal_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rde/errors.hpp"
#include "rde/linalg.hpp"
#include "rde/path_events.hpp"
#include "rde/rng.hpp"

namespace rde {

namespace {

void check_common_horizon(std::span<const Trajectory> trajs) {
  if (trajs.empty()) throw ConfigError("trajectories", "need at least one replicate");
  const double h = trajs[0].horizon;
  for (const auto& t : trajs)
    if (std::abs(t.horizon - h) > 1e-9 * std::max(1.0, h))
      throw ConfigError("horizon", "replicates must share one horizon");
}

double terminal_slope(const Trajectory& traj, std::span<const double> l) {
  const auto last = traj.steps();
  return (dot(traj.point(last), l) - dot(traj.point(0), l)) / traj.horizon;
}

std::string dichotomy_verdict(const WilsonInterval& w, double margin) {
  const bool touches_zero = w.lo <= margin;
  const bool touches_one = w.hi >= 1.0 - margin;
  if (touches_zero && touches_one) return "undetermined";
  if (touches_zero) return "consistent with 0";
  if (touches_one) return "consistent with 1";
  return "inconsistent with dichotomy";
}

TestReport report_permutation(const std::string& name, const PermutationTest& t,
                              std::int64_t n) {
  TestReport r;
  r.name = name;
  r.method = "permutation";
  r.statistic = t.statistic;
  r.p_value = t.p_value;
  r.degenerate = t.degenerate;
  r.reject = t.p_value && *t.p_value < r.alpha;
  r.n1 = n;
  return r;
}

TestReport report_ks(const std::string& name, std::span<const double> a,
                     std::span<const double> b) {
  TestReport r;
  r.name = name;
  if (a.empty() || b.empty()) {
    r.method = "ks_exact";
    r.degenerate = true;
    r.n1 = static_cast<std::int64_t>(a.size());
    r.n2 = static_cast<std::int64_t>(b.size());
    return r;
  }
  const KsResult ks = ks_two_sample(a, b);
  r.method = ks.exact ? "ks_exact" : "ks_asymptotic";
  r.statistic = ks.statistic;
  r.p_value = ks.p_value;
  r.reject = ks.p_value < r.alpha;
  r.n1 = ks.n1;
  r.n2 = ks.n2;
  return r;
}

}  // namespace

VelocityEstimate velocity_direct(std::span<const Trajectory> trajs, std::span<const double> l) {
  check_common_horizon(trajs);
  std::vector<double> slopes;
  slopes.reserve(trajs.size());
  for (const auto& t : trajs) slopes.push_back(terminal_slope(t, l));
  const MeanSe m = mean_se(slopes);
  return {m.mean, m.se, m.n, "direct"};
}

VelocityEstimate velocity_direct(std::span<const Trajectory> trajs, std::span<const double> l,
                                 std::span<const EscapeClass> classes, EscapeLabel keep) {
  check_common_horizon(trajs);
  if (classes.size() != trajs.size())
    throw ConfigError("classes", "need one classification per replicate");
  std::vector<double> slopes;
  for (std::size_t i = 0; i < trajs.size(); ++i)
    if (classes[i].label == keep) slopes.push_back(terminal_slope(trajs[i], l));
  if (slopes.empty()) throw InsufficientData("no replicate carries the requested label");
  const MeanSe m = mean_se(slopes);
  return {m.mean, m.se, m.n, "direct"};
}

VelocityEstimate velocity_renewal(std::span<const RegenerationRecord> records,
                                  std::span<const double> l) {
  std::vector<double> dx, dtau;
  for (const auto& rec : records)
    for (std::size_t k = 1; k < rec.blocks.size(); ++k) {
      dx.push_back(dot(rec.blocks[k].displacement, l));
      dtau.push_back(static_cast<double>(rec.blocks[k].duration));
    }
  const auto n = static_cast<std::int64_t>(dx.size());
  if (n < 2) throw InsufficientData("renewal velocity needs at least two stationary blocks");

  const double sum_x = compensated_sum(dx);
  const double sum_t = compensated_sum(dtau);
  const double v = sum_x / sum_t;
  const double t_bar = sum_t / static_cast<double>(n);

  std::vector<double> resid2(dx.size());
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double e = dx[i] - v * dtau[i];
    resid2[i] = e * e;
  }
  const double var_e = compensated_sum(resid2) / static_cast<double>(n - 1);
  const double se = std::sqrt(std::max(0.0, var_e) / static_cast<double>(n)) / t_bar;
  return {v, se, n, "renewal"};
}

EscapeClass classify_escape(const Trajectory& traj, std::span<const double> l,
                            double threshold, double backtrack_budget) {
  if (!(threshold > 0.0)) throw ConfigError("threshold", "must be positive");
  if (backtrack_budget <= 0.0) backtrack_budget = threshold / 4.0;

  const ProjectedPath q(traj, l);
  const double base = q.value_at(0.0);
  const double horizon = q.horizon();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  EscapeClass out;
  out.threshold = threshold;
  out.backtrack_budget = backtrack_budget;
  out.terminal_level = q.value_at(horizon) - base;
  out.running_max = q.interval_max(0.0, horizon) - base;
  out.running_min = q.interval_min(0.0, horizon) - base;

  const auto up_half = q.first_ge(0.0, base + threshold / 2.0);
  out.tail_floor = up_half ? q.interval_min(*up_half, horizon) - base : nan;
  const auto down_half = q.first_le(0.0, base - threshold / 2.0);
  out.tail_ceiling = down_half ? q.interval_max(*down_half, horizon) - base : nan;

  if (out.terminal_level >= threshold && up_half && out.tail_floor > backtrack_budget)
    out.label = EscapeLabel::plus;
  else if (out.terminal_level <= -threshold && down_half &&
           out.tail_ceiling < -backtrack_budget)
    out.label = EscapeLabel::minus;
  else if (out.running_max >= threshold / 4.0 && out.running_min <= -threshold / 4.0)
    out.label = EscapeLabel::oscillating;
  else
    out.label = EscapeLabel::undecided;
  return out;
}

ZeroOneReport zero_one_report(std::span<const EscapeClass> classes, double margin) {
  const auto n = static_cast<std::int64_t>(classes.size());
  if (n < 30) throw InsufficientData("dichotomy report needs at least 30 replicates");
  ZeroOneReport out;
  out.margin = margin;
  for (const auto& c : classes) switch (c.label) {
      case EscapeLabel::plus: ++out.n_plus; break;
      case EscapeLabel::minus: ++out.n_minus; break;
      case EscapeLabel::oscillating: ++out.n_oscillating; break;
      case EscapeLabel::undecided: ++out.n_undecided; break;
    }
  out.plus = wilson_interval(out.n_plus, n);
  out.minus = wilson_interval(out.n_minus, n);
  out.either = wilson_interval(out.n_plus + out.n_minus, n);
  out.verdict_plus = dichotomy_verdict(out.plus, margin);
  out.verdict_minus = dichotomy_verdict(out.minus, margin);
  out.verdict_either = dichotomy_verdict(out.either, margin);
  return out;
}

std::vector<TestReport> iid_tests(std::span<const RegenerationRecord> records,
                                  std::span<const double> l) {
  std::vector<double> dtau, dx;
  for (const auto& rec : records)
    for (std::size_t k = 1; k < rec.blocks.size(); ++k) {
      dtau.push_back(static_cast<double>(rec.blocks[k].duration));
      dx.push_back(dot(rec.blocks[k].displacement, l));
    }
  if (dtau.size() < 50)
    throw InsufficientData("independence tests need at least 50 stationary blocks");

  std::vector<TestReport> out;
  for (int lag = 1; lag <= 3; ++lag) {
    out.push_back(report_permutation("block duration lag-" + std::to_string(lag) +
                                         " autocorrelation",
                                     permutation_autocorr_test(dtau, lag),
                                     static_cast<std::int64_t>(dtau.size())));
    out.push_back(report_permutation("block displacement lag-" + std::to_string(lag) +
                                         " autocorrelation",
                                     permutation_autocorr_test(dx, lag),
                                     static_cast<std::int64_t>(dx.size())));
  }

  std::vector<double> even_tau, odd_tau, even_dx, odd_dx;
  for (std::size_t i = 0; i < dtau.size(); ++i) {
    (i % 2 == 0 ? even_tau : odd_tau).push_back(dtau[i]);
    (i % 2 == 0 ? even_dx : odd_dx).push_back(dx[i]);
  }
  out.push_back(report_ks("block duration parity split", even_tau, odd_tau));
  out.push_back(report_ks("block displacement parity split", even_dx, odd_dx));

  std::vector<double> delay_tau, delay_dx;
  for (const auto& rec : records)
    if (rec.first_block_status.infinite() && !rec.blocks.empty()) {
      delay_tau.push_back(static_cast<double>(rec.blocks[0].duration));
      delay_dx.push_back(dot(rec.blocks[0].displacement, l));
    }
  out.push_back(report_ks("delay vs stationary duration", delay_tau, dtau));
  out.push_back(report_ks("delay vs stationary displacement", delay_dx, dx));
  return out;
}

Tau1MomentReport tau1_moment_report(std::span<const RegenerationRecord> records,
                                    std::span<const double> l) {
  Tau1MomentReport out;
  std::vector<double> levels, durations;
  for (const auto& rec : records) {
    if (!rec.first_block_status.infinite() || rec.blocks.empty()) continue;
    levels.push_back(dot(rec.blocks[0].displacement, l));
    durations.push_back(static_cast<double>(rec.blocks[0].duration));
  }
  out.n = static_cast<std::int64_t>(levels.size());
  out.low_n = out.n < 30;
  if (out.n == 0) return out;

  out.level = mean_se(levels);
  out.duration = mean_se(durations);
  out.running_mean_level.resize(levels.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    acc += levels[i];
    out.running_mean_level[i] = acc / static_cast<double>(i + 1);
  }
  if (out.n >= 4) {
    const std::size_t half = levels.size() / 2;
    double lo = out.running_mean_level[half], hi = lo;
    for (std::size_t i = half; i < levels.size(); ++i) {
      lo = std::min(lo, out.running_mean_level[i]);
      hi = std::max(hi, out.running_mean_level[i]);
    }
    const double scale = std::max(std::abs(out.running_mean_level.back()), 1e-12);
    out.stable = (hi - lo) <= 0.1 * scale;
  }
  return out;
}

LimitVelocitySummary limit_velocity_summary(std::span<const Trajectory> trajs,
                                            double threshold, double alignment_cosine) {
  check_common_horizon(trajs);
  const int d = trajs[0].dimension;

  std::vector<Vec> slopes;
  slopes.reserve(trajs.size());
  for (const auto& t : trajs) {
    Vec u(static_cast<std::size_t>(d));
    const auto last = t.steps();
    for (int j = 0; j < d; ++j)
      u[static_cast<std::size_t>(j)] =
          (t.point(last)[static_cast<std::size_t>(j)] - t.point(0)[static_cast<std::size_t>(j)]) /
          t.horizon;
    slopes.push_back(std::move(u));
  }

  // provisional axis: the mean slope, falling back to the largest replicate
  Vec axis(static_cast<std::size_t>(d), 0.0);
  for (const auto& u : slopes)
    for (int j = 0; j < d; ++j) axis[static_cast<std::size_t>(j)] += u[static_cast<std::size_t>(j)];
  if (norm2(axis) < 1e-9) {
    double best = 0.0;
    for (const auto& u : slopes)
      if (norm2(u) > best) {
        best = norm2(u);
        axis = u;
      }
  }
  if (norm2(axis) < 1e-12) axis[0] = 1.0;
  const double an = norm2(axis);
  for (auto& v : axis) v /= an;

  LimitVelocitySummary out;
  std::vector<EscapeLabel> labels(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto c = classify_escape(trajs[i], axis, threshold);
    labels[i] = c.label;
    switch (c.label) {
      case EscapeLabel::plus: ++out.n_plus; break;
      case EscapeLabel::minus: ++out.n_minus; break;
      case EscapeLabel::oscillating: ++out.n_oscillating; break;
      case EscapeLabel::undecided: ++out.n_undecided; break;
    }
  }

  out.l_star.assign(static_cast<std::size_t>(d), 0.0);
  if (out.n_plus + out.n_minus == 0) {
    out.zero_velocity = true;
    return out;
  }

  Vec mean_escape(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    if (labels[i] != EscapeLabel::plus && labels[i] != EscapeLabel::minus) continue;
    for (int j = 0; j < d; ++j)
      mean_escape[static_cast<std::size_t>(j)] += slopes[i][static_cast<std::size_t>(j)];
  }
  out.l_star = norm2(mean_escape) > 1e-9 ? mean_escape : axis;
  const double ln = norm2(out.l_star);
  for (auto& v : out.l_star) v /= ln;

  std::vector<double> plus_speeds, minus_speeds;
  std::int64_t aligned = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    if (labels[i] != EscapeLabel::plus && labels[i] != EscapeLabel::minus) continue;
    const double along = dot(slopes[i], out.l_star);
    const double len = norm2(slopes[i]);
    if (len > 0.0 && std::abs(along) / len >= alignment_cosine) ++aligned;
    if (labels[i] == EscapeLabel::plus)
      plus_speeds.push_back(along);
    else
      minus_speeds.push_back(-along);
  }
  out.collinearity =
      static_cast<double>(aligned) / static_cast<double>(out.n_plus + out.n_minus);
  if (!plus_speeds.empty()) {
    const MeanSe m = mean_se(plus_speeds);
    out.v_plus = VelocityEstimate{m.mean, m.se, m.n, "direct"};
  }
  if (!minus_speeds.empty()) {
    const MeanSe m = mean_se(minus_speeds);
    out.v_minus = VelocityEstimate{m.mean, m.se, m.n, "direct"};
  }
  return out;
}

std::vector<EscapeProbeRow> harmonic_escape_probe(const Environment& env,
                                                  std::span<const Vec> probes,
                                                  std::span<const double> l, int sub_count,
                                                  const SimConfig& cfg, double threshold,
                                                  std::uint64_t base_seed) {
  if (sub_count < 1) throw ConfigError("sub_count", "must be a positive count");
  std::vector<EscapeProbeRow> out;
  out.reserve(probes.size());
  const std::uint64_t lane = derive_key(base_seed, stream::probe);
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    SimConfig local = cfg;
    local.x0 = probes[pi];
    std::int64_t hits = 0;
    for (int s = 0; s < sub_count; ++s) {
      const std::uint64_t seed = derive_key(
          lane, static_cast<std::uint64_t>(pi) * static_cast<std::uint64_t>(sub_count) +
                    static_cast<std::uint64_t>(s));
      const Trajectory traj = simulate_path(env, local, seed);
      if (classify_escape(traj, l, threshold).label == EscapeLabel::plus) ++hits;
    }
    EscapeProbeRow row;
    row.probe = probes[pi];
    row.escape_rate = wilson_interval(hits, sub_count);
    out.push_back(std::move(row));
  }
  return out;
}

std::string to_string(EscapeLabel label) {
  switch (label) {
    case EscapeLabel::plus: return "plus";
    case EscapeLabel::minus: return "minus";
    case EscapeLabel::oscillating: return "oscillating";
    case EscapeLabel::undecided: return "undecided";
  }
  return "undecided";
}

}  // namespace rde
