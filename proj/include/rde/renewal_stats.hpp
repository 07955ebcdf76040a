#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rde/env_field.hpp"
#include "rde/regeneration.hpp"
#include "rde/sde_sim.hpp"
#include "rde/stats.hpp"

namespace rde {

enum class EscapeLabel { plus, minus, oscillating, undecided };

// Label plus the evidence behind it: the terminal relative level, the tail
// extremes after the half-threshold passages (NaN when never reached), the
// running extremes, and the thresholds used.
struct EscapeClass {
  EscapeLabel label = EscapeLabel::undecided;
  double terminal_level = 0.0;
  double tail_floor = 0.0;    // min after first reaching +threshold/2; NaN if never
  double tail_ceiling = 0.0;  // max after first reaching -threshold/2; NaN if never
  double running_max = 0.0;
  double running_min = 0.0;
  double threshold = 0.0;
  double backtrack_budget = 0.0;
};

struct VelocityEstimate {
  double value = 0.0;
  double se = 0.0;
  std::int64_t n_effective = 0;
  std::string method;  // "direct" or "renewal"
};

struct TestReport {
  std::string name;
  std::string method;  // "permutation", "ks_exact", "ks_asymptotic"
  double statistic = 0.0;
  std::optional<double> p_value;  // none when degenerate
  double alpha = 0.01;
  bool reject = false;
  bool degenerate = false;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
};

struct ZeroOneReport {
  WilsonInterval plus;
  WilsonInterval minus;
  WilsonInterval either;
  std::string verdict_plus;
  std::string verdict_minus;
  std::string verdict_either;
  double margin = 0.05;
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;
  std::int64_t n_oscillating = 0;
  std::int64_t n_undecided = 0;
};

struct Tau1MomentReport {
  std::int64_t n = 0;  // first blocks with a conclusive no-backtrack check
  MeanSe level;        // projected displacement over the first block
  MeanSe duration;     // first regeneration time
  std::vector<double> running_mean_level;  // prefix means, stability curve
  bool low_n = true;   // fewer than 30 conclusive first blocks
  bool stable = false; // last-half drift of the running mean within 10%
};

struct LimitVelocitySummary {
  Vec l_star;   // unit vector; zero vector in the no-escape branch
  std::optional<VelocityEstimate> v_plus;
  std::optional<VelocityEstimate> v_minus;  // reported as a nonnegative speed
  bool zero_velocity = false;               // no clear escapes in either direction
  double collinearity = 0.0;  // fraction of escaping replicates aligned with l_star
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;
  std::int64_t n_oscillating = 0;
  std::int64_t n_undecided = 0;
};

struct EscapeProbeRow {
  Vec probe;
  WilsonInterval escape_rate;  // frequency of plus classifications
};

// Mean and standard error of l.X_T / T across replicates with a common
// horizon. Throws ConfigError on an empty ensemble or mixed horizons.
VelocityEstimate velocity_direct(std::span<const Trajectory> trajs, std::span<const double> l);

// Same, restricted to replicates whose classification matches the label.
VelocityEstimate velocity_direct(std::span<const Trajectory> trajs, std::span<const double> l,
                                 std::span<const EscapeClass> classes, EscapeLabel keep);

// Ratio-of-sums velocity over the stationary blocks: every block after each
// record's first one. Standard error by the delta method on the ratio of
// means. Throws InsufficientData with fewer than two pooled increments.
VelocityEstimate velocity_renewal(std::span<const RegenerationRecord> records,
                                  std::span<const double> l);

// Threshold classifier for the escape direction; backtrack_budget <= 0
// selects the default threshold / 4.
EscapeClass classify_escape(const Trajectory& traj, std::span<const double> l,
                            double threshold, double backtrack_budget = -1.0);

// Wilson intervals and dichotomy verdicts over classified replicates.
// Throws InsufficientData with fewer than 30 classifications.
ZeroOneReport zero_one_report(std::span<const EscapeClass> classes, double margin = 0.05);

// Independence and equal-distribution checks on the stationary blocks:
// permutation autocorrelation at lags 1..3, parity-split KS, and the
// delay-block-vs-stationary KS. Throws InsufficientData with fewer than 50
// pooled stationary increments.
std::vector<TestReport> iid_tests(std::span<const RegenerationRecord> records,
                                  std::span<const double> l);

// First-block moments conditioned on a conclusive no-backtrack check at the
// origin, with the prefix-mean stability curve.
Tau1MomentReport tau1_moment_report(std::span<const RegenerationRecord> records,
                                    std::span<const double> l);

// Direction and speeds from terminal displacements: l_star from the mean
// displacement of escaping replicates, v_plus / v_minus from the projected
// speeds of each class, plus an alignment diagnostic.
LimitVelocitySummary limit_velocity_summary(std::span<const Trajectory> trajs,
                                            double threshold,
                                            double alignment_cosine = 0.9);

// Quenched escape frequency started from each probe point: sub_count fresh
// replicates per probe in the fixed environment, classified along l.
std::vector<EscapeProbeRow> harmonic_escape_probe(const Environment& env,
                                                  std::span<const Vec> probes,
                                                  std::span<const double> l, int sub_count,
                                                  const SimConfig& cfg, double threshold,
                                                  std::uint64_t base_seed);

std::string to_string(EscapeLabel label);

}  // namespace rde
