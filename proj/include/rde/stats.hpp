#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rde {

// Order-insensitive total at 1e-12 relative tolerance (Neumaier compensation).
double compensated_sum(std::span<const double> x);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean; 0 for n = 1
  std::int64_t n = 0;
};

// Throws InsufficientData on an empty sample.
MeanSe mean_se(std::span<const double> x);

struct WilsonInterval {
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t successes = 0;
  std::int64_t n = 0;
};

// Score interval for a binomial proportion; z defaults to the 95% quantile.
// Throws InsufficientData when n = 0.
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t n, double z = 1.959964);

struct KsResult {
  double statistic = 0.0;  // sup |F1 - F2|
  double p_value = 1.0;    // P(D >= observed) under exchangeability
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  bool exact = false;  // exact enumeration (small samples) vs asymptotic formula
};

// Two-sample Kolmogorov-Smirnov test. Exact lattice-path enumeration when
// both samples have fewer than 30 points, the asymptotic tail formula
// otherwise. Ties are handled conservatively by the usual step construction.
// Throws InsufficientData when either sample is empty.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Sample autocorrelation at the given lag; needs size > lag and nonzero
// variance (throws InsufficientData / returns 0 on degenerate handled by
// caller via the test wrapper below).
double autocorrelation(std::span<const double> x, int lag);

struct PermutationTest {
  double statistic = 0.0;              // observed autocorrelation
  std::optional<double> p_value;       // none when degenerate
  int permutations = 0;
  bool degenerate = false;             // constant sample, no test possible
};

// Two-sided permutation test of zero autocorrelation at the given lag.
// Deterministic: the shuffle stream is fixed by the seed. Throws
// InsufficientData when x.size() <= lag + 2.
PermutationTest permutation_autocorr_test(std::span<const double> x, int lag,
                                          int permutations = 400,
                                          std::uint64_t seed = 0x5eed);

}  // namespace rde
