#include "rde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rde/errors.hpp"

namespace rde {

double compensated_sum(std::span<const double> x) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : x) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

MeanSe mean_se(std::span<const double> x) {
  if (x.empty()) throw InsufficientData("mean of an empty sample");
  MeanSe out;
  out.n = static_cast<std::int64_t>(x.size());
  out.mean = compensated_sum(x) / static_cast<double>(out.n);
  if (out.n == 1) return out;
  std::vector<double> dev2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - out.mean;
    dev2[i] = d * d;
  }
  const double var = compensated_sum(dev2) / static_cast<double>(out.n - 1);
  out.se = std::sqrt(std::max(0.0, var) / static_cast<double>(out.n));
  return out;
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t n, double z) {
  if (n <= 0) throw InsufficientData("proportion of an empty sample");
  if (successes < 0 || successes > n)
    throw ConfigError("successes", "must lie in [0, n]");
  WilsonInterval out;
  out.successes = successes;
  out.n = n;
  const double nn = static_cast<double>(n);
  out.p_hat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (out.p_hat + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(out.p_hat * (1.0 - out.p_hat) / nn + z2 / (4.0 * nn * nn)) / denom;
  out.lo = std::max(0.0, center - half);
  out.hi = std::min(1.0, center + half);
  return out;
}

namespace {

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// P(D >= d) by counting monotone lattice paths whose running deviation stays
// strictly below d, over all interleavings of the two sorted samples.
double ks_exact_p(std::int64_t n, std::int64_t m, double d) {
  const double eps = 1e-12;
  std::vector<long double> col(static_cast<std::size_t>(m + 1), 0.0L);
  col[0] = 1.0L;
  for (std::int64_t j = 1; j <= m; ++j)
    col[static_cast<std::size_t>(j)] =
        (static_cast<double>(j) / static_cast<double>(m) < d - eps)
            ? col[static_cast<std::size_t>(j - 1)]
            : 0.0L;
  for (std::int64_t i = 1; i <= n; ++i) {
    std::vector<long double> next(static_cast<std::size_t>(m + 1), 0.0L);
    for (std::int64_t j = 0; j <= m; ++j) {
      const double dev = std::abs(static_cast<double>(i) / static_cast<double>(n) -
                                  static_cast<double>(j) / static_cast<double>(m));
      if (dev >= d - eps) continue;
      next[static_cast<std::size_t>(j)] = col[static_cast<std::size_t>(j)];
      if (j > 0) next[static_cast<std::size_t>(j)] += next[static_cast<std::size_t>(j - 1)];
    }
    col = std::move(next);
  }
  long double total = 1.0L;  // C(n + m, n)
  for (std::int64_t k = 1; k <= n; ++k)
    total = total * static_cast<long double>(m + k) / static_cast<long double>(k);
  const double p = 1.0 - static_cast<double>(col[static_cast<std::size_t>(m)] / total);
  return std::clamp(p, 0.0, 1.0);
}

double ks_asymptotic_p(std::int64_t n, std::int64_t m, double d) {
  const double ne = static_cast<double>(n) * static_cast<double>(m) /
                    static_cast<double>(n + m);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * lambda * lambda * static_cast<double>(k * k));
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("two-sample test needs both samples");
  KsResult out;
  out.n1 = static_cast<std::int64_t>(a.size());
  out.n2 = static_cast<std::int64_t>(b.size());
  out.statistic = ks_statistic(a, b);
  out.exact = out.n1 < 30 && out.n2 < 30;
  out.p_value = out.exact ? ks_exact_p(out.n1, out.n2, out.statistic)
                          : ks_asymptotic_p(out.n1, out.n2, out.statistic);
  return out;
}

double autocorrelation(std::span<const double> x, int lag) {
  const auto n = static_cast<std::int64_t>(x.size());
  if (lag < 1 || n <= lag + 1) throw InsufficientData("autocorrelation needs size > lag + 1");
  const double mean = compensated_sum(x) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = x[static_cast<std::size_t>(i)] - mean;
    den += d * d;
    if (i + lag < n) num += d * (x[static_cast<std::size_t>(i + lag)] - mean);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

PermutationTest permutation_autocorr_test(std::span<const double> x, int lag,
                                          int permutations, std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(x.size());
  if (lag < 1 || n <= lag + 2)
    throw InsufficientData("permutation test needs size > lag + 2");
  PermutationTest out;
  out.permutations = permutations;

  const double mean = compensated_sum(x) / static_cast<double>(n);
  double den = 0.0;
  for (double v : x) den += (v - mean) * (v - mean);
  if (den == 0.0) {
    out.degenerate = true;
    return out;
  }

  out.statistic = autocorrelation(x, lag);
  std::vector<double> work(x.begin(), x.end());
  std::mt19937_64 rng(seed);
  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    std::shuffle(work.begin(), work.end(), rng);
    if (std::abs(autocorrelation(work, lag)) >= std::abs(out.statistic) - 1e-15) ++at_least;
  }
  out.p_value = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  return out;
}

}  // namespace rde
