#include "rde/env_field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "rde/errors.hpp"

namespace rde {
namespace {

// Bump kernel in u = (r/rho)^2: w = (1-u)^3 on u < 1, zero outside.
// C2 across the support boundary.
inline double bump(double u) {
  const double v = 1.0 - u;
  return v * v * v;
}

struct KernelConstants {
  double weight_max = 0.0;  // max over phase of sum of kernel weights
  double grad_max = 0.0;    // max over phase of sum |grad w|, spacing-1 units
};

// Constants depend only on (dimension, radius/spacing); scanned once on a
// dense phase grid over one lattice cell and cached.
KernelConstants kernel_constants(int dim, double ratio) {
  static std::mutex mu;
  static std::map<std::pair<int, long long>, KernelConstants> cache;
  const auto key = std::make_pair(dim, static_cast<long long>(std::llround(ratio * 1e9)));
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  const int grid = dim <= 2 ? 65 : 25;
  const int reach = static_cast<int>(std::ceil(ratio));
  const double rho2 = ratio * ratio;
  KernelConstants out;

  std::vector<int> phase_idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> phase(static_cast<std::size_t>(dim), 0.0);
  std::vector<int> cell(static_cast<std::size_t>(dim), 0);
  while (true) {
    for (int i = 0; i < dim; ++i) phase[static_cast<std::size_t>(i)] = phase_idx[static_cast<std::size_t>(i)] / double(grid);
    double wsum = 0.0, gsum = 0.0;
    for (int i = 0; i < dim; ++i) cell[static_cast<std::size_t>(i)] = -reach;
    while (true) {
      double r2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double dxi = phase[static_cast<std::size_t>(i)] - cell[static_cast<std::size_t>(i)];
        r2 += dxi * dxi;
      }
      if (r2 < rho2) {
        const double u = r2 / rho2;
        wsum += bump(u);
        gsum += 6.0 * std::sqrt(r2) * (1.0 - u) * (1.0 - u) / rho2;
      }
      int i = 0;
      for (; i < dim; ++i) {
        if (++cell[static_cast<std::size_t>(i)] <= reach) break;
        cell[static_cast<std::size_t>(i)] = -reach;
      }
      if (i == dim) break;
    }
    out.weight_max = std::max(out.weight_max, wsum);
    out.grad_max = std::max(out.grad_max, gsum);
    int i = 0;
    for (; i < dim; ++i) {
      if (++phase_idx[static_cast<std::size_t>(i)] < grid) break;
      phase_idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i == dim) break;
  }

  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, out);
  return out;
}

inline std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

}  // namespace

void Environment::coefficients_at(std::span<const double> x, Mat& a, Vec& b) const {
  const int d = spec.dimension;
  if (a.n != d) a = Mat(d);
  b.assign(static_cast<std::size_t>(d), 0.0);
  std::fill(a.a.begin(), a.a.end(), 0.0);
  for (int i = 0; i < d; ++i) {
    a(i, i) = 1.0;
    b[static_cast<std::size_t>(i)] = spec.drift_mean[static_cast<std::size_t>(i)];
  }
  if (spec.mode == EnvMode::constant) return;

  const double s = spec.spacing();
  const double rho = spec.radius();
  const double rho2 = rho * rho;
  const int n_fields = d + d * (d + 1) / 2;

  double p[8];
  std::int64_t lo[8], hi[8], cell[8];
  for (int i = 0; i < d; ++i) {
    p[i] = x[static_cast<std::size_t>(i)] + origin_offset[static_cast<std::size_t>(i)];
    lo[i] = static_cast<std::int64_t>(std::ceil((p[i] - rho) / s));
    hi[i] = static_cast<std::int64_t>(std::floor((p[i] + rho) / s));
    cell[i] = lo[i];
  }

  double acc[44] = {0.0};  // d + d(d+1)/2 fields, d <= 8
  while (true) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double dxi = p[i] - s * static_cast<double>(cell[i]);
      r2 += dxi * dxi;
    }
    if (r2 < rho2) {
      const double w = bump(r2 / rho2);
      std::uint64_t ck = field_key_;
      for (int i = 0; i < d; ++i) ck = derive_key(ck, zigzag(cell[i]));
      const CounterRng cr(ck);
      for (int f = 0; f < n_fields; ++f) acc[f] += w * cr.sym(static_cast<std::uint64_t>(f));
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++cell[i] <= hi[i]) break;
      cell[i] = lo[i];
    }
    if (i == d) break;
  }

  const double inv_w = 1.0 / w_ref;
  const double drift_scale = spec.drift_amplitude * inv_w / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) b[static_cast<std::size_t>(i)] += drift_scale * acc[i];

  const double diff_scale = spec.diffusion_amplitude * inv_w;
  int f = d;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double v = diff_scale * acc[f++];
      a(i, j) += v;
      if (j != i) a(j, i) += v;
    }
  }
}

double Environment::lipschitz_bound() const {
  if (spec.mode == EnvMode::constant) return 0.0;
  const double field_lip = grad_ref / (w_ref * spec.spacing());
  const int d = spec.dimension;
  return (spec.drift_amplitude + spec.diffusion_amplitude * d) * field_lip;
}

Environment make_environment(const EnvironmentSpec& spec) {
  const int d = spec.dimension;
  if (d < 1 || d > 8) throw ConfigError("dimension", "must be in [1, 8]");
  if (!(spec.dependence_range > 0.0)) throw ConfigError("dependence_range", "must be positive");
  if (!(spec.ellipticity > 1.0)) throw ConfigError("ellipticity", "must exceed 1");
  if (!(spec.coefficient_bound > 0.0)) throw ConfigError("coefficient_bound", "must be positive");
  if (spec.drift_mean.size() != static_cast<std::size_t>(d))
    throw ConfigError("drift_mean", "size must equal dimension");
  if (spec.drift_amplitude < 0.0) throw ConfigError("drift_amplitude", "must be nonnegative");
  if (spec.diffusion_amplitude < 0.0) throw ConfigError("diffusion_amplitude", "must be nonnegative");

  const double s = spec.spacing();
  const double rho = spec.radius();
  if (!(s > 0.0)) throw ConfigError("lattice_spacing", "must be positive");
  if (!(rho > 0.0)) throw ConfigError("kernel_radius", "must be positive");
  if (2.0 * rho > spec.dependence_range * (1.0 + 1e-12))
    throw ConfigError("kernel_radius", "2*kernel_radius must not exceed dependence_range");

  const double mean_norm = norm2(spec.drift_mean);
  if (mean_norm + spec.drift_amplitude + d + spec.diffusion_amplitude * d >
      spec.coefficient_bound)
    throw ConfigError("coefficient_bound",
                      "|drift_mean| + drift_amplitude + d + diffusion_amplitude*d exceeds it");
  if (spec.diffusion_amplitude * d > 1.0 - 1.0 / spec.ellipticity)
    throw ConfigError("diffusion_amplitude",
                      "diffusion_amplitude * dimension must not exceed 1 - 1/ellipticity");

  if (spec.mode == EnvMode::constant &&
      (spec.drift_amplitude != 0.0 || spec.diffusion_amplitude != 0.0))
    throw ConfigError("mode", "constant mode requires zero field amplitudes");

  Environment env;
  env.spec = spec;
  env.origin_offset.assign(static_cast<std::size_t>(d), 0.0);
  env.field_key_ = derive_key(spec.master_seed, stream::env_field);
  if (spec.mode == EnvMode::random_field) {
    const auto kc = kernel_constants(d, rho / s);
    env.w_ref = kc.weight_max * 1.01;  // headroom keeps |field| < 1 strictly
    env.grad_ref = kc.grad_max * 1.01;
    if (env.lipschitz_bound() > spec.coefficient_bound)
      throw ConfigError("coefficient_bound",
                        "field amplitudes times the kernel gradient bound exceed it");
  }
  return env;
}

void eval_coefficients(const Environment& env, std::span<const double> x, Mat& a, Vec& b) {
  env.coefficients_at(x, a, b);
}

Environment shift_environment(const Environment& env, std::span<const double> y) {
  if (y.size() != env.origin_offset.size())
    throw ConfigError("shift", "offset size must equal dimension");
  Environment out = env;
  for (std::size_t i = 0; i < y.size(); ++i) out.origin_offset[i] += y[i];
  return out;
}

std::string to_string(EnvMode mode) {
  return mode == EnvMode::constant ? "constant" : "random_field";
}

EnvMode env_mode_from_string(const std::string& s) {
  if (s == "constant") return EnvMode::constant;
  if (s == "random_field") return EnvMode::random_field;
  throw ConfigError("mode", "unknown environment mode '" + s + "'");
}

}  // namespace rde
