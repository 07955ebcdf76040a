#include "rde/sde_sim.hpp"

#include <algorithm>
#include <cmath>

#include "rde/errors.hpp"
#include "rde/rng.hpp"

namespace rde {

std::int64_t SimConfig::steps_per_unit() const {
  return static_cast<std::int64_t>(std::llround(1.0 / dt));
}

std::int64_t SimConfig::total_steps() const {
  return static_cast<std::int64_t>(std::llround(horizon / dt));
}

void validate_sim_config(const SimConfig& cfg, int dimension) {
  if (!(cfg.dt > 0.0)) throw ConfigError("dt", "must be positive");
  const double n = 1.0 / cfg.dt;
  const auto ni = std::llround(n);
  if (ni < 4 || std::abs(n - static_cast<double>(ni)) > 1e-9)
    throw ConfigError("dt", "must equal 1/n for an integer n >= 4");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon", "must be positive");
  const double steps = cfg.horizon / cfg.dt;
  if (std::abs(steps - std::llround(steps)) > 1e-6)
    throw ConfigError("horizon", "must be a whole number of steps");
  if (cfg.x0.size() != static_cast<std::size_t>(dimension))
    throw ConfigError("x0", "size must equal dimension");
}

Mat matrix_sqrt(const Mat& a) {
  double amax = 0.0;
  for (double v : a.a) amax = std::max(amax, std::abs(v));
  if (max_abs_asymmetry(a) > 1e-9 * (1.0 + amax))
    throw NumericalError("matrix_sqrt: input is not symmetric");

  Vec evals;
  Mat evecs;
  jacobi_eigen(a, evals, evecs);
  for (double lam : evals)
    if (!(lam > 0.0)) throw NumericalError("matrix_sqrt: input is not positive definite");

  Mat s(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = i; j < a.n; ++j) {
      double v = 0.0;
      for (int k = 0; k < a.n; ++k)
        v += evecs(i, k) * std::sqrt(evals[static_cast<std::size_t>(k)]) * evecs(j, k);
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

SdeStepper::SdeStepper(const Environment& env)
    : env_(&env), constant_(env.spec.mode == EnvMode::constant) {
  const int d = env.spec.dimension;
  a_ = Mat(d);
  sigma_ = Mat(d);
  evecs_ = Mat(d);
  b_.reserve(static_cast<std::size_t>(d));
  evals_.reserve(static_cast<std::size_t>(d));
  if (constant_) {
    env_->coefficients_at(Vec(static_cast<std::size_t>(d), 0.0), a_, b_);
    sigma_ = Mat::identity(d);
    warm_ = true;
  }
}

void SdeStepper::refresh(std::span<const double> x) {
  if (constant_ && warm_) return;
  env_->coefficients_at(x, a_, b_);
  // a is SPD by construction (eigenvalues within the ellipticity window),
  // so the in-place Jacobi square root cannot fail here.
  jacobi_eigen_inplace(a_, evals_, evecs_);
  const int d = a_.n;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double v = 0.0;
      for (int k = 0; k < d; ++k)
        v += evecs_(i, k) * std::sqrt(evals_[static_cast<std::size_t>(k)]) * evecs_(j, k);
      sigma_(i, j) = v;
      sigma_(j, i) = v;
    }
}

void SdeStepper::step(std::span<const double> x, std::span<const double> dw, double dt,
                      std::span<double> out) {
  refresh(x);
  const int d = a_.n;
  for (int i = 0; i < d; ++i) {
    double v = x[static_cast<std::size_t>(i)] + b_[static_cast<std::size_t>(i)] * dt;
    for (int j = 0; j < d; ++j) v += sigma_(i, j) * dw[static_cast<std::size_t>(j)];
    buf_[i] = v;
  }
  std::copy(buf_, buf_ + d, out.begin());
}

void SdeStepper::coeffs_at(std::span<const double> x, Mat& a_out, Vec& b_out) {
  env_->coefficients_at(x, a_out, b_out);
}

void SdeStepper::sigma_at(std::span<const double> x, Mat& sigma_out) {
  if (constant_) {
    sigma_out = Mat::identity(env_->spec.dimension);
    return;
  }
  env_->coefficients_at(x, a_, b_);
  sigma_out = matrix_sqrt(a_);
}

namespace {

template <typename IncrementAt>
Trajectory integrate(const Environment& env, const SimConfig& cfg, IncrementAt&& dw_at) {
  const int d = env.spec.dimension;
  validate_sim_config(cfg, d);

  Trajectory traj;
  traj.dimension = d;
  traj.dt = cfg.dt;
  traj.horizon = cfg.horizon;
  traj.x0 = cfg.x0;
  const std::int64_t steps = cfg.total_steps();
  traj.points.resize(static_cast<std::size_t>(steps + 1) * d);
  std::copy(cfg.x0.begin(), cfg.x0.end(), traj.points.begin());

  SdeStepper stepper(env);
  double dw[8];
  for (std::int64_t i = 0; i < steps; ++i) {
    dw_at(i, std::span<double>(dw, static_cast<std::size_t>(d)));
    stepper.step(traj.point(i), std::span<const double>(dw, static_cast<std::size_t>(d)),
                 cfg.dt, traj.point_mut(i + 1));
  }
  return traj;
}

}  // namespace

Trajectory simulate_path(const Environment& env, const SimConfig& cfg,
                         std::uint64_t replicate_seed) {
  const int d = env.spec.dimension;
  const CounterRng noise(derive_key(replicate_seed, stream::sde_noise));
  const double root_dt = std::sqrt(cfg.dt);
  return integrate(env, cfg, [&](std::int64_t i, std::span<double> dw) {
    for (int j = 0; j < d; ++j)
      dw[static_cast<std::size_t>(j)] =
          root_dt * noise.normal(static_cast<std::uint64_t>(i * d + j));
  });
}

Trajectory integrate_with_increments(const Environment& env, const SimConfig& cfg,
                                     std::span<const double> dw) {
  const int d = env.spec.dimension;
  if (dw.size() != static_cast<std::size_t>(cfg.total_steps() * d))
    throw ConfigError("increments", "size must equal total_steps * dimension");
  return integrate(env, cfg, [&](std::int64_t i, std::span<double> out) {
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] = dw[static_cast<std::size_t>(i * d + j)];
  });
}

}  // namespace rde
