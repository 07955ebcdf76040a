#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rde/env_field.hpp"
#include "rde/linalg.hpp"

namespace rde {

// Time step and horizon of one Euler-Maruyama run. dt must be 1/n for an
// integer n >= 4 so that every integer time lies exactly on the grid; the
// horizon must be a whole number of steps.
struct SimConfig {
  double dt = 1.0 / 16.0;
  double horizon = 100.0;
  Vec x0;

  std::int64_t steps_per_unit() const;  // n = 1/dt
  std::int64_t total_steps() const;     // horizon / dt
};

// Throws ConfigError on violated constraints; needs the space dimension.
void validate_sim_config(const SimConfig& cfg, int dimension);

struct Trajectory {
  int dimension = 0;
  double dt = 0.0;
  double horizon = 0.0;
  Vec x0;
  std::vector<double> points;  // (steps+1) * dimension, row i = X_{i*dt}

  std::int64_t steps() const {
    return points.empty() ? 0 : static_cast<std::int64_t>(points.size()) / dimension - 1;
  }
  std::int64_t steps_per_unit() const { return static_cast<std::int64_t>(std::llround(1.0 / dt)); }
  std::span<const double> point(std::int64_t i) const {
    return {points.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
  std::span<double> point_mut(std::int64_t i) {
    return {points.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
};

// Symmetric positive definite square root via eigendecomposition.
// Throws NumericalError on asymmetric or non-positive input.
Mat matrix_sqrt(const Mat& a);

// One Euler-Maruyama step evaluator with reusable workspaces.
// Thread-safe across distinct instances; an instance is not shareable.
class SdeStepper {
 public:
  explicit SdeStepper(const Environment& env);

  // out = x + b(x) dt + sigma(x) dw; out may alias x.
  void step(std::span<const double> x, std::span<const double> dw, double dt,
            std::span<double> out);

  // Coefficients and the matrix square root at x.
  void coeffs_at(std::span<const double> x, Mat& a_out, Vec& b_out);
  void sigma_at(std::span<const double> x, Mat& sigma_out);

  // Refresh the internal workspaces at x and read them without copies;
  // the references stay valid until the next call on this instance.
  void refresh_at(std::span<const double> x) { refresh(x); }
  const Vec& drift() const { return b_; }
  const Mat& sigma() const { return sigma_; }

  const Environment& env() const { return *env_; }

 private:
  void refresh(std::span<const double> x);

  const Environment* env_;
  bool constant_;
  bool warm_ = false;
  Mat a_, sigma_, evecs_;
  Vec b_, evals_;
  double buf_[8];
};

// Plain quenched path from x0 under the environment's coefficients.
// Step i consumes normals with counters i*d .. i*d+d-1 of the stream keyed
// (replicate_seed, sde_noise), so paths are reproducible position by
// position.
Trajectory simulate_path(const Environment& env, const SimConfig& cfg,
                         std::uint64_t replicate_seed);

// Same integrator driven by externally supplied Brownian increments
// (dw[i*d + j] over step i). Used by step-size refinement studies to drive
// several grids with a single Brownian path.
Trajectory integrate_with_increments(const Environment& env, const SimConfig& cfg,
                                     std::span<const double> dw);

}  // namespace rde
