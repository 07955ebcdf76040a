#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "rde/linalg.hpp"
#include "rde/rng.hpp"

namespace rde {

enum class EnvMode { constant, random_field };

// Parameters of the random coefficient field. The field is a mollified
// i.i.d. lattice: uniform variables on the lattice (spacing s), convolved
// with a C2 polynomial bump of radius rho, scaled into fixed ranges.
// Values at points farther apart than 2*rho share no lattice cells, so
// dependence_range >= 2*rho gives exact independence at range R.
struct EnvironmentSpec {
  int dimension = 2;
  double dependence_range = 1.0;   // R
  double ellipticity = 1.3;        // nu: eigenvalues of a(x) stay in [1/nu, nu]
  double coefficient_bound = 8.0;  // Kbar: |b| + |a| and the Lipschitz constant
  Vec drift_mean;                  // size = dimension
  double drift_amplitude = 0.0;
  double diffusion_amplitude = 0.0;  // delta in a(x) = I + delta * S(x)
  double lattice_spacing = 0.0;      // 0 -> R/4
  double kernel_radius = 0.0;        // 0 -> R/2
  EnvMode mode = EnvMode::random_field;
  std::uint64_t master_seed = 0;

  double spacing() const { return lattice_spacing > 0.0 ? lattice_spacing : dependence_range / 4.0; }
  double radius() const { return kernel_radius > 0.0 ? kernel_radius : dependence_range / 2.0; }
};

// Realized environment: spec plus the accumulated shift offset and the
// kernel normalization constants. Evaluation is const and thread-safe.
class Environment {
 public:
  EnvironmentSpec spec;
  Vec origin_offset;   // shifts compose additively on this vector
  double w_ref = 1.0;  // fixed normalizer, > max over x of the kernel weight sum
  double grad_ref = 0.0;  // upper bound on sum |grad w| at lattice spacing 1

  // Writes a (dimension x dimension, symmetric positive definite) and b.
  void coefficients_at(std::span<const double> x, Mat& a, Vec& b) const;

  // Lipschitz bound of (a, b) jointly implied by the kernel constants.
  double lipschitz_bound() const;

 private:
  friend Environment make_environment(const EnvironmentSpec&);
  std::uint64_t field_key_ = 0;
};

// Validates the parameters and precomputes kernel constants.
// Throws ConfigError naming the violated constraint.
Environment make_environment(const EnvironmentSpec& spec);

// Convenience wrapper over Environment::coefficients_at.
void eval_coefficients(const Environment& env, std::span<const double> x, Mat& a, Vec& b);

// Coordinate shift: values of the shifted environment at x equal values of
// the original at x + y, bit-exactly; shifts compose additively.
Environment shift_environment(const Environment& env, std::span<const double> y);

std::string to_string(EnvMode mode);
EnvMode env_mode_from_string(const std::string& s);

}  // namespace rde
