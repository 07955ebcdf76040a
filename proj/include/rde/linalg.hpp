#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rde {

using Vec = std::vector<double>;

// Dense square matrix, row-major. Sizes here are the space dimension
// (d <= 3 in practice), so no blocking or expression templates.
struct Mat {
  int n = 0;
  std::vector<double> a;

  Mat() = default;
  explicit Mat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double frobenius(const Mat& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

inline double max_abs_asymmetry(const Mat& m) {
  double w = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j) w = std::max(w, std::abs(m(i, j) - m(j, i)));
  return w;
}

// y = m x
inline void mat_vec(const Mat& m, std::span<const double> x, std::span<double> y) {
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
}

// Symmetric eigendecomposition by cyclic Jacobi rotations, destroying a.
// On return evecs columns hold eigenvectors: input = V diag(evals) V^T.
// Converges to machine precision for the small matrices used here.
// Allocation-free when evals/evecs are presized.
inline void jacobi_eigen_inplace(Mat& a, Vec& evals, Mat& evecs) {
  const int n = a.n;
  if (evecs.n != n) evecs = Mat(n);
  std::fill(evecs.a.begin(), evecs.a.end(), 0.0);
  for (int i = 0; i < n; ++i) evecs(i, i) = 1.0;
  evals.assign(static_cast<std::size_t>(n), 0.0);

  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = evecs(k, p), vkq = evecs(k, q);
          evecs(k, p) = c * vkp - s * vkq;
          evecs(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) evals[static_cast<std::size_t>(i)] = a(i, i);
}

inline void jacobi_eigen(const Mat& sym, Vec& evals, Mat& evecs) {
  Mat a = sym;
  jacobi_eigen_inplace(a, evals, evecs);
}

}  // namespace rde
