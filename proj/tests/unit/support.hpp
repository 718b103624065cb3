#pragma once

// Random instances and reference computations shared by the unit tests. The
// reference routines deliberately avoid the library code paths they check.

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "bellkit/bell.hpp"
#include "bellkit/qstate.hpp"

namespace testing {

using bellkit::Complex;
using bellkit::Matrix4c;
using bellkit::Vector4c;

inline double uniform(std::mt19937_64& g, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// Uniform point of the probability simplex.
inline std::array<double, 4> random_weights(std::mt19937_64& g) {
  std::array<double, 4> w{};
  double s = 0.0;
  for (double& x : w) s += (x = -std::log(1.0 - uniform(g)));
  for (double& x : w) x /= s;
  // Make the sum exactly 1 up to rounding of the last entry.
  w[3] = 1.0 - w[0] - w[1] - w[2];
  if (w[3] < 0.0) w[3] = 0.0;
  return w;
}

inline Vector4c random_pure(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Vector4c v;
  for (int i = 0; i < 4; ++i) v(i) = Complex(n(g), n(g));
  return v.normalized();
}

/// Ginibre-distributed mixed state.
inline Matrix4c random_mixed(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Matrix4c a;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = Complex(n(g), n(g));
  Matrix4c rho = a * a.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

/// Explicit Bell vectors written out here rather than taken from the library.
inline Vector4c bell(int i) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector4c v = Vector4c::Zero();
  if (i == 0) v << 0, r, r, 0;
  if (i == 1) v << 0, r, -r, 0;
  if (i == 2) v << r, 0, 0, r;
  if (i == 3) v << r, 0, 0, -r;
  return v;
}

inline Matrix4c bell_mixture(const std::array<double, 4>& w) {
  Matrix4c m = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) m += w[i] * bell(i) * bell(i).adjoint();
  return m;
}

/// Born probability p(a,b) for planar Bloch angles, outcome index 0 = +1, by
/// explicit eigenvectors of cos(t) Z + sin(t) X.
inline double born(const Matrix4c& rho, double ta, double tb, int a, int b) {
  auto eigvec = [](double t, int outcome) {
    Eigen::Vector2cd v;
    if (outcome == 0)
      v << std::cos(t / 2), std::sin(t / 2);
    else
      v << -std::sin(t / 2), std::cos(t / 2);
    return v;
  };
  const Eigen::Vector2cd va = eigvec(ta, a), vb = eigvec(tb, b);
  Vector4c v;
  v << va(0) * vb(0), va(0) * vb(1), va(1) * vb(0), va(1) * vb(1);
  return (v.adjoint() * rho * v)(0, 0).real();
}

inline double shannon_bits(const std::array<double, 4>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0) h -= x * std::log2(x);
  return h;
}

}  // namespace testing
