#include "bellkit/di_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "bellkit/error.hpp"

namespace bellkit {
namespace {

constexpr double kBoundSlack = 1e-9;

void check_quantum_bound(double s, AlphaParameter alpha) {
  if (!std::isfinite(s)) throw Error(ErrorCode::invalid_input, "Bell value is not finite");
  if (s > alpha.quantum_bound() + kBoundSlack) {
    std::ostringstream os;
    os.precision(10);
    os << "S=" << s << " exceeds the quantum maximum " << alpha.quantum_bound()
       << " for alpha=" << alpha.value();
    throw Error(ErrorCode::quantum_bound_exceeded, os.str());
  }
}

double incompat_to_angle(double q) { return 2.0 * std::asin(std::sqrt(std::clamp(q, 0.0, 0.5))); }
double angle_to_incompat(double phi) {
  const double s = std::sin(phi / 2.0);
  return std::min(s * s, 1.0 - s * s);
}

// Objective for a fixed pair angle phi on the constrained side: Schmidt angle
// t sets T = diag(sin 2t, 1) on the (x, z) plane, psi orients the pair, and
// the free side is optimized exactly (norm of the induced vector).
double inner_value(double phi, double t, double psi, double alpha, Side side) {
  const double k = std::sin(2.0 * t);
  const double m0x = std::sin(psi), m0z = std::cos(psi);
  const double m1x = std::sin(psi + phi), m1z = std::cos(psi + phi);
  double ux, uz, wx, wz;
  if (side == Side::A) {
    ux = alpha * m0x + m1x; uz = alpha * m0z + m1z;
    wx = alpha * m0x - m1x; wz = alpha * m0z - m1z;
  } else {
    ux = alpha * (m0x + m1x); uz = alpha * (m0z + m1z);
    wx = m0x - m1x; wz = m0z - m1z;
  }
  return std::hypot(k * ux, uz) + std::hypot(k * wx, wz);
}

struct InnerMax {
  double value, t, psi;
};

InnerMax coarse_inner(double phi, double alpha, Side side, const EnvelopeOptions& o) {
  InnerMax best{-1.0, 0.0, 0.0};
  const int nt = std::max(2, o.schmidt_points);
  const int np = std::max(4, o.orientation_points);
  for (int i = 0; i < nt; ++i) {
    const double t = (kPi / 4.0) * i / (nt - 1);
    for (int j = 0; j < np; ++j) {
      const double psi = kPi * j / np;
      const double v = inner_value(phi, t, psi, alpha, side);
      if (v > best.value) best = {v, t, psi};
    }
  }
  return best;
}

InnerMax refine_inner(double phi, double alpha, Side side, const EnvelopeOptions& o, InnerMax x) {
  using boost::math::tools::brent_find_minima;
  const int bits = std::max(8, static_cast<int>(-std::log2(o.refine_tol)) + 4);
  const double dt = (kPi / 4.0) / std::max(1, o.schmidt_points - 1);
  const double dp = kPi / std::max(4, o.orientation_points);
  for (int round = 0; round < 20; ++round) {
    const double before = x.value;
    {
      const double lo = std::max(0.0, x.t - dt), hi = std::min(kPi / 4.0, x.t + dt);
      std::uintmax_t it = 100;
      auto r = brent_find_minima([&](double t) { return -inner_value(phi, t, x.psi, alpha, side); },
                                 lo, hi, bits, it);
      if (-r.second > x.value) { x.t = r.first; x.value = -r.second; }
      // The optimum frequently sits on the boundary t = pi/4.
      const double edge = inner_value(phi, kPi / 4.0, x.psi, alpha, side);
      if (edge > x.value) { x.t = kPi / 4.0; x.value = edge; }
    }
    {
      std::uintmax_t it = 100;
      auto r = brent_find_minima([&](double p) { return -inner_value(phi, x.t, p, alpha, side); },
                                 x.psi - dp, x.psi + dp, bits, it);
      if (-r.second > x.value) { x.psi = r.first; x.value = -r.second; }
    }
    if (x.value - before < 1e-15) break;
  }
  return x;
}

double refined_max(double phi, double alpha, Side side, const EnvelopeOptions& o) {
  return refine_inner(phi, alpha, side, o, coarse_inner(phi, alpha, side, o)).value;
}

}  // namespace

double eof_lower_bound(double s, AlphaParameter alpha) {
  check_quantum_bound(s, alpha);
  const double a = alpha.value();
  return std::clamp((s - 2.0 * a) / (alpha.quantum_bound() - 2.0 * a), 0.0, 1.0);
}

double negativity_lower_bound(double s, AlphaParameter alpha) {
  check_quantum_bound(s, alpha);
  const double a = alpha.value();
  return std::clamp((s - 2.0 * a) / (4.0 * (std::sqrt(1.0 + a * a) - a)), 0.0, 0.5);
}

double effective_overlap_upper_bound(double s) {
  check_quantum_bound(s, AlphaParameter::from(1.0));
  s = std::clamp(s, 0.0, 2.0 * std::sqrt(2.0));
  return 0.5 + (s / 8.0) * std::sqrt(std::max(0.0, 8.0 - s * s));
}

double incompatibility_lower_bound(double s) {
  const double c = effective_overlap_upper_bound(s);
  if (s <= 2.0) return 0.0;
  return std::max(0.0, 1.0 - c);
}

double projective_incompatibility(const Eigen::Vector3d& bloch0, const Eigen::Vector3d& bloch1) {
  const double cosphi = std::clamp(bloch0.normalized().dot(bloch1.normalized()), -1.0, 1.0);
  const double c = 0.5 * (1.0 + cosphi);  // cos^2(phi/2)
  return std::min(c, 1.0 - c);
}

double projective_incompatibility(const MeasurementSetting& m0, const MeasurementSetting& m1) {
  return projective_incompatibility(m0.bloch_vector(), m1.bloch_vector());
}

double max_s_alpha_at_incompatibility(double q, AlphaParameter alpha, Side side,
                                      const EnvelopeOptions& opts) {
  if (!(q >= 0.0 && q <= 0.5))
    throw Error(ErrorCode::invalid_input, "incompatibility level must lie in [0, 1/2]");
  return refined_max(incompat_to_angle(q), alpha.value(), side, opts);
}

IncompatibilityBound multi_alpha_incompatibility_bound(double s, AlphaParameter alpha, Side side,
                                                       const EnvelopeOptions& opts) {
  const double a = alpha.value();
  std::ostringstream method;
  method << "numeric-envelope(pure qubit states, planar projective; grid " << opts.grid_step
         << " rad)";
  if (!std::isfinite(s) || s < 2.0 * a - 1e-12 || s > alpha.quantum_bound() + kBoundSlack) {
    std::ostringstream os;
    os.precision(10);
    os << "S=" << s << " outside the certifiable range [" << 2.0 * a << ", "
       << alpha.quantum_bound() << "] for alpha=" << a;
    throw Error(ErrorCode::infeasible, os.str());
  }
  if (s <= 2.0 * a) return {0.0, 0.0, true, method.str()};

  // Coarse envelope over the pair angle; the crossing bracket is then
  // re-examined with the refined inner maximization.
  const double phi_max = kPi / 2.0;
  const int n = std::max(2, static_cast<int>(std::ceil(phi_max / opts.grid_step)));
  std::vector<double> phis(n + 1);
  for (int i = 0; i <= n; ++i) phis[i] = phi_max * i / n;

  int hit = -1;
  double envelope = -1.0;
  for (int i = 0; i <= n; ++i) {
    envelope = std::max(envelope, coarse_inner(phis[i], a, side, opts).value);
    if (envelope >= s) { hit = i; break; }
  }
  if (hit < 0) hit = n;

  auto f = [&](double phi) { return refined_max(phi, a, side, opts) - s; };
  int lo_idx = std::max(0, hit - 1);
  while (lo_idx > 0 && f(phis[lo_idx]) >= 0.0) --lo_idx;
  int hi_idx = std::max(hit, lo_idx + 1);
  while (hi_idx < n && f(phis[hi_idx]) < 0.0) ++hi_idx;

  const double flo = f(phis[lo_idx]);
  const double fhi = f(phis[hi_idx]);
  if (flo >= 0.0) return {angle_to_incompat(phis[lo_idx]), 0.0, true, method.str()};
  if (fhi < 0.0) {
    // s within the slack above the numerically attained maximum.
    return {0.5, std::abs(fhi), fhi > -kBoundSlack * 10, method.str()};
  }

  std::uintmax_t max_iter = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(48);
  const auto r = boost::math::tools::toms748_solve(f, phis[lo_idx], phis[hi_idx], flo, fhi, tol,
                                                   max_iter);
  const double qlo = angle_to_incompat(r.first);
  const double qhi = angle_to_incompat(r.second);
  IncompatibilityBound out;
  out.value = qlo;  // rounded down so the certificate stays sound
  out.achieved_precision = std::abs(qhi - qlo);
  out.converged = max_iter < 200;
  out.method = method.str();
  return out;
}

std::vector<AlphaScanEntry> multi_alpha_scan(const Correlators& c, std::span<const double> alphas,
                                             Side side, const EnvelopeOptions& opts) {
  std::vector<AlphaScanEntry> out;
  out.reserve(alphas.size());
  for (double av : alphas) {
    const AlphaParameter alpha = AlphaParameter::from(av);
    AlphaScanEntry e;
    e.alpha = av;
    e.s_alpha = s_alpha(c, alpha);
    if (e.s_alpha <= 2.0 * av) {
      e.bound = {0.0, 0.0, true, "no violation"};
    } else {
      e.bound = multi_alpha_incompatibility_bound(e.s_alpha, alpha, side, opts);
    }
    out.push_back(e);
  }
  return out;
}

DiBoundReport quantify(double s, AlphaParameter alpha) {
  DiBoundReport r;
  r.s = s;
  r.alpha = alpha.value();
  r.eof_lb = eof_lower_bound(s, alpha);
  r.negativity_lb = negativity_lower_bound(s, alpha);
  if (alpha.value() == 1.0) {
    r.incompatibility_lb = incompatibility_lower_bound(s);
    r.method = "closed-form";
    r.achieved_precision = 0.0;
  } else if (s <= alpha.local_bound()) {
    r.incompatibility_lb = 0.0;
    r.method = "no violation";
  } else {
    const auto b = multi_alpha_incompatibility_bound(s, alpha, Side::A);
    r.incompatibility_lb = b.value;
    r.method = b.method;
    r.achieved_precision = b.achieved_precision;
  }
  return r;
}

}  // namespace bellkit
