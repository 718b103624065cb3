#pragma once

// Device-independent lower bounds on entanglement and measurement
// incompatibility from an observed alpha-CHSH value.

#include <span>
#include <string>
#include <vector>

#include "bellkit/bell.hpp"

namespace bellkit {

/// max(0, (s - 2a) / (2 sqrt(1 + a^2) - 2a)). Throws quantum_bound_exceeded above 2 sqrt(1+a^2).
double eof_lower_bound(double s, AlphaParameter alpha);

/// max(0, (s - 2a) / (4 (sqrt(1 + a^2) - a))).
double negativity_lower_bound(double s, AlphaParameter alpha);

/// Upper bound on the effective overlap in the CHSH case: 1/2 + (s/8) sqrt(8 - s^2).
double effective_overlap_upper_bound(double s);

/// 1 - effective_overlap_upper_bound(s), clamped at 0. Zero for s <= 2.
double incompatibility_lower_bound(double s);

/// min{c, 1 - c} with c = cos^2(phi/2), phi the Bloch angle between two
/// projective qubit observables.
double projective_incompatibility(const Eigen::Vector3d& bloch0, const Eigen::Vector3d& bloch1);
double projective_incompatibility(const MeasurementSetting& m0, const MeasurementSetting& m1);

enum class Side { A, B };

struct EnvelopeOptions {
  double grid_step = 1e-3;   // rad, abscissa grid of the envelope
  int schmidt_points = 17;   // coarse grid over the Schmidt angle in [0, pi/4]
  int orientation_points = 64;
  double refine_tol = 1e-6;  // rad, local refinement of the inner maximization
};

/// Maximum of S_alpha over pure two-qubit states and planar projective
/// measurements with the named side's pair at incompatibility level q
/// (Bloch angle 2 asin(sqrt(q))). The other side is optimized in closed form.
double max_s_alpha_at_incompatibility(double q, AlphaParameter alpha, Side side,
                                      const EnvelopeOptions& opts = {});

struct IncompatibilityBound {
  double value = 0.0;
  double achieved_precision = 0.0;  // width of the final bracket in q
  bool converged = true;
  std::string method;
};

/// Smallest incompatibility of the named side compatible with an observed
/// S_alpha = s, from the inverted monotone upper envelope of
/// max_s_alpha_at_incompatibility. Restricted to pure qubit states and planar
/// projective measurements. Throws infeasible for s outside [2a, 2 sqrt(1+a^2)].
IncompatibilityBound multi_alpha_incompatibility_bound(double s, AlphaParameter alpha, Side side,
                                                       const EnvelopeOptions& opts = {});

struct AlphaScanEntry {
  double alpha = 1.0;
  double s_alpha = 0.0;
  IncompatibilityBound bound;
};

/// Evaluates the alpha-CHSH value of fixed correlators for each alpha and
/// bounds the named side's incompatibility; entries with s_alpha <= 2 alpha
/// certify nothing and carry a zero bound.
std::vector<AlphaScanEntry> multi_alpha_scan(const Correlators& c, std::span<const double> alphas,
                                             Side side, const EnvelopeOptions& opts = {});

struct DiBoundReport {
  double s = 0.0;
  double alpha = 1.0;
  double eof_lb = 0.0;
  double negativity_lb = 0.0;
  double incompatibility_lb = 0.0;
  std::string method;
  double achieved_precision = 0.0;
};

/// All three bounds; the incompatibility bound uses the closed form at
/// alpha = 1 and the numeric envelope (side A) otherwise.
DiBoundReport quantify(double s, AlphaParameter alpha);

}  // namespace bellkit
