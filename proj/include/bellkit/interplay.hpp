#pragma once

// Maximum alpha-CHSH value of Bell-diagonal states at fixed entanglement,
// with Alice fixed to (sigma_z, sigma_x) and Bob to cos(t) sigma_z +/- sin(t) sigma_x.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "bellkit/bell.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit {

enum class EntanglementMeasure { concurrence, ode };

struct InterplayPoint {
  double theta = 0.0;            // rad, Bob's half-angle
  double incompatibility = 0.0;  // sin^2(theta)
  double s_alpha = 0.0;
  BellDiagonalWeights weights = BellDiagonalWeights::from({1.0, 0.0, 0.0, 0.0});
  int pattern = 0;  // relabeling achieving s_alpha
};

/// Sign-optimal S_alpha of a Bell-diagonal state under interplay_settings(theta):
/// 2 alpha cos(t) |T_zz| + 2 sin(t) |T_xx|.
double bell_diagonal_s_alpha(const BellDiagonalWeights& w, double theta, AlphaParameter alpha);

/// Linear program over the Bell-diagonal states with lambda_max = (1 + C)/2,
/// solved by vertex enumeration for each of the eight relabelings.
InterplayPoint max_s_fixed_concurrence(double concurrence, double theta, AlphaParameter alpha);

/// Maximizes S_alpha over weights with 1 - H(lambda) = E. For each relabeling
/// the objective is linear and the superlevel set {H >= 1 - E} convex, so the
/// optimum is the Gibbs distribution lambda ~ exp(beta c) whose entropy hits
/// the constraint; beta is found by bisection.
InterplayPoint max_s_fixed_ode(double ode, double theta, AlphaParameter alpha);

/// n equally spaced angles covering [0, pi/4].
std::vector<double> uniform_theta_grid(int n);

/// Per-angle maxima, evaluated concurrently and returned in grid order.
std::vector<InterplayPoint> trajectory(EntanglementMeasure measure, double level,
                                       AlphaParameter alpha, std::span<const double> theta_grid);

/// Index of the maximum s_alpha (first on ties).
std::size_t argmax(const std::vector<InterplayPoint>& traj);

struct CalibrationFit {
  double angle_offset = 0.0;  // rad
  double visibility = 1.0;
  double residual = 0.0;  // RMS of S_obs - v * S_model(theta + offset)
};

struct CalibrationOptions {
  double max_offset = deg_to_rad(5.0);
  int grid_points = 201;
};

/// Least-squares fit of S_obs(theta) ~ v * S_model(theta + offset). The
/// visibility is solved in closed form for each offset and capped at 1.
CalibrationFit fit_calibration_shifts(std::span<const std::pair<double, double>> observed,
                                      const std::function<double(double)>& model,
                                      const CalibrationOptions& opts = {});

/// Same, with the model given as a trajectory (linearly interpolated).
CalibrationFit fit_calibration_shifts(std::span<const std::pair<double, double>> observed,
                                      const std::vector<InterplayPoint>& model,
                                      const CalibrationOptions& opts = {});

}  // namespace bellkit
