#pragma once

// alpha-CHSH functional
//
//   S_alpha = alpha <A0 B0> + alpha <A0 B1> + <A1 B0> - <A1 B1>
//
// evaluated from counts, from behaviors, or exactly from a state and
// planar qubit observables.

#include <array>
#include <utility>

#include <Eigen/Core>

#include "bellkit/behavior.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Planar qubit observable cos(t) sigma_z + sin(t) sigma_x, t the Bloch angle.
class MeasurementSetting {
 public:
  MeasurementSetting() = default;

  static MeasurementSetting from_bloch_angle(double theta_rad) { return MeasurementSetting(theta_rad); }
  /// Waveplate convention: observable cos(2 t_w) sigma_z + sin(2 t_w) sigma_x.
  static MeasurementSetting from_waveplate_deg(double theta_w_deg) {
    return MeasurementSetting(2.0 * deg_to_rad(theta_w_deg));
  }

  double bloch_angle() const noexcept { return theta_; }
  Eigen::Vector3d bloch_vector() const;
  Matrix2c observable() const;
  /// Projector onto outcome +1 (index 0) or -1 (index 1).
  Matrix2c projector(int outcome_index) const;

 private:
  explicit MeasurementSetting(double theta) : theta_(theta) {}
  double theta_ = 0.0;
};

struct BellSettings {
  MeasurementSetting a0, a1, b0, b1;

  const MeasurementSetting& alice(int x) const { return x == 0 ? a0 : a1; }
  const MeasurementSetting& bob(int y) const { return y == 0 ? b0 : b1; }
};

/// A0 = sigma_z, A1 = sigma_x, B0/B1 = cos(t) sigma_z +/- sin(t) sigma_x.
BellSettings interplay_settings(double theta_rad);

/// Settings saturating Tsirelson's bound for |Phi+> (interplay_settings(pi/4)).
BellSettings chsh_optimal_settings();

class AlphaParameter {
 public:
  /// Throws Error(invalid_input) for alpha < 1 or non-finite values.
  static AlphaParameter from(double alpha);
  double value() const noexcept { return alpha_; }
  /// Classical bound 2 alpha.
  double local_bound() const noexcept { return 2.0 * alpha_; }
  /// Quantum bound 2 sqrt(1 + alpha^2).
  double quantum_bound() const;

 private:
  explicit AlphaParameter(double a) : alpha_(a) {}
  double alpha_;
};

/// e[x][y] = <A_x B_y>.
struct Correlators {
  std::array<std::array<double, 2>, 2> e{};
};

/// Local outcome relabeling: outcome of A_x multiplied by sign_a[x], B_y by sign_b[y].
struct Relabeling {
  std::array<int, 2> sign_a{1, 1};
  std::array<int, 2> sign_b{1, 1};
};

/// The eight relabelings distinct up to a global flip, with sign_b[0] = +1.
/// Pattern index p encodes sign_a[0], sign_a[1], sign_b[1] as bits 2, 1, 0 (set = -1).
Relabeling relabeling(int pattern);
inline constexpr int kRelabelings = 8;

Correlators apply(const Relabeling& r, const Correlators& c);

double s_alpha(const Correlators& c, AlphaParameter alpha);

struct SignOptimal {
  double s = 0.0;
  int pattern = 0;  // lowest pattern index among ties
};

/// max over relabelings of S_alpha.
SignOptimal sign_optimal_s_alpha(const Correlators& c, AlphaParameter alpha);

Correlators correlators(const DensityMatrix& rho, const BellSettings& settings);

/// Exact Tr(rho S_alpha) with the settings as given.
double s_alpha_expected(const DensityMatrix& rho, const BellSettings& settings, AlphaParameter alpha);

SignOptimal s_alpha_expected_optimal(const DensityMatrix& rho, const BellSettings& settings,
                                     AlphaParameter alpha);

/// Joint Born probabilities p(ab|xy) for the binary alphabet.
BehaviorDistribution born_behavior(const DensityMatrix& rho, const BellSettings& settings,
                                   const std::array<double, 4>& setting_weights = {0.25, 0.25, 0.25,
                                                                                   0.25});

/// (N_{-1,-1} - N_{-1,1} - N_{1,-1} + N_{1,1}) / N_xy. Ternary tables are binned first.
double correlator_from_counts(const CountTable& counts, int x, int y);
Correlators correlators_from_counts(const CountTable& counts);
double s_alpha_from_counts(const CountTable& counts, AlphaParameter alpha);
/// Standard error from var(E_xy) = (1 - E_xy^2) / N_xy.
double s_alpha_standard_error(const CountTable& counts, AlphaParameter alpha);

struct WaveplateAngles {
  double gamma_deg = 0.0;  // polarization controller rotation
  double omega_deg = 0.0;  // half-wave plate angle
};

/// gamma = 45 - (t0 + t1)/2, omega = 22.5 + (t0 - t1)/4 (degrees).
WaveplateAngles hardware_angles(double theta0_deg, double theta1_deg);
/// Inverse of hardware_angles; returns (theta0, theta1) in degrees.
std::pair<double, double> measurement_angles(const WaveplateAngles& w);

}  // namespace bellkit
