#include "bellkit/bell.hpp"

#include <cmath>
#include <sstream>

#include "bellkit/error.hpp"

namespace bellkit {

Eigen::Vector3d MeasurementSetting::bloch_vector() const {
  return {std::sin(theta_), 0.0, std::cos(theta_)};
}

Matrix2c MeasurementSetting::observable() const {
  return std::cos(theta_) * pauli_z() + std::sin(theta_) * pauli_x();
}

Matrix2c MeasurementSetting::projector(int outcome_index) const {
  const double sign = outcome_index == 0 ? 1.0 : -1.0;
  return 0.5 * (Matrix2c::Identity() + sign * observable());
}

BellSettings interplay_settings(double theta_rad) {
  return {MeasurementSetting::from_bloch_angle(0.0),
          MeasurementSetting::from_bloch_angle(kPi / 2.0),
          MeasurementSetting::from_bloch_angle(theta_rad),
          MeasurementSetting::from_bloch_angle(-theta_rad)};
}

BellSettings chsh_optimal_settings() { return interplay_settings(kPi / 4.0); }

AlphaParameter AlphaParameter::from(double alpha) {
  if (!std::isfinite(alpha) || alpha < 1.0) {
    std::ostringstream os;
    os << "alpha must be >= 1 (got " << alpha << ")";
    throw Error(ErrorCode::invalid_input, os.str());
  }
  return AlphaParameter(alpha);
}

double AlphaParameter::quantum_bound() const { return 2.0 * std::sqrt(1.0 + alpha_ * alpha_); }

Relabeling relabeling(int pattern) {
  Relabeling r;
  r.sign_a[0] = (pattern & 4) ? -1 : 1;
  r.sign_a[1] = (pattern & 2) ? -1 : 1;
  r.sign_b[0] = 1;
  r.sign_b[1] = (pattern & 1) ? -1 : 1;
  return r;
}

Correlators apply(const Relabeling& r, const Correlators& c) {
  Correlators out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) out.e[x][y] = r.sign_a[x] * r.sign_b[y] * c.e[x][y];
  return out;
}

double s_alpha(const Correlators& c, AlphaParameter alpha) {
  const double a = alpha.value();
  return a * c.e[0][0] + a * c.e[0][1] + c.e[1][0] - c.e[1][1];
}

SignOptimal sign_optimal_s_alpha(const Correlators& c, AlphaParameter alpha) {
  SignOptimal best{s_alpha(c, alpha), 0};
  for (int p = 1; p < kRelabelings; ++p) {
    const double s = s_alpha(apply(relabeling(p), c), alpha);
    if (s > best.s) best = {s, p};
  }
  return best;
}

Correlators correlators(const DensityMatrix& rho, const BellSettings& settings) {
  Correlators out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const Matrix4c op = kron(settings.alice(x).observable(), settings.bob(y).observable());
      out.e[x][y] = (rho.matrix() * op).trace().real();
    }
  return out;
}

double s_alpha_expected(const DensityMatrix& rho, const BellSettings& settings,
                        AlphaParameter alpha) {
  return s_alpha(correlators(rho, settings), alpha);
}

SignOptimal s_alpha_expected_optimal(const DensityMatrix& rho, const BellSettings& settings,
                                     AlphaParameter alpha) {
  return sign_optimal_s_alpha(correlators(rho, settings), alpha);
}

BehaviorDistribution born_behavior(const DensityMatrix& rho, const BellSettings& settings,
                                   const std::array<double, 4>& setting_weights) {
  BehaviorDistribution out(Alphabet::binary, setting_weights);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const Matrix4c proj = kron(settings.alice(x).projector(a), settings.bob(y).projector(b));
          out(a, b, x, y) = std::max(0.0, (rho.matrix() * proj).trace().real());
        }
  return out;
}

double correlator_from_counts(const CountTable& counts, int x, int y) {
  const CountTable c = counts.to_binary();
  const auto n = c.setting_total(x, y);
  if (n == 0) {
    std::ostringstream os;
    os << "no trials recorded for setting (x,y)=(" << x << "," << y << ")";
    throw Error(ErrorCode::undefined_correlator, os.str());
  }
  // Index 0 is +1, index 1 is -1.
  const double same = static_cast<double>(c.at(1, 1, x, y)) + static_cast<double>(c.at(0, 0, x, y));
  const double diff = static_cast<double>(c.at(1, 0, x, y)) + static_cast<double>(c.at(0, 1, x, y));
  return (same - diff) / static_cast<double>(n);
}

Correlators correlators_from_counts(const CountTable& counts) {
  Correlators out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) out.e[x][y] = correlator_from_counts(counts, x, y);
  return out;
}

double s_alpha_from_counts(const CountTable& counts, AlphaParameter alpha) {
  return s_alpha(correlators_from_counts(counts), alpha);
}

double s_alpha_standard_error(const CountTable& counts, AlphaParameter alpha) {
  const Correlators c = correlators_from_counts(counts);
  const CountTable b = counts.to_binary();
  const double a2 = alpha.value() * alpha.value();
  double var = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double w = x == 0 ? a2 : 1.0;
      var += w * (1.0 - c.e[x][y] * c.e[x][y]) / static_cast<double>(b.setting_total(x, y));
    }
  return std::sqrt(var);
}

WaveplateAngles hardware_angles(double theta0_deg, double theta1_deg) {
  return {45.0 - (theta0_deg + theta1_deg) / 2.0, 22.5 + (theta0_deg - theta1_deg) / 4.0};
}

std::pair<double, double> measurement_angles(const WaveplateAngles& w) {
  const double sum = 2.0 * (45.0 - w.gamma_deg);
  const double diff = 4.0 * (w.omega_deg - 22.5);
  return {(sum + diff) / 2.0, (sum - diff) / 2.0};
}

}  // namespace bellkit
