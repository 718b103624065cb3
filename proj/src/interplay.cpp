#include "bellkit/interplay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "bellkit/error.hpp"
#include "bellkit/parallel.hpp"

namespace bellkit {
namespace {

void check_theta(double theta) {
  if (!(theta >= -1e-15 && theta <= kPi / 4.0 + 1e-12)) {
    std::ostringstream os;
    os << "theta=" << theta << " outside [0, pi/4]";
    throw Error(ErrorCode::invalid_input, os.str());
  }
}

// Correlators of the pure Bell state i under interplay_settings(theta).
Correlators vertex_correlators(int i, double theta) {
  static constexpr double tzz[4] = {-1.0, -1.0, 1.0, 1.0};
  static constexpr double txx[4] = {1.0, -1.0, 1.0, -1.0};
  Correlators c;
  c.e[0][0] = std::cos(theta) * tzz[i];
  c.e[0][1] = std::cos(theta) * tzz[i];
  c.e[1][0] = std::sin(theta) * txx[i];
  c.e[1][1] = -std::sin(theta) * txx[i];
  return c;
}

// Coefficients c_i such that S_alpha under relabeling p equals c . lambda.
std::array<double, 4> pattern_coefficients(int p, double theta, AlphaParameter alpha) {
  std::array<double, 4> c{};
  for (int i = 0; i < 4; ++i) c[i] = s_alpha(apply(relabeling(p), vertex_correlators(i, theta)), alpha);
  return c;
}

double dot(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double entropy_bits(const std::array<double, 4>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

std::array<double, 4> gibbs(const std::array<double, 4>& c, double beta) {
  const double cmax = *std::max_element(c.begin(), c.end());
  std::array<double, 4> p{};
  double z = 0.0;
  for (int i = 0; i < 4; ++i) {
    p[i] = std::exp(beta * (c[i] - cmax));
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

// Point on the segment from the vertex e_m toward the uniform distribution
// over `support` with entropy h0 (h0 <= log2 |support|).
std::array<double, 4> mix_on_support(const std::vector<int>& support, double h0) {
  std::array<double, 4> out{};
  const int m = support.front();
  auto at = [&](double tau) {
    std::array<double, 4> p{};
    for (int i : support) p[i] = tau / static_cast<double>(support.size());
    p[m] += 1.0 - tau;
    return p;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (entropy_bits(at(mid)) < h0) lo = mid; else hi = mid;
  }
  out = at(0.5 * (lo + hi));
  return out;
}

// argmax of c . lambda subject to H(lambda) = h0.
std::array<double, 4> max_linear_at_entropy(const std::array<double, 4>& c, double h0) {
  const double cmax = *std::max_element(c.begin(), c.end());
  std::vector<int> top;
  for (int i = 0; i < 4; ++i)
    if (c[i] >= cmax - 1e-15) top.push_back(i);
  if (h0 <= std::log2(static_cast<double>(top.size())) + 1e-15) return mix_on_support(top, h0);

  // H(gibbs(beta)) decreases from 2 at beta = 0 toward log2 |top|.
  double lo = 0.0, hi = 1.0;
  while (entropy_bits(gibbs(c, hi)) > h0 && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (entropy_bits(gibbs(c, mid)) > h0) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return gibbs(c, 0.5 * (lo + hi));
}

BellDiagonalWeights renormalized(std::array<double, 4> p) {
  double s = 0.0;
  for (double& v : p) {
    v = std::clamp(v, 0.0, 1.0);
    s += v;
  }
  for (double& v : p) v /= s;
  return BellDiagonalWeights::from(p);
}

double linear_interp(const std::vector<InterplayPoint>& traj, double theta) {
  if (traj.size() == 1) return traj.front().s_alpha;
  auto it = std::lower_bound(traj.begin(), traj.end(), theta,
                             [](const InterplayPoint& p, double t) { return p.theta < t; });
  std::size_t hi = static_cast<std::size_t>(it - traj.begin());
  hi = std::clamp<std::size_t>(hi, 1, traj.size() - 1);
  const auto& a = traj[hi - 1];
  const auto& b = traj[hi];
  const double u = (theta - a.theta) / (b.theta - a.theta);
  return a.s_alpha + u * (b.s_alpha - a.s_alpha);
}

}  // namespace

double bell_diagonal_s_alpha(const BellDiagonalWeights& w, double theta, AlphaParameter alpha) {
  const CorrelationTensor t = bell_diagonal_correlations(w);
  return 2.0 * alpha.value() * std::cos(theta) * std::abs(t(2, 2)) +
         2.0 * std::sin(theta) * std::abs(t(0, 0));
}

InterplayPoint max_s_fixed_concurrence(double concurrence, double theta, AlphaParameter alpha) {
  if (!(concurrence >= 0.0 && concurrence <= 1.0))
    throw Error(ErrorCode::invalid_input, "concurrence must lie in [0, 1]");
  check_theta(theta);
  const double top = 0.5 * (1.0 + concurrence);
  const double rest = 0.5 * (1.0 - concurrence);

  InterplayPoint best;
  best.s_alpha = -std::numeric_limits<double>::infinity();
  std::array<double, 4> best_w{};
  for (int p = 0; p < kRelabelings; ++p) {
    const auto c = pattern_coefficients(p, theta, alpha);
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) {
        if (j == k) continue;
        std::array<double, 4> w{};
        w[k] = top;
        w[j] += rest;
        const double v = dot(c, w);
        if (v > best.s_alpha + 1e-15) {
          best.s_alpha = v;
          best.pattern = p;
          best_w = w;
        }
      }
  }
  best.theta = theta;
  best.incompatibility = std::sin(theta) * std::sin(theta);
  best.weights = BellDiagonalWeights::from(best_w);
  return best;
}

InterplayPoint max_s_fixed_ode(double ode, double theta, AlphaParameter alpha) {
  if (!(ode >= -1.0 && ode <= 1.0)) {
    std::ostringstream os;
    os << "one-way distillable entanglement " << ode << " infeasible for Bell-diagonal states";
    throw Error(ErrorCode::infeasible, os.str());
  }
  check_theta(theta);
  const double h0 = 1.0 - ode;

  InterplayPoint best;
  best.s_alpha = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < kRelabelings; ++p) {
    const auto c = pattern_coefficients(p, theta, alpha);
    const BellDiagonalWeights w = renormalized(max_linear_at_entropy(c, h0));
    const double v = dot(c, w.values());
    if (v > best.s_alpha + 1e-15) {
      best.s_alpha = v;
      best.pattern = p;
      best.weights = w;
    }
  }
  best.theta = theta;
  best.incompatibility = std::sin(theta) * std::sin(theta);
  return best;
}

std::vector<double> uniform_theta_grid(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_input, "theta grid needs at least one point");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? 0.0 : (kPi / 4.0) * i / (n - 1);
  return g;
}

std::vector<InterplayPoint> trajectory(EntanglementMeasure measure, double level,
                                       AlphaParameter alpha, std::span<const double> theta_grid) {
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    check_theta(theta_grid[i]);
    if (i > 0 && theta_grid[i] < theta_grid[i - 1])
      throw Error(ErrorCode::invalid_input, "theta grid must be sorted");
  }
  std::vector<InterplayPoint> out(theta_grid.size());
  parallel_for(theta_grid.size(), [&](std::size_t i) {
    out[i] = measure == EntanglementMeasure::concurrence
                 ? max_s_fixed_concurrence(level, theta_grid[i], alpha)
                 : max_s_fixed_ode(level, theta_grid[i], alpha);
  });
  return out;
}

std::size_t argmax(const std::vector<InterplayPoint>& traj) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (traj[i].s_alpha > traj[best].s_alpha) best = i;
  return best;
}

CalibrationFit fit_calibration_shifts(std::span<const std::pair<double, double>> observed,
                                      const std::function<double(double)>& model,
                                      const CalibrationOptions& opts) {
  if (observed.size() < 3)
    throw Error(ErrorCode::invalid_input, "calibration fit needs at least three observed points");

  double mmin = std::numeric_limits<double>::infinity(), mmax = -mmin;
  for (const auto& [theta, s] : observed) {
    const double m = model(theta);
    mmin = std::min(mmin, m);
    mmax = std::max(mmax, m);
  }
  if (!(mmax - mmin > 1e-12))
    throw Error(ErrorCode::invalid_input, "degenerate calibration fit: model is flat over the data");

  auto evaluate = [&](double offset) {
    double sm = 0.0, mm = 0.0;
    std::vector<double> m(observed.size());
    for (std::size_t i = 0; i < observed.size(); ++i) {
      m[i] = model(observed[i].first + offset);
      sm += observed[i].second * m[i];
      mm += m[i] * m[i];
    }
    CalibrationFit fit;
    fit.angle_offset = offset;
    fit.visibility = mm > 0.0 ? std::clamp(sm / mm, 1e-12, 1.0) : 1.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      const double r = observed[i].second - fit.visibility * m[i];
      ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(observed.size()));
    return fit;
  };

  const int n = std::max(3, opts.grid_points);
  const double step = 2.0 * opts.max_offset / (n - 1);
  CalibrationFit best = evaluate(-opts.max_offset);
  int best_i = 0;
  for (int i = 1; i < n; ++i) {
    const CalibrationFit f = evaluate(-opts.max_offset + step * i);
    if (f.residual < best.residual) {
      best = f;
      best_i = i;
    }
  }
  const double lo = -opts.max_offset + step * std::max(0, best_i - 1);
  const double hi = -opts.max_offset + step * std::min(n - 1, best_i + 1);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima(
      [&](double d) { return evaluate(d).residual; }, lo, hi, 52, iters);
  const CalibrationFit refined = evaluate(r.first);
  return refined.residual <= best.residual ? refined : best;
}

CalibrationFit fit_calibration_shifts(std::span<const std::pair<double, double>> observed,
                                      const std::vector<InterplayPoint>& model,
                                      const CalibrationOptions& opts) {
  if (model.size() < 2) throw Error(ErrorCode::invalid_input, "model trajectory needs two points");
  return fit_calibration_shifts(
      observed, [&](double theta) { return linear_interp(model, theta); }, opts);
}

}  // namespace bellkit
