#include "bellkit/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "bellkit/error.hpp"
#include "bellkit/parallel.hpp"

namespace bellkit {

namespace {

constexpr std::array<std::string_view, 6> kLabels{"H", "V", "+", "-", "R", "L"};

const std::array<Eigen::Vector2cd, 6>& basis_states() {
  static const std::array<Eigen::Vector2cd, 6> states = [] {
    const double r = 1.0 / std::sqrt(2.0);
    const Complex i(0.0, 1.0);
    std::array<Eigen::Vector2cd, 6> s;
    s[0] << 1.0, 0.0;
    s[1] << 0.0, 1.0;
    s[2] << r, r;
    s[3] << r, -r;
    s[4] << r, r * i;
    s[5] << r, -r * i;
    return s;
  }();
  return states;
}

const std::array<Vector4c, kTomoProjectors>& projector_vectors() {
  static const std::array<Vector4c, kTomoProjectors> v = [] {
    std::array<Vector4c, kTomoProjectors> out;
    const auto& s = basis_states();
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) out[6 * a + b](2 * i + j) = s[a](i) * s[b](j);
    return out;
  }();
  return v;
}

// Pauli matrix measured by per-photon basis pair index 0, 1, 2 (z, x, y).
const Matrix2c& basis_pauli(int basis) { return pauli(basis == 0 ? 2 : basis - 1); }

Matrix4c unnormalized(const TParams& p) {
  const Matrix4c t = t_matrix(p);
  return t.adjoint() * t;
}

}  // namespace

Matrix4c t_matrix(const TParams& p) {
  const auto& t = p.t;
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = t[0];
  m(1, 1) = t[1];
  m(2, 2) = t[2];
  m(3, 3) = t[3];
  m(1, 0) = Complex(t[4], t[5]);
  m(2, 1) = Complex(t[6], t[7]);
  m(3, 2) = Complex(t[8], t[9]);
  m(2, 0) = Complex(t[10], t[11]);
  m(3, 1) = Complex(t[12], t[13]);
  m(3, 0) = Complex(t[14], t[15]);
  return m;
}

DensityMatrix rho_from_t(const TParams& t) {
  const Matrix4c m = unnormalized(t);
  const double tr = m.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw Error(ErrorCode::invalid_input, "rho_from_t: T(t) is zero");
  Matrix4c rho = m / tr;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix::from_matrix(rho);
}

TParams t_from_rho(const DensityMatrix& rho, double mix) {
  // rho = J L L^dagger J with J the reversal permutation, so T = (J L J)^dagger.
  Matrix4c m = (1.0 - mix) * rho.matrix() + mix * Matrix4c::Identity() / 4.0;
  const Matrix4c j = Matrix4c::Identity().rowwise().reverse();
  Eigen::LLT<Matrix4c> llt(j * m * j);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::invalid_input, "t_from_rho: state is not positive definite");
  const Matrix4c l = llt.matrixL();
  const Matrix4c t = (j * l * j).adjoint();
  TParams p;
  for (int i = 0; i < 4; ++i) p.t[i] = t(i, i).real();
  const std::array<std::pair<int, int>, 6> off{{{1, 0}, {2, 1}, {3, 2}, {2, 0}, {3, 1}, {3, 0}}};
  for (int k = 0; k < 6; ++k) {
    p.t[4 + 2 * k] = t(off[k].first, off[k].second).real();
    p.t[5 + 2 * k] = t(off[k].first, off[k].second).imag();
  }
  return p;
}

std::string_view tomo_basis_label(int index) {
  if (index < 0 || index >= 6) throw Error(ErrorCode::invalid_input, "tomography basis index out of range");
  return kLabels[index];
}

int tomo_basis_index(std::string_view label) {
  for (int i = 0; i < 6; ++i)
    if (kLabels[i] == label) return i;
  throw Error(ErrorCode::invalid_input, "unknown tomography basis '" + std::string(label) + "'");
}

Vector4c tomo_projector(int mu) { return projector_vectors().at(mu); }

TomoCounts tomo_probabilities(const DensityMatrix& rho) {
  TomoCounts p{};
  const auto& v = projector_vectors();
  for (int mu = 0; mu < kTomoProjectors; ++mu)
    p[mu] = std::max(0.0, (v[mu].adjoint() * rho.matrix() * v[mu])(0, 0).real());
  return p;
}

double tomo_scale(const TomoCounts& counts) {
  double s = 0.0;
  for (double n : counts) s += n;
  return s / 9.0;
}

double log_likelihood(const TParams& t, const TomoCounts& counts, double n_scale) {
  const Matrix4c m = unnormalized(t);
  const double tr = m.trace().real();
  if (!(tr > 0.0)) return std::numeric_limits<double>::infinity();
  const auto& v = projector_vectors();
  double l = 0.0;
  for (int mu = 0; mu < kTomoProjectors; ++mu) {
    const double expected =
        std::max(n_scale * (v[mu].adjoint() * m * v[mu])(0, 0).real() / tr, 1e-12);
    const double d = expected - counts[mu];
    l += d * d / (2.0 * expected);
  }
  return l;
}

Matrix4c linear_inversion(const TomoCounts& counts) {
  // exp(i, j): <s_i (x) s_j> with index 0 the identity and 1..3 sigma_z, x, y.
  Eigen::Matrix4d exp = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d uses = Eigen::Matrix4d::Zero();
  exp(0, 0) = 1.0;
  for (int ba = 0; ba < 3; ++ba)
    for (int bb = 0; bb < 3; ++bb) {
      double n[2][2];
      double tot = 0.0;
      for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb) tot += (n[sa][sb] = counts[6 * (2 * ba + sa) + 2 * bb + sb]);
      if (tot <= 0.0) continue;
      double corr = 0.0, ma = 0.0, mb = 0.0;
      for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb) {
          const double p = n[sa][sb] / tot;
          const double za = sa == 0 ? 1.0 : -1.0, zb = sb == 0 ? 1.0 : -1.0;
          corr += za * zb * p;
          ma += za * p;
          mb += zb * p;
        }
      exp(ba + 1, bb + 1) += corr;
      uses(ba + 1, bb + 1) += 1.0;
      exp(ba + 1, 0) += ma;
      uses(ba + 1, 0) += 1.0;
      exp(0, bb + 1) += mb;
      uses(0, bb + 1) += 1.0;
    }
  Matrix4c rho = Matrix4c::Zero();
  const Matrix2c id = Matrix2c::Identity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double e = (i == 0 && j == 0) ? 1.0 : (uses(i, j) > 0 ? exp(i, j) / uses(i, j) : 0.0);
      const Matrix2c& a = i == 0 ? id : basis_pauli(i - 1);
      const Matrix2c& b = j == 0 ? id : basis_pauli(j - 1);
      rho += e * kron(a, b);
    }
  return rho / 4.0;
}

TomoCounts sample_tomo_counts(const DensityMatrix& rho, std::uint64_t per_setting, Rng& rng) {
  const TomoCounts p = tomo_probabilities(rho);
  TomoCounts n{};
  for (int ba = 0; ba < 3; ++ba)
    for (int bb = 0; bb < 3; ++bb) {
      std::array<int, 4> cell{};
      std::array<double, 4> prob{};
      double tot = 0.0;
      for (int k = 0; k < 4; ++k) {
        cell[k] = 6 * (2 * ba + k / 2) + 2 * bb + k % 2;
        tot += (prob[k] = p[cell[k]]);
      }
      for (std::uint64_t s = 0; s < per_setting; ++s) {
        const double u = rng.uniform() * tot;
        double c = 0.0;
        int k = 0;
        for (; k < 3; ++k) {
          c += prob[k];
          if (u < c) break;
        }
        n[cell[k]] += 1.0;
      }
    }
  return n;
}

namespace {

struct Objective {
  const TomoCounts* counts;
  double n_scale;
};

double gsl_objective(const gsl_vector* x, void* params) {
  const auto* obj = static_cast<const Objective*>(params);
  TParams t;
  for (int i = 0; i < 16; ++i) t.t[i] = gsl_vector_get(x, i);
  return log_likelihood(t, *obj->counts, obj->n_scale);
}

struct RunResult {
  TParams t;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

RunResult run_simplex(const TParams& start, Objective obj, const TomoOptions& options) {
  using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
  using VectorPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  MinimizerPtr s(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 16),
                 &gsl_multimin_fminimizer_free);
  VectorPtr x(gsl_vector_alloc(16), &gsl_vector_free);
  VectorPtr step(gsl_vector_alloc(16), &gsl_vector_free);
  gsl_multimin_function fn{&gsl_objective, 16, &obj};

  RunResult best{start, log_likelihood(start, *obj.counts, obj.n_scale), false, 0};
  double norm = 0.0;
  for (double v : start.t) norm += v * v;
  const double scale = std::max(std::sqrt(norm), 1e-3);

  for (double step_size = 0.1 * scale; best.iterations < options.max_iterations;) {
    for (int i = 0; i < 16; ++i) gsl_vector_set(x.get(), i, best.t.t[i]);
    gsl_vector_set_all(step.get(), step_size);
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
    const double seed_value = best.value;
    double window_start = s->fval;
    int since = 0;
    while (best.iterations < options.max_iterations) {
      if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
      ++best.iterations;
      if (++since == options.stall_window) {
        if (window_start - s->fval < options.stall_tol) break;
        window_start = s->fval;
        since = 0;
      }
      if (gsl_multimin_fminimizer_size(s.get()) < 1e-14 * scale) break;
    }
    if (s->fval < best.value) {
      best.value = s->fval;
      for (int i = 0; i < 16; ++i) best.t.t[i] = gsl_vector_get(s->x, i);
    }
    // A fresh simplex at the incumbent guards against a collapsed one.
    if (seed_value - best.value < options.stall_tol) {
      best.converged = true;
      break;
    }
    step_size = 0.02 * scale;
  }
  return best;
}

}  // namespace

TomoFit mle_fit(const TomoCounts& counts, double n_scale, const TomoOptions& options) {
  for (double n : counts)
    if (!(n >= 0.0) || !std::isfinite(n))
      throw Error(ErrorCode::invalid_input, "tomography counts must be nonnegative");
  if (n_scale <= 0.0) n_scale = tomo_scale(counts);
  if (!(n_scale > 0.0)) throw Error(ErrorCode::invalid_input, "tomography counts are all zero");
  if (options.restarts < 1) throw Error(ErrorCode::invalid_input, "tomography needs >= 1 restart");

  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(linear_inversion(counts));
  Eigen::Vector4d ev = eig.eigenvalues().cwiseMax(0.0);
  if (ev.sum() <= 0.0) ev.setConstant(0.25);
  ev /= ev.sum();
  const Matrix4c physical = eig.eigenvectors() * ev.cast<Complex>().asDiagonal() *
                            eig.eigenvectors().adjoint();
  const TParams init = t_from_rho(DensityMatrix::from_matrix(0.5 * (physical + physical.adjoint())), 1e-3);

  const Objective obj{&counts, n_scale};
  std::vector<RunResult> runs(options.restarts);
  parallel_for(runs.size(), [&](std::size_t r) {
    TParams start = init;
    if (r > 0) {
      Rng rng(substream_seed(options.seed, "optimizer", r));
      for (double& v : start.t) v += 0.2 * (rng.uniform() - 0.5);
    }
    runs[r] = run_simplex(start, obj, options);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].value < runs[best].value) best = r;
  const RunResult& b = runs[best];
  TomoFit fit{rho_from_t(b.t), b.t, b.value, b.converged, static_cast<int>(best), b.iterations, {}};
  if (!b.converged)
    fit.diagnostic = "simplex still improving after " + std::to_string(b.iterations) + " iterations";
  return fit;
}

}  // namespace bellkit
