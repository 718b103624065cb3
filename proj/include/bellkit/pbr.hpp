#pragma once

// Prediction-based-ratio test of local realism.
//
// Behaviors are compared with the setting-weighted divergence
//   D(f || p) = sum_xy p_xy sum_ab f(ab|xy) log2(f(ab|xy) / p(ab|xy)).

#include <cstdint>
#include <span>
#include <vector>

#include "bellkit/behavior.hpp"
#include "bellkit/trial_sim.hpp"

namespace bellkit {

/// +infinity when p vanishes on a cell where f does not. Setting weights are
/// taken from f.
double kl_divergence(const BehaviorDistribution& f, const BehaviorDistribution& p);

struct ProjectionOptions {
  double tolerance = 1e-10;  // bound on the objective gap
  int max_newton = 200;      // per barrier level
};

struct NsProjection {
  BehaviorDistribution behavior;
  double kl = 0.0;
  double gap = 0.0;  // upper bound on the objective gap
  bool converged = true;
};

/// argmin over no-signaling p of D(f || p), via a damped Newton method on the
/// affine no-signaling parameterization with a vanishing log barrier.
NsProjection project_no_signaling(const BehaviorDistribution& f,
                                  const ProjectionOptions& options = {});

/// Deterministic local strategy index for outputs (a0, a1, b0, b1):
/// ((a0 * K + a1) * K + b0) * K + b1.
int lhv_vertex_count(Alphabet alphabet);
bool lhv_vertex_cell(Alphabet alphabet, int vertex, int a, int b, int x, int y);

struct LhvModel {
  Alphabet alphabet = Alphabet::binary;
  std::vector<double> weights;  // one per deterministic strategy

  BehaviorDistribution behavior(const std::array<double, 4>& setting_weights) const;
};

struct LhvOptions {
  int restarts = 20;
  int max_iterations = 200000;
  double gap_tolerance = 1e-12;  // max_k g_k - 1, the Frank-Wolfe certificate
  std::uint64_t seed = 0;
};

struct LhvFit {
  LhvModel model;
  BehaviorDistribution behavior;
  double kl = 0.0;
  double gap = 0.0;  // max_k sum_c p_xy p(c) D_k(c) / p_LR(c) - 1
  bool converged = true;
};

/// min over the LHV polytope of D(p || p_LR) by expectation-maximization over
/// vertex mixtures, from the uniform mixture plus random restarts.
LhvFit closest_lhv(const BehaviorDistribution& p, const LhvOptions& options = {});

struct PbrOptions {
  std::uint64_t block = 10000;
  Alphabet alphabet = Alphabet::binary;
  std::array<double, 4> setting_dist{0.25, 0.25, 0.25, 0.25};  // by design, not estimated
  double normalization_tol = 1e-9;
  /// Predictions this close to the local polytope (bits) bet nothing: R = 1.
  double local_kl_tol = 1e-10;
  LhvOptions lhv{};
};

struct PbrResult {
  std::uint64_t n_trials = 0;
  double log10_p = 0.0;               // min(-sum log10 R_i, 0)
  std::uint64_t blocks = 0;
  std::vector<double> block_log10_r;  // sum of log10 R_i within each block
  double final_kl_ns = 0.0;           // D(f || p_NS) on the full log
  double final_kl_lhv = 0.0;          // D(p_NS || p_LR) on the full log
  double max_normalization = 0.0;     // largest vertex sum seen at any rebuild

  double p_value() const;
};

/// Ratios are rebuilt before every block from all earlier trials; the first
/// block uses R = 1. Throws out_of_order for non-increasing trial indices and
/// normalization_violation when some deterministic strategy gives
/// sum_c p_xy R(c) D_k(c) > 1 + tol.
PbrResult pbr_p_value(std::span<const TrialRecord> log, const PbrOptions& options = {});

}  // namespace bellkit
