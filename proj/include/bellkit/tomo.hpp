#pragma once

// Maximum-likelihood two-qubit tomography.
//
// Per-photon basis states are indexed H, V, +, -, R, L (sigma_z, sigma_x and
// sigma_y eigenstates, +1 first). Projector mu = 6 * i_A + i_B, so the 36
// counts run HH, HV, H+, ..., LR, LL.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "bellkit/qstate.hpp"
#include "bellkit/rng.hpp"

namespace bellkit {

inline constexpr int kTomoProjectors = 36;
using TomoCounts = std::array<double, kTomoProjectors>;

/// t1..t16 stored at t[0]..t[15].
struct TParams {
  std::array<double, 16> t{};
};

/// Lower-triangular T(t): diagonal t1..t4, first subdiagonal t5+it6, t7+it8,
/// t9+it10, second t11+it12, t13+it14, corner t15+it16.
Matrix4c t_matrix(const TParams& t);

/// T^dagger T / Tr(T^dagger T). Throws Error(invalid_input) for t = 0.
DensityMatrix rho_from_t(const TParams& t);

/// Parameters reproducing rho (Cholesky factor of a full-rank state; rank
/// deficient input is first mixed with `mix` of the identity).
TParams t_from_rho(const DensityMatrix& rho, double mix = 1e-6);

std::string_view tomo_basis_label(int index);
int tomo_basis_index(std::string_view label);
/// |phi_A> (x) |phi_B> of projector mu.
Vector4c tomo_projector(int mu);

/// <phi_mu|rho|phi_mu> for all 36 projectors.
TomoCounts tomo_probabilities(const DensityMatrix& rho);

/// Per-setting scale: total counts over the nine basis pairs.
double tomo_scale(const TomoCounts& counts);

/// sum_mu (N p_mu - n_mu)^2 / (2 N p_mu), with N p_mu floored at 1e-12.
double log_likelihood(const TParams& t, const TomoCounts& counts, double n_scale);

/// Least-squares Pauli reconstruction; Hermitian and unit trace but possibly
/// not positive.
Matrix4c linear_inversion(const TomoCounts& counts);

/// Multinomial sample of `per_setting` pairs for each of the nine basis pairs.
TomoCounts sample_tomo_counts(const DensityMatrix& rho, std::uint64_t per_setting, Rng& rng);

struct TomoOptions {
  int restarts = 4;           // run concurrently; restart 0 starts at the inversion estimate
  int max_iterations = 40000; // per restart, over all simplex re-seeds
  double stall_tol = 1e-9;
  int stall_window = 100;
  std::uint64_t seed = 0;
};

struct TomoFit {
  DensityMatrix rho;
  TParams t;
  double likelihood = 0.0;
  bool converged = false;
  int restart = 0;
  int iterations = 0;
  std::string diagnostic;
};

/// Minimizes log_likelihood with the Nelder-Mead simplex. n_scale <= 0 means
/// tomo_scale(counts).
TomoFit mle_fit(const TomoCounts& counts, double n_scale = 0.0, const TomoOptions& options = {});

}  // namespace bellkit
