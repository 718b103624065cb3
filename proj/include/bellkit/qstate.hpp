#pragma once

// Two-qubit state algebra and entanglement measures.
//
// Basis ordering is {|00>, |01>, |10>, |11>} with |0>,|1> the sigma_z
// eigenstates (H, V in the tomography module). The Bell basis is indexed
// (Psi+, Psi-, Phi+, Phi-); every other module inherits this ordering.

#include <array>
#include <complex>

#include <Eigen/Core>

namespace bellkit {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

const Matrix2c& pauli_x();
const Matrix2c& pauli_y();
const Matrix2c& pauli_z();
/// sigma_x, sigma_y, sigma_z for index 0, 1, 2.
const Matrix2c& pauli(int axis);

Matrix4c kron(const Matrix2c& a, const Matrix2c& b);

/// Hermitian, unit-trace, positive semidefinite 4x4 matrix.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigenTol = 1e-9;

  /// Validates the invariants; throws Error(invalid_input) on violation.
  static DensityMatrix from_matrix(const Matrix4c& m);
  /// |psi><psi| for a (not necessarily normalized) nonzero vector.
  static DensityMatrix from_pure(const Vector4c& psi);
  static DensityMatrix maximally_mixed();

  const Matrix4c& matrix() const noexcept { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

 private:
  explicit DensityMatrix(const Matrix4c& m) : m_(m) {}
  Matrix4c m_;
};

enum class BellState { psi_plus = 0, psi_minus = 1, phi_plus = 2, phi_minus = 3 };

Vector4c bell_vector(BellState s);

/// Probability vector over (Psi+, Psi-, Phi+, Phi-).
class BellDiagonalWeights {
 public:
  static constexpr double kSumTol = 1e-12;

  /// Throws Error(invalid_input) unless every entry is in [0,1] and the sum is 1.
  static BellDiagonalWeights from(const std::array<double, 4>& lambda);
  /// Rescales nonnegative weights to unit sum, for published values that were
  /// rounded independently.
  static BellDiagonalWeights normalized(const std::array<double, 4>& lambda);

  const std::array<double, 4>& values() const noexcept { return lambda_; }
  double operator[](std::size_t i) const { return lambda_[i]; }
  double max() const;

 private:
  explicit BellDiagonalWeights(const std::array<double, 4>& l) : lambda_(l) {}
  std::array<double, 4> lambda_;
};

/// T_ij = Tr(rho sigma_i (x) sigma_j), i,j in {x,y,z}.
struct CorrelationTensor {
  Eigen::Matrix3d t;

  double operator()(int i, int j) const { return t(i, j); }
};

DensityMatrix bell_diagonal(const BellDiagonalWeights& w);

/// Wootters concurrence.
double concurrence(const DensityMatrix& rho);

/// Binary entropy in bits; h(0) = h(1) = 0.
double binary_entropy(double p);

double eof_from_concurrence(double c);
double eof(const DensityMatrix& rho);

Matrix4c partial_transpose_a(const Matrix4c& m);

/// Sum of |negative eigenvalues| of the partial transpose on A.
double negativity(const DensityMatrix& rho);

/// 1 - H(lambda) in bits. Negative values are returned as-is.
double one_way_distillable(const BellDiagonalWeights& w);

CorrelationTensor correlation_tensor(const DensityMatrix& rho);

/// Diagonal tensor of a Bell-diagonal state without forming the matrix:
/// T_xx = l1-l2+l3-l4, T_yy = l1-l2-l3+l4, T_zz = -l1-l2+l3+l4.
CorrelationTensor bell_diagonal_correlations(const BellDiagonalWeights& w);

/// Squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Square root of a Hermitian PSD matrix; negative eigenvalues are clipped.
Matrix4c psd_sqrt(const Matrix4c& m);

}  // namespace bellkit
