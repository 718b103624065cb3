#include "bellkit/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bellkit/error.hpp"

namespace bellkit {
namespace {

constexpr double kNegativeEigenFloor = 1e-12;

Matrix2c make_pauli(int axis) {
  Matrix2c m;
  switch (axis) {
    case 0: m << 0, 1, 1, 0; break;
    case 1: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

double entropy_bits(const std::array<double, 4>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

}  // namespace

const Matrix2c& pauli_x() {
  static const Matrix2c m = make_pauli(0);
  return m;
}
const Matrix2c& pauli_y() {
  static const Matrix2c m = make_pauli(1);
  return m;
}
const Matrix2c& pauli_z() {
  static const Matrix2c m = make_pauli(2);
  return m;
}
const Matrix2c& pauli(int axis) {
  switch (axis) {
    case 0: return pauli_x();
    case 1: return pauli_y();
    default: return pauli_z();
  }
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

DensityMatrix DensityMatrix::from_matrix(const Matrix4c& m) {
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kHermitianTol)) {
    std::ostringstream os;
    os << "density matrix not Hermitian (max |M - M^dagger| = " << herm << ")";
    throw Error(ErrorCode::invalid_input, os.str());
  }
  const Complex tr = m.trace();
  if (!(std::abs(tr - Complex(1.0, 0.0)) <= kTraceTol)) {
    std::ostringstream os;
    os << "density matrix trace " << tr.real() << " is not 1";
    throw Error(ErrorCode::invalid_input, os.str());
  }
  const Matrix4c h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig >= -kEigenTol)) {
    std::ostringstream os;
    os << "density matrix not positive semidefinite (min eigenvalue " << min_eig << ")";
    throw Error(ErrorCode::invalid_input, os.str());
  }
  return DensityMatrix(h);
}

DensityMatrix DensityMatrix::from_pure(const Vector4c& psi) {
  const double n = psi.squaredNorm();
  if (!(n > 0.0)) throw Error(ErrorCode::invalid_input, "pure state vector is zero");
  return DensityMatrix(psi * psi.adjoint() / n);
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(Matrix4c::Identity() / 4.0);
}

Vector4c bell_vector(BellState s) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector4c v = Vector4c::Zero();
  switch (s) {
    case BellState::psi_plus: v(1) = r; v(2) = r; break;
    case BellState::psi_minus: v(1) = r; v(2) = -r; break;
    case BellState::phi_plus: v(0) = r; v(3) = r; break;
    case BellState::phi_minus: v(0) = r; v(3) = -r; break;
  }
  return v;
}

BellDiagonalWeights BellDiagonalWeights::from(const std::array<double, 4>& lambda) {
  double sum = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0 && l <= 1.0))
      throw Error(ErrorCode::invalid_input, "Bell-diagonal weight outside [0,1]");
    sum += l;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    std::ostringstream os;
    os.precision(17);
    os << "Bell-diagonal weights sum to " << sum << ", not 1";
    throw Error(ErrorCode::invalid_input, os.str());
  }
  return BellDiagonalWeights(lambda);
}

BellDiagonalWeights BellDiagonalWeights::normalized(const std::array<double, 4>& lambda) {
  double sum = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l))
      throw Error(ErrorCode::invalid_input, "Bell-diagonal weight is negative");
    sum += l;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::invalid_input, "Bell-diagonal weights are all zero");
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = lambda[i] / sum;
  return BellDiagonalWeights(out);
}

double BellDiagonalWeights::max() const {
  return *std::max_element(lambda_.begin(), lambda_.end());
}

DensityMatrix bell_diagonal(const BellDiagonalWeights& w) {
  Matrix4c m = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    const Vector4c b = bell_vector(static_cast<BellState>(i));
    m += w[i] * (b * b.adjoint());
  }
  return DensityMatrix::from_matrix(m);
}

Matrix4c psd_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double concurrence(const DensityMatrix& rho) {
  // The Wootters lambdas are the singular values of sqrt(rho) Y sqrt(rho)^*,
  // Y = sigma_y (x) sigma_y. Working with singular values avoids taking square
  // roots of near-zero eigenvalues.
  const Matrix4c yy = kron(pauli_y(), pauli_y());
  const Matrix4c s = psd_sqrt(rho.matrix());
  const Matrix4c m = s * yy * s.conjugate();
  Eigen::JacobiSVD<Matrix4c> svd(m);
  const Eigen::Vector4d l = svd.singularValues();  // sorted descending
  return std::max(0.0, l(0) - l(1) - l(2) - l(3));
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double eof_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

double eof(const DensityMatrix& rho) { return eof_from_concurrence(concurrence(rho)); }

Matrix4c partial_transpose_a(const Matrix4c& m) {
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + b, 2 * c + d) = m(2 * c + b, 2 * a + d);
  return out;
}

double negativity(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(partial_transpose_a(rho.matrix()),
                                             Eigen::EigenvaluesOnly);
  double n = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double e = es.eigenvalues()(i);
    if (e < -kNegativeEigenFloor) n -= e;
  }
  return n;
}

double one_way_distillable(const BellDiagonalWeights& w) {
  return 1.0 - entropy_bits(w.values());
}

CorrelationTensor correlation_tensor(const DensityMatrix& rho) {
  CorrelationTensor out{Eigen::Matrix3d::Zero()};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out.t(i, j) = (rho.matrix() * kron(pauli(i), pauli(j))).trace().real();
  return out;
}

CorrelationTensor bell_diagonal_correlations(const BellDiagonalWeights& w) {
  CorrelationTensor out{Eigen::Matrix3d::Zero()};
  out.t(0, 0) = w[0] - w[1] + w[2] - w[3];
  out.t(1, 1) = w[0] - w[1] - w[2] + w[3];
  out.t(2, 2) = -w[0] - w[1] + w[2] + w[3];
  return out;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  // Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the trace norm of sqrt(rho) sqrt(sigma).
  const Matrix4c m = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
  Eigen::JacobiSVD<Matrix4c> svd(m);
  const double f = svd.singularValues().sum();
  return std::clamp(f * f, 0.0, 1.0);
}

}  // namespace bellkit
