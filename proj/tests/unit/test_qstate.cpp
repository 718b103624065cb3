#include "doctest.h"

#include <random>

#include "bellkit/error.hpp"
#include "bellkit/qstate.hpp"
#include "support.hpp"

using namespace bellkit;

TEST_SUITE("qstate") {

TEST_CASE("concurrence examples") {
  CHECK(concurrence(bell_diagonal(BellDiagonalWeights::from({0.7, 0.3, 0.0, 0.0}))) ==
        doctest::Approx(0.4).epsilon(1e-12));
  CHECK(concurrence(DensityMatrix::maximally_mixed()) == doctest::Approx(0.0));
  CHECK(concurrence(DensityMatrix::from_pure(bell_vector(BellState::psi_plus))) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entanglement of formation") {
  CHECK(eof_from_concurrence(1.0) == doctest::Approx(1.0));
  CHECK(eof_from_concurrence(0.0) == doctest::Approx(0.0));
  const double p = (1.0 + std::sqrt(1.0 - 0.16)) / 2.0;
  const double h = -p * std::log2(p) - (1 - p) * std::log2(1 - p);
  const double e = eof(bell_diagonal(BellDiagonalWeights::from({0.7, 0.3, 0.0, 0.0})));
  CHECK(e == doctest::Approx(h).epsilon(1e-12));
  CHECK(std::abs(e - 0.2503) < 1e-4);
}

TEST_CASE("eof is nondecreasing in concurrence") {
  double prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double e = eof_from_concurrence(i / 10.0);
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("negativity examples") {
  CHECK(negativity(DensityMatrix::from_pure(bell_vector(BellState::psi_plus))) ==
        doctest::Approx(0.5));
  Vector4c zero = Vector4c::Zero();
  zero(0) = 1.0;
  CHECK(negativity(DensityMatrix::from_pure(zero)) == doctest::Approx(0.0));
  CHECK(negativity(bell_diagonal(BellDiagonalWeights::from({0.7, 0.3, 0.0, 0.0}))) ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("one-way distillable entanglement") {
  const auto s1 = BellDiagonalWeights::normalized({0.788, 0.203, 0.006, 0.002});
  CHECK(std::abs(one_way_distillable(s1) - 0.2) < 1e-3);
  CHECK(one_way_distillable(BellDiagonalWeights::from({1, 0, 0, 0})) == doctest::Approx(1.0));
  CHECK(one_way_distillable(BellDiagonalWeights::from({0.25, 0.25, 0.25, 0.25})) ==
        doctest::Approx(-1.0));
}

TEST_CASE("correlation tensor examples") {
  const auto phi = correlation_tensor(DensityMatrix::from_pure(bell_vector(BellState::phi_plus)));
  Eigen::Matrix3d expect = Eigen::Vector3d(1, -1, 1).asDiagonal();
  CHECK((phi.t - expect).norm() < 1e-12);
  CHECK(correlation_tensor(DensityMatrix::maximally_mixed()).t.norm() < 1e-15);

  const auto w = BellDiagonalWeights::normalized({0.788, 0.203, 0.006, 0.002});
  const auto t = correlation_tensor(bell_diagonal(w));
  CHECK(std::abs(t(0, 0) - 0.589) < 1e-3);
  // T_yy = l1 - l2 - l3 + l4.
  CHECK(std::abs(t(1, 1) - 0.581) < 1e-3);
  CHECK(std::abs(t(2, 2) + 0.983) < 1e-3);
}

TEST_CASE("fidelity examples") {
  std::mt19937_64 g(11);
  const auto rho = DensityMatrix::from_matrix(testing::random_mixed(g));
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
  Vector4c a = Vector4c::Zero(), b = Vector4c::Zero();
  a(0) = 1.0;
  b(3) = 1.0;
  CHECK(fidelity(DensityMatrix::from_pure(a), DensityMatrix::from_pure(b)) < 1e-12);
  CHECK(fidelity(DensityMatrix::maximally_mixed(),
                 DensityMatrix::from_pure(bell_vector(BellState::psi_plus))) ==
        doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("fidelity with a pure state is the overlap") {
  std::mt19937_64 g(12);
  for (int i = 0; i < 100; ++i) {
    const Matrix4c m = testing::random_mixed(g);
    const Vector4c psi = testing::random_pure(g);
    const double overlap = (psi.adjoint() * m * psi)(0, 0).real();
    CHECK(fidelity(DensityMatrix::from_matrix(m), DensityMatrix::from_pure(psi)) ==
          doctest::Approx(overlap).epsilon(1e-7));
  }
}

TEST_CASE("invalid density matrices are rejected") {
  Matrix4c m = Matrix4c::Identity() / 4.0;
  m(0, 1) = 0.1;  // not Hermitian
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), Error);
  CHECK_THROWS_AS(DensityMatrix::from_matrix(Matrix4c::Identity() / 2.0), Error);
  Matrix4c neg = Matrix4c::Zero();
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  try {
    DensityMatrix::from_matrix(neg);
    FAIL("accepted a non-PSD matrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_input);
  }
}

TEST_CASE("invalid Bell weights are rejected") {
  CHECK_THROWS_AS(BellDiagonalWeights::from({0.5, 0.5, 0.1, 0.0}), Error);
  CHECK_THROWS_AS(BellDiagonalWeights::from({1.2, -0.2, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(BellDiagonalWeights::normalized({0, 0, 0, 0}), Error);
}

TEST_CASE("Bell-diagonal states: validity and closed forms") {
  std::mt19937_64 g(1);
  for (int i = 0; i < 1000; ++i) {
    const auto w = BellDiagonalWeights::from(testing::random_weights(g));
    const DensityMatrix rho = bell_diagonal(w);  // from_matrix validates inside
    CHECK((rho.matrix() - testing::bell_mixture(w.values())).norm() < 1e-12);
    CHECK(concurrence(rho) == doctest::Approx(std::max(0.0, 2 * w.max() - 1)).epsilon(1e-10));
    CHECK(std::abs(negativity(rho) - std::max(0.0, w.max() - 0.5)) < 1e-10);
    const auto direct = correlation_tensor(rho);
    const auto closed = bell_diagonal_correlations(w);
    CHECK((direct.t - closed.t).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(one_way_distillable(w) ==
          doctest::Approx(1.0 - testing::shannon_bits(w.values())).epsilon(1e-12));
  }
}

TEST_CASE("Wootters concurrence of pure states matches 2|ad - bc|") {
  std::mt19937_64 g(2);
  for (int i = 0; i < 200; ++i) {
    const Vector4c v = testing::random_pure(g);
    const double expect = 2.0 * std::abs(v(0) * v(3) - v(1) * v(2));
    CHECK(std::abs(concurrence(DensityMatrix::from_pure(v)) - expect) < 1e-9);
  }
}

TEST_CASE("negativity of random states is consistent with concurrence bounds") {
  // For two qubits, 2N <= C always.
  std::mt19937_64 g(3);
  for (int i = 0; i < 200; ++i) {
    const auto rho = DensityMatrix::from_matrix(testing::random_mixed(g));
    CHECK(2.0 * negativity(rho) <= concurrence(rho) + 1e-9);
  }
}

}  // TEST_SUITE
