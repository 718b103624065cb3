#include "doctest.h"

#include <limits>
#include <random>

#include "bellkit/error.hpp"
#include "bellkit/pbr.hpp"
#include "lhv_oracle.hpp"
#include "support.hpp"

using namespace bellkit;

namespace {

using namespace testing;

BehaviorDistribution from_cells(const Cells& c, std::array<double, 4> sw = {0.25, 0.25, 0.25, 0.25}) {
  BehaviorDistribution b(Alphabet::binary, sw);
  for (int i = 0; i < 16; ++i) b.cells()[i] = c[i];
  return b;
}

BehaviorDistribution pr_box() {
  BehaviorDistribution b(Alphabet::binary);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) b(a, bb, x, y) = (a ^ bb) == (x & y) ? 0.5 : 0.0;
  return b;
}

DensityMatrix werner(double v) {
  const Matrix4c m = v * testing::bell_mixture({0, 0, 1, 0}) + (1 - v) * Matrix4c::Identity() / 4.0;
  return DensityMatrix::from_matrix(m);
}

double max_chsh(const BehaviorDistribution& p) {
  double e[2][2];
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) e[x][y] = p(0, 0, x, y) + p(1, 1, x, y) - p(0, 1, x, y) - p(1, 0, x, y);
  double best = 0;
  for (int k = 0; k < 4; ++k) {
    const int ox = k / 2, oy = k % 2;  // which correlator carries the minus sign
    double s = 0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) s += (x == ox && y == oy ? -1 : 1) * e[x][y];
    best = std::max(best, std::abs(s));
  }
  return best;
}

Cells random_behavior(std::mt19937_64& g) {
  Cells c{};
  for (int s = 0; s < 4; ++s) {
    double sum = 0;
    for (int i = 0; i < 4; ++i) sum += (c[4 * s + i] = -std::log(1 - testing::uniform(g)));
    for (int i = 0; i < 4; ++i) c[4 * s + i] /= sum;
  }
  return c;
}

}  // namespace

TEST_SUITE("pbr") {

TEST_CASE("divergence examples") {
  const auto u = BehaviorDistribution::uniform(Alphabet::binary);
  CHECK(kl_divergence(u, u) == 0.0);

  BehaviorDistribution point(Alphabet::binary, {1, 0, 0, 0}), half(Alphabet::binary, {1, 0, 0, 0});
  point(0, 0, 0, 0) = 1;
  half(0, 0, 0, 0) = half(1, 0, 0, 0) = 0.5;
  CHECK(kl_divergence(point, half) == doctest::Approx(1.0).epsilon(1e-15));

  BehaviorDistribution f(Alphabet::binary), p(Alphabet::binary);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      f(0, 0, x, y) = 0.75;
      f(1, 1, x, y) = 0.25;
      p(0, 0, x, y) = p(1, 1, x, y) = 0.5;
    }
  CHECK(kl_divergence(f, p) == doctest::Approx(0.75 * std::log2(1.5) + 0.25 * std::log2(0.5)).epsilon(1e-14));
  CHECK(kl_divergence(f, p) == doctest::Approx(0.18872).epsilon(1e-4));
  CHECK(std::isinf(kl_divergence(p, f) + kl_divergence(half, point)));
}

TEST_CASE("no-signaling input is a fixed point of the projection") {
  const auto u = BehaviorDistribution::uniform(Alphabet::binary);
  auto r = project_no_signaling(u);
  CHECK(r.kl < 1e-12);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(r.behavior.cells()[i] - 0.25) < 1e-9);

  const auto q = born_behavior(werner(0.9), interplay_settings(0.6));
  r = project_no_signaling(q);
  CHECK(r.kl < 1e-10);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(r.behavior.cells()[i] - q.cells()[i]) < 1e-6);
}

TEST_CASE("projection equalizes a signaling marginal") {
  auto f = BehaviorDistribution::uniform(Alphabet::binary);
  f(0, 0, 0, 0) += 0.05;
  f(0, 1, 0, 0) += 0.05;
  f(1, 0, 0, 0) -= 0.05;
  f(1, 1, 0, 0) -= 0.05;
  REQUIRE(f.signaling_gap() > 0.09);
  const auto r = project_no_signaling(f);
  CHECK(r.converged);
  CHECK(r.behavior.signaling_gap() < 1e-9);
  const auto oracle = multistart(cells_of(f), f.setting_weights(), ns_vertices(), 3, 200000, 1);
  CHECK(std::abs(r.kl - oracle.kl) < 1e-6);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(r.behavior.cells()[i] - oracle.p[i]) < 1e-3);
}

TEST_CASE("projection of random frequencies") {
  std::mt19937_64 g(51);
  for (int t = 0; t < 20; ++t) {
    const auto c = random_behavior(g);
    const auto f = from_cells(c, testing::random_weights(g));
    const auto r = project_no_signaling(f);
    CHECK(r.behavior.signaling_gap() < 1e-9);
    const auto oracle = multistart(c, f.setting_weights(), ns_vertices(), 1, 100000, 2);
    CHECK(r.kl <= oracle.kl + 1e-9);
    CHECK(r.kl > oracle.kl - 1e-6);
  }
}

TEST_CASE("ternary projection stays no-signaling") {
  std::mt19937_64 g(52);
  BehaviorDistribution f(Alphabet::ternary);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double s = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += (f(a, b, x, y) = testing::uniform(g, 0.01, 1));
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) f(a, b, x, y) /= s;
    }
  const auto r = project_no_signaling(f);
  CHECK(r.converged);
  CHECK(r.behavior.signaling_gap() < 1e-9);
  CHECK(r.kl >= 0);
}

TEST_CASE("local behaviors are their own closest local model") {
  std::mt19937_64 g(53);
  const auto verts = local_vertices();
  for (int t = 0; t < 5; ++t) {
    Cells c{};
    const auto w = testing::random_weights(g);
    for (int k = 0; k < 4; ++k) {
      const auto& v = verts[g() % 16];
      for (int i = 0; i < 16; ++i) c[i] += w[k] * v[i];
    }
    const auto fit = closest_lhv(from_cells(c));
    CHECK(fit.kl < 1e-8);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(fit.behavior.cells()[i] - c[i]) < 1e-3);
  }
}

TEST_CASE("PR box is log2(4/3) bits from the local polytope") {
  const auto fit = closest_lhv(pr_box());
  CHECK(fit.converged);
  CHECK(std::abs(fit.kl - std::log2(4.0 / 3.0)) < 1e-4);
  // Symmetric mixtures: the 8 local boxes winning 3 of 4 PR conditions each
  // carry weight 1/8; scan a one-parameter family around it.
  double best = 1e9;
  const auto verts = local_vertices();
  const auto f = cells_of(pr_box());
  for (int i = 0; i <= 1000; ++i) {
    const double q = i / 1000.0;
    Cells p{};
    int winners = 0;
    for (const auto& v : verts) {
      int ok = 0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              if (v[cell(a, b, x, y)] > 0 && (a ^ b) == (x & y)) ++ok;
      if (ok == 3) ++winners;
    }
    for (const auto& v : verts) {
      int ok = 0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              if (v[cell(a, b, x, y)] > 0 && (a ^ b) == (x & y)) ++ok;
      const double w = ok == 3 ? q / winners : (1 - q) / (16 - winners);
      for (int k = 0; k < 16; ++k) p[k] += w * v[k];
    }
    best = std::min(best, kl_bits(f, p, {0.25, 0.25, 0.25, 0.25}));
  }
  CHECK(std::abs(fit.kl - best) < 1e-4);
}

TEST_CASE("Tsirelson behavior against a multi-start oracle") {
  const auto q = born_behavior(werner(1.0), chsh_optimal_settings());
  const auto fit = closest_lhv(q);
  CHECK(fit.kl > 0.01);
  const auto oracle = multistart(cells_of(q), q.setting_weights(), local_vertices(), 30, 20000, 3);
  CHECK(fit.kl <= oracle.kl + 1e-9);
  CHECK(fit.kl > oracle.kl - 1e-6);
  CHECK(max_chsh(fit.behavior) <= 2 + 1e-9);
}

TEST_CASE("closest local models obey the local bound") {
  std::mt19937_64 g(54);
  for (int t = 0; t < 100; ++t) {
    const auto ns = project_no_signaling(from_cells(random_behavior(g)));
    LhvOptions opt;
    opt.restarts = 2;
    opt.seed = t;
    const auto fit = closest_lhv(ns.behavior, opt);
    CHECK(fit.behavior.signaling_gap() < 1e-12);
    CHECK(max_chsh(fit.behavior) <= 2 + 1e-9);
    double sum = 0;
    for (double w : fit.model.weights) {
      CHECK(w >= 0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("vertex indexing") {
  CHECK(lhv_vertex_count(Alphabet::binary) == 16);
  CHECK(lhv_vertex_count(Alphabet::ternary) == 81);
  // a0 = 1, a1 = 0, b0 = 1, b1 = 1
  const int v = ((1 * 2 + 0) * 2 + 1) * 2 + 1;
  CHECK(lhv_vertex_cell(Alphabet::binary, v, 1, 1, 0, 0));
  CHECK(lhv_vertex_cell(Alphabet::binary, v, 0, 1, 1, 1));
  CHECK_FALSE(lhv_vertex_cell(Alphabet::binary, v, 1, 1, 1, 1));
}

TEST_CASE("deterministic local data never reject") {
  Cells det{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) det[cell(x, 1 - y, x, y)] = 1;  // a = x, b = 1 - y
  const auto log = sample_log(det, 50000, 55);
  PbrOptions opt;
  opt.block = 5000;
  const auto r = pbr_p_value(log, opt);
  CHECK(r.log10_p > -1e-9);
  CHECK(r.p_value() > 1 - 1e-9);
  CHECK(r.max_normalization <= 1 + 1e-9);
}

TEST_CASE("local mixture data do not reject") {
  std::mt19937_64 g(56);
  const auto verts = local_vertices();
  Cells c{};
  for (int k = 0; k < 16; ++k) {
    const double w = testing::uniform(g);
    for (int i = 0; i < 16; ++i) c[i] += w * verts[k][i];
  }
  double total = 0;
  for (int i = 0; i < 4; ++i) total += c[i];
  for (double& x : c) x /= total;
  // Interior local data: the no-signaling and local fits coincide up to
  // solver tolerance, so the ratios stay at one.
  const auto r = pbr_p_value(sample_log(c, 40000, 60));
  CHECK(r.log10_p > -1e-3);
  CHECK(r.max_normalization <= 1 + 1e-9);
}

TEST_CASE("single block is uninformed") {
  const auto q = cells_of(born_behavior(werner(1.0), chsh_optimal_settings()));
  const auto log = sample_log(q, 1000, 57);
  PbrOptions opt;
  opt.block = 1000;
  const auto r = pbr_p_value(log, opt);
  CHECK(r.blocks == 1);
  CHECK(r.log10_p == 0.0);
  CHECK(r.p_value() == 1.0);
}

TEST_CASE("rejection rate approaches the divergence from the local polytope") {
  const double v = 2.5 / (2 * std::sqrt(2.0));
  const auto truth = born_behavior(werner(v), chsh_optimal_settings());
  const auto log = sample_log(cells_of(truth), 100000, 58);
  const auto r = pbr_p_value(log);
  CHECK(r.n_trials == 100000);
  CHECK(r.blocks == 10);
  CHECK(r.max_normalization <= 1 + 1e-9);
  const auto oracle = multistart(cells_of(truth), truth.setting_weights(), local_vertices(), 10, 20000, 4);
  const double expect = oracle.kl * std::log10(2.0);
  const double rate = -r.log10_p / 1e5;
  CHECK(std::abs(rate - expect) < 0.2 * expect);
  // After the first block each block's product of ratios exceeds one.
  REQUIRE(r.block_log10_r.size() == 10);
  CHECK(r.block_log10_r[0] == 0.0);
  for (std::size_t i = 1; i < r.block_log10_r.size(); ++i) CHECK(r.block_log10_r[i] >= 0.0);

  // Prefix consistency: a shorter log reproduces the leading blocks.
  const auto prefix = pbr_p_value(std::span<const TrialRecord>(log).first(50000));
  for (std::size_t i = 0; i < 5; ++i) CHECK(prefix.block_log10_r[i] == r.block_log10_r[i]);
  CHECK(prefix.log10_p >= r.log10_p);
}

TEST_CASE("out-of-order logs are rejected") {
  auto log = sample_log(cells_of(BehaviorDistribution::uniform(Alphabet::binary)), 100, 59);
  std::swap(log[10], log[11]);
  try {
    pbr_p_value(log);
    FAIL("accepted an out-of-order log");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_order);
  }
}

}  // TEST_SUITE
