#pragma once

// Reference KL projections for binary two-input behaviors by plain
// multiplicative EM over explicit vertex lists.

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bellkit/behavior.hpp"
#include "bellkit/trial_sim.hpp"
#include "support.hpp"

namespace testing {

using Cells = std::array<double, 16>;  // binary behavior, (x, y, a, b) order

inline int cell(int a, int b, int x, int y) { return ((2 * x + y) * 2 + a) * 2 + b; }

inline Cells cells_of(const bellkit::BehaviorDistribution& p) {
  Cells c{};
  for (int i = 0; i < 16; ++i) c[i] = p.cells()[i];
  return c;
}

// Extremal no-signaling boxes for two binary inputs and outputs: the 16 local
// deterministic boxes and the 8 PR boxes a xor b = xy xor r x xor s y xor t.
inline std::vector<Cells> ns_vertices() {
  std::vector<Cells> v;
  for (int k = 0; k < 16; ++k) {
    Cells c{};
    const int a0 = (k >> 3) & 1, a1 = (k >> 2) & 1, b0 = (k >> 1) & 1, b1 = k & 1;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) c[cell(x ? a1 : a0, y ? b1 : b0, x, y)] = 1;
    v.push_back(c);
  }
  for (int k = 0; k < 8; ++k) {
    Cells c{};
    const int r = (k >> 2) & 1, s = (k >> 1) & 1, t = k & 1;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            if ((a ^ b) == ((x & y) ^ (r & x) ^ (s & y) ^ t)) c[cell(a, b, x, y)] = 0.5;
    v.push_back(c);
  }
  return v;
}

inline double kl_bits(const Cells& f, const Cells& p, const std::array<double, 4>& w) {
  double d = 0;
  for (int i = 0; i < 16; ++i)
    if (f[i] > 0) d += w[i / 4] * f[i] * std::log2(f[i] / p[i]);
  return d;
}

struct MixtureFit {
  Cells p;
  double kl;
};

// Multiplicative EM for min D(f || sum_k w_k V_k) over a fixed vertex list,
// started from `w`.
inline MixtureFit em(const Cells& f, const std::array<double, 4>& sw, const std::vector<Cells>& verts,
              std::vector<double> w, int iters) {
  Cells p{};
  for (int it = 0; it <= iters; ++it) {
    p.fill(0);
    for (std::size_t k = 0; k < verts.size(); ++k)
      for (int i = 0; i < 16; ++i) p[i] += w[k] * verts[k][i];
    if (it == iters) break;
    for (std::size_t k = 0; k < verts.size(); ++k) {
      double g = 0;
      for (int i = 0; i < 16; ++i)
        if (f[i] > 0) g += sw[i / 4] * f[i] * verts[k][i] / p[i];
      w[k] *= g;
    }
  }
  return {p, kl_bits(f, p, sw)};
}

inline MixtureFit multistart(const Cells& f, const std::array<double, 4>& sw, const std::vector<Cells>& verts,
                      int starts, int iters, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  MixtureFit best{{}, std::numeric_limits<double>::infinity()};
  for (int s = 0; s < starts; ++s) {
    std::vector<double> w(verts.size());
    double sum = 0;
    for (double& x : w) sum += (x = s == 0 ? 1.0 : -std::log(1 - uniform(g)));
    for (double& x : w) x /= sum;
    const auto fit = em(f, sw, verts, w, iters);
    if (fit.kl < best.kl) best = fit;
  }
  return best;
}

inline std::vector<Cells> local_vertices() {
  auto v = ns_vertices();
  v.resize(16);
  return v;
}

/// i.i.d. log at behavior p with uniform settings.
inline std::vector<bellkit::TrialRecord> sample_log(const Cells& p, std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<bellkit::TrialRecord> log(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const int s = static_cast<int>(g() % 4);
    double u = uniform(g);
    int k = 0;
    while (k < 3 && u >= p[4 * s + k]) u -= p[4 * s + k++];
    log[i] = {i, static_cast<std::uint8_t>(s / 2), static_cast<std::uint8_t>(s % 2),
              static_cast<std::uint8_t>(k / 2), static_cast<std::uint8_t>(k % 2)};
  }
  return log;
}

}  // namespace testing
