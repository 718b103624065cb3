#include "bellkit/trial_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "bellkit/error.hpp"
#include "bellkit/parallel.hpp"
#include "bellkit/rng.hpp"

namespace bellkit {

BellState pulse_state(Pulse ch1, Pulse ch2) {
  if (ch1 == Pulse::on) return ch2 == Pulse::on ? BellState::phi_minus : BellState::psi_minus;
  return ch2 == Pulse::on ? BellState::phi_plus : BellState::psi_plus;
}

std::array<int, 4> largest_remainder(const BellDiagonalWeights& w, int n) {
  std::array<int, 4> counts{};
  std::array<double, 4> rem{};
  int assigned = 0;
  for (int i = 0; i < 4; ++i) {
    const double exact = w[i] * n;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    rem[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 4]];
  for (int k = 3; assigned > n; --k) {  // weights summing slightly above 1
    if (counts[order[k]] > 0) {
      --counts[order[k]];
      --assigned;
    }
  }
  return counts;
}

PulseSchedule pulse_schedule(const BellDiagonalWeights& w, int n) {
  if (n < 1) throw Error(ErrorCode::invalid_input, "pulse_schedule: n must be >= 1");
  PulseSchedule s;
  s.n = n;
  s.counts = largest_remainder(w, n);
  for (int i = 0; i < 4; ++i) {
    const double exact = w[i] * n;
    if (std::abs(exact - std::round(exact)) > 1e-9) {
      std::ostringstream msg;
      msg << "lambda_" << i + 1 << " * n = " << exact << " rounded to " << s.counts[i];
      s.warnings.push_back(msg.str());
    }
  }
  const int c2 = s.counts[1], c3 = s.counts[2], c4 = s.counts[3];
  s.ch1.assign(n, Pulse::off);
  s.ch2.assign(n, Pulse::off);
  std::fill_n(s.ch1.begin(), c2 + c4, Pulse::on);
  std::fill_n(s.ch2.begin() + c2, c3 + c4, Pulse::on);
  return s;
}

DensityMatrix prepared_state(const PulseSchedule& schedule) {
  const Matrix2c id = Matrix2c::Identity();
  const Vector4c psi = bell_vector(BellState::psi_plus);
  Matrix4c acc = Matrix4c::Zero();
  for (int i = 0; i < schedule.n; ++i) {
    const Matrix2c& ua = schedule.ch1[i] == Pulse::on ? pauli_z() : id;
    const Matrix2c& ub = schedule.ch2[i] == Pulse::on ? pauli_x() : id;
    const Vector4c v = kron(ua, ub) * psi;
    acc += v * v.adjoint();
  }
  acc /= static_cast<double>(schedule.n);
  return DensityMatrix::from_matrix(acc);
}

void DetectionModel::validate() const {
  auto prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  if (!prob(eta_a) || !prob(eta_b) || !prob(dark_prob))
    throw Error(ErrorCode::invalid_input, "detection model: probabilities must lie in [0,1]");
}

namespace {

// Born tables p(ab|xy) for each candidate state, outcome index 0 = +1.
using BornTable = std::array<std::array<double, 4>, 4>;

BornTable born_table(const DensityMatrix& rho, const BellSettings& settings) {
  BornTable t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const Matrix4c proj = kron(settings.alice(x).projector(a), settings.bob(y).projector(b));
          t[setting_index(x, y)][2 * a + b] =
              std::max(0.0, (rho.matrix() * proj).trace().real());
        }
  return t;
}

void check_distribution(const std::array<double, 4>& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorCode::invalid_input, "setting distribution has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::invalid_input, "setting distribution does not sum to 1");
}

template <class Arr>
int draw(const Arr& p, double u) {
  double c = 0.0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n - 1; ++i) {
    c += p[i];
    if (u < c) return i;
  }
  return n - 1;
}

constexpr int kNoClick = 2;

SimulationResult simulate(const std::vector<BornTable>& tables,
                          const std::function<int(std::uint64_t)>& table_of,
                          const DetectionModel& det, const std::array<double, 4>& setting_dist,
                          std::uint64_t trials, std::uint64_t seed,
                          const SimulationOptions& options) {
  det.validate();
  check_distribution(setting_dist);
  if (trials < 1) throw Error(ErrorCode::invalid_input, "simulate: trials must be >= 1");
  if (options.shards < 1) throw Error(ErrorCode::invalid_input, "simulate: shards must be >= 1");
  const bool post_select = det.mode == DetectionMode::post_selection;
  const Alphabet alphabet = post_select ? Alphabet::binary : options.alphabet;

  const auto shards = static_cast<std::uint64_t>(options.shards);
  std::vector<SimulationResult> parts(shards);
  parallel_for(shards, [&](std::size_t s) {
    SimulationResult& part = parts[s];
    part.counts = CountTable(alphabet);
    const std::uint64_t begin = trials / shards * s + std::min<std::uint64_t>(s, trials % shards);
    const std::uint64_t end = begin + trials / shards + (s < trials % shards ? 1 : 0);
    Rng rng(substream_seed(seed, "simulation", s));
    auto click = [&](double eta, int outcome) {
      if (rng.uniform() < eta) return outcome;
      if (det.dark_prob > 0.0 && rng.uniform() < det.dark_prob) return rng.uniform() < 0.5 ? 0 : 1;
      return kNoClick;
    };
    for (std::uint64_t i = begin; i < end; ++i) {
      const int xy = draw(setting_dist, rng.uniform());
      const int ab = draw(tables[table_of(i)][xy], rng.uniform());
      int a = click(det.eta_a, ab / 2);
      int b = click(det.eta_b, ab % 2);
      ++part.trials;
      if (post_select) {
        if (a == kNoClick || b == kNoClick) {
          ++part.discarded;
          continue;
        }
      } else if (alphabet == Alphabet::binary) {
        if (a == kNoClick) a = 1;  // no-click reported as -1
        if (b == kNoClick) b = 1;
      }
      const int x = xy / 2, y = xy % 2;
      ++part.counts.at(a, b, x, y);
      if (options.record_log)
        part.log.push_back({i, static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y),
                            static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)});
    }
  });

  SimulationResult out;
  out.counts = CountTable(alphabet);
  for (auto& part : parts) {
    out.counts += part.counts;
    out.trials += part.trials;
    out.discarded += part.discarded;
    out.log.insert(out.log.end(), part.log.begin(), part.log.end());
  }
  return out;
}

}  // namespace

SimulationResult simulate_trials(const DensityMatrix& rho, const BellSettings& settings,
                                 const DetectionModel& detection,
                                 const std::array<double, 4>& setting_dist, std::uint64_t trials,
                                 std::uint64_t seed, const SimulationOptions& options) {
  const std::vector<BornTable> tables{born_table(rho, settings)};
  return simulate(
      tables, [](std::uint64_t) { return 0; }, detection, setting_dist, trials, seed, options);
}

SimulationResult simulate_pulsed_trials(const PulseSchedule& schedule, const BellSettings& settings,
                                        const DetectionModel& detection,
                                        const std::array<double, 4>& setting_dist,
                                        std::uint64_t trials, std::uint64_t seed,
                                        const SimulationOptions& options) {
  if (schedule.n < 1) throw Error(ErrorCode::invalid_input, "simulate: empty pulse schedule");
  std::vector<BornTable> tables;
  for (int k = 0; k < 4; ++k)
    tables.push_back(
        born_table(DensityMatrix::from_pure(bell_vector(static_cast<BellState>(k))), settings));
  const auto n = static_cast<std::uint64_t>(schedule.n);
  return simulate(
      tables,
      [&](std::uint64_t i) { return static_cast<int>(schedule.state_at(static_cast<int>(i % n))); },
      detection, setting_dist, trials, seed, options);
}

BehaviorDistribution behavior_from_counts(const CountTable& counts, Alphabet alphabet) {
  if (alphabet == Alphabet::ternary && counts.alphabet() == Alphabet::binary)
    throw Error(ErrorCode::invalid_input,
                "behavior_from_counts: a binary table cannot be expanded to {0,1,u}");
  const CountTable c = alphabet == counts.alphabet() ? counts : counts.to_binary();
  const double total = static_cast<double>(c.total());
  std::array<double, 4> weights{};
  BehaviorDistribution out(alphabet);
  const int k = alphabet_size(alphabet);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const auto nxy = c.setting_total(x, y);
      if (nxy == 0) {
        std::ostringstream msg;
        msg << "behavior_from_counts: no trials for setting (x=" << x << ", y=" << y << ")";
        throw Error(ErrorCode::undefined_correlator, msg.str());
      }
      weights[setting_index(x, y)] = static_cast<double>(nxy) / total;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          out(a, b, x, y) = static_cast<double>(c.at(a, b, x, y)) / static_cast<double>(nxy);
    }
  out.set_setting_weights(weights);
  return out;
}

void SpacetimeConfig::validate() const {
  const double v[] = {ab_m,    sa_m,     sb_m,     lsa_m,    lsb_m, t_e,   t_qrng1,
                      t_qrng2, t_delay1, t_delay2, t_pc1,    t_pc2, t_m1,  t_m2};
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0)
      throw Error(ErrorCode::invalid_input, "spacetime config: values must be nonnegative");
}

SpacetimeConfig SpacetimeConfig::reference() {
  SpacetimeConfig c;
  c.ab_m = 163;
  c.sa_m = 90;
  c.sb_m = 83;
  c.lsa_m = 178;
  c.lsb_m = 182;
  c.t_e = 10;
  c.t_qrng1 = c.t_qrng2 = 96;
  c.t_delay1 = 208;
  c.t_delay2 = 287;
  c.t_pc1 = 112;
  c.t_pc2 = 100;
  c.t_m1 = 25;
  c.t_m2 = 77;
  return c;
}

SpacetimeMargins spacetime_check(const SpacetimeConfig& cfg) {
  cfg.validate();
  const double c = kLightSpeedMPerNs;
  const double path_diff = (cfg.lsa_m - cfg.lsb_m) / c;
  SpacetimeMargins m;
  m.locality1 =
      cfg.ab_m / c - (cfg.t_e - path_diff + cfg.t_qrng1 + cfg.t_delay1 + cfg.t_pc1 + cfg.t_m2);
  m.locality2 =
      cfg.ab_m / c - (cfg.t_e + path_diff + cfg.t_qrng2 + cfg.t_delay2 + cfg.t_pc2 + cfg.t_m1);
  m.independence1 = cfg.sa_m / c - (cfg.lsa_m / c - cfg.t_delay1 - cfg.t_pc1);
  m.independence2 = cfg.sb_m / c - (cfg.lsb_m / c - cfg.t_delay2 - cfg.t_pc2);
  return m;
}

}  // namespace bellkit
