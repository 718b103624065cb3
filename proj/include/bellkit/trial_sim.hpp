#pragma once

// Monte Carlo generation of Bell-test trials, pulse-cycle preparation of
// Bell-diagonal states, and the spacetime-separation audit.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bellkit/behavior.hpp"
#include "bellkit/bell.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit {

// ---------------------------------------------------------------------------
// Pulse-cycle state preparation

enum class Pulse : std::uint8_t { off = 0, on = 1 };

/// Ch1 drives sigma_z on Alice's path, Ch2 sigma_x on Bob's; the source emits Psi+.
/// (on, off) -> Psi-, (on, on) -> Phi-, (off, on) -> Phi+, (off, off) -> Psi+.
BellState pulse_state(Pulse ch1, Pulse ch2);

struct PulseSchedule {
  int n = 0;
  std::vector<Pulse> ch1, ch2;
  std::array<int, 4> counts{};  // pulses per Bell state (Psi+, Psi-, Phi+, Phi-)
  std::vector<std::string> warnings;

  BellState state_at(int pulse) const { return pulse_state(ch1[pulse], ch2[pulse]); }
};

/// Hamilton (largest-remainder) apportionment of n over the weights; ties go
/// to the lower index.
std::array<int, 4> largest_remainder(const BellDiagonalWeights& w, int n);

/// Ch1 is ON for the first (c2 + c4) pulses; Ch2 waits c2 pulses, is ON for
/// (c3 + c4) pulses, then OFF. A warning is recorded when some lambda_i * n is
/// not an integer.
PulseSchedule pulse_schedule(const BellDiagonalWeights& w, int n);

/// Cycle average of the states produced by applying each pulse's Pauli
/// operations to Psi+.
DensityMatrix prepared_state(const PulseSchedule& schedule);

// ---------------------------------------------------------------------------
// Trial simulation

enum class DetectionMode { di_binary, post_selection };

struct DetectionModel {
  double eta_a = 1.0;
  double eta_b = 1.0;
  DetectionMode mode = DetectionMode::di_binary;
  double dark_prob = 0.0;

  void validate() const;
};

struct SimulationOptions {
  int shards = 64;
  bool record_log = false;
  /// Ternary keeps no-clicks as u (di_binary mode only).
  Alphabet alphabet = Alphabet::binary;
};

struct TrialRecord {
  std::uint64_t index = 0;
  std::uint8_t x = 0, y = 0;
  std::uint8_t a = 0, b = 0;  // outcome indices in the result alphabet
};

struct SimulationResult {
  CountTable counts;                 // in options.alphabet; post-selected trials only
  std::uint64_t trials = 0;          // trials generated
  std::uint64_t discarded = 0;       // post-selection discards
  std::vector<TrialRecord> log;      // temporal order, when recorded
};

/// Each trial draws (x, y) from p_xy, (a, b) from the Born rule, then thins
/// each side independently with its efficiency. Trials are split into
/// contiguous shards, each with its own substream of `seed`; results are
/// identical for a fixed (seed, shards) regardless of the worker count.
SimulationResult simulate_trials(const DensityMatrix& rho, const BellSettings& settings,
                                 const DetectionModel& detection,
                                 const std::array<double, 4>& setting_dist, std::uint64_t trials,
                                 std::uint64_t seed, const SimulationOptions& options = {});

/// Trial i carries the Bell state of pulse (i mod n) of the schedule.
SimulationResult simulate_pulsed_trials(const PulseSchedule& schedule, const BellSettings& settings,
                                        const DetectionModel& detection,
                                        const std::array<double, 4>& setting_dist,
                                        std::uint64_t trials, std::uint64_t seed,
                                        const SimulationOptions& options = {});

/// Relative frequencies f(ab|xy) and empirical setting weights. A ternary
/// table can be reported in the binary alphabet (u binned into -1).
BehaviorDistribution behavior_from_counts(const CountTable& counts, Alphabet alphabet);

// ---------------------------------------------------------------------------
// Spacetime audit

inline constexpr double kLightSpeedMPerNs = 0.299792458;

struct SpacetimeConfig {
  double ab_m = 0, sa_m = 0, sb_m = 0;  // free-space distances
  double lsa_m = 0, lsb_m = 0;          // effective optical paths source -> station
  double t_e = 0, t_qrng1 = 0, t_qrng2 = 0, t_delay1 = 0, t_delay2 = 0;
  double t_pc1 = 0, t_pc2 = 0, t_m1 = 0, t_m2 = 0;  // ns

  void validate() const;
  /// The published geometry: |AB| = 163 m, |SA| = 90 m, |SB| = 83 m, ...
  static SpacetimeConfig reference();
};

struct SpacetimeMargins {
  double locality1 = 0, locality2 = 0;         // ns
  double independence1 = 0, independence2 = 0;  // ns

  bool pass() const {
    return locality1 > 0 && locality2 > 0 && independence1 > 0 && independence2 > 0;
  }
};

SpacetimeMargins spacetime_check(const SpacetimeConfig& cfg);

}  // namespace bellkit
