#pragma once

// Count tables and behaviors p(ab|xy) for two parties with two inputs each.
//
// Outcome indices: in the binary alphabet index 0 is +1 and index 1 is -1.
// In the ternary alphabet {0, 1, u} index 2 is the no-click symbol u; the
// ports map as +1 -> "0" and -1 -> "1".

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bellkit {

enum class Alphabet { binary, ternary };

constexpr int alphabet_size(Alphabet a) noexcept { return a == Alphabet::binary ? 2 : 3; }

std::string_view outcome_label(Alphabet a, int index);
/// Inverse of outcome_label; throws Error(invalid_input) for unknown labels.
int outcome_index(Alphabet a, std::string_view label);

constexpr int setting_index(int x, int y) noexcept { return 2 * x + y; }

class CountTable {
 public:
  explicit CountTable(Alphabet alphabet = Alphabet::binary);

  Alphabet alphabet() const noexcept { return alphabet_; }
  int outcomes() const noexcept { return alphabet_size(alphabet_); }

  std::uint64_t& at(int a, int b, int x, int y) { return n_[index(a, b, x, y)]; }
  std::uint64_t at(int a, int b, int x, int y) const { return n_[index(a, b, x, y)]; }

  std::uint64_t setting_total(int x, int y) const;
  std::uint64_t total() const;

  CountTable& operator+=(const CountTable& other);
  bool operator==(const CountTable& other) const = default;

  /// Bins the no-click symbol into -1 (the device-independent mapping).
  CountTable to_binary() const;

 private:
  std::size_t index(int a, int b, int x, int y) const {
    const auto k = static_cast<std::size_t>(outcomes());
    return ((static_cast<std::size_t>(setting_index(x, y)) * k) + a) * k + b;
  }

  Alphabet alphabet_;
  std::vector<std::uint64_t> n_;
};

/// p(ab|xy) together with the input distribution p_xy.
class BehaviorDistribution {
 public:
  static constexpr double kNormTol = 1e-10;

  explicit BehaviorDistribution(Alphabet alphabet = Alphabet::binary,
                                std::array<double, 4> setting_weights = {0.25, 0.25, 0.25, 0.25});

  static BehaviorDistribution uniform(Alphabet alphabet,
                                      std::array<double, 4> setting_weights = {0.25, 0.25, 0.25,
                                                                               0.25});

  Alphabet alphabet() const noexcept { return alphabet_; }
  int outcomes() const noexcept { return alphabet_size(alphabet_); }

  double& operator()(int a, int b, int x, int y) { return p_[index(a, b, x, y)]; }
  double operator()(int a, int b, int x, int y) const { return p_[index(a, b, x, y)]; }

  double setting_weight(int x, int y) const { return weights_[setting_index(x, y)]; }
  const std::array<double, 4>& setting_weights() const noexcept { return weights_; }
  void set_setting_weights(const std::array<double, 4>& w) { weights_ = w; }

  /// Flat cell vector in (x, y, a, b) order; size 4 * outcomes()^2.
  const std::vector<double>& cells() const noexcept { return p_; }
  std::vector<double>& cells() noexcept { return p_; }

  double marginal_a(int a, int x, int y) const;
  double marginal_b(int b, int x, int y) const;
  /// Largest violation of the no-signaling equalities.
  double signaling_gap() const;

  /// Throws Error(invalid_input) when a conditional or p_xy is not normalized.
  void validate() const;

  /// Correlator <A_x B_y> for the binary alphabet.
  double correlator(int x, int y) const;

 private:
  std::size_t index(int a, int b, int x, int y) const {
    const auto k = static_cast<std::size_t>(outcomes());
    return ((static_cast<std::size_t>(setting_index(x, y)) * k) + a) * k + b;
  }

  Alphabet alphabet_;
  std::array<double, 4> weights_;
  std::vector<double> p_;
};

}  // namespace bellkit
