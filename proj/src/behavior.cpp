#include "bellkit/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bellkit/error.hpp"

namespace bellkit {

std::string_view outcome_label(Alphabet a, int index) {
  static constexpr std::string_view binary[] = {"1", "-1"};
  static constexpr std::string_view ternary[] = {"0", "1", "u"};
  if (index < 0 || index >= alphabet_size(a))
    throw Error(ErrorCode::invalid_input, "outcome index out of range");
  return a == Alphabet::binary ? binary[index] : ternary[index];
}

int outcome_index(Alphabet a, std::string_view label) {
  for (int i = 0; i < alphabet_size(a); ++i)
    if (outcome_label(a, i) == label) return i;
  if (a == Alphabet::binary && label == "+1") return 0;
  throw Error(ErrorCode::invalid_input, "unknown outcome label '" + std::string(label) + "'");
}

CountTable::CountTable(Alphabet alphabet)
    : alphabet_(alphabet),
      n_(4 * static_cast<std::size_t>(alphabet_size(alphabet) * alphabet_size(alphabet)), 0) {}

std::uint64_t CountTable::setting_total(int x, int y) const {
  std::uint64_t s = 0;
  for (int a = 0; a < outcomes(); ++a)
    for (int b = 0; b < outcomes(); ++b) s += at(a, b, x, y);
  return s;
}

std::uint64_t CountTable::total() const {
  std::uint64_t s = 0;
  for (auto v : n_) s += v;
  return s;
}

CountTable& CountTable::operator+=(const CountTable& other) {
  if (other.alphabet_ != alphabet_)
    throw Error(ErrorCode::invalid_input, "cannot add count tables over different alphabets");
  for (std::size_t i = 0; i < n_.size(); ++i) n_[i] += other.n_[i];
  return *this;
}

CountTable CountTable::to_binary() const {
  if (alphabet_ == Alphabet::binary) return *this;
  CountTable out(Alphabet::binary);
  auto bin = [](int o) { return o == 0 ? 0 : 1; };
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) out.at(bin(a), bin(b), x, y) += at(a, b, x, y);
  return out;
}

BehaviorDistribution::BehaviorDistribution(Alphabet alphabet, std::array<double, 4> setting_weights)
    : alphabet_(alphabet),
      weights_(setting_weights),
      p_(4 * static_cast<std::size_t>(alphabet_size(alphabet) * alphabet_size(alphabet)), 0.0) {}

BehaviorDistribution BehaviorDistribution::uniform(Alphabet alphabet,
                                                   std::array<double, 4> setting_weights) {
  BehaviorDistribution out(alphabet, setting_weights);
  const double k = alphabet_size(alphabet);
  std::fill(out.p_.begin(), out.p_.end(), 1.0 / (k * k));
  return out;
}

double BehaviorDistribution::marginal_a(int a, int x, int y) const {
  double s = 0.0;
  for (int b = 0; b < outcomes(); ++b) s += (*this)(a, b, x, y);
  return s;
}

double BehaviorDistribution::marginal_b(int b, int x, int y) const {
  double s = 0.0;
  for (int a = 0; a < outcomes(); ++a) s += (*this)(a, b, x, y);
  return s;
}

double BehaviorDistribution::signaling_gap() const {
  double gap = 0.0;
  for (int o = 0; o < outcomes(); ++o) {
    for (int x = 0; x < 2; ++x)
      gap = std::max(gap, std::abs(marginal_a(o, x, 0) - marginal_a(o, x, 1)));
    for (int y = 0; y < 2; ++y)
      gap = std::max(gap, std::abs(marginal_b(o, 0, y) - marginal_b(o, 1, y)));
  }
  return gap;
}

void BehaviorDistribution::validate() const {
  double wsum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw Error(ErrorCode::invalid_input, "negative setting weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > kNormTol)
    throw Error(ErrorCode::invalid_input, "setting weights do not sum to 1");
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      double s = 0.0;
      for (int a = 0; a < outcomes(); ++a)
        for (int b = 0; b < outcomes(); ++b) {
          const double v = (*this)(a, b, x, y);
          if (!(v >= 0.0)) throw Error(ErrorCode::invalid_input, "negative probability");
          s += v;
        }
      if (std::abs(s - 1.0) > kNormTol) {
        std::ostringstream os;
        os << "conditional distribution for (x,y)=(" << x << "," << y << ") sums to " << s;
        throw Error(ErrorCode::invalid_input, os.str());
      }
    }
  }
}

double BehaviorDistribution::correlator(int x, int y) const {
  if (alphabet_ != Alphabet::binary)
    throw Error(ErrorCode::invalid_input, "correlator requires the binary alphabet");
  return (*this)(0, 0, x, y) - (*this)(0, 1, x, y) - (*this)(1, 0, x, y) + (*this)(1, 1, x, y);
}

}  // namespace bellkit
