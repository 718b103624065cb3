#include "bellkit/io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "bellkit/error.hpp"

namespace bellkit::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

[[noreturn]] void bad_line(std::size_t n, const std::string& why) {
  throw Error(ErrorCode::io, "line " + std::to_string(n) + ": " + why);
}

template <class T>
T parse_number(const std::string& s, std::size_t line) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_line(line, "not a number: '" + s + "'");
  return v;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

// Reads the header and returns the remaining non-blank rows with line numbers.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv(
    std::istream& is, const std::vector<std::string>& header) {
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  while (std::getline(is, line)) {
    ++n;
    if (blank(line)) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        bad_line(n, "expected header '" + want + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header.size())
      bad_line(n, "expected " + std::to_string(header.size()) + " fields");
    rows.emplace_back(n, std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::io, "empty CSV input");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_count_table(std::ostream& os, const CountTable& c) {
  const Alphabet al = c.alphabet();
  os << "a,b,x,y,count\n";
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < c.outcomes(); ++a)
        for (int b = 0; b < c.outcomes(); ++b)
          os << outcome_label(al, a) << ',' << outcome_label(al, b) << ',' << x << ',' << y << ','
             << c.at(a, b, x, y) << '\n';
}

CountTable read_count_table(std::istream& is) {
  const auto rows = read_csv(is, {"a", "b", "x", "y", "count"});
  Alphabet al = Alphabet::binary;
  for (const auto& [n, f] : rows)
    for (int k = 0; k < 2; ++k)
      if (f[k] == "0" || f[k] == "u") al = Alphabet::ternary;
  CountTable c(al);
  std::vector<bool> seen(4 * c.outcomes() * c.outcomes());
  for (const auto& [n, f] : rows) {
    int a = 0, b = 0;
    try {
      a = outcome_index(al, f[0]);
      b = outcome_index(al, f[1]);
    } catch (const Error& e) {
      bad_line(n, e.what());
    }
    const int x = parse_number<int>(f[2], n), y = parse_number<int>(f[3], n);
    if (x < 0 || x > 1 || y < 0 || y > 1) bad_line(n, "settings must be 0 or 1");
    const auto cell = static_cast<std::size_t>((setting_index(x, y) * c.outcomes() + a) * c.outcomes() + b);
    if (seen[cell]) bad_line(n, "duplicate cell");
    seen[cell] = true;
    c.at(a, b, x, y) = parse_number<std::uint64_t>(f[4], n);
  }
  return c;
}

void write_trial_log(std::ostream& os, std::span<const TrialRecord> log, Alphabet alphabet) {
  for (const auto& t : log)
    os << t.index << ',' << int(t.x) << ',' << int(t.y) << ',' << outcome_label(alphabet, t.a) << ','
       << outcome_label(alphabet, t.b) << '\n';
}

std::vector<TrialRecord> read_trial_log(std::istream& is, Alphabet alphabet) {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (blank(line)) continue;
    const auto f = split(line);
    if (f.size() != 5) bad_line(n, "expected trial_index,x,y,a,b");
    TrialRecord t;
    t.index = parse_number<std::uint64_t>(f[0], n);
    const int x = parse_number<int>(f[1], n), y = parse_number<int>(f[2], n);
    if (x < 0 || x > 1 || y < 0 || y > 1) bad_line(n, "settings must be 0 or 1");
    t.x = static_cast<std::uint8_t>(x);
    t.y = static_cast<std::uint8_t>(y);
    try {
      t.a = static_cast<std::uint8_t>(outcome_index(alphabet, f[3]));
      t.b = static_cast<std::uint8_t>(outcome_index(alphabet, f[4]));
    } catch (const Error& e) {
      bad_line(n, e.what());
    }
    out.push_back(t);
  }
  return out;
}

void write_trajectory(std::ostream& os, const std::vector<InterplayPoint>& traj) {
  os << "theta_rad,incompat,s_alpha,l1,l2,l3,l4\n";
  for (const auto& p : traj) {
    os << format_double(p.theta) << ',' << format_double(p.incompatibility) << ','
       << format_double(p.s_alpha);
    for (double l : p.weights.values()) os << ',' << format_double(l);
    os << '\n';
  }
}

std::vector<std::pair<double, double>> read_observed_points(std::istream& is) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [n, f] : read_csv(is, {"theta_rad", "s_alpha"}))
    out.emplace_back(parse_number<double>(f[0], n), parse_number<double>(f[1], n));
  return out;
}

void write_tomo_counts(std::ostream& os, const TomoCounts& counts) {
  os << "basis_a,basis_b,count\n";
  for (int mu = 0; mu < kTomoProjectors; ++mu)
    os << tomo_basis_label(mu / 6) << ',' << tomo_basis_label(mu % 6) << ','
       << format_double(counts[mu]) << '\n';
}

TomoCounts read_tomo_counts(std::istream& is) {
  TomoCounts counts{};
  std::array<bool, kTomoProjectors> seen{};
  for (const auto& [n, f] : read_csv(is, {"basis_a", "basis_b", "count"})) {
    int mu = 0;
    try {
      mu = 6 * tomo_basis_index(f[0]) + tomo_basis_index(f[1]);
    } catch (const Error& e) {
      bad_line(n, e.what());
    }
    if (seen[mu]) bad_line(n, "duplicate projector " + f[0] + f[1]);
    seen[mu] = true;
    counts[mu] = parse_number<double>(f[2], n);
    if (counts[mu] < 0) bad_line(n, "negative count");
  }
  for (int mu = 0; mu < kTomoProjectors; ++mu)
    if (!seen[mu])
      throw Error(ErrorCode::io, "missing projector " + std::string(tomo_basis_label(mu / 6)) +
                                     std::string(tomo_basis_label(mu % 6)));
  return counts;
}

Json to_json(const DiBoundReport& r) {
  return Json{{"s", r.s},
              {"alpha", r.alpha},
              {"eof_lb", r.eof_lb},
              {"negativity_lb", r.negativity_lb},
              {"incompatibility_lb", r.incompatibility_lb},
              {"method", r.method},
              {"achieved_precision", r.achieved_precision}};
}

Json to_json(const CalibrationFit& f) {
  return Json{{"angle_offset", f.angle_offset},
              {"visibility", f.visibility},
              {"residual", f.residual}};
}

Json to_json(const PbrResult& r) {
  return Json{{"n_trials", r.n_trials},
              {"log10_p", r.log10_p},
              {"blocks", r.blocks},
              {"final_kl_ns", r.final_kl_ns},
              {"final_kl_lhv", r.final_kl_lhv}};
}

Json to_json(const SpacetimeMargins& m) {
  return Json{{"locality1_ns", m.locality1},
              {"locality2_ns", m.locality2},
              {"independence1_ns", m.independence1},
              {"independence2_ns", m.independence2},
              {"pass", m.pass()}};
}

Json to_json(const Matrix4c& m) {
  Json rows = Json::array();
  for (int r = 0; r < 4; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 4; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

Matrix4c matrix_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::io, "density matrix must be 4x4");
  Matrix4c m;
  for (int r = 0; r < 4; ++r) {
    if (!j[r].is_array() || j[r].size() != 4) throw Error(ErrorCode::io, "density matrix must be 4x4");
    for (int c = 0; c < 4; ++c) {
      const auto& e = j[r][c];
      if (e.is_number())
        m(r, c) = e.get<double>();
      else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      else
        throw Error(ErrorCode::io, "matrix entries must be numbers or [re, im] pairs");
    }
  }
  return m;
}

namespace {

const std::vector<std::pair<const char*, double SpacetimeConfig::*>>& spacetime_fields() {
  static const std::vector<std::pair<const char*, double SpacetimeConfig::*>> f{
      {"ab_m", &SpacetimeConfig::ab_m},         {"sa_m", &SpacetimeConfig::sa_m},
      {"sb_m", &SpacetimeConfig::sb_m},         {"lsa_m", &SpacetimeConfig::lsa_m},
      {"lsb_m", &SpacetimeConfig::lsb_m},       {"t_e", &SpacetimeConfig::t_e},
      {"t_qrng1", &SpacetimeConfig::t_qrng1},   {"t_qrng2", &SpacetimeConfig::t_qrng2},
      {"t_delay1", &SpacetimeConfig::t_delay1}, {"t_delay2", &SpacetimeConfig::t_delay2},
      {"t_pc1", &SpacetimeConfig::t_pc1},       {"t_pc2", &SpacetimeConfig::t_pc2},
      {"t_m1", &SpacetimeConfig::t_m1},         {"t_m2", &SpacetimeConfig::t_m2}};
  return f;
}

}  // namespace

SpacetimeConfig spacetime_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::config, "spacetime block must be an object");
  SpacetimeConfig c;
  std::map<std::string, bool> known;
  for (const auto& [key, member] : spacetime_fields()) {
    known[key] = true;
    if (!j.contains(key)) throw Error(ErrorCode::config, std::string("spacetime: missing key ") + key);
    if (!j[key].is_number()) throw Error(ErrorCode::config, std::string("spacetime: ") + key + " must be a number");
    c.*member = j[key].get<double>();
  }
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw Error(ErrorCode::config, "spacetime: unknown key " + item.key());
  c.validate();
  return c;
}

Json to_json(const SpacetimeConfig& c) {
  Json j = Json::object();
  for (const auto& [key, member] : spacetime_fields()) j[key] = c.*member;
  return j;
}

}  // namespace bellkit::io
