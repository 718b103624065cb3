#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "bellkit/bell.hpp"
#include "bellkit/di_bounds.hpp"
#include "bellkit/error.hpp"
#include "bellkit/interplay.hpp"
#include "bellkit/io.hpp"
#include "bellkit/pbr.hpp"
#include "bellkit/tomo.hpp"
#include "bellkit/trial_sim.hpp"
#include "bellkit/version.hpp"

namespace bellkit::cli {

namespace fs = std::filesystem;
using Json = io::Json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::config, msg); }

// One parameter object of the config. Every key read is recorded together
// with the value in effect, defaults included; finish() rejects the rest.
class Block {
 public:
  Block(std::string name, const Json& j) : name_(std::move(name)), j_(j.is_null() ? Json::object() : j) {
    if (!j_.is_object()) config_error(name_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    used_.insert(key);
    if (!j_.contains(key)) {
      resolved_[key] = fallback;
      return fallback;
    }
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) config_error(name_ + ": missing key '" + key + "'");
    const Json& v = j_[key];
    if constexpr (std::is_same_v<T, Json>) {
      resolved_[key] = v;
      return v;
    } else {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) config_error(name_ + "." + key + ": expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) config_error(name_ + "." + key + ": expected a string");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) config_error(name_ + "." + key + ": expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())
          config_error(name_ + "." + key + ": expected a nonnegative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) config_error(name_ + "." + key + ": expected a number");
      }
      try {
        T out = v.get<T>();
        resolved_[key] = v;
        return out;
      } catch (const nlohmann::json::exception&) {
        config_error(name_ + "." + key + ": wrong type");
      }
    }
  }

  /// Nested block; its resolved form replaces the raw value.
  Block child(const std::string& key) {
    used_.insert(key);
    return Block(name_ + "." + key, j_.contains(key) ? j_[key] : Json());
  }
  void adopt(const std::string& key, const Block& b) { resolved_[key] = b.resolved(); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) config_error(name_ + ": unknown key '" + item.key() + "'");
  }

  const std::string& name() const { return name_; }
  Json resolved() const { return resolved_; }

 private:
  std::string name_;
  Json j_;
  std::set<std::string> used_;
  Json resolved_ = Json::object();
};

struct Run {
  std::string subcommand;
  fs::path out;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs, outputs;
  Json errors = Json::array();

  void report(const Error& e, const std::string& where = {}) {
    Json d{{"level", "error"}, {"subcommand", subcommand}, {"code", to_string(e.code())},
           {"message", e.what()}};
    if (!where.empty()) d["where"] = where;
    std::cerr << d.dump() << '\n';
    errors.push_back(d);
  }

  fs::path output(const std::string& name) {
    const fs::path p = out / name;
    outputs.push_back(p.string());
    return p;
  }

  fs::path input(const std::string& path) {
    if (!fs::is_regular_file(path)) config_error("input file not found: " + path);
    inputs.push_back(path);
    return path;
  }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(ErrorCode::io, "cannot write " + p.string());
  os << text;
  if (!os) throw Error(ErrorCode::io, "write failed for " + p.string());
}

std::ifstream open_input(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw Error(ErrorCode::io, "cannot read " + p.string());
  return is;
}

std::array<double, 4> array4(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) config_error(what + ": expected 4 numbers");
  std::array<double, 4> a{};
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) config_error(what + ": expected 4 numbers");
    a[i] = j[i].get<double>();
  }
  return a;
}

std::vector<double> number_list(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) config_error(what + ": expected a nonempty list of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) config_error(what + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

BellState bell_state_named(const std::string& s) {
  if (s == "psi_plus") return BellState::psi_plus;
  if (s == "psi_minus") return BellState::psi_minus;
  if (s == "phi_plus") return BellState::phi_plus;
  if (s == "phi_minus") return BellState::phi_minus;
  config_error("unknown Bell state '" + s + "'");
}

struct StateSpec {
  std::optional<DensityMatrix> rho;
  std::optional<PulseSchedule> schedule;

  DensityMatrix state() const { return rho ? *rho : prepared_state(*schedule); }
};

// Exactly one of: bell, bell_diagonal, matrix, pulsed.
StateSpec parse_state(Block& b) {
  const int kinds = b.has("bell") + b.has("bell_diagonal") + b.has("matrix") + b.has("pulsed");
  if (kinds != 1) config_error(b.name() + ": give exactly one of bell, bell_diagonal, matrix, pulsed");
  StateSpec s;
  if (b.has("bell")) {
    s.rho = DensityMatrix::from_pure(bell_vector(bell_state_named(b.require<std::string>("bell"))));
  } else if (b.has("bell_diagonal")) {
    s.rho = bell_diagonal(BellDiagonalWeights::from(array4(b.require<Json>("bell_diagonal"), b.name() + ".bell_diagonal")));
  } else if (b.has("matrix")) {
    s.rho = DensityMatrix::from_matrix(io::matrix_from_json(b.require<Json>("matrix")));
  } else {
    Block p = b.child("pulsed");
    const auto w = BellDiagonalWeights::from(array4(p.require<Json>("weights"), p.name() + ".weights"));
    s.schedule = pulse_schedule(w, p.require<int>("n"));
    p.finish();
    b.adopt("pulsed", p);
  }
  b.finish();
  return s;
}

// Exactly one of: chsh_optimal, interplay_theta_rad, bloch_rad, waveplate_deg.
BellSettings parse_settings(Block& b) {
  const int kinds = b.has("chsh_optimal") + b.has("interplay_theta_rad") + b.has("bloch_rad") +
                    b.has("waveplate_deg");
  if (kinds == 0) {
    b.get<bool>("chsh_optimal", true);
    return chsh_optimal_settings();
  }
  if (kinds != 1)
    config_error(b.name() + ": give one of chsh_optimal, interplay_theta_rad, bloch_rad, waveplate_deg");
  BellSettings s;
  if (b.has("chsh_optimal")) {
    if (!b.require<bool>("chsh_optimal")) config_error(b.name() + ".chsh_optimal must be true");
    s = chsh_optimal_settings();
  } else if (b.has("interplay_theta_rad")) {
    s = interplay_settings(b.require<double>("interplay_theta_rad"));
  } else {
    const bool bloch = b.has("bloch_rad");
    const std::string key = bloch ? "bloch_rad" : "waveplate_deg";
    const auto a = array4(b.require<Json>(key), b.name() + "." + key);
    auto make = [&](double v) {
      return bloch ? MeasurementSetting::from_bloch_angle(v) : MeasurementSetting::from_waveplate_deg(v);
    };
    s = BellSettings{make(a[0]), make(a[1]), make(a[2]), make(a[3])};
  }
  b.finish();
  return s;
}

Alphabet parse_alphabet(const std::string& s) {
  if (s == "binary") return Alphabet::binary;
  if (s == "ternary") return Alphabet::ternary;
  config_error("alphabet must be 'binary' or 'ternary'");
}

// ---------------------------------------------------------------------------

void cmd_quantify(Block& cfg, Run& run) {
  const Json entries = cfg.get<Json>("entries", Json::array());
  const Json tables = cfg.get<Json>("count_tables", Json::array());
  cfg.finish();
  if (!entries.is_array() || !tables.is_array())
    config_error("quantify: entries and count_tables must be lists");
  if (entries.empty() && tables.empty()) config_error("quantify: nothing to quantify");

  struct Item {
    double s = 0.0, alpha = 1.0;
    std::string path;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Block e("quantify.entries[" + std::to_string(i) + "]", entries[i]);
    items.push_back({e.require<double>("s"), e.get<double>("alpha", 1.0), {}});
    e.finish();
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    Block e("quantify.count_tables[" + std::to_string(i) + "]", tables[i]);
    const auto path = e.require<std::string>("path");
    items.push_back({0.0, e.get<double>("alpha", 1.0), run.input(path).string()});
    e.finish();
  }

  Json reports = Json::array();
  for (const auto& it : items) {
    Json r;
    try {
      const auto alpha = AlphaParameter::from(it.alpha);
      double s = it.s, se = 0.0;
      if (!it.path.empty()) {
        auto is = open_input(it.path);
        const CountTable counts = io::read_count_table(is);
        s = s_alpha_from_counts(counts, alpha);
        se = s_alpha_standard_error(counts, alpha);
      }
      r = io::to_json(quantify(s, alpha));
      if (!it.path.empty()) {
        r["source"] = it.path;
        r["s_stderr"] = se;
      }
      std::cout << "s=" << s << " alpha=" << it.alpha << " eof_lb=" << r["eof_lb"].get<double>()
                << " negativity_lb=" << r["negativity_lb"].get<double>()
                << " incompatibility_lb=" << r["incompatibility_lb"].get<double>() << '\n';
    } catch (const Error& e) {
      run.report(e, it.path.empty() ? "s=" + io::format_double(it.s) : it.path);
      r = Json{{"s", it.s}, {"alpha", it.alpha}};
      if (!it.path.empty()) r["source"] = it.path;
      r["error"] = Json{{"code", to_string(e.code())}, {"message", e.what()}};
    }
    reports.push_back(r);
  }
  write_file(run.output("quantify.json"), Json{{"reports", reports}}.dump(2) + "\n");
}

void cmd_simulate(Block& cfg, Run& run) {
  Block state_block = cfg.child("state");
  const StateSpec state = parse_state(state_block);
  cfg.adopt("state", state_block);
  Block settings_block = cfg.child("settings");
  const BellSettings settings = parse_settings(settings_block);
  cfg.adopt("settings", settings_block);
  Block det_block = cfg.child("detection");
  DetectionModel det;
  det.eta_a = det_block.get<double>("eta_a", 1.0);
  det.eta_b = det_block.get<double>("eta_b", 1.0);
  const auto mode = det_block.get<std::string>("mode", "di_binary");
  if (mode == "di_binary")
    det.mode = DetectionMode::di_binary;
  else if (mode == "post_selection")
    det.mode = DetectionMode::post_selection;
  else
    config_error("simulate.detection.mode must be 'di_binary' or 'post_selection'");
  det.dark_prob = det_block.get<double>("dark_prob", 0.0);
  det_block.finish();
  cfg.adopt("detection", det_block);

  const auto dist = array4(cfg.get<Json>("setting_dist", Json{0.25, 0.25, 0.25, 0.25}), "simulate.setting_dist");
  const auto trials = cfg.require<std::uint64_t>("trials");
  SimulationOptions opts;
  opts.shards = cfg.get<int>("shards", 64);
  opts.alphabet = parse_alphabet(cfg.get<std::string>("alphabet", "binary"));
  opts.record_log = cfg.get<bool>("write_log", false);
  const double alpha_value = cfg.get<double>("alpha", 1.0);
  cfg.finish();
  const auto alpha = AlphaParameter::from(alpha_value);

  const SimulationResult sim =
      state.schedule ? simulate_pulsed_trials(*state.schedule, settings, det, dist, trials, run.seed, opts)
                     : simulate_trials(*state.rho, settings, det, dist, trials, run.seed, opts);
  {
    std::ostringstream os;
    io::write_count_table(os, sim.counts);
    write_file(run.output("counts.csv"), os.str());
  }
  if (opts.record_log) {
    std::ostringstream os;
    io::write_trial_log(os, sim.log, sim.counts.alphabet());
    write_file(run.output("trial_log.csv"), os.str());
  }
  Json summary{{"trials", sim.trials}, {"discarded", sim.discarded}, {"alpha", alpha_value}};
  if (state.schedule) {
    Json w = Json::array();
    for (const auto& s : state.schedule->warnings) w.push_back(s);
    summary["schedule_counts"] = state.schedule->counts;
    summary["warnings"] = w;
  }
  try {
    summary["s_alpha"] = s_alpha_from_counts(sim.counts, alpha);
    summary["s_stderr"] = s_alpha_standard_error(sim.counts, alpha);
    const auto best = sign_optimal_s_alpha(correlators_from_counts(sim.counts.to_binary()), alpha);
    summary["s_alpha_relabeled"] = best.s;
    summary["relabeling"] = best.pattern;
    std::cout << "S_alpha = " << summary["s_alpha"].get<double>() << " +/- "
              << summary["s_stderr"].get<double>() << " over " << sim.counts.total()
              << " trials (best relabeling " << best.s << ")\n";
  } catch (const Error& e) {
    run.report(e);
    summary["error"] = Json{{"code", to_string(e.code())}, {"message", e.what()}};
  }
  write_file(run.output("simulate.json"), summary.dump(2) + "\n");
}

void cmd_interplay(Block& cfg, Run& run) {
  const auto measure_name = cfg.get<std::string>("measure", "concurrence");
  EntanglementMeasure measure;
  if (measure_name == "concurrence")
    measure = EntanglementMeasure::concurrence;
  else if (measure_name == "ode")
    measure = EntanglementMeasure::ode;
  else
    config_error("interplay.measure must be 'concurrence' or 'ode'");
  const double level = cfg.get<double>("level", 0.4);
  const auto alphas = number_list(cfg.get<Json>("alphas", Json{1.0, 1.5}), "interplay.alphas");
  std::vector<double> grid;
  if (cfg.has("theta_grid")) {
    grid = number_list(cfg.require<Json>("theta_grid"), "interplay.theta_grid");
  } else {
    grid = uniform_theta_grid(cfg.get<int>("theta_points", 50));
  }
  std::optional<Block> calib;
  std::string observed_path;
  double calib_alpha = 1.0, max_offset_deg = 5.0;
  if (cfg.has("calibration")) {
    calib.emplace(cfg.child("calibration"));
    observed_path = run.input(calib->require<std::string>("observed")).string();
    calib_alpha = calib->get<double>("alpha", alphas.front());
    max_offset_deg = calib->get<double>("max_offset_deg", 5.0);
    calib->finish();
    cfg.adopt("calibration", *calib);
  }
  cfg.finish();

  Json rows = Json::array();
  for (double a : alphas) {
    const auto alpha = AlphaParameter::from(a);
    const auto traj = trajectory(measure, level, alpha, grid);
    const std::string name = "trajectory_alpha_" + io::format_double(a) + ".csv";
    std::ostringstream os;
    io::write_trajectory(os, traj);
    write_file(run.output(name), os.str());
    const auto k = argmax(traj);
    const bool interior = k > 0 && k + 1 < traj.size();
    rows.push_back(Json{{"alpha", a},
                        {"file", name},
                        {"argmax_theta_rad", traj[k].theta},
                        {"argmax_incompat", traj[k].incompatibility},
                        {"s_max", traj[k].s_alpha},
                        {"s_last", traj.back().s_alpha},
                        {"interior_maximum", interior}});
    std::cout << "alpha=" << a << " peak S=" << traj[k].s_alpha << " at theta=" << traj[k].theta
              << (interior ? " (interior)" : " (endpoint)") << '\n';
  }
  write_file(run.output("interplay.json"),
             Json{{"measure", measure_name}, {"level", level}, {"trajectories", rows}}.dump(2) + "\n");

  if (calib) {
    auto is = open_input(observed_path);
    const auto observed = io::read_observed_points(is);
    const auto model = trajectory(measure, level, AlphaParameter::from(calib_alpha), uniform_theta_grid(401));
    CalibrationOptions opts;
    opts.max_offset = deg_to_rad(max_offset_deg);
    const auto fit = fit_calibration_shifts(observed, model, opts);
    write_file(run.output("calibration.json"), io::to_json(fit).dump(2) + "\n");
  }
}

void cmd_pbr(Block& cfg, Run& run) {
  const auto log_path = run.input(cfg.require<std::string>("trial_log"));
  PbrOptions opts;
  opts.alphabet = parse_alphabet(cfg.get<std::string>("alphabet", "binary"));
  opts.block = cfg.get<std::uint64_t>("block", 10000);
  opts.setting_dist = array4(cfg.get<Json>("setting_dist", Json{0.25, 0.25, 0.25, 0.25}), "pbr.setting_dist");
  opts.lhv.restarts = cfg.get<int>("restarts", 20);
  opts.lhv.seed = run.seed;
  cfg.finish();

  auto is = open_input(log_path);
  const auto log = io::read_trial_log(is, opts.alphabet);
  const PbrResult r = pbr_p_value(log, opts);
  write_file(run.output("pbr.json"), io::to_json(r).dump(2) + "\n");
  std::cout << "log10 p = " << r.log10_p << " over " << r.n_trials << " trials in " << r.blocks
            << " blocks\n";
}

void cmd_tomo(Block& cfg, Run& run) {
  TomoOptions opts;
  opts.restarts = cfg.get<int>("restarts", 4);
  opts.seed = run.seed;
  const double n_scale = cfg.get<double>("n_scale", 0.0);
  const int sources = cfg.has("counts") + cfg.has("simulate");
  if (sources != 1) config_error("tomo: give exactly one of counts, simulate");

  TomoCounts counts{};
  std::optional<DensityMatrix> target;
  if (cfg.has("target")) {
    Block t = cfg.child("target");
    target = parse_state(t).state();
    cfg.adopt("target", t);
  }
  if (cfg.has("counts")) {
    const auto path = run.input(cfg.require<std::string>("counts"));
    cfg.finish();
    auto is = open_input(path);
    counts = io::read_tomo_counts(is);
  } else {
    Block sim = cfg.child("simulate");
    Block st = sim.child("state");
    const DensityMatrix rho = parse_state(st).state();
    sim.adopt("state", st);
    const auto per_setting = sim.require<std::uint64_t>("per_setting");
    sim.finish();
    cfg.adopt("simulate", sim);
    cfg.finish();
    Rng rng(substream_seed(run.seed, "tomo-counts"));
    counts = sample_tomo_counts(rho, per_setting, rng);
    std::ostringstream os;
    io::write_tomo_counts(os, counts);
    write_file(run.output("counts.csv"), os.str());
    if (!target) target = rho;
  }

  const TomoFit fit = mle_fit(counts, n_scale, opts);
  Json out{{"rho", io::to_json(fit.rho.matrix())},
           {"likelihood", fit.likelihood},
           {"converged", fit.converged},
           {"restart", fit.restart},
           {"iterations", fit.iterations}};
  if (target) out["fidelity"] = fidelity(fit.rho, *target);
  if (!fit.diagnostic.empty()) out["diagnostic"] = fit.diagnostic;
  write_file(run.output("rho.json"), out.dump(2) + "\n");
  std::cout << "L = " << fit.likelihood;
  if (target) std::cout << ", fidelity = " << out["fidelity"].get<double>();
  std::cout << '\n';
  if (!fit.converged) throw Error(ErrorCode::not_converged, "tomo: " + fit.diagnostic);
}

void cmd_spacetime(Run& run, const Json& raw) {
  SpacetimeConfig c = raw.is_null() ? SpacetimeConfig::reference() : io::spacetime_from_json(raw);
  const auto m = spacetime_check(c);
  write_file(run.output("spacetime.json"),
             Json{{"config", io::to_json(c)}, {"margins", io::to_json(m)}}.dump(2) + "\n");
  std::cout.setf(std::ios::fixed);
  std::cout.precision(1);
  std::cout << "locality margins: " << m.locality1 << " ns, " << m.locality2 << " ns\n"
            << "measurement-independence margins: " << m.independence1 << " ns, "
            << m.independence2 << " ns\n"
            << (m.pass() ? "pass" : "FAIL") << '\n';
  std::cout.unsetf(std::ios::fixed);
}

const std::vector<std::pair<std::string, std::string>>& subcommands() {
  static const std::vector<std::pair<std::string, std::string>> s{
      {"quantify", "Device-independent bounds from alpha-CHSH values or count tables"},
      {"simulate", "Monte Carlo Bell-test trials"},
      {"interplay", "Nonlocality versus incompatibility trajectories"},
      {"pbr", "Prediction-based-ratio p-value from a trial log"},
      {"tomo", "Maximum-likelihood two-qubit tomography"},
      {"spacetime", "Spacelike-separation audit"}};
  return s;
}

Json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot read config " + path);
  Json j;
  try {
    j = Json::parse(is, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    config_error("config " + path + ": " + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  // A manifest carries the resolved config of its run.
  if (j.contains("config") && j.contains("version") && j.contains("outputs")) j = j["config"];
  if (!j.is_object()) config_error("config must be a JSON object");
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"bellkit: Bell-test analysis toolkit", "bellkit"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_flag;
  for (const auto& [name, desc] : subcommands()) {
    auto* sc = app.add_subcommand(name, desc);
    sc->add_option("--config", config_path, "JSON config file");
    sc->add_option("--seed", seed_flag, "Seed (overrides the config)");
    sc->add_option("--out", out_dir, "Output directory");
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Run r;
  r.subcommand = app.get_subcommands().front()->get_name();
  Json resolved = Json::object();
  Json raw_block;
  int exit_code = 0;
  try {
    Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
    if (!config_path.empty()) r.inputs.push_back(config_path);
    for (const auto& item : cfg.items()) {
      const auto& k = item.key();
      if (k != "subcommand" && k != "seed" && k != "out" && k != r.subcommand)
        config_error("config: unknown key '" + k + "'");
    }
    if (cfg.contains("subcommand") && cfg["subcommand"] != r.subcommand)
      config_error("config is for subcommand " + cfg["subcommand"].dump());
    if (cfg.contains("seed") && !cfg["seed"].is_number_unsigned())
      config_error("config: seed must be a nonnegative integer");
    r.seed = seed_flag ? *seed_flag : cfg.value("seed", std::uint64_t{0});
    r.out = !out_dir.empty() ? fs::path(out_dir) : fs::path(cfg.value("out", std::string(".")));
    raw_block = cfg.contains(r.subcommand) ? cfg[r.subcommand] : Json();
  } catch (const Error& e) {
    r.report(e);
    return 2;
  }

  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) {
    r.report(Error(ErrorCode::io, "cannot create output directory " + r.out.string()));
    return 2;
  }

  Block block(r.subcommand, raw_block.is_null() || r.subcommand == "spacetime" ? Json() : raw_block);
  try {
    if (r.subcommand == "quantify") cmd_quantify(block, r);
    else if (r.subcommand == "simulate") cmd_simulate(block, r);
    else if (r.subcommand == "interplay") cmd_interplay(block, r);
    else if (r.subcommand == "pbr") cmd_pbr(block, r);
    else if (r.subcommand == "tomo") cmd_tomo(block, r);
    else cmd_spacetime(r, raw_block);
  } catch (const Error& e) {
    r.report(e);
    exit_code = e.code() == ErrorCode::config ? 2 : 1;
  } catch (const std::exception& e) {
    r.report(Error(ErrorCode::io, e.what()), "internal");
    exit_code = 1;
  }
  if (exit_code == 0 && !r.errors.empty()) exit_code = 1;

  resolved["subcommand"] = r.subcommand;
  resolved["seed"] = r.seed;
  resolved["out"] = r.out.string();
  if (r.subcommand != "spacetime")
    resolved[r.subcommand] = block.resolved();
  else
    resolved["spacetime"] = raw_block.is_null() ? io::to_json(SpacetimeConfig::reference()) : raw_block;

  Json manifest{{"subcommand", r.subcommand},
                {"version", std::string(version())},
                {"seed", r.seed},
                {"config", resolved},
                {"inputs", r.inputs},
                {"outputs", r.outputs},
                {"status", exit_code == 0 ? "ok" : "error"},
                {"errors", r.errors}};
  try {
    write_file(r.out / "manifest.json", manifest.dump(2) + "\n");
  } catch (const Error& e) {
    r.report(e);
    return exit_code == 0 ? 1 : exit_code;
  }
  return exit_code;
}

}  // namespace bellkit::cli
