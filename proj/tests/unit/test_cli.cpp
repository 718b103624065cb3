#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "../../tools/cli.hpp"
#include "bellkit/io.hpp"

using namespace bellkit;
namespace fs = std::filesystem;
using io::Json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("bellkit-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const Json& cfg, const std::string& name = "config.json") {
  const auto p = dir / name;
  std::ofstream(p) << cfg.dump(2);
  return p;
}

int run(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

int run_cfg(const std::string& sub, const fs::path& cfg, const fs::path& out) {
  return cli::run({sub, "--config", cfg.string(), "--out", out.string()});
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("quantify writes reports and a manifest") {
  TempDir d;
  const auto cfg = write_config(d.path, Json{{"quantify", {{"entries", Json::array({Json{{"s", 2.5}}, Json{{"s", 3.5}}})}}}});
  CHECK(run_cfg("quantify", cfg, d.path / "out") == 1);
  const auto q = read_json(d.path / "out" / "quantify.json");
  REQUIRE(q["reports"].size() == 2);
  CHECK(q["reports"][0]["eof_lb"].get<double>() > 0);
  CHECK(q["reports"][1]["error"]["code"] == "quantum_bound_exceeded");
  const auto m = read_json(d.path / "out" / "manifest.json");
  CHECK(m["subcommand"] == "quantify");
  CHECK(m["status"] == "error");
  CHECK(m.contains("version"));
  CHECK(m["config"]["quantify"].contains("entries"));
}

TEST_CASE("unknown keys are configuration errors") {
  TempDir d;
  auto cfg = write_config(d.path, Json{{"quantify", {{"entries", Json::array()}, {"bogus", 1}}}});
  CHECK(run_cfg("quantify", cfg, d.path / "a") == 2);
  cfg = write_config(d.path, Json{{"extra", 1}});
  CHECK(run_cfg("quantify", cfg, d.path / "b") == 2);
  cfg = write_config(d.path, Json{{"subcommand", "tomo"}});
  CHECK(run_cfg("quantify", cfg, d.path / "c") == 2);
  CHECK(run({"nonsense"}) == 2);
  CHECK(run({"quantify", "--config", (d.path / "missing.json").string()}) == 2);
}

TEST_CASE("simulate is reproducible from its manifest") {
  TempDir d;
  const Json cfg{{"seed", 17},
                 {"simulate",
                  {{"state", {{"bell_diagonal", {0.1, 0.1, 0.75, 0.05}}}},
                   {"detection", {{"eta_a", 0.9}, {"eta_b", 0.85}}},
                   {"trials", 20000},
                   {"write_log", true}}}};
  CHECK(run_cfg("simulate", write_config(d.path, cfg), d.path / "a") == 0);
  CHECK(fs::exists(d.path / "a" / "counts.csv"));
  CHECK(fs::exists(d.path / "a" / "trial_log.csv"));
  const auto summary = read_json(d.path / "a" / "simulate.json");
  CHECK(summary["trials"] == 20000);

  CHECK(run_cfg("simulate", d.path / "a" / "manifest.json", d.path / "b") == 0);
  CHECK(slurp(d.path / "a" / "counts.csv") == slurp(d.path / "b" / "counts.csv"));
  CHECK(slurp(d.path / "a" / "trial_log.csv") == slurp(d.path / "b" / "trial_log.csv"));

  CHECK(cli::run({"simulate", "--config", write_config(d.path, cfg).string(), "--seed", "18", "--out",
                  (d.path / "c").string()}) == 0);
  CHECK(slurp(d.path / "a" / "counts.csv") != slurp(d.path / "c" / "counts.csv"));
  CHECK(read_json(d.path / "c" / "manifest.json")["seed"] == 18);
}

TEST_CASE("simulated counts feed quantify and pbr") {
  TempDir d;
  const Json sim{{"simulate",
                  {{"state", {{"bell_diagonal", {0.05, 0.05, 0.85, 0.05}}}},
                   {"trials", 30000},
                   {"write_log", true}}}};
  REQUIRE(run_cfg("simulate", write_config(d.path, sim, "sim.json"), d.path / "sim") == 0);

  const Json q{{"quantify",
                {{"count_tables", Json::array({Json{{"path", (d.path / "sim" / "counts.csv").string()}}})}}}};
  CHECK(run_cfg("quantify", write_config(d.path, q, "q.json"), d.path / "q") == 0);
  const auto rep = read_json(d.path / "q" / "quantify.json")["reports"][0];
  CHECK(rep["s"].get<double>() > 2.0);
  CHECK(rep.contains("s_stderr"));

  const Json p{{"pbr", {{"trial_log", (d.path / "sim" / "trial_log.csv").string()}, {"block", 5000}}}};
  CHECK(run_cfg("pbr", write_config(d.path, p, "p.json"), d.path / "p") == 0);
  const auto r = read_json(d.path / "p" / "pbr.json");
  for (const char* k : {"n_trials", "log10_p", "blocks", "final_kl_ns", "final_kl_lhv"}) CHECK(r.contains(k));
  CHECK(r["n_trials"] == 30000);
  CHECK(r["log10_p"].get<double>() < 0);
}

TEST_CASE("interplay trajectories and calibration") {
  TempDir d;
  {
    std::ofstream obs(d.path / "obs.csv");
    obs << "theta_rad,s_alpha\n";
    for (int i = 0; i < 10; ++i) {
      const double t = 0.1 + 0.05 * i;
      obs << t << ',' << 0.97 * max_s_fixed_concurrence(0.4, t, AlphaParameter::from(1.5)).s_alpha << '\n';
    }
  }
  const Json cfg{{"interplay",
                  {{"measure", "concurrence"},
                   {"level", 0.4},
                   {"alphas", {1.0, 1.5}},
                   {"theta_points", 40},
                   {"calibration", {{"observed", (d.path / "obs.csv").string()}, {"alpha", 1.5}}}}}};
  CHECK(run_cfg("interplay", write_config(d.path, cfg), d.path / "o") == 0);
  CHECK(fs::exists(d.path / "o" / "trajectory_alpha_1.csv"));
  CHECK(fs::exists(d.path / "o" / "trajectory_alpha_1.5.csv"));
  const auto summary = read_json(d.path / "o" / "interplay.json");
  CHECK(summary["trajectories"][1]["interior_maximum"] == true);
  const auto cal = read_json(d.path / "o" / "calibration.json");
  CHECK(std::abs(cal["visibility"].get<double>() - 0.97) < 0.01);
}

TEST_CASE("tomography from simulated counts") {
  TempDir d;
  const Json cfg{{"tomo",
                  {{"simulate", {{"state", {{"bell", "psi_plus"}}}, {"per_setting", 5000}}},
                   {"target", {{"bell", "psi_plus"}}}}}};
  CHECK(run_cfg("tomo", write_config(d.path, cfg), d.path / "o") == 0);
  const auto r = read_json(d.path / "o" / "rho.json");
  CHECK(r["fidelity"].get<double>() > 0.99);
  CHECK(r["converged"] == true);
  CHECK(fs::exists(d.path / "o" / "counts.csv"));
}

TEST_CASE("spacetime audit defaults to the published geometry") {
  TempDir d;
  CHECK(run({"spacetime", "--out", d.path.string()}) == 0);
  const auto m = read_json(d.path / "spacetime.json")["margins"];
  CHECK(std::abs(m["locality1_ns"].get<double>() - 27.4) < 0.1);
  CHECK(std::abs(m["locality2_ns"].get<double>() - 39.1) < 0.1);

  auto c = io::to_json(SpacetimeConfig::reference());
  c["ab_m"] = 100;
  CHECK(run_cfg("spacetime", write_config(d.path, Json{{"spacetime", c}}), d.path / "short") == 0);
  CHECK(read_json(d.path / "short" / "spacetime.json")["margins"]["locality1_ns"].get<double>() < 0);
}

TEST_CASE("executable prints the locality margins") {
  TempDir d;
  const auto out = d.path / "stdout.txt";
  const std::string cmd = std::string("\"") + BELLKIT_CLI_PATH + "\" spacetime --out \"" + d.path.string() +
                          "\" > \"" + out.string() + "\"";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(out).find("locality margins: 27.4 ns, 39.1 ns") != std::string::npos);

  const std::string version = std::string("\"") + BELLKIT_CLI_PATH + "\" --version > \"" + out.string() + "\"";
  CHECK(std::system(version.c_str()) == 0);
  CHECK(slurp(out).rfind("0.1.0", 0) == 0);
}

}  // TEST_SUITE
