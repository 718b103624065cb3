#include "doctest.h"

#include <random>
#include <sstream>

#include "bellkit/error.hpp"
#include "bellkit/io.hpp"
#include "support.hpp"

using namespace bellkit;

TEST_SUITE("io") {

TEST_CASE("outcome labels") {
  CHECK(outcome_label(Alphabet::binary, 0) == "1");
  CHECK(outcome_label(Alphabet::binary, 1) == "-1");
  CHECK(outcome_label(Alphabet::ternary, 2) == "u");
  CHECK(outcome_index(Alphabet::ternary, "0") == 0);
  CHECK_THROWS_AS(outcome_index(Alphabet::binary, "u"), Error);
}

TEST_CASE("count table round trip") {
  std::mt19937_64 g(81);
  for (auto alphabet : {Alphabet::binary, Alphabet::ternary}) {
    CountTable t(alphabet);
    const int k = t.outcomes();
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) t.at(a, b, x, y) = g() % 100000;
    std::stringstream ss;
    io::write_count_table(ss, t);
    CHECK(ss.str().rfind("a,b,x,y,count\n", 0) == 0);
    CHECK(io::read_count_table(ss) == t);
  }
}

TEST_CASE("count table parsing") {
  std::istringstream in("a,b,x,y,count\n1,1,0,0,5\n-1,1,1,0,2\n");
  const auto t = io::read_count_table(in);
  CHECK(t.alphabet() == Alphabet::binary);
  CHECK(t.at(0, 0, 0, 0) == 5);
  CHECK(t.at(1, 0, 1, 0) == 2);
  CHECK(t.total() == 7);

  std::istringstream tern("a,b,x,y,count\nu,0,0,1,3\n");
  CHECK(io::read_count_table(tern).at(2, 0, 0, 1) == 3);

  for (const char* bad : {"a,b,x,count\n", "a,b,x,y,count\n1,1,2,0,5\n", "a,b,x,y,count\n1,1,0,0,-5\n",
                          "a,b,x,y,count\n1,1,0,0,five\n", "a,b,x,y,count\n1,1,0,0\n",
                          "a,b,x,y,count\n1,1,0,0,1\n1,1,0,0,2\n"}) {
    std::istringstream is(bad);
    CHECK_THROWS_AS(io::read_count_table(is), Error);
  }
}

TEST_CASE("trial log round trip") {
  std::vector<TrialRecord> log;
  for (std::uint64_t i = 0; i < 50; ++i)
    log.push_back({i, static_cast<std::uint8_t>(i % 2), static_cast<std::uint8_t>(i / 2 % 2),
                   static_cast<std::uint8_t>(i % 3), static_cast<std::uint8_t>(i / 3 % 3)});
  std::stringstream ss;
  io::write_trial_log(ss, log, Alphabet::ternary);
  const auto back = io::read_trial_log(ss, Alphabet::ternary);
  REQUIRE(back.size() == log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(back[i].index == log[i].index);
    CHECK((back[i].a == log[i].a && back[i].b == log[i].b && back[i].x == log[i].x && back[i].y == log[i].y));
  }

  std::istringstream bin("0,0,1,1,-1\n1,1,0,-1,-1\n");
  const auto b = io::read_trial_log(bin, Alphabet::binary);
  REQUIRE(b.size() == 2);
  CHECK(b[0].a == 0);
  CHECK(b[0].b == 1);
  std::istringstream bad("0,0,1,u,1\n");
  CHECK_THROWS_AS(io::read_trial_log(bad, Alphabet::binary), Error);
}

TEST_CASE("tomography counts round trip") {
  TomoCounts c;
  for (int i = 0; i < kTomoProjectors; ++i) c[i] = i * 7;
  std::stringstream ss;
  io::write_tomo_counts(ss, c);
  CHECK(io::read_tomo_counts(ss) == c);

  std::istringstream missing("basis_a,basis_b,count\nH,H,3\n");
  CHECK_THROWS_AS(io::read_tomo_counts(missing), Error);
}

TEST_CASE("observed points") {
  std::istringstream in("theta_rad,s_alpha\n0.1,2.5\n0.2,2.6\n");
  const auto p = io::read_observed_points(in);
  REQUIRE(p.size() == 2);
  CHECK(p[1].first == 0.2);
  CHECK(p[1].second == 2.6);
}

TEST_CASE("trajectory csv") {
  const auto traj = trajectory(EntanglementMeasure::concurrence, 0.4, AlphaParameter::from(1.5), uniform_theta_grid(3));
  std::ostringstream os;
  io::write_trajectory(os, traj);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "theta_rad,incompat,s_alpha,l1,l2,l3,l4");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("doubles round trip through text") {
  std::mt19937_64 g(82);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(testing::uniform(g, -1, 1), static_cast<int>(g() % 200) - 100);
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("json reports") {
  PbrResult r;
  r.n_trials = 10;
  r.log10_p = -2;
  r.blocks = 1;
  const auto j = io::to_json(r);
  for (const char* k : {"n_trials", "log10_p", "blocks", "final_kl_ns", "final_kl_lhv"}) CHECK(j.contains(k));

  std::mt19937_64 g(83);
  const Matrix4c m = testing::random_mixed(g);
  CHECK((io::matrix_from_json(io::to_json(m)) - m).norm() == 0.0);
  CHECK_THROWS_AS(io::matrix_from_json(io::Json::parse("[[1,2]]")), Error);
}

TEST_CASE("spacetime config json") {
  const auto ref = SpacetimeConfig::reference();
  auto j = io::to_json(ref);
  const auto back = io::spacetime_from_json(j);
  CHECK(spacetime_check(back).locality1 == spacetime_check(ref).locality1);
  j["extra"] = 1;
  CHECK_THROWS_AS(io::spacetime_from_json(j), Error);
  j.erase("extra");
  j.erase("t_e");
  CHECK_THROWS_AS(io::spacetime_from_json(j), Error);
}

}  // TEST_SUITE
