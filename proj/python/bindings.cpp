#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bellkit/di_bounds.hpp"
#include "bellkit/error.hpp"
#include "bellkit/interplay.hpp"
#include "bellkit/pbr.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/tomo.hpp"
#include "bellkit/trial_sim.hpp"
#include "bellkit/version.hpp"

namespace py = pybind11;
using namespace bellkit;

namespace {

DensityMatrix to_rho(const Matrix4c& m) { return DensityMatrix::from_matrix(m); }

BellSettings settings_from(const std::array<double, 4>& bloch) {
  return {MeasurementSetting::from_bloch_angle(bloch[0]), MeasurementSetting::from_bloch_angle(bloch[1]),
          MeasurementSetting::from_bloch_angle(bloch[2]), MeasurementSetting::from_bloch_angle(bloch[3])};
}

py::array_t<std::uint64_t> counts_array(const CountTable& c) {
  const int k = c.outcomes();
  py::array_t<std::uint64_t> out({2, 2, k, k});
  auto v = out.mutable_unchecked<4>();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) v(x, y, a, b) = c.at(a, b, x, y);
  return out;
}

CountTable counts_from(const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 4 || arr.shape(0) != 2 || arr.shape(1) != 2 || arr.shape(2) != arr.shape(3) ||
      (arr.shape(2) != 2 && arr.shape(2) != 3))
    throw Error(ErrorCode::invalid_input, "counts must have shape (2, 2, k, k) with k in {2, 3}");
  const int k = static_cast<int>(arr.shape(2));
  CountTable c(k == 2 ? Alphabet::binary : Alphabet::ternary);
  auto v = arr.unchecked<4>();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) c.at(a, b, x, y) = v(x, y, a, b);
  return c;
}

}  // namespace

PYBIND11_MODULE(_bellkit, m) {
  m.doc() = "Bell-test analysis toolkit";
  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("version", [] { return std::string(version()); });

  // States and measures.
  m.def("bell_diagonal", [](const std::array<double, 4>& w) {
    return bell_diagonal(BellDiagonalWeights::from(w)).matrix();
  });
  m.def("concurrence", [](const Matrix4c& rho) { return concurrence(to_rho(rho)); });
  m.def("eof", [](const Matrix4c& rho) { return eof(to_rho(rho)); });
  m.def("negativity", [](const Matrix4c& rho) { return negativity(to_rho(rho)); });
  m.def("fidelity", [](const Matrix4c& a, const Matrix4c& b) { return fidelity(to_rho(a), to_rho(b)); });
  m.def("one_way_distillable", [](const std::array<double, 4>& w) {
    return one_way_distillable(BellDiagonalWeights::normalized(w));
  });

  // Bell expressions and bounds.
  m.def("s_alpha_expected",
        [](const Matrix4c& rho, const std::array<double, 4>& bloch, double alpha) {
          return s_alpha_expected(to_rho(rho), settings_from(bloch), AlphaParameter::from(alpha));
        },
        py::arg("rho"), py::arg("bloch"), py::arg("alpha") = 1.0);
  m.def("s_alpha_from_counts",
        [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& c, double alpha) {
          return s_alpha_from_counts(counts_from(c).to_binary(), AlphaParameter::from(alpha));
        },
        py::arg("counts"), py::arg("alpha") = 1.0);
  m.def("eof_lower_bound", [](double s, double a) { return eof_lower_bound(s, AlphaParameter::from(a)); },
        py::arg("s"), py::arg("alpha") = 1.0);
  m.def("negativity_lower_bound",
        [](double s, double a) { return negativity_lower_bound(s, AlphaParameter::from(a)); }, py::arg("s"),
        py::arg("alpha") = 1.0);
  m.def("incompatibility_lower_bound", &incompatibility_lower_bound, py::arg("s"));
  m.def("multi_alpha_incompatibility_bound",
        [](double s, double a, const std::string& side) {
          if (side != "A" && side != "B") throw Error(ErrorCode::invalid_input, "side must be 'A' or 'B'");
          return multi_alpha_incompatibility_bound(s, AlphaParameter::from(a), side == "A" ? Side::A : Side::B).value;
        },
        py::arg("s"), py::arg("alpha"), py::arg("side") = "A");

  // Interplay.
  m.def("max_s_fixed_concurrence",
        [](double c, double theta, double a) {
          const auto p = max_s_fixed_concurrence(c, theta, AlphaParameter::from(a));
          return py::make_tuple(p.s_alpha, p.weights.values());
        },
        py::arg("concurrence"), py::arg("theta"), py::arg("alpha") = 1.0);
  m.def("max_s_fixed_ode",
        [](double e, double theta, double a) {
          const auto p = max_s_fixed_ode(e, theta, AlphaParameter::from(a));
          return py::make_tuple(p.s_alpha, p.weights.values());
        },
        py::arg("ode"), py::arg("theta"), py::arg("alpha") = 1.0);

  // Simulation.
  m.def("pulse_counts", [](const std::array<double, 4>& w, int n) {
    return pulse_schedule(BellDiagonalWeights::from(w), n).counts;
  });
  m.def("simulate_trials",
        [](const Matrix4c& rho, const std::array<double, 4>& bloch, std::uint64_t trials, std::uint64_t seed,
           double eta_a, double eta_b, bool post_selection) {
          DetectionModel det{eta_a, eta_b, post_selection ? DetectionMode::post_selection : DetectionMode::di_binary,
                             0.0};
          SimulationResult r;
          {
            py::gil_scoped_release release;
            r = simulate_trials(to_rho(rho), settings_from(bloch), det, {0.25, 0.25, 0.25, 0.25}, trials, seed);
          }
          py::dict d;
          d["counts"] = counts_array(r.counts);
          d["trials"] = r.trials;
          d["discarded"] = r.discarded;
          return d;
        },
        py::arg("rho"), py::arg("bloch"), py::arg("trials"), py::arg("seed") = 0, py::arg("eta_a") = 1.0,
        py::arg("eta_b") = 1.0, py::arg("post_selection") = false);
  m.def("spacetime_check", [](const std::map<std::string, double>& cfg) {
    SpacetimeConfig c = SpacetimeConfig::reference();
    const std::map<std::string, double*> fields{
        {"ab_m", &c.ab_m},       {"sa_m", &c.sa_m},         {"sb_m", &c.sb_m},         {"lsa_m", &c.lsa_m},
        {"lsb_m", &c.lsb_m},     {"t_e", &c.t_e},           {"t_qrng1", &c.t_qrng1},   {"t_qrng2", &c.t_qrng2},
        {"t_delay1", &c.t_delay1}, {"t_delay2", &c.t_delay2}, {"t_pc1", &c.t_pc1},     {"t_pc2", &c.t_pc2},
        {"t_m1", &c.t_m1},       {"t_m2", &c.t_m2}};
    for (const auto& [k, v] : cfg) {
      const auto it = fields.find(k);
      if (it == fields.end()) throw Error(ErrorCode::invalid_input, "unknown spacetime key " + k);
      *it->second = v;
    }
    const auto mg = spacetime_check(c);
    py::dict d;
    d["locality1_ns"] = mg.locality1;
    d["locality2_ns"] = mg.locality2;
    d["independence1_ns"] = mg.independence1;
    d["independence2_ns"] = mg.independence2;
    d["pass"] = mg.pass();
    return d;
  }, py::arg("overrides") = std::map<std::string, double>{});

  // Hypothesis test.
  m.def("pbr_p_value",
        [](const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& log, std::uint64_t block) {
          if (log.ndim() != 2 || log.shape(1) != 5)
            throw Error(ErrorCode::invalid_input, "log must have shape (n, 5): index, x, y, a, b");
          auto v = log.unchecked<2>();
          std::vector<TrialRecord> recs(static_cast<std::size_t>(log.shape(0)));
          for (py::ssize_t i = 0; i < log.shape(0); ++i) {
            for (int j = 0; j < 5; ++j)
              if (v(i, j) < 0 || (j > 0 && v(i, j) > 2))
                throw Error(ErrorCode::invalid_input, "log entries out of range");
            recs[i] = {static_cast<std::uint64_t>(v(i, 0)), static_cast<std::uint8_t>(v(i, 1)),
                       static_cast<std::uint8_t>(v(i, 2)), static_cast<std::uint8_t>(v(i, 3)),
                       static_cast<std::uint8_t>(v(i, 4))};
          }
          PbrOptions opt;
          opt.block = block;
          PbrResult r;
          {
            py::gil_scoped_release release;
            r = pbr_p_value(recs, opt);
          }
          py::dict d;
          d["n_trials"] = r.n_trials;
          d["log10_p"] = r.log10_p;
          d["blocks"] = r.blocks;
          d["final_kl_ns"] = r.final_kl_ns;
          d["final_kl_lhv"] = r.final_kl_lhv;
          return d;
        },
        py::arg("log"), py::arg("block") = 10000);

  // Tomography.
  m.def("tomo_probabilities", [](const Matrix4c& rho) { return tomo_probabilities(to_rho(rho)); });
  m.def("mle_fit",
        [](const TomoCounts& counts, std::uint64_t seed) {
          TomoOptions opt;
          opt.seed = seed;
          TomoFit f = [&] {
            py::gil_scoped_release release;
            return mle_fit(counts, 0.0, opt);
          }();
          return py::make_tuple(f.rho.matrix(), f.likelihood, f.converged);
        },
        py::arg("counts"), py::arg("seed") = 0);
}
