#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mgare/example_scenarios.hpp"
#include "mgare/kernel_decomposition.hpp"
#include "mgare/policy.hpp"
#include "mgare/scenario_io.hpp"

namespace py = pybind11;
using namespace mgare;

PYBIND11_MODULE(_mgare, m) {
  m.doc() = "Zero-sum LQ game value analysis over fading channels";

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("A", [](const Scenario& s) { return s.A; })
      .def_property_readonly("Q", [](const Scenario& s) { return s.Q; })
      .def_property_readonly("Rc", [](const Scenario& s) { return s.Rc; })
      .def_property_readonly("Ra", [](const Scenario& s) { return s.Ra; })
      .def_property_readonly("W", [](const Scenario& s) { return s.W; })
      .def_property_readonly("V", [](const Scenario& s) { return s.V; })
      .def_property_readonly("x0", [](const Scenario& s) { return s.x0; })
      .def_property_readonly("seed", [](const Scenario& s) { return s.seed; })
      .def_property_readonly("samples", [](const Scenario& s) { return s.sample_count; })
      .def("noise_covariance", &Scenario::noise_covariance)
      .def("with_attacker_weight", &Scenario::with_attacker_weight)
      .def("with_controller_activation",
           [](const Scenario& s, double delta) { return with_controller_activation(s, delta); })
      .def("to_json", [](const Scenario& s) { return scenario_to_json(s); });

  m.def("scenario_from_json", &scenario_from_json);
  m.def("load_scenario", &load_scenario);
  m.def("save_scenario", &save_scenario);
  m.def(
      "example_scenario",
      [](int kind, double delta, std::uint64_t seed, int samples) {
        ExampleParams p;
        p.delta = delta;
        p.seed = seed;
        p.samples = samples;
        return example_scenario(static_cast<ExampleKind>(kind), p);
      },
      py::arg("kind"), py::arg("delta") = 0.8, py::arg("seed") = 2024,
      py::arg("samples") = 1500);
  m.def("scalar_benchmark_scenario", &scalar_benchmark_scenario);
  m.def("reference_plant", &reference_plant);

  py::class_<SamplePool>(m, "SamplePool")
      .def_property_readonly("exact", &SamplePool::exact)
      .def_property_readonly("mean_attack_gain",
                             [](const SamplePool& p) { return p.mean_ba(); })
      .def_property_readonly("controller_atoms",
                             [](const SamplePool& p) { return p.bc.atoms; })
      .def_property_readonly("controller_weights",
                             [](const SamplePool& p) { return p.bc.weights; });
  m.def("build_pool", &build_pool, py::arg("scenario"), py::arg("seed"), py::arg("samples"),
        py::arg("force_exact") = false, py::arg("exact_cap") = 4096);
  m.def("sigma2_attack_gain", &sigma2_ba);

  py::class_<MgareSolution>(m, "MgareSolution")
      .def_property_readonly("P_star", [](const MgareSolution& s) { return s.P_star; })
      .def_property_readonly("verdict",
                             [](const MgareSolution& s) { return std::string(to_string(s.verdict)); })
      .def_property_readonly("iterations", [](const MgareSolution& s) { return s.iterations; })
      .def_property_readonly("residual", [](const MgareSolution& s) { return s.residual; })
      .def_property_readonly("exists", &MgareSolution::exists);
  m.def(
      "solve",
      [](const Scenario& sc, const SamplePool& pool, double tol, int kmax) {
        SolveOptions opt;
        opt.tol = tol;
        opt.k_max = kmax;
        return solve_mgare(sc, pool, opt);
      },
      py::arg("scenario"), py::arg("pool"), py::arg("tol") = 1e-10, py::arg("kmax") = 10000);
  m.def("game_value", &game_value);
  m.def("riccati_operator", &riccati_operator);
  m.def("in_concavity_region", &in_concavity_region);

  py::class_<Certificate>(m, "Certificate")
      .def_property_readonly("verdict",
                             [](const Certificate& c) { return std::string(to_string(c.status)); })
      .def_property_readonly("certified", &Certificate::certified)
      .def_property_readonly("rho_kron", [](const Certificate& c) { return c.rho_kron; })
      .def_property_readonly("xi", [](const Certificate& c) { return c.xi; })
      .def_property_readonly("T_star", [](const Certificate& c) { return c.T_star; })
      .def_property_readonly("P_tilde", [](const Certificate& c) { return c.P_tilde; })
      .def_property_readonly("Ra_bound", [](const Certificate& c) { return c.Ra_bound; })
      .def_property_readonly("Ra_chosen", [](const Certificate& c) { return c.Ra_chosen; })
      .def_property_readonly("lyapunov_residual",
                             [](const Certificate& c) { return c.lyapunov_residual; });
  m.def(
      "certify",
      [](const Scenario& sc, const SamplePool& pool) { return certify(sc, pool); },
      py::arg("scenario"), py::arg("pool"));
  m.def("uncontrolled_kron_radius", &uncontrolled_kron_radius);
  m.def("default_xi", &default_xi);

  m.def("kernel_split", [](const Matrix& t, const Matrix& bc, const Matrix& rc) {
    KernelSplit split = kernel_split(t, bc, rc);
    return py::make_tuple(split.t_ker, split.t_zero, split.rank);
  });

  m.def(
      "simulate_equilibrium",
      [](const Scenario& sc, const SamplePool& pool, const MgareSolution& sol, int horizon,
         int runs, std::uint64_t seed, int burn_in) {
        PolicySpec steady;
        steady.P = sol.P_star;
        SimulationConfig cfg;
        cfg.horizon = horizon;
        cfg.runs = runs;
        cfg.seed = seed;
        cfg.burn_in = burn_in;
        cfg.record_trace = false;
        SimulationResult res = simulate(sc, pool, steady, cfg);
        py::dict out;
        out["empirical"] = res.report.empirical;
        out["std_error"] = res.report.std_error;
        out["overflow_runs"] = res.report.overflow_runs;
        return out;
      },
      py::arg("scenario"), py::arg("pool"), py::arg("solution"), py::arg("horizon") = 5000,
      py::arg("runs") = 8, py::arg("seed") = 1, py::arg("burn_in") = 0);
  m.def("analytic_finite_horizon_value", &analytic_finite_horizon_value);
  m.def(
      "example1_trace_bounds",
      [](const Scenario& sc, const SamplePool& pool, const std::vector<double>& grid,
         double gamma2) {
        std::vector<py::tuple> out;
        for (const TraceBounds& b : example1_trace_bounds(sc, pool, grid, gamma2))
          out.push_back(py::make_tuple(b.delta, b.lower, b.upper));
        return out;
      },
      py::arg("scenario"), py::arg("pool"), py::arg("grid"), py::arg("gamma2") = 1.0);

  m.def("spectral_radius", &spectral_radius);
  m.def("kron", &kron);
}
