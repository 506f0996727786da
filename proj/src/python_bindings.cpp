#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shelab/config.hpp"
#include "shelab/experiments.hpp"
#include "shelab/observability.hpp"
#include "shelab/report.hpp"
#include "shelab/ucp.hpp"

namespace py = pybind11;
using namespace shelab;

namespace {

py::object json_loads(const std::string& s) { return py::module_::import("json").attr("loads")(s); }

// Report as a dict; tables come along as {name: {"header": [...], "rows": [[...], ...]}}.
py::object run(const std::string& name, const std::string& config_text, py::object seed) {
  ExperimentConfig cfg = parse_config(config_text);
  if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
  validate(cfg);
  RunReport rep;
  {
    py::gil_scoped_release release;
    rep = run_experiment(name, cfg);
  }
  py::dict out = json_loads(serialize(rep));
  py::dict tables;
  for (const auto& t : rep.tables) {
    py::dict d;
    d["header"] = t.header;
    d["rows"] = t.rows;
    tables[py::str(t.name)] = d;
  }
  out["tables"] = tables;
  return std::move(out);
}

py::dict simulate(py::array_t<double, py::array::c_style | py::array::forcecast> y0, double a, double b, double horizon,
                  int steps, double lo, double hi) {
  if (y0.ndim() != 1) throw py::value_error("y0 must be one-dimensional");
  const SpatialGrid grid = build_grid({{lo, hi}}, {static_cast<int>(y0.shape(0))});
  const TimeMesh mesh = make_mesh(horizon, steps);
  const ForwardCoefficients c{CoefficientField::constant(a), CoefficientField::constant(b)};
  const TrajectoryEnsemble y =
      solve_forward(std::span<const double>(y0.data(), static_cast<std::size_t>(y0.shape(0))), c,
                    NoiseSource(build_tree(mesh, std::max(16, steps))), grid);
  py::array_t<double> terminal({static_cast<py::ssize_t>(y.scenarios(steps)), static_cast<py::ssize_t>(grid.size())});
  auto t = terminal.mutable_unchecked<2>();
  for (std::size_t j = 0; j < y.scenarios(steps); ++j) {
    const auto v = y.at(steps, j);
    for (std::size_t i = 0; i < v.size(); ++i) t(static_cast<py::ssize_t>(j), static_cast<py::ssize_t>(i)) = v[i];
  }
  py::dict out;
  out["energy"] = energy_trace(y);
  out["terminal"] = terminal;
  std::vector<double> x(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) x[i] = grid.coord(i)[0];
  out["x"] = x;
  return out;
}

py::dict constants(double r, double m, double T, double a_sup, double b_norm, int n, double energy0, double energyT) {
  UcpInputs in{r, m, T, a_sup, b_norm, n, energy0, energyT};
  const UcpConstants c = compute_constants(in);
  py::dict d;
  d["J"] = c.J;
  d["Dcal"] = c.Dcal;
  d["delta"] = c.delta;
  d["beta"] = c.beta;
  d["lambda_tilde"] = c.lambda_tilde;
  d["theta"] = c.theta;
  d["backward_uniqueness_branch"] = c.backward_uniqueness_branch;
  return d;
}

py::dict sequence(const std::vector<std::pair<double, double>>& E, double T, double z, int depth) {
  const DensitySequence s = density_sequence(MeasurableTimeSet(E, T), z, depth);
  py::dict d;
  d["found"] = s.found;
  d["t0"] = s.t0;
  d["t"] = s.t;
  d["gaps"] = s.gaps;
  d["gap_lengths"] = s.gap_lengths;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic heat equation lab: forward solver, UCP/observability checks, control synthesis.";
  m.attr("__version__") = kToolVersion;

  // Translators run newest first, so the base class goes in before ConfigError.
  py::register_exception<LabError>(m, "LabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("run", &run, py::arg("name"), py::arg("config") = "", py::arg("seed") = py::none(),
        "Run simulate|frequency|ucp|observe|control|verify and return the report as a dict.");
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("config") = "");
  m.def("canonical_config", [](const std::string& text) { return canonical_form(parse_config(text)); },
        py::arg("config") = "");
  m.def("simulate", &simulate, py::arg("y0"), py::arg("a") = 0.0, py::arg("b") = 0.0, py::arg("horizon") = 0.1,
        py::arg("steps") = 8, py::arg("lo") = 0.0, py::arg("hi") = 1.0,
        "Constant-coefficient forward solve on the Bernoulli tree (depth = steps).");
  m.def("heat_kernel", [](double T, double lam, double x0, double x, double t) {
    return HeatKernelWeight(T, lam, {x0, 0.0}, 1).value({x, 0.0}, t);
  }, py::arg("horizon"), py::arg("lam"), py::arg("x0"), py::arg("x"), py::arg("t"));
  m.def("ucp_constants", &constants, py::arg("r"), py::arg("m"), py::arg("T"), py::arg("a_sup"), py::arg("b_norm"),
        py::arg("n") = 1, py::arg("energy0") = 1.0, py::arg("energyT") = 1.0);
  m.def("density_sequence", &sequence, py::arg("E"), py::arg("T"), py::arg("z") = 2.0, py::arg("depth") = 8);
}
