#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "randns/evolution.hpp"
#include "randns/io.hpp"
#include "randns/montecarlo.hpp"
#include "randns/randomization.hpp"
#include "randns/runner.hpp"

namespace py = pybind11;
using namespace randns;

namespace {

// Coefficients as a (dim, M, ..., M) complex array in storage order.
py::array_t<cplx> coefficients(const VectorField& f) {
  std::vector<py::ssize_t> shape{f.components()};
  for (int d = 0; d < f.spec().dim; ++d) shape.push_back(f.spec().modes);
  py::array_t<cplx> out(shape);
  std::memcpy(out.mutable_data(), f.data().data(), f.data().size() * sizeof(cplx));
  return out;
}

VectorField from_coefficients(const TorusSpec& spec, py::array_t<cplx, py::array::c_style | py::array::forcecast> a) {
  VectorField f(spec);
  if (static_cast<std::size_t>(a.size()) != f.data().size())
    throw std::invalid_argument("coefficient array has " + std::to_string(a.size()) + " entries, expected " +
                                std::to_string(f.data().size()));
  std::memcpy(f.data().data(), a.data(), f.data().size() * sizeof(cplx));
  return f;
}

py::array_t<double> samples(const VectorField& f) {
  const PhysicalField p = to_physical(f);
  std::vector<py::ssize_t> shape{p.spec.dim};
  for (int d = 0; d < p.spec.dim; ++d) shape.push_back(p.spec.grid);
  py::array_t<double> out(shape);
  std::memcpy(out.mutable_data(), p.values.data(), p.values.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pseudo-spectral random-data Navier-Stokes on the periodic torus";
  m.attr("__version__") = RANDNS_VERSION;

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<NotSolenoidal>(m, "NotSolenoidal", PyExc_ValueError);
  py::register_exception<SelectorMismatch>(m, "SelectorMismatch", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<TorusSpec>(m, "TorusSpec")
      .def(py::init(&TorusSpec::make), py::arg("dim"), py::arg("modes"), py::arg("grid") = 0)
      .def_readonly("dim", &TorusSpec::dim)
      .def_readonly("modes", &TorusSpec::modes)
      .def_readonly("grid", &TorusSpec::grid)
      .def("mode_count", &TorusSpec::mode_count)
      .def("grid_count", &TorusSpec::grid_count)
      .def(py::self == py::self)
      .def("__repr__", [](const TorusSpec& s) {
        return "TorusSpec(dim=" + std::to_string(s.dim) + ", modes=" + std::to_string(s.modes) +
               ", grid=" + std::to_string(s.grid) + ")";
      });

  py::class_<VectorField>(m, "VectorField")
      .def(py::init<TorusSpec>(), py::arg("spec"))
      .def(py::init(&from_coefficients), py::arg("spec"), py::arg("coefficients"))
      .def_property_readonly("spec", &VectorField::spec)
      .def_property_readonly("coefficients", &coefficients)
      .def("samples", &samples, "Grid values, shape (dim, G, ..., G)")
      .def("__getitem__", [](const VectorField& f, std::pair<int, WaveVector> ak) { return f.at(ak.first, ak.second); })
      .def("__setitem__", [](VectorField& f, std::pair<int, WaveVector> ak, cplx v) { f.at(ak.first, ak.second) = v; })
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(double() * py::self)
      .def(py::self == py::self);

  m.def("leray_project", &leray_project);
  m.def("heat_propagate", &heat_propagate, py::arg("f"), py::arg("t"));
  m.def("sobolev_norm", &sobolev_norm, py::arg("f"), py::arg("s"));
  m.def("lebesgue_norm", py::overload_cast<const VectorField&, double>(&lebesgue_norm), py::arg("f"),
        py::arg("q"));
  m.def("divergence_defect", &divergence_defect);
  m.def("hermitian_defect", &hermitian_defect);
  m.def("energy", &energy);
  m.def("relative_l2_distance", &relative_l2_distance);
  m.def("nonlinear_flux", [](const VectorField& u) { return nonlinear_flux(u); });

  m.def("canonical_datum", &canonical_datum, py::arg("spec"), py::arg("s"), py::arg("amplitude") = 1.0,
        py::arg("epsilon") = 0.01);
  m.def("shear_flow", &shear_flow, py::arg("spec"), py::arg("amplitude") = 1.0);
  m.def("taylor_green", &taylor_green, py::arg("spec"), py::arg("amplitude") = 1.0);
  m.def("smooth_datum", &smooth_datum, py::arg("spec"), py::arg("seed"), py::arg("kmax"),
        py::arg("amplitude") = 1.0);
  m.def(
      "randomize",
      [](const VectorField& f, std::uint64_t seed, std::uint64_t index) { return randomize(f, {seed, index}); },
      py::arg("f"), py::arg("seed"), py::arg("index"));
  m.def(
      "gaussian",
      [](std::uint64_t seed, std::uint64_t index, std::uint64_t n) { return RandomizationDraw{seed, index}.gaussian(n); },
      py::arg("seed"), py::arg("index"), py::arg("n"));

  py::enum_<Regime>(m, "Regime").value("Moderate", Regime::Moderate).value("Rough", Regime::Rough);
  py::class_<ParameterSet>(m, "ParameterSet")
      .def_readonly("dim", &ParameterSet::dim)
      .def_readonly("s", &ParameterSet::s)
      .def_readonly("m", &ParameterSet::m)
      .def_readonly("delta", &ParameterSet::delta)
      .def_readonly("rho", &ParameterSet::rho)
      .def_readonly("regime", &ParameterSet::regime);
  m.def("admissible_parameters", &admissible_parameters, py::arg("dim"), py::arg("s"),
        py::arg("m") = std::nullopt);

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init(&TimeGrid::make), py::arg("T"), py::arg("steps"))
      .def_readonly("T", &TimeGrid::T)
      .def_readonly("steps", &TimeGrid::steps)
      .def("node", &TimeGrid::node);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("grid", &Trajectory::grid)
      .def("__len__", [](const Trajectory& t) { return t.states.size(); })
      .def("__getitem__", [](const Trajectory& t, int j) {
        if (j < 0) j += static_cast<int>(t.states.size());
        if (j < 0 || j >= static_cast<int>(t.states.size())) throw py::index_error();
        return t.states[j];
      });
  m.def("heat_trajectory", &heat_trajectory);
  m.def("event_norm", &event_norm, py::arg("u_lin"), py::arg("params"));
  m.def("solution_norm", &solution_norm, py::arg("u"), py::arg("params"));

  py::class_<PicardSettings>(m, "PicardSettings")
      .def(py::init<>())
      .def_readwrite("tol", &PicardSettings::tol)
      .def_readwrite("max_iter", &PicardSettings::max_iter)
      .def_readwrite("divergence_threshold", &PicardSettings::divergence_threshold);
  py::class_<PicardDiagnostics>(m, "PicardDiagnostics")
      .def_readonly("iterations", &PicardDiagnostics::iterations)
      .def_readonly("differences", &PicardDiagnostics::differences)
      .def_readonly("ratios", &PicardDiagnostics::ratios)
      .def_readonly("converged", &PicardDiagnostics::converged)
      .def_readonly("diverged", &PicardDiagnostics::diverged)
      .def("geometric", &PicardDiagnostics::geometric);
  py::class_<SolveOutcome>(m, "SolveOutcome")
      .def_readonly("v", &SolveOutcome::v)
      .def_readonly("u", &SolveOutcome::u)
      .def_readonly("diagnostics", &SolveOutcome::diagnostics)
      .def_readonly("event_value", &SolveOutcome::event_value)
      .def_readonly("event_member", &SolveOutcome::event_member);
  m.def("picard_solve", &picard_solve, py::arg("f"), py::arg("grid"), py::arg("params"), py::arg("lam"),
        py::arg("settings") = PicardSettings{}, py::call_guard<py::gil_scoped_release>());
  m.def("residual", &residual);
  m.def("reference_timestepper", &reference_timestepper, py::arg("u0"), py::arg("grid"),
        py::arg("substeps") = 1, py::call_guard<py::gil_scoped_release>());

  py::class_<Interval>(m, "Interval").def_readonly("lower", &Interval::lower).def_readonly("upper", &Interval::upper);
  m.def("wilson_interval", &wilson_interval, py::arg("k"), py::arg("n"), py::arg("z") = kZ95TwoSided);
  m.def("khinchin_check", [](std::vector<double> c, double r, std::size_t S, std::uint64_t seed) {
    return khinchin_check(c, r, S, seed);
  }, py::arg("c"), py::arg("r"), py::arg("S"), py::arg("seed") = 0);

  py::enum_<Selector>(m, "Selector").value("E1", Selector::E1).value("E2", Selector::E2).value("E3", Selector::E3);
  m.def("selector_norm", &selector_norm, py::arg("f"), py::arg("grid"), py::arg("selector"), py::arg("params"));
  m.def("selector_exponent", &selector_exponent);

  py::class_<TailPoint>(m, "TailPoint")
      .def_readonly("lam", &TailPoint::lambda)
      .def_readonly("exceedances", &TailPoint::exceedances)
      .def_readonly("p_hat", &TailPoint::p_hat)
      .def_readonly("ci", &TailPoint::ci);
  py::class_<TailFit>(m, "TailFit")
      .def_readonly("c1", &TailFit::c1)
      .def_readonly("c2", &TailFit::c2)
      .def_readonly("r_squared", &TailFit::r_squared)
      .def_readonly("flagged", &TailFit::flagged);
  py::class_<TailEstimate>(m, "TailEstimate")
      .def_readonly("norms", &TailEstimate::norms)
      .def_readonly("points", &TailEstimate::points)
      .def_readonly("fit", &TailEstimate::fit);
  m.def("tail_probability", &tail_probability, py::arg("f"), py::arg("params"), py::arg("selector"),
        py::arg("lambdas"), py::arg("grid"), py::arg("S"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ScalingFit>(m, "ScalingFit")
      .def_readonly("slope", &ScalingFit::slope)
      .def_readonly("slope_se", &ScalingFit::slope_se)
      .def_readonly("theta", &ScalingFit::theta)
      .def("contract_met", &ScalingFit::contract_met);
  m.def("scaling_in_T", &scaling_in_T, py::arg("f"), py::arg("params"), py::arg("selector"), py::arg("r"),
        py::arg("Ts"), py::arg("steps"), py::arg("S"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  m.def("save_field", [](const std::filesystem::path& p, const VectorField& f, double s) { save_field(p, f, s); },
        py::arg("path"), py::arg("field"), py::arg("s"));
  m.def("load_field", [](const std::filesystem::path& p) {
    auto snap = load_field(p);
    return py::make_tuple(snap.field, snap.s);
  });

  m.def(
      "run_manifest",
      [](const std::string& manifest_json) {
        const auto r = run(manifest_from_json(nlohmann::json::parse(manifest_json)));
        return py::make_tuple(r.exit_code, r.contract_met, r.record_path);
      },
      py::arg("manifest_json"), "Run a JSON manifest; returns (exit_code, contract_met, record_path).");
}
