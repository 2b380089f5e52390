#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "plheat/experiments.hpp"

namespace py = pybind11;
using namespace plheat;

namespace {

ExperimentKind kind_arg(const std::string& name) {
  const auto k = parse_experiment(name);
  if (!k) throw ConfigError("unknown experiment '" + name + "'");
  return *k;
}

std::string csv_text(const std::vector<ErrorReport>& reports) {
  std::ostringstream s;
  write_csv(s, reports);
  return s.str();
}

}  // namespace

PYBIND11_MODULE(_plheat, m) {
  m.doc() = "Parabolic p-Laplace solver and convergence studies";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "s_flux", [](Vec2 xi, double p, double kappa) { return s_flux(xi, {p, kappa}); }, py::arg("xi"), py::arg("p"),
      py::arg("kappa") = 0.0);
  m.def(
      "v_transform", [](Vec2 xi, double p, double kappa) { return v_transform(xi, {p, kappa}); }, py::arg("xi"),
      py::arg("p"), py::arg("kappa") = 0.0);

  m.def(
      "mesh_size",
      [](const std::string& domain, int level) {
        const auto d = parse_domain(domain);
        if (!d) throw ConfigError("unknown domain '" + domain + "'");
        const MeshPtr mesh = make_mesh(*d, level);
        const MeshQuality q = mesh_quality(*mesh);
        return py::dict(py::arg("vertices") = mesh->num_vertices(), py::arg("triangles") = mesh->num_triangles(),
                        py::arg("h_max") = q.h_max, py::arg("gamma") = q.gamma);
      },
      py::arg("domain"), py::arg("level"));

  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("ndof", &ErrorReport::ndof)
      .def_readonly("M", &ErrorReport::M)
      .def_readonly("h", &ErrorReport::h)
      .def_readonly("tau", &ErrorReport::tau)
      .def_readonly("sq_linfty_l2", &ErrorReport::sq_linfty_l2)
      .def_readonly("sq_l2_v", &ErrorReport::sq_l2_v)
      .def_readonly("sq_l2_v_avg", &ErrorReport::sq_l2_v_avg)
      .def_readonly("sq_lp_s", &ErrorReport::sq_lp_s)
      .def_readonly("lp_s_sum", &ErrorReport::lp_s_sum)
      .def("field", &field_value, py::arg("name"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_property_readonly("experiment", [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); })
      .def_readwrite("p", &ExperimentConfig::p)
      .def_readwrite("kappa", &ExperimentConfig::kappa)
      .def_readwrite("beta", &ExperimentConfig::beta)
      .def_readwrite("degree", &ExperimentConfig::degree)
      .def_readwrite("levels", &ExperimentConfig::levels)
      .def_readwrite("steps", &ExperimentConfig::steps)
      .def_readwrite("reference_level", &ExperimentConfig::ref_level)
      .def_readwrite("reference_steps", &ExperimentConfig::ref_steps)
      .def_readwrite("t0", &ExperimentConfig::t0)
      .def_readwrite("t_end", &ExperimentConfig::t_end)
      .def_readwrite("output", &ExperimentConfig::output)
      .def("validate", &ExperimentConfig::validate);

  m.def("default_config", [](const std::string& name) { return default_config(kind_arg(name)); }, py::arg("experiment"));
  m.def(
      "parse_config",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
      },
      py::arg("text"));

  m.def(
      "run_study",
      [](const ExperimentConfig& c) {
        StudyResult r;
        {
          py::gil_scoped_release release;
          r = run_study(c);
          write_outputs(c, r);
        }
        return r.reports;
      },
      py::arg("config"), "Runs the schedule; writes CSV and manifest when config.output is set.");
  m.def("to_csv", &csv_text, py::arg("reports"));
  m.def(
      "read_csv",
      [](const std::string& text) {
        std::istringstream in(text);
        return read_csv(in);
      },
      py::arg("text"));
  m.def(
      "empirical_order",
      [](const std::vector<ErrorReport>& reports, const std::string& field, const std::string& against) {
        Abscissa a = Abscissa::ndof;
        if (against == "h") a = Abscissa::h;
        else if (against == "tau") a = Abscissa::tau;
        else if (against != "ndof") throw ConfigError("against must be ndof, h or tau");
        const OrderReport r = empirical_order(reports, field, a);
        return py::make_tuple(r.slopes, r.ls_slope);
      },
      py::arg("reports"), py::arg("field"), py::arg("against") = "ndof");
  m.attr("CSV_HEADER") = std::string(kCsvHeader);
}
