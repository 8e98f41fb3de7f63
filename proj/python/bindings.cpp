#include "ncmin/auditor.hpp"
#include "ncmin/config.hpp"
#include "ncmin/counterexample.hpp"
#include "ncmin/report.hpp"
#include "ncmin/run.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ncmin;

namespace
{

Norm norm_from_string(const std::string &name)
{
  if (name == "L1")
    return Norm::L1;
  if (name == "L2")
    return Norm::L2;
  if (name == "Linf")
    return Norm::Linf;
  if (name == "W11_semi")
    return Norm::W11_semi;
  if (name == "H1_semi")
    return Norm::H1_semi;
  throw py::value_error("unknown norm '" + name + "' (known: L1, L2, Linf, W11_semi, H1_semi)");
}

// Solve the configured problem; JSON text with nodes, values and the trace.
std::string solve_json(const std::string &config_text, bool audit)
{
  const RunConfig   cfg  = parse_config(config_text);
  const ProblemSpec spec = build_spec(cfg.problem);
  const SolveResult res = [&] {
    py::gil_scoped_release release;
    return solve_outer(spec);
  }();
  nlohmann::ordered_json j;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto &p : spec.grid().nodes())
    nodes.push_back({p[0], p[1]});
  j["nodes"]     = nodes;
  j["values"]    = res.u.values();
  j["energy"]    = eval_J(spec, res.u);
  j["converged"] = res.trace.all_converged();
  j["trace"]     = trace_json(res.trace);
  if (audit)
    {
      const auto reports = audit_run(res, spec, cfg.seed, cfg.audit.minimality_samples,
                                     cfg.audit.coercivity_fields);
      j["all_hard_pass"] = all_hard_pass(reports);
      j["estimates"]     = estimates_json(reports);
    }
  return j.dump();
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Minimizers of non-coercive integral functionals by two-level truncation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Grid, std::shared_ptr<Grid>>(m, "Grid")
    .def_property_readonly("dimension", &Grid::dimension)
    .def_property_readonly("num_nodes", &Grid::num_nodes)
    .def_property_readonly("num_elements", &Grid::num_elements)
    .def_property_readonly("num_interior", &Grid::num_interior)
    .def_property_readonly("measure", &Grid::measure)
    .def_property_readonly("mesh_size", &Grid::mesh_size)
    .def_property_readonly("nodes", [](const Grid &g) {
      std::vector<std::pair<double, double>> out;
      for (const auto &p : g.nodes())
        out.emplace_back(p[0], p[1]);
      return out;
    });

  // grids are shared as pointers to const; the cast is confined to the holder
  m.def("interval_grid", [](double a, double b, std::size_t cells) {
    return std::const_pointer_cast<Grid>(build_interval_grid(a, b, cells));
  }, py::arg("a"), py::arg("b"), py::arg("cells"));
  m.def("rect_grid", [](std::size_t nx, std::size_t ny, double lx, double ly) {
    return std::const_pointer_cast<Grid>(build_rect_grid(nx, ny, lx, ly));
  }, py::arg("x_cells"), py::arg("y_cells"), py::arg("lx") = 1.0, py::arg("ly") = 1.0);

  py::class_<DiscreteField>(m, "Field")
    .def_property_readonly("values", [](const DiscreteField &f) {
      return std::vector<double>(f.values().begin(), f.values().end());
    })
    .def("norm", [](const DiscreteField &f, const std::string &which) {
      return norm(f, norm_from_string(which));
    }, py::arg("which"))
    .def("truncate", [](const DiscreteField &f, double k) { return truncate(f, k); }, py::arg("k"))
    .def("tail", [](const DiscreteField &f, double k) { return tail(f, k); }, py::arg("k"));

  m.def("interpolate", [](const std::shared_ptr<Grid> &g, const py::function &fn) {
    return interpolate(g, [&](const Point &x) {
      return g->dimension() == 1 ? fn(x[0]).cast<double>() : fn(x[0], x[1]).cast<double>();
    });
  }, py::arg("grid"), py::arg("fn"));

  m.def("echo_config", [](const std::string &text) { return echo_config(parse_config(text)); },
        py::arg("text"));
  m.def("solve_json", [](const std::string &text) { return solve_json(text, false); },
        py::arg("config_text"));
  m.def("audit_json", [](const std::string &text) { return solve_json(text, true); },
        py::arg("config_text"));
  m.def("divergence_json", [](int N, double rho, double n_max) {
    return to_json(divergence_report(N, rho, n_max)).dump();
  }, py::arg("N") = 3, py::arg("rho") = 0.25, py::arg("n_max") = 12.0);
  m.def("certify_json", [](const std::string &id, std::size_t samples, std::uint64_t seed) {
    return to_json(certify(make_integrand(id), samples, seed)).dump();
  }, py::arg("integrand"), py::arg("samples") = 1000, py::arg("seed") = 0);
  m.def("run", [](const std::string &text, const std::string &subcommand, const std::string &out) {
    RunConfig cfg = parse_config(text);
    const auto s  = subcommand_from_string(subcommand);
    if (!s)
      throw py::value_error("unknown subcommand '" + subcommand + "'");
    cfg.subcommand = *s;
    cfg.output.dir = out;
    std::ostringstream log;
    ExitCode code;
    {
      py::gil_scoped_release release;
      code = run(cfg, log);
    }
    return py::make_tuple(static_cast<int>(code), log.str());
  }, py::arg("config_text"), py::arg("subcommand"), py::arg("out_dir"));
}
