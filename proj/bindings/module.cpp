#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "neklab/cli/cli.hpp"
#include "neklab/dynamics/dynamics.hpp"
#include "neklab/geography/geography.hpp"
#include "neklab/steepness/steepness.hpp"

namespace py = pybind11;
using namespace neklab;

namespace {

// Results cross the boundary as JSON text; the Python package decodes them.
std::string run(const std::string& subcommand, const std::string& config, std::optional<std::uint64_t> seed,
                std::optional<std::size_t> threads, std::optional<std::string> output) {
  auto cfg = cli::parse_config(config, subcommand);
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (output) cfg.output = *output;
  cli::RunResult r;
  {
    py::gil_scoped_release release;
    r = cli::execute(cfg);
    if (output) cli::write_artifacts(cfg, r, 0.0);
  }
  core::json files = core::json::object();
  for (const auto& [name, content] : r.files) files[name] = content;
  return core::json{{"exit_code", r.exit_code}, {"message", r.message}, {"files", files}}.dump();
}

std::string estimate(const std::string& name, std::uint64_t seed, const std::vector<std::vector<double>>& points) {
  steepness::EstimateOptions opt;
  opt.seed = seed;
  for (const auto& p : points) opt.points.emplace_back(Eigen::Map<const steepness::Vec>(p.data(), p.size()));
  const auto map = steepness::benchmark(name);
  py::gil_scoped_release release;
  return steepness::estimate_indices(map, opt).to_json().dump();
}

py::dict integrate(const std::string& system, double eps, const std::vector<double>& I0,
                   const std::vector<double>& theta0, double dt, double t_end, std::size_t stride,
                   const std::string& scheme) {
  dynamics::IntegratorSpec spec;
  spec.scheme = dynamics::scheme_from_name(scheme);
  spec.dt = dt;
  spec.t_end = t_end;
  spec.stride = stride;
  const auto sys = dynamics::benchmark_system(system, eps);
  dynamics::Trajectory tr;
  {
    py::gil_scoped_release release;
    tr = dynamics::integrate(sys, dynamics::State{I0, theta0}, spec);
  }
  py::dict d;
  d["t"] = tr.t;
  d["I"] = tr.I;
  d["theta"] = tr.theta;
  d["H"] = tr.H;
  d["scheme"] = dynamics::scheme_name(tr.scheme);
  d["energy_error"] = tr.energy_error();
  return d;
}

}  // namespace

PYBIND11_MODULE(_neklab, m) {
  m.attr("__version__") = cli::kVersion;

  // Later registrations are tried first, so the base class goes first.
  const auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<cli::ConfigError>(m, "ConfigError", base.ptr());

  m.def("_run", &run, py::arg("subcommand"), py::arg("config"), py::arg("seed") = py::none(),
        py::arg("threads") = py::none(), py::arg("output") = py::none());
  m.def("subcommands", &cli::subcommands);
  m.def("sha256_hex", &cli::sha256_hex);

  m.def("_geography_params", [](std::size_t n, const std::vector<double>& alpha, double ell) {
    return geography::geography_params(n, alpha, ell).to_json().dump();
  });
  m.def("steepness_benchmarks", &steepness::benchmark_names);
  m.def("_estimate_indices", &estimate, py::arg("benchmark"), py::arg("seed") = 0,
        py::arg("points") = std::vector<std::vector<double>>{});

  m.def("system_benchmarks", &dynamics::benchmark_system_names);
  m.def("integrate", &integrate, py::arg("system"), py::arg("eps"), py::arg("I0"), py::arg("theta0"),
        py::arg("dt") = 0.05, py::arg("t_end") = 1.0, py::arg("stride") = 1, py::arg("scheme") = "automatic",
        "Integrates a benchmark system and returns the sampled trajectory.");
  m.def("_fit_exponents", [](const std::vector<double>& eps, const std::vector<double>& values, double ell) {
    return dynamics::fit_exponents(eps, values, ell).to_json().dump();
  });
}
