#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "neklab/cli/cli.hpp"

using namespace neklab;
using namespace neklab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("neklab-cli-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string field_of(const std::string& yaml, const std::string& sub = "stability") {
  try {
    parse_config(yaml, sub);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

ExperimentConfig small_stability() {
  auto cfg = parse_config(
      "schema_version: 1\n"
      "stability: {max_steps: 4000, initial_conditions: 2, itineraries: false}\n",
      "stability");
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK(field_of("n: 3\n") == "schema_version");
  CHECK(field_of("schema_version: 2\n") == "schema_version");
  CHECK(field_of("schema_version: 1\nbogus: 1\n") == "bogus");
  CHECK(field_of("schema_version: 1\nstability: {dtt: 0.1}\n") == "stability.dtt");
  CHECK(field_of("schema_version: 1\nstability: {dt: fast}\n") == "stability.dt");
  CHECK(field_of("schema_version: 1\nseed: -3\n") == "seed");
  CHECK(field_of("schema_version: 1\nsubcommand: smooth\n") == "subcommand");
  CHECK(field_of("schema_version: 1\nhamiltonian: {benchmark: convex3, file: h.json}\n") == "hamiltonian");
  CHECK(field_of("schema_version: 1\nprefactors: {c_T: -1}\n") == "prefactors.c_T");
  CHECK(field_of("schema_version: 1\nprefactors: {c_x: 1}\n") == "prefactors.c_x");
  CHECK(field_of("schema_version: 1\nsweep: {log_range: {from: -2, to: -4}}\n") == "sweep.log_range");
  CHECK(field_of("schema_version: 1\n[unbalanced\n") == "config");

  const auto cfg = parse_config(
      "schema_version: 1\nsubcommand: stability\nsweep: {log_range: {from: -2, to: -4, points: 5}}\n"
      "prefactors: {c_T: 2.0e5}\nseed: 9\nthreads: 2\n",
      "stability");
  REQUIRE(cfg.sweep.has_value());
  REQUIRE(cfg.sweep->size() == 5);
  CHECK(cfg.sweep->front() == doctest::Approx(1e-2).epsilon(1e-14));
  CHECK((*cfg.sweep)[1] == doctest::Approx(std::pow(10.0, -2.5)).epsilon(1e-14));
  CHECK(cfg.sweep->back() == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(cfg.prefactors["c_T"] == 2.0e5);
  CHECK(cfg.seed == 9);
  CHECK(cfg.threads == 2);
}

TEST_CASE("validation failures exit with status 1 and name the field") {
  auto cfg = parse_config("schema_version: 1\nsweep: []\n", "stability");
  auto r = execute(cfg);
  CHECK(r.exit_code == 1);
  CHECK(r.message.find("sweep non-empty") != std::string::npos);
  CHECK(r.files.empty());

  cfg = parse_config("schema_version: 1\nhamiltonian: {benchmark: superconductivity}\n", "geography");
  r = execute(cfg);
  CHECK(r.exit_code == 1);
  CHECK(r.message.rfind("n:", 0) == 0);

  cfg = parse_config("schema_version: 1\nn: 2\n", "stability");
  CHECK(execute(cfg).exit_code == 1);

  cfg = parse_config("schema_version: 1\nhamiltonian: {file: no-such-file.json}\n", "steepness");
  r = execute(cfg);
  CHECK(r.exit_code == 1);
  CHECK(r.message.rfind("hamiltonian.file", 0) == 0);

  cfg = parse_config("schema_version: 1\nhamiltonian: {benchmark: kepler}\n", "steepness");
  CHECK(execute(cfg).exit_code == 1);

  cfg = parse_config("schema_version: 1\nsweep: [1.0]\n", "normalform");
  r = execute(cfg);
  CHECK(r.exit_code == 1);
  CHECK(r.message.rfind("sweep", 0) == 0);
}

TEST_CASE("steepness on the superconductivity benchmark reports a violation") {
  const auto cfg = parse_config("schema_version: 1\nhamiltonian: {benchmark: superconductivity}\n", "steepness");
  const auto r = execute(cfg);
  REQUIRE(r.exit_code == 0);
  const auto j = core::json::parse(r.files.at("steepness.json"));
  CHECK(j["status"] == "violation");
  CHECK(j["result"]["violation"]["margin"].get<double>() < 1e-12);
}

TEST_CASE("smooth writes one error row per width and order") {
  const auto cfg = parse_config("schema_version: 1\n", "smooth");
  const auto r = execute(cfg);
  REQUIRE(r.exit_code == 0);
  std::istringstream csv(r.files.at("smoothing.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "s,p,error");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 7 * 3);
  const auto j = core::json::parse(r.files.at("smoothing.json"));
  CHECK(j["slope_p0"].get<double>() >= 2.3);
}

TEST_CASE("runs are deterministic across repeats and thread counts") {
  auto cfg = small_stability();
  const auto a = execute(cfg);
  const auto b = execute(cfg);
  cfg.threads = 3;
  const auto c = execute(cfg);
  REQUIRE(a.exit_code == 0);
  CHECK(a.files == b.files);
  CHECK(a.files == c.files);
  CHECK(a.files.count("drift.csv") == 1);
  cfg.seed = 1;
  CHECK(execute(cfg).files != a.files);

  const auto nf = parse_config("schema_version: 1\n", "normalform");
  CHECK(execute(nf).files == execute(nf).files);
}

TEST_CASE("manifest lists every artifact with its hash") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  auto cfg = small_stability();
  const fs::path dir = scratch("manifest");
  cfg.output = dir.string();
  const auto r = execute(cfg);
  write_artifacts(cfg, r, 1.5);
  const auto m = core::json::parse(read_file(dir / "manifest.json"));
  CHECK(m["subcommand"] == "stability");
  CHECK(m["seeds"]["seed"] == 0);
  CHECK(m["config"]["stability"]["max_steps"] == 4000);
  CHECK(m["files"].size() == r.files.size());
  for (const auto& f : m["files"]) {
    const std::string content = read_file(dir / f["path"].get<std::string>());
    CHECK(sha256_hex(content) == f["sha256"].get<std::string>());
    CHECK(content.size() == f["bytes"].get<std::size_t>());
  }
  fs::remove_all(dir);
}

TEST_CASE("fit reads prior sweep CSVs") {
  const fs::path dir = scratch("fit");
  {
    std::ofstream out(dir / "drift.csv");
    out.precision(17);
    out << "epsilon,horizon,max_drift,escape_time,itinerary_len\n";
    for (double e : {1e-2, 1e-3, 1e-4, 1e-5}) out << e << ",1," << 2.0 * std::pow(e, 0.25) << ",,1\n";
  }
  {
    std::ofstream out(dir / "fit.yaml");
    out << "schema_version: 1\nfit: {inputs: [drift.csv]}\n";
  }
  const auto cfg = load_config((dir / "fit.yaml").string(), "fit");
  const auto r = execute(cfg);
  REQUIRE(r.exit_code == 0);
  const auto j = core::json::parse(r.files.at("fit.json"));
  CHECK(j["slope"].get<double>() == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(j["points"] == 4);

  auto bad = cfg;
  bad.fit.column = "nope";
  CHECK(execute(bad).exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("budget and invariant failures") {
  auto cfg = parse_config("schema_version: 1\nstability: {initial_conditions: 2}\nbudget_secs: 0.2\n", "stability");
  const auto r = execute(cfg);
  CHECK(r.exit_code == 2);
  CHECK(r.files.empty());

  // A strongly action-dependent perturbation makes the implicit midpoint
  // iteration diverge at dt = 1.
  const fs::path dir = scratch("invariant");
  {
    core::json h = core::to_json(core::TrigPoly::from_polynomial(
        (core::Polynomial::variable(3, 0).pow(2) + core::Polynomial::variable(3, 1).pow(2) +
         core::Polynomial::variable(3, 2).pow(2)) *
        core::cplx(0.5)) +
                                 core::TrigPoly::from_polynomial(core::Polynomial::variable(3, 0).pow(3)) *
                                     core::TrigPoly::cosine(core::MultiIndex{1, 0, 0}, 1e3));
    std::ofstream out(dir / "h.json");
    out << h.dump();
  }
  {
    std::ofstream out(dir / "run.yaml");
    out << "schema_version: 1\nhamiltonian: {file: h.json}\nsweep: [0.5, 0.1, 0.01, 0.001]\nprefactors: {c_T: 1000}\n"
           "stability: {dt: 1.0, max_steps: 100, initial_conditions: 1, itineraries: false}\n";
  }
  const auto bad = load_config((dir / "run.yaml").string(), "stability");
  const auto rb = execute(bad);
  CHECK(rb.exit_code == 3);
  REQUIRE(rb.files.count("witness.json") == 1);
  const auto w = core::json::parse(rb.files.at("witness.json"));
  CHECK(w["subcommand"] == "stability");
  CHECK(w["error"].get<std::string>().find("not finite") != std::string::npos);
  fs::remove_all(dir);
}
