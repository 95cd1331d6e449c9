#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "neklab/cli/cli.hpp"

namespace neklab::cli {

namespace fs = std::filesystem;
using core::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// A YAML mapping whose keys are consumed one by one; leftovers are errors.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_, "expected a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }
  YAML::Node node(const std::string& key) { return has(key) ? node_[key] : YAML::Node(); }
  std::string field(const std::string& key) const { return join(path_, key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(node_[key], field(key));
  }
  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    out = convert<T>(node_[key], field(key));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<std::size_t>> ||
                    std::is_same_v<T, std::vector<std::string>> ||
                    std::is_same_v<T, std::vector<std::vector<double>>>) {
        if (!n.IsSequence()) throw ConfigError(where, "expected a list");
      } else if (!n.IsScalar()) {
        throw ConfigError(where, "expected a scalar");
      }
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        const auto text = n.Scalar();
        if (!text.empty() && text.front() == '-') throw ConfigError(where, "must be non-negative");
      }
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(where, "wrong type");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> parse_sweep(const YAML::Node& n) {
  if (n.IsSequence()) return Section::convert<std::vector<double>>(n, "sweep");
  Section s(n, "sweep");
  std::vector<double> values;
  if (s.has("values")) values = Section::convert<std::vector<double>>(s.node("values"), "sweep.values");
  if (s.has("log_range")) {
    if (!values.empty()) throw ConfigError("sweep", "give either values or log_range");
    Section r(s.node("log_range"), "sweep.log_range");
    double base = 10.0, from = 0.0, to = 0.0;
    std::size_t points = 0;
    r.get("base", base);
    if (!r.has("from") || !r.has("to") || !r.has("points"))
      throw ConfigError("sweep.log_range", "needs from, to and points");
    r.get("from", from);
    r.get("to", to);
    r.get("points", points);
    r.finish();
    if (!(base > 1.0)) throw ConfigError("sweep.log_range.base", "must exceed 1");
    if (points == 0) throw ConfigError("sweep", "sweep non-empty");
    for (std::size_t i = 0; i < points; ++i) {
      const double e = points == 1 ? from : from + (to - from) * static_cast<double>(i) / (points - 1.0);
      values.push_back(std::pow(base, e));
    }
  }
  s.finish();
  return values;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

std::vector<std::string> subcommands() { return {"smooth", "steepness", "geography", "normalform", "stability", "fit"}; }

ExperimentConfig parse_config(const std::string& yaml_text, const std::string& subcommand,
                              const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.subcommand = subcommand;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config", std::string("malformed YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("schema_version", "missing");
  Section top(root, "");
  if (!top.has("schema_version")) throw ConfigError("schema_version", "missing");
  int version = 0;
  top.get("schema_version", version);
  if (version != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version));

  std::string sub;
  top.get("subcommand", sub);
  if (!sub.empty() && sub != subcommand)
    throw ConfigError("subcommand", "config is for '" + sub + "', not '" + subcommand + "'");

  if (top.has("hamiltonian")) {
    Section h(top.node("hamiltonian"), "hamiltonian");
    std::string id, file;
    h.get("benchmark", id);
    h.get("file", file);
    h.finish();
    if (id.empty() == file.empty()) throw ConfigError("hamiltonian", "give exactly one of benchmark or file");
    cfg.hamiltonian = id;
    cfg.hamiltonian_file = file.empty() ? "" : resolve(base_dir, file);
  }
  top.get("n", cfg.n);
  top.get("ell", cfg.ell);
  top.get("alpha", cfg.alpha);
  if (top.has("sweep")) cfg.sweep = parse_sweep(top.node("sweep"));
  if (top.has("prefactors")) {
    Section p(top.node("prefactors"), "prefactors");
    for (const char* key : {"c_s", "c_r", "c_R", "c_alpha", "c_rj", "c_T", "c_TL"}) {
      double v = 0.0;
      if (!p.has(key)) continue;
      p.get(key, v);
      if (!(v > 0.0)) throw ConfigError(p.field(key), "must be positive");
      cfg.prefactors[key] = v;
    }
    if (p.has("c_delta")) {
      std::vector<double> v;
      p.get("c_delta", v);
      cfg.prefactors["c_delta"] = v;
    }
    p.finish();
  }
  top.get("seed", cfg.seed);
  top.get("threads", cfg.threads);
  top.get("budget_secs", cfg.budget_secs);
  top.get("output", cfg.output);
  if (top.has("output")) cfg.output = resolve(base_dir, cfg.output);

  {
    Section s(top.node("smooth"), "smooth");
    s.get("n", cfg.smooth.n);
    s.get("k_max", cfg.smooth.k_max);
    s.get("action_nodes", cfg.smooth.action_nodes);
    s.get("angle_nodes", cfg.smooth.angle_nodes);
    s.get("R", cfg.smooth.R);
    s.finish();
  }
  {
    Section s(top.node("steepness"), "steepness");
    s.get("points", cfg.steepness.points);
    s.get("grid_nodes", cfg.steepness.grid_nodes);
    s.get("random_points", cfg.steepness.random_points);
    s.get("frames", cfg.steepness.frames);
    s.get("xi_max", cfg.steepness.xi_max);
    s.get("xi_points", cfg.steepness.xi_points);
    s.get("xi_decades", cfg.steepness.xi_decades);
    s.get("center", cfg.steepness.center);
    s.get("radius", cfg.steepness.radius);
    s.finish();
  }
  {
    Section s(top.node("geography"), "geography");
    s.get("center", cfg.geography.center);
    s.get("radius", cfg.geography.radius);
    s.get("eps0", cfg.geography.eps0);
    s.get("M", cfg.geography.M);
    s.get("coverage_samples", cfg.geography.coverage_samples);
    s.get("disjointness_samples", cfg.geography.disjointness_samples);
    s.finish();
  }
  {
    Section s(top.node("normalform"), "normalform");
    s.get("benchmark", cfg.normalform.benchmark);
    s.get("probes", cfg.normalform.probes);
    s.get("steps", cfg.normalform.steps);
    s.get("lie_order", cfg.normalform.lie_order);
    s.get("fit_degree", cfg.normalform.fit_degree);
    s.finish();
  }
  {
    Section s(top.node("stability"), "stability");
    s.get("eps0", cfg.stability.eps0);
    s.get("M", cfg.stability.M);
    s.get("center", cfg.stability.center);
    s.get("ic_radius", cfg.stability.ic_radius);
    s.get("initial_conditions", cfg.stability.initial_conditions);
    s.get("dt", cfg.stability.dt);
    s.get("max_steps", cfg.stability.max_steps);
    s.get("stride", cfg.stability.stride);
    s.get("itineraries", cfg.stability.itineraries);
    s.finish();
  }
  {
    Section s(top.node("fit"), "fit");
    s.get("inputs", cfg.fit.inputs);
    for (auto& p : cfg.fit.inputs) p = resolve(base_dir, p);
    s.get("column", cfg.fit.column);
    s.get("ell", cfg.fit.ell);
    s.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto dir = fs::path(path).parent_path();
  return parse_config(text.str(), subcommand, dir.empty() ? "." : dir.string());
}

void validate(const ExperimentConfig& cfg) {
  const auto subs = subcommands();
  if (std::find(subs.begin(), subs.end(), cfg.subcommand) == subs.end())
    throw ConfigError("subcommand", "unknown subcommand '" + cfg.subcommand + "'");
  if (cfg.sweep && cfg.sweep->empty()) throw ConfigError("sweep", "sweep non-empty");
  if (cfg.sweep)
    for (double v : *cfg.sweep)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep", "values must be positive");
  if (!cfg.hamiltonian_file.empty() && !fs::exists(cfg.hamiltonian_file))
    throw ConfigError("hamiltonian.file", "file not found: " + cfg.hamiltonian_file);
  for (const auto& p : cfg.fit.inputs)
    if (!fs::exists(p)) throw ConfigError("fit.inputs", "file not found: " + p);
  if (cfg.n && *cfg.n < 1) throw ConfigError("n", "n >= 1 required");
  const bool needs3 = cfg.subcommand == "geography" || cfg.subcommand == "stability";
  if (needs3 && cfg.n && *cfg.n < 3) throw ConfigError("n", "n >= 3 required for " + cfg.subcommand);
  if (cfg.threads == 0) throw ConfigError("threads", "must be at least 1");
  if (cfg.budget_secs < 0.0) throw ConfigError("budget_secs", "must be non-negative");
  if (cfg.subcommand == "smooth" && cfg.smooth.n != 1 && cfg.smooth.n != 2)
    throw ConfigError("smooth.n", "the test family exists for n = 1 and n = 2");
  if (cfg.subcommand == "fit" && cfg.fit.inputs.empty()) throw ConfigError("fit.inputs", "at least one CSV needed");
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = subcommand;
  j["hamiltonian"] = hamiltonian_file.empty() ? json{{"benchmark", hamiltonian}} : json{{"file", hamiltonian_file}};
  j["n"] = n ? json(*n) : json(nullptr);
  j["ell"] = ell ? json(*ell) : json(nullptr);
  j["alpha"] = alpha;
  j["sweep"] = sweep ? json(*sweep) : json(nullptr);
  j["prefactors"] = prefactors;
  j["seed"] = seed;
  j["threads"] = threads;
  j["budget_secs"] = budget_secs;
  j["output"] = output;
  j["smooth"] = {{"n", smooth.n},
                 {"k_max", smooth.k_max},
                 {"action_nodes", smooth.action_nodes},
                 {"angle_nodes", smooth.angle_nodes},
                 {"R", smooth.R}};
  j["steepness"] = {{"points", steepness.points},         {"grid_nodes", steepness.grid_nodes},
                    {"random_points", steepness.random_points}, {"frames", steepness.frames},
                    {"xi_max", steepness.xi_max},         {"xi_points", steepness.xi_points},
                    {"xi_decades", steepness.xi_decades}, {"center", steepness.center},
                    {"radius", steepness.radius}};
  j["geography"] = {{"center", geography.center},
                    {"radius", geography.radius},
                    {"eps0", geography.eps0},
                    {"M", geography.M},
                    {"coverage_samples", geography.coverage_samples},
                    {"disjointness_samples", geography.disjointness_samples}};
  j["normalform"] = {{"benchmark", normalform.benchmark},
                     {"probes", normalform.probes},
                     {"steps", normalform.steps},
                     {"lie_order", normalform.lie_order},
                     {"fit_degree", normalform.fit_degree}};
  j["stability"] = {{"eps0", stability.eps0},
                    {"M", stability.M},
                    {"center", stability.center},
                    {"ic_radius", stability.ic_radius},
                    {"initial_conditions", stability.initial_conditions},
                    {"dt", stability.dt},
                    {"max_steps", stability.max_steps},
                    {"stride", stability.stride},
                    {"itineraries", stability.itineraries}};
  j["fit"] = {{"inputs", fit.inputs}, {"column", fit.column}, {"ell", fit.ell}};
  return j;
}

}  // namespace neklab::cli
