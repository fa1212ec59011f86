#include "ddc/config.hpp"

#include <fstream>
#include <set>

#include "ddc/errors.hpp"

namespace ddc {

using nlohmann::json;

double ExperimentConfig::tolerance(const std::string& key, double fallback) const {
  const auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

namespace {

template <class T>
T field(const json& doc, const char* key, const T& fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

DiffusionSpec diffusion_preset(const std::string& name) {
  DiffusionSpec s;
  if (name == "ou") return s;
  if (name == "tanh-drift") {
    s.drift = "tanh-drift";
    s.drift_scale = 1.5;
    s.drift_shape = 0.5;
    s.growth = 1.5;
    s.ergodicity_rate = 1.5 * std::tanh(2.0) * 0.99;
    return s;
  }
  if (name == "bumped-ou") {
    s.volatility = "bumped";
    s.vol_bump = 0.3;
    s.vol_hi = 1.3;
    s.ergodicity_rate = 0.99 / (1.3 * 1.3);
    return s;
  }
  if (name == "piecewise") {
    s.drift = "piecewise";
    s.drift_scale = 1.0;
    s.drift_shape = 0.5;
    return s;
  }
  throw ConfigError("unknown diffusion model '" + name + "'");
}

}  // namespace

std::vector<std::string> diffusion_registry() { return {"ou", "tanh-drift", "bumped-ou", "piecewise"}; }

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"experiment", "model", "grid",   "replicates", "seed",
                                           "dt",         "output", "tolerances", "settings"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig c;
  c.experiment = field<std::string>(doc, "experiment", "");
  if (c.experiment.empty()) throw ConfigError("config needs an 'experiment' name");
  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    if (m.is_string()) {
      c.model = m.get<std::string>();
    } else if (m.is_object()) {
      c.model_spec = m;
      c.model = field<std::string>(m, "name", "custom");
    } else {
      throw ConfigError("'model' must be a registry name or an object");
    }
  }
  if (doc.contains("grid") && doc.at("grid").is_object()) {
    // {"from": a, "to": b, "points": n} or {"from": a, "factor": f, "points": n}
    const auto& g = doc.at("grid");
    const double from = field<double>(g, "from", 0.0);
    const auto points = field<std::size_t>(g, "points", 0);
    if (g.contains("factor")) {
      const double f = field<double>(g, "factor", 2.0);
      double v = from;
      for (std::size_t i = 0; i < points; ++i, v *= f) c.grid.push_back(v);
    } else {
      if (points < 2) throw ConfigError("'grid.points' must be at least 2");
      c.grid = linspace(from, field<double>(g, "to", from), points);
    }
  } else {
    c.grid = field<std::vector<double>>(doc, "grid", {});
  }
  const auto reps = field<long long>(doc, "replicates", 1);
  if (reps < 1) throw ConfigError("'replicates' must be at least 1");
  c.replicates = static_cast<std::size_t>(reps);
  c.seed = field<std::uint64_t>(doc, "seed", 1);
  c.dt = field<double>(doc, "dt", 1e-2);
  c.output = field<std::string>(doc, "output", "results");
  c.tolerances = field<std::map<std::string, double>>(doc, "tolerances", {});
  if (doc.contains("settings")) {
    if (!doc.at("settings").is_object()) throw ConfigError("'settings' must be an object");
    c.settings = doc.at("settings");
  }

  if (c.grid.empty()) throw ConfigError("'grid' must be a nonempty list");
  for (std::size_t i = 1; i < c.grid.size(); ++i)
    if (!(c.grid[i] > c.grid[i - 1])) throw ConfigError("'grid' must be strictly increasing");
  if (!(c.dt > 0.0)) throw ConfigError("'dt' must be positive");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["model"] = c.model_spec.is_null() ? json(c.model) : c.model_spec;
  j["grid"] = c.grid;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["output"] = c.output;
  j["tolerances"] = c.tolerances;
  j["settings"] = c.settings;
  return j;
}

DiffusionModel resolve_diffusion(const ExperimentConfig& c) {
  DiffusionSpec s;
  if (c.model_spec.is_null()) {
    s = diffusion_preset(c.model);
  } else {
    const auto& m = c.model_spec;
    s.drift = field<std::string>(m, "drift", s.drift);
    s.drift_scale = field<double>(m, "drift_scale", s.drift_scale);
    s.drift_shape = field<double>(m, "drift_shape", s.drift_shape);
    s.volatility = field<std::string>(m, "volatility", s.volatility);
    s.vol_level = field<double>(m, "vol_level", s.vol_level);
    s.vol_bump = field<double>(m, "vol_bump", s.vol_bump);
    s.growth = field<double>(m, "growth", s.growth);
    s.cutoff = field<double>(m, "cutoff", s.cutoff);
    s.ergodicity_rate = field<double>(m, "ergodicity_rate", s.ergodicity_rate);
    s.vol_lo = field<double>(m, "vol_lo", s.vol_lo);
    s.vol_hi = field<double>(m, "vol_hi", s.vol_hi);
  }
  try {
    auto model = make_diffusion_model(c.model, s);
    model.validate();
    return model;
  } catch (const ModelError& e) {
    throw ConfigError("model '" + c.model + "': " + e.what());
  }
}

LevyModel resolve_levy(const ExperimentConfig& c) {
  try {
    if (c.model_spec.is_null()) return make_levy_model(c.model);
    const auto& m = c.model_spec;
    LevySpec s;
    s.drift = field<double>(m, "drift", s.drift);
    s.sigma = field<double>(m, "sigma", s.sigma);
    s.rate = field<double>(m, "rate", s.rate);
    s.jump_law = field<std::string>(m, "jump_law", s.jump_law);
    s.jump_parameter = field<double>(m, "jump_parameter", s.jump_parameter);
    s.negative_jumps = field<bool>(m, "negative_jumps", s.negative_jumps);
    return make_levy_model(c.model, s);
  } catch (const ModelError& e) {
    throw ConfigError("model '" + c.model + "': " + e.what());
  }
}

}  // namespace ddc
