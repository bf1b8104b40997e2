#include "ejuggle/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ejuggle {

using nlohmann::json;

namespace {

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number_at(const json& obj, const char* key, const std::string& where, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v->get<double>();
}

long integer_at(const json& obj, const char* key, const std::string& where, long fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v->get<long>();
}

bool bool_at(const json& obj, const char* key, const std::string& where, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v->get<bool>();
}

void require_object(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

WindowGrid parse_grid(const json& g, const std::string& where, WindowGrid grid) {
  require_object(g, where);
  check_keys(g, where, {"min", "max", "count", "spacing"});
  grid.min = number_at(g, "min", where, grid.min);
  grid.max = number_at(g, "max", where, grid.max);
  grid.count = static_cast<int>(integer_at(g, "count", where, grid.count));
  if (const json* s = find(g, "spacing")) {
    if (*s == "log") {
      grid.spacing = Spacing::log;
    } else if (*s == "linear") {
      grid.spacing = Spacing::linear;
    } else {
      throw ConfigError(where + ".spacing: expected \"linear\" or \"log\"");
    }
  }
  if (grid.count < 0) throw ConfigError(where + ".count: must be non-negative");
  if (grid.count > 0 && !(grid.min > 0.0 && grid.max >= grid.min)) {
    throw ConfigError(where + ": need 0 < min <= max");
  }
  if (grid.count > 1 && grid.max == grid.min) throw ConfigError(where + ": min == max with count > 1");
  return grid;
}

// Scenario-level keys shared with the top-level "overrides" block.
void apply_overrides(Scenario& s, const json& obj, const std::string& where) {
  s.eta = number_at(obj, "eta", where, s.eta);
  s.latency = number_at(obj, "latency_s", where, s.latency);
  s.sigma_beta = number_at(obj, "sigma_beta", where, s.sigma_beta);
  s.schedule.prep_pulses = static_cast<int>(integer_at(obj, "prep_pulses", where, s.schedule.prep_pulses));
  if (const json* start = find(obj, "start")) {
    if (*start == "R") {
      s.schedule.start = Handedness::right;
    } else if (*start == "L") {
      s.schedule.start = Handedness::left;
    } else {
      throw ConfigError(where + ".start: expected \"R\" or \"L\"");
    }
  }
}

void apply_shots(ShotConfig& c, const json& obj, const std::string& where) {
  require_object(obj, where);
  check_keys(obj, where,
             {"burn_in", "max_shots", "steady_tol", "quadrature_order", "retain_cross_terms", "rtol", "atol",
              "solve_fixed_point"});
  c.burn_in_shots = integer_at(obj, "burn_in", where, c.burn_in_shots);
  c.max_shots = integer_at(obj, "max_shots", where, c.max_shots);
  c.steady_tol = number_at(obj, "steady_tol", where, c.steady_tol);
  c.quadrature_order = static_cast<int>(integer_at(obj, "quadrature_order", where, c.quadrature_order));
  c.retain_cross_terms = bool_at(obj, "retain_cross_terms", where, c.retain_cross_terms);
  c.solve_fixed_point = bool_at(obj, "solve_fixed_point", where, c.solve_fixed_point);
  c.evolve.rtol = number_at(obj, "rtol", where, c.evolve.rtol);
  c.evolve.atol = number_at(obj, "atol", where, c.evolve.atol);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.species = shipped_species();
  c.scenarios = {Scenario::ideal(), Scenario::realistic()};
  return c;
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  require_object(doc, "config");
  check_keys(doc, "config",
             {"species", "data_dir", "grid", "scenarios", "overrides", "shots", "f_min", "workers"});

  RunConfig cfg = default_run_config();
  if (const json* d = find(doc, "data_dir")) {
    if (!d->is_string()) throw ConfigError("config.data_dir: expected a string");
    cfg.data_dir = resolve(d->get<std::string>(), base_dir);
  }
  if (const json* list = find(doc, "species")) {
    if (!list->is_array() || list->empty()) throw ConfigError("config.species: expected a non-empty list");
    cfg.species.clear();
    for (const json& s : *list) {
      if (!s.is_string()) throw ConfigError("config.species: entries must be strings");
      std::string entry = s.get<std::string>();
      if (entry.ends_with(".json")) entry = resolve(entry, base_dir).string();
      cfg.species.push_back(std::move(entry));
    }
  }

  WindowGrid grid;
  if (const json* g = find(doc, "grid")) grid = parse_grid(*g, "config.grid", grid);

  ShotConfig shots;
  if (const json* s = find(doc, "shots")) apply_shots(shots, *s, "config.shots");

  const json* overrides = find(doc, "overrides");
  if (overrides) {
    require_object(*overrides, "config.overrides");
    check_keys(*overrides, "config.overrides", {"eta", "latency_s", "sigma_beta", "prep_pulses", "start"});
  }

  json blocks = json::array({{{"label", "ideal"}}, {{"label", "realistic"}}});
  if (const json* list = find(doc, "scenarios")) {
    if (!list->is_array() || list->empty()) throw ConfigError("config.scenarios: expected a non-empty list");
    blocks = *list;
  }
  cfg.scenarios.clear();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const json& b = blocks[k];
    const std::string where = "config.scenarios[" + std::to_string(k) + "]";
    require_object(b, where);
    check_keys(b, where, {"label", "eta", "latency_s", "sigma_beta", "prep_pulses", "start", "grid"});
    const json* label = find(b, "label");
    if (!label || !label->is_string()) throw ConfigError(where + ".label: expected a string");
    const std::string name = label->get<std::string>();
    const WindowGrid g = find(b, "grid") ? parse_grid(b["grid"], where + ".grid", grid) : grid;
    Scenario s;
    if (name == "ideal" || name == "custom") {
      s = Scenario::ideal(g);
    } else if (name == "realistic") {
      s = Scenario::realistic(g);
    } else {
      throw ConfigError(where + ".label: expected ideal, realistic or custom");
    }
    s.label = name;
    s.base = shots;
    if (overrides) apply_overrides(s, *overrides, "config.overrides");
    apply_overrides(s, b, where);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    cfg.scenarios.push_back(std::move(s));
  }

  cfg.f_min = number_at(doc, "f_min", "config", cfg.f_min);
  if (!(cfg.f_min >= 0.0 && cfg.f_min <= 1.0)) throw ConfigError("config.f_min: must lie in [0, 1]");
  cfg.workers = static_cast<int>(integer_at(doc, "workers", "config", cfg.workers));
  if (cfg.workers < 1) throw ConfigError("config.workers: must be at least 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_run_config(text.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SpeciesModel load_species_entry(const std::string& entry, const std::filesystem::path& data_dir) {
  const std::filesystem::path p(entry);
  if (entry.ends_with(".json") || p.has_parent_path()) return load_species_file(p);
  return load_species_file(species_path(entry, data_dir));
}

}  // namespace ejuggle
