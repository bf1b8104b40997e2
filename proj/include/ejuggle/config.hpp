#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ejuggle/species.hpp"
#include "ejuggle/sweep.hpp"

namespace ejuggle {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a `sweep` or `table` invocation needs.
struct RunConfig {
  std::vector<std::string> species;  // shipped keys or paths to species files
  std::filesystem::path data_dir = EJUGGLE_DATA_DIR;
  std::vector<Scenario> scenarios;
  double f_min = 0.97;
  int workers = 1;
};

/// The five shipped species under the ideal and realistic scenarios.
RunConfig default_run_config();

/// JSON config; every key is optional and falls back to default_run_config().
///
///   {
///     "species": ["ca40", "my/ion.json"],
///     "data_dir": "data/species",
///     "grid": {"min": 1e-9, "max": 2e-7, "count": 40, "spacing": "log"},
///     "scenarios": [
///       {"label": "ideal"},
///       {"label": "realistic", "eta": 0.05},
///       {"label": "custom", "latency_s": 5e-8, "sigma_beta": 0.1, "prep_pulses": 3}
///     ],
///     "overrides": {"eta": 0.025, "latency_s": 1e-7, "sigma_beta": 0.14, "prep_pulses": 1},
///     "shots": {"burn_in": 200, "max_shots": 1000, "steady_tol": 1e-8,
///               "quadrature_order": 21, "retain_cross_terms": false,
///               "rtol": 1e-8, "atol": 1e-10},
///     "f_min": 0.97,
///     "workers": 4
///   }
///
/// A scenario labelled ideal or realistic starts from that preset; custom
/// starts from the ideal one. Scenario keys win over "overrides". Relative
/// paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Resolves a species entry (shipped key or file path) to a model.
SpeciesModel load_species_entry(const std::string& entry, const std::filesystem::path& data_dir);

}  // namespace ejuggle
