// Command-line driver: window sweeps, Table I reproduction and the acceptance suite.

#include <cctype>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ejuggle/check.hpp"
#include "ejuggle/config.hpp"
#include "ejuggle/sweep.hpp"

namespace fs = std::filesystem;
using namespace ejuggle;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> species;
  std::vector<std::string> scenarios;
  std::string out_dir = "results";
  std::string data_dir;
  int workers = 0;
  long seed = 0;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (!c.data_dir.empty()) cfg.data_dir = c.data_dir;
  if (!c.species.empty()) cfg.species = c.species;
  if (!c.scenarios.empty()) {
    std::vector<Scenario> kept;
    for (const std::string& label : c.scenarios) {
      bool found = false;
      for (const Scenario& s : cfg.scenarios) {
        if (s.label == label) {
          kept.push_back(s);
          found = true;
        }
      }
      if (!found) throw ConfigError("scenario '" + label + "' is not defined in the configuration");
    }
    cfg.scenarios = std::move(kept);
  }
  if (c.workers > 0) cfg.workers = c.workers;
  return cfg;
}

std::string file_stem(const SweepResult& r) {
  std::string species;
  for (char ch : r.species) species += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return species + "_" + r.scenario;
}

int run_sweep_command(const Common& c) {
  const RunConfig cfg = resolve_config(c);
  std::vector<SpeciesModel> models;
  for (const std::string& entry : cfg.species) models.push_back(load_species_entry(entry, cfg.data_dir));

  std::vector<SweepJob> jobs;
  for (const Scenario& s : cfg.scenarios) {
    for (const SpeciesModel& m : models) jobs.push_back({&m, s});
  }
  const std::vector<SweepResult> results = run_sweeps(jobs, cfg.workers);

  const fs::path out(c.out_dir);
  int failures = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const SweepResult& r = results[k];
    emit_csv(r, out / (file_stem(r) + ".csv"));
    for (const SweepRow& row : r.rows) {
      if (!row.ok()) {
        ++failures;
        std::cerr << r.species << " " << r.scenario << " window " << row.window << " s: " << row.error << "\n";
      }
    }
    const auto best = r.rows.empty() ? std::nullopt : max_rate_at_fidelity(r, cfg.f_min);
    std::cout << r.species << " " << r.scenario << ": ";
    if (best) {
      std::cout << "max rate " << best->rate << " /s at " << best->window * 1e9 << " ns (F " << best->fidelity
                << ")\n";
    } else {
      std::cout << "no window with fidelity >= " << cfg.f_min << "\n";
    }
  }
  for (const Scenario& s : cfg.scenarios) {
    std::vector<SweepResult> curves;
    for (const SweepResult& r : results) {
      if (r.scenario == s.label) curves.push_back(r);
    }
    PlotOptions plot;
    plot.title = s.label + " scenario";
    plot.show_fidelity = true;
    emit_plot(curves, out / (s.label + ".svg"), plot);
  }
  std::cout << "wrote " << results.size() << " CSV files to " << out.string() << "\n";
  if (failures > 0) {
    std::cerr << failures << " sweep point(s) failed\n";
    return 2;
  }
  return 0;
}

int run_table_command(const Common& c) {
  const RunConfig cfg = resolve_config(c);
  const acceptance::TableRun table = acceptance::run_table(cfg.data_dir, cfg.workers, cfg.f_min);
  const fs::path out(c.out_dir);
  for (const auto* set : {&table.ideal, &table.realistic}) {
    for (const SweepResult& r : *set) emit_csv(r, out / (file_stem(r) + ".csv"));
    PlotOptions plot;
    plot.title = set->front().scenario + " scenario";
    plot.show_fidelity = true;
    emit_plot(*set, out / (set->front().scenario + ".svg"), plot);
  }
  acceptance::print_table(std::cout, table);
  std::cout << "sweeps took " << table.seconds << " s with " << cfg.workers << " worker(s)\n";
  const acceptance::CriterionResult c5 = acceptance::check_ideal_rates(table);
  const acceptance::CriterionResult c6 = acceptance::check_realistic_rates(table);
  for (const auto* r : {&c5, &c6}) {
    std::cout << acceptance::status_line(*r) << "\n";
    for (const std::string& d : r->details) std::cout << "      " << d << "\n";
  }
  return c5.passed && c6.passed ? 0 : 1;
}

int run_check_command(const Common& c, const std::vector<int>& only) {
  acceptance::SuiteOptions opts;
  if (!c.data_dir.empty()) opts.data_dir = c.data_dir;
  opts.workers = c.workers > 0 ? c.workers : 1;
  opts.out_dir = c.out_dir;
  opts.progress = &std::cerr;
  acceptance::Suite suite(opts);
  std::set<int> ids(only.begin(), only.end());
  if (ids.empty()) {
    for (int k = 1; k <= acceptance::Suite::kCriteria; ++k) ids.insert(k);
  }
  bool all = true;
  for (int id : ids) {
    const acceptance::CriterionResult r = suite.run(id);
    std::cout << acceptance::status_line(r) << "\n";
    for (const std::string& d : r.details) std::cout << "      " << d << "\n";
    std::cout.flush();
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electron-juggling REG rate and fidelity simulator"};
  app.require_subcommand(1);
  Common common;
  std::vector<int> only;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--species", common.species, "species keys or species files (repeatable)");
    sub->add_option("--scenario", common.scenarios, "scenario labels to run (repeatable)");
    sub->add_option("--out-dir", common.out_dir, "directory for CSV and SVG output");
    sub->add_option("--workers", common.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "reserved; the simulation is deterministic");
    sub->add_option("--data-dir", common.data_dir, "directory holding species files");
  };
  CLI::App* sweep = app.add_subcommand("sweep", "sweep the detection window and write curves");
  CLI::App* table = app.add_subcommand("table", "reproduce the peak-rate table for both scenarios");
  CLI::App* check = app.add_subcommand("check", "run the acceptance criteria");
  for (CLI::App* sub : {sweep, table, check}) add_common(sub);
  check->add_option("--only", only, "criterion numbers to run (default all)")->check(CLI::Range(1, 9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sweep) return run_sweep_command(common);
    if (*table) return run_table_command(common);
    return run_check_command(common, only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
