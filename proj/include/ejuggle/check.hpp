#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ejuggle/species.hpp"
#include "ejuggle/sweep.hpp"

namespace ejuggle::acceptance {

/// Published peak REG rates (fidelity >= 0.97) per shipped species.
struct ReferenceRates {
  std::string species;  // shipped key
  double ideal = 0.0;
  double realistic = 0.0;
};

const std::vector<ReferenceRates>& reference_rates();

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary;
  std::vector<std::string> details;
  double seconds = 0.0;
};

/// "PASS  5  ideal-scenario rates ... (12.3 s)"
std::string status_line(const CriterionResult& r);

struct SuiteOptions {
  std::filesystem::path data_dir = EJUGGLE_DATA_DIR;
  int workers = 1;
  std::filesystem::path out_dir;  // CSV and SVG of the sweeps; empty: none
  std::ostream* progress = nullptr;
};

/// One row of the Table I reproduction.
struct TableEntry {
  std::string species;
  std::optional<Optimum> ideal;
  std::optional<Optimum> realistic;
};

struct TableRun {
  std::vector<SweepResult> ideal;      // species order of reference_rates()
  std::vector<SweepResult> realistic;
  std::vector<TableEntry> entries;
  double seconds = 0.0;
};

/// Sweeps every shipped species under both default scenarios and extracts
/// the best rate with fidelity >= f_min.
TableRun run_table(const std::filesystem::path& data_dir, int workers, double f_min = 0.97);
void print_table(std::ostream& out, const TableRun& table);

CriterionResult check_ideal_rates(const TableRun& table);
CriterionResult check_realistic_rates(const TableRun& table);

class Suite {
 public:
  static constexpr int kCriteria = 9;

  explicit Suite(SuiteOptions options);

  CriterionResult run(int id);

 private:
  CriterionResult kernel_properties();
  CriterionResult expansion();
  CriterionResult fidelity_limits();
  CriterionResult fidelity_plateau();
  CriterionResult ideal_rates();
  CriterionResult realistic_rates();
  CriterionResult curve_shapes();
  CriterionResult table_harness();
  CriterionResult determinism();

  const TableRun& table();
  const SpeciesModel& model(const std::string& key);

  SuiteOptions options_;
  std::map<std::string, SpeciesModel> models_;
  std::optional<TableRun> table_;
};

}  // namespace ejuggle::acceptance
