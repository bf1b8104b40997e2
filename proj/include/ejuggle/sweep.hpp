#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ejuggle/juggle.hpp"
#include "ejuggle/species.hpp"

namespace ejuggle {

enum class Spacing { linear, log };

struct WindowGrid {
  double min = 1e-9;    // s
  double max = 200e-9;  // s
  int count = 40;
  Spacing spacing = Spacing::log;

  std::vector<double> windows() const;
};

/// One sweep configuration. `base` carries the shot-loop knobs that are not
/// part of the scenario proper (burn-in, tolerances, quadrature order).
struct Scenario {
  std::string label = "custom";  // ideal, realistic or custom
  double latency = 0.0;          // s
  double sigma_beta = 0.0;
  double eta = 0.025;
  Schedule schedule;
  std::vector<double> window_grid;
  ShotConfig base;

  static Scenario ideal(const WindowGrid& grid = {});
  static Scenario realistic(const WindowGrid& grid = {});

  void validate() const;
  ShotConfig shot_config(double window) const;
};

struct SweepRow {
  double window = 0.0;  // s
  double rate = 0.0;    // s^-1
  double fidelity = 0.0;
  double p_r = 0.0;
  double p_w = 0.0;
  long shots_to_steady = -1;
  std::string error;  // empty when the point succeeded

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::string species;
  std::string scenario;
  std::vector<SweepRow> rows;
};

/// Evaluates one grid point; failures are caught and stored in the row.
SweepRow run_point(const SpeciesModel& model, const Scenario& scenario, double window,
                   const ChannelPair& channels);

/// Runs fn(0) .. fn(count-1) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

struct SweepJob {
  const SpeciesModel* model = nullptr;
  Scenario scenario;
};

/// All grid points of all jobs share one work pool. Output order follows the
/// jobs and their grids regardless of the worker count.
std::vector<SweepResult> run_sweeps(std::span<const SweepJob> jobs, int workers = 1);
SweepResult run_sweep(const SpeciesModel& model, const Scenario& scenario, int workers = 1);

struct Optimum {
  double window = 0.0;
  double rate = 0.0;
  double fidelity = 0.0;
};

/// Highest-rate row with fidelity >= f_min, ties to the smaller window.
/// Empty when no row qualifies. Throws std::invalid_argument on an empty grid.
std::optional<Optimum> max_rate_at_fidelity(const SweepResult& result, double f_min);

inline constexpr const char* kCsvHeader =
    "species,scenario,window_s,rate_per_s,fidelity,p_r,p_w,shots_to_steady";

void write_csv(std::ostream& out, const SweepResult& result);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

/// Parses CSV written by write_csv. Rows must all carry the same species and
/// scenario. Failed points (written as nan) come back with a placeholder error.
SweepResult read_csv(std::istream& in);
SweepResult parse_csv_file(const std::filesystem::path& path);

struct PlotOptions {
  std::string title;
  bool show_fidelity = false;
  std::optional<double> reference_rate = 250.0;  // s^-1
  int width = 720;
  int height = 460;
};

void write_plot(std::ostream& out, std::span<const SweepResult> curves, const PlotOptions& options);
void emit_plot(std::span<const SweepResult> curves, const std::filesystem::path& path,
               const PlotOptions& options);

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ejuggle
