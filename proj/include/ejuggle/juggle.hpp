#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ejuggle/dynamics.hpp"
#include "ejuggle/excitation.hpp"
#include "ejuggle/species.hpp"

namespace ejuggle {

/// Pulse-handedness pattern: `prep_pulses` pulses of `start` followed by one
/// of the opposite handedness, repeated. The default (one pulse each way) is
/// strict alternation, where every pulse is a detection attempt. For
/// prep_pulses > 1 only the final pulse of each group is detected and an
/// attempt spans the whole group.
struct Schedule {
  int prep_pulses = 1;
  Handedness start = Handedness::right;

  int period() const { return prep_pulses + 1; }
  Handedness handedness(long shot) const {
    return shot % period() < prep_pulses ? start : flip(start);
  }
  bool detected(long shot) const { return prep_pulses == 1 || shot % period() == prep_pulses; }
  int shots_per_attempt() const { return prep_pulses == 1 ? 1 : period(); }
};

struct ShotConfig {
  double window = 0.0;      // s
  double latency = 100e-9;  // s
  double eta = 0.025;
  double sigma_beta = 0.0;
  Schedule schedule;
  long burn_in_shots = 200;
  long max_shots = 1000;
  double steady_tol = 1e-8;  // trace distance between same-phase shots

  int quadrature_order = 21;
  bool retain_cross_terms = false;
  bool pulses_enabled = true;
  // The two shortcuts below need the repump Hamiltonian to be constant in a
  // rotating frame; otherwise every shot is integrated.
  double reuse_tol = 1e-13;  // copy shots once the state repeats; 0 disables
  // Jump to the fixed point of the one-period map when the observed
  // contraction predicts more periods than building that map costs.
  bool solve_fixed_point = true;
  std::optional<DensityOperator> initial_state;  // default: mixed over S1/2
  EvolveOptions evolve;

  void validate() const;
};

struct ChannelPair {
  PulseChannel right;
  PulseChannel left;

  const PulseChannel& operator[](Handedness h) const { return h == Handedness::right ? right : left; }
};

ChannelPair make_channels(const PulseBlock& block, const ShotConfig& config);

struct ShotRecord {
  long index = 0;
  Handedness handedness = Handedness::right;
  bool detected = true;
  double p_r = 0.0;  // collectable emission from the right P1/2 sublevel in the window
  double p_w = 0.0;  // same, from the wrong sublevel
  DensityOperator rho_after;
  double time = 0.0;  // beam clock at the end of the shot, s
};

struct ShotRun {
  std::vector<ShotRecord> records;
  int period = 2;
  long burn_in = 0;
  bool converged = false;
  long shots_to_steady = -1;  // first shot of the final steady stretch
  double last_distance = 0.0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity_error = 0.0;
  long fixed_point_jump = -1;  // shot at which the state was replaced, if any
  bool framed = false;         // distances measured in the static frame
};

/// Runs the pulse / window / latency loop until the same-phase trace distance
/// stays below steady_tol after burn-in, or max_shots is reached. The beam
/// clock runs continuously. When the generator has a static frame, states are
/// compared in that frame, where the shot map repeats with the schedule.
ShotRun run_shots(const SpeciesModel& model, const ShotConfig& config, const ChannelPair& channels);
ShotRun run_shots(const SpeciesModel& model, const ShotConfig& config);

/// Real coordinates of a Hermitian matrix: diagonal, then Re/Im of the upper
/// triangle row by row. hermitian_from_coordinates is the inverse.
Eigen::VectorXd hermitian_coordinates(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd hermitian_from_coordinates(const Eigen::VectorXd& v, int dim);

/// Trace-one fixed point of a real-linear map given in hermitian_coordinates.
/// Empty if the map has no unique, positive fixed point.
std::optional<Eigen::MatrixXcd> fixed_point(const Eigen::MatrixXd& map, int dim);

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedFidelityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SteadyStateStats {
  double p_r = 0.0;
  double p_w = 0.0;
  double p_gamma = 0.0;
  std::array<double, 2> p_r_by_handedness{};  // indexed R, L
  std::array<double, 2> p_w_by_handedness{};
  double mean_shot_fidelity = 0.0;  // per-shot fidelity averaged, diagnostics only
  long shots_averaged = 0;
};

/// Averages p_r, p_w over detected post-burn-in shots spanning whole schedule
/// periods. Throws NonConvergenceError if the run did not reach steady state.
SteadyStateStats steady_state_stats(const ShotRun& run);

/// F = 1 - 2 p_r p_w / (p_r + p_w)^2.
double fidelity(double p_r, double p_w);

/// Two identical nodes heralding on the two Psi click patterns: (eta p)^2 / 2.
double herald_probability(double p_gamma, double eta);

double reg_rate(double p_herald, double window, double latency);

struct REGEstimate {
  double rate = 0.0;  // Bell pairs per second
  double fidelity = 0.0;
  double p_gamma = 0.0;
  double p_r = 0.0;
  double p_w = 0.0;
  long shots_to_steady = -1;
  long shots_run = 0;
  double mean_shot_fidelity = 0.0;
};

REGEstimate estimate_reg(const SpeciesModel& model, const ShotConfig& config);
REGEstimate estimate_reg(const ShotRun& run, const ShotConfig& config);

}  // namespace ejuggle
