#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ejuggle/angular_momentum.hpp"

namespace ejuggle {

using Complex = std::complex<double>;

/// Raised when a species description does not satisfy the schema.
class SpeciesSchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fine-structure manifold; its 2J+1 Zeeman sublevels are degenerate.
struct Manifold {
  std::string label;
  HalfInt J;
  int offset = 0;  // basis index of the m = -J sublevel

  int size() const { return J.multiplicity(); }
};

/// Spontaneous decay between two manifolds.
struct DecayPath {
  int upper = 0;  // manifold indices
  int lower = 0;
  double einstein_A = 0.0;  // s^-1
  double wavelength = 0.0;  // m
};

/// Polarization components ordered (sigma-, pi, sigma+), keyed by the change
/// m_e - m_g of an absorbed photon.
using Polarization = std::array<Complex, 3>;

/// A continuous repump beam driving one decay path in absorption.
struct Beam {
  int path = 0;  // index into SpeciesModel::decays()
  Polarization polarization{};
  double detuning = 0.0;  // rad/s, negative when red of the transition
  double power = 0.0;     // W
  double waist = 0.0;     // m
};

struct Level {
  int manifold = 0;
  HalfInt m;
};

/// Immutable description of one ion species over its level basis. Basis
/// order is manifolds in file order, m ascending within each manifold.
class SpeciesModel {
 public:
  SpeciesModel(std::string name, std::vector<Manifold> manifolds, std::vector<DecayPath> decays,
               std::vector<Beam> beams);

  const std::string& name() const { return name_; }
  const std::vector<Manifold>& manifolds() const { return manifolds_; }
  const std::vector<DecayPath>& decays() const { return decays_; }
  const std::vector<Beam>& beams() const { return beams_; }
  const std::vector<Level>& levels() const { return levels_; }

  int dimension() const { return static_cast<int>(levels_.size()); }

  std::optional<int> find_manifold(std::string_view label) const;
  int manifold_index(std::string_view label) const;  // throws if absent

  /// Basis index of sublevel m of the given manifold.
  int index(int manifold, HalfInt m) const;
  int index(std::string_view label, HalfInt m) const {
    return index(manifold_index(label), m);
  }

  /// Lifetime of the P1/2 manifold, 1 / sum of its decay rates.
  double p_half_lifetime() const;

  /// Returns a copy with every repump beam removed.
  SpeciesModel without_beams() const;

 private:
  std::string name_;
  std::vector<Manifold> manifolds_;
  std::vector<DecayPath> decays_;
  std::vector<Beam> beams_;
  std::vector<Level> levels_;
};

/// Parses a species description (JSON, `//` comments allowed).
SpeciesModel load_species(std::string_view document);
SpeciesModel load_species_file(const std::filesystem::path& path);

/// Resolves a short species key such as "ca40" to <data_dir>/<key>.json.
std::filesystem::path species_path(std::string_view key,
                                   const std::filesystem::path& data_dir = EJUGGLE_DATA_DIR);

/// Species keys shipped with the project, in reporting order.
const std::vector<std::string>& shipped_species();

/// One spontaneous-emission jump |lower><upper| with a real amplitude.
struct CollapseChannel {
  int path = 0;
  int lower = 0;  // basis indices
  int upper = 0;
  double amplitude = 0.0;
  int q = 0;  // m_g - m_e
  bool collectable = false;

  double rate() const { return amplitude * amplitude; }
  Eigen::MatrixXcd matrix(int dimension) const;
};

/// One operator per (decay path, g, e) with nonzero 3j symbol. Only
/// P1/2 -> S1/2 channels are collectable.
std::vector<CollapseChannel> collapse_operators(const SpeciesModel& model);

/// Reduced Rabi frequency of a beam from its power and waist, rad/s.
double reduced_rabi_frequency(const SpeciesModel& model, const Beam& beam);

/// Coupling Omega_{j,ge} of beam j between basis levels g (lower) and e
/// (upper). Zero when the levels are not on the beam's path or the beam
/// carries no component with q = m_e - m_g.
Complex rabi_frequency(const SpeciesModel& model, const Beam& beam, int g, int e);

/// Nonzero term Omega e^{i Delta t} |g><e| of the repump Hamiltonian.
struct RepumpCoupling {
  int lower = 0;
  int upper = 0;
  Complex omega;
  double detuning = 0.0;  // rad/s
};

std::vector<RepumpCoupling> repump_couplings(const SpeciesModel& model);

/// H(t) = sum Omega e^{i Delta t} |g><e| + h.c., angular-frequency units.
Eigen::MatrixXcd repump_hamiltonian(const SpeciesModel& model, double t);
Eigen::MatrixXcd repump_hamiltonian(int dimension, const std::vector<RepumpCoupling>& couplings,
                                    double t);

/// Largest beat frequency (Hz) among the beam detunings and their pairwise
/// differences; zero when there are no beams.
double highest_beat_frequency(const SpeciesModel& model);

namespace physical {
inline constexpr double planck = 6.62607015e-34;      // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double pi = 3.14159265358979323846;
}  // namespace physical

}  // namespace ejuggle
