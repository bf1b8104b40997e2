#include "ejuggle/species.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ejuggle {

namespace {

using nlohmann::json;

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key)) {
    throw SpeciesSchemaError(where + ": missing field '" + key + "'");
  }
  return object.at(key);
}

double require_number(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_number()) throw SpeciesSchemaError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_string()) throw SpeciesSchemaError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Complex parse_amplitude(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw SpeciesSchemaError(where + ": polarization amplitude must be a number or [re, im]");
}

int find_decay(const std::vector<DecayPath>& decays, int upper, int lower) {
  for (std::size_t i = 0; i < decays.size(); ++i) {
    if (decays[i].upper == upper && decays[i].lower == lower) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

SpeciesModel::SpeciesModel(std::string name, std::vector<Manifold> manifolds,
                           std::vector<DecayPath> decays, std::vector<Beam> beams)
    : name_(std::move(name)),
      manifolds_(std::move(manifolds)),
      decays_(std::move(decays)),
      beams_(std::move(beams)) {
  std::set<std::string> labels;
  int offset = 0;
  for (std::size_t k = 0; k < manifolds_.size(); ++k) {
    Manifold& mf = manifolds_[k];
    if (!labels.insert(mf.label).second) {
      throw SpeciesSchemaError("manifolds: duplicate label '" + mf.label + "'");
    }
    if (mf.J.twice() < 0) throw SpeciesSchemaError("manifolds." + mf.label + ".J: negative");
    mf.offset = offset;
    for (int tm = -mf.J.twice(); tm <= mf.J.twice(); tm += 2) {
      levels_.push_back({static_cast<int>(k), HalfInt::from_twice(tm)});
    }
    offset += mf.size();
  }
  for (const char* required : {"S1/2", "P1/2"}) {
    if (!find_manifold(required)) {
      throw SpeciesSchemaError(std::string("manifolds: required manifold '") + required +
                               "' is missing");
    }
  }
  const int n_manifolds = static_cast<int>(manifolds_.size());
  for (const DecayPath& d : decays_) {
    if (d.upper < 0 || d.upper >= n_manifolds || d.lower < 0 || d.lower >= n_manifolds) {
      throw SpeciesSchemaError("decays: manifold index out of range");
    }
    if (d.upper == d.lower) {
      throw SpeciesSchemaError("decays: upper and lower are both '" + manifolds_[d.upper].label + "'");
    }
    if (!(d.einstein_A > 0.0)) {
      throw SpeciesSchemaError("decays." + manifolds_[d.upper].label + "->" +
                               manifolds_[d.lower].label + ".einstein_A_per_s: must be positive");
    }
    if (!(d.wavelength > 0.0)) {
      throw SpeciesSchemaError("decays." + manifolds_[d.upper].label + "->" +
                               manifolds_[d.lower].label + ".wavelength_m: must be positive");
    }
  }
  for (const Beam& b : beams_) {
    if (b.path < 0 || b.path >= static_cast<int>(decays_.size())) {
      throw SpeciesSchemaError("repump_beams: beam path is not a decay path");
    }
    double norm = 0.0;
    for (const Complex& c : b.polarization) norm += std::norm(c);
    if (std::abs(norm - 1.0) > 1e-12) {
      throw SpeciesSchemaError("repump_beams.pol: polarization is not normalized (|pol|^2 = " +
                               std::to_string(norm) + ")");
    }
    if (!(b.power >= 0.0)) throw SpeciesSchemaError("repump_beams.power_w: must be non-negative");
    if (!(b.waist > 0.0)) throw SpeciesSchemaError("repump_beams.waist_m: must be positive");
  }
}

std::optional<int> SpeciesModel::find_manifold(std::string_view label) const {
  for (std::size_t k = 0; k < manifolds_.size(); ++k) {
    if (manifolds_[k].label == label) return static_cast<int>(k);
  }
  return std::nullopt;
}

int SpeciesModel::manifold_index(std::string_view label) const {
  auto k = find_manifold(label);
  if (!k) throw std::out_of_range("species " + name_ + " has no manifold '" + std::string(label) + "'");
  return *k;
}

int SpeciesModel::index(int manifold, HalfInt m) const {
  const Manifold& mf = manifolds_.at(static_cast<std::size_t>(manifold));
  if (std::abs(m.twice()) > mf.J.twice() || (mf.J.twice() - m.twice()) % 2 != 0) {
    throw std::out_of_range("sublevel m = " + m.to_string() + " not in manifold " + mf.label);
  }
  return mf.offset + (m.twice() + mf.J.twice()) / 2;
}

double SpeciesModel::p_half_lifetime() const {
  const int p = manifold_index("P1/2");
  double total = 0.0;
  for (const DecayPath& d : decays_) {
    if (d.upper == p) total += d.einstein_A;
  }
  return total > 0.0 ? 1.0 / total : INFINITY;
}

SpeciesModel SpeciesModel::without_beams() const {
  return SpeciesModel(name_, manifolds_, decays_, {});
}

SpeciesModel load_species(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw SpeciesSchemaError(std::string("species document: ") + e.what());
  }
  if (!doc.is_object()) throw SpeciesSchemaError("species document: expected an object");

  const std::string name = require_string(doc, "name", "species");

  std::vector<Manifold> manifolds;
  const json& mlist = require(doc, "manifolds", "species");
  if (!mlist.is_array()) throw SpeciesSchemaError("manifolds: expected a list");
  for (std::size_t i = 0; i < mlist.size(); ++i) {
    const std::string where = "manifolds[" + std::to_string(i) + "]";
    Manifold mf;
    mf.label = require_string(mlist[i], "label", where);
    try {
      mf.J = HalfInt::parse(require_string(mlist[i], "J", where));
    } catch (const AngularMomentumError& e) {
      throw SpeciesSchemaError(where + ".J: " + e.what());
    }
    manifolds.push_back(std::move(mf));
  }

  auto lookup = [&](const std::string& label, const std::string& where) {
    for (std::size_t k = 0; k < manifolds.size(); ++k) {
      if (manifolds[k].label == label) return static_cast<int>(k);
    }
    throw SpeciesSchemaError(where + ": unknown manifold '" + label + "'");
  };

  std::vector<DecayPath> decays;
  const json& dlist = require(doc, "decays", "species");
  if (!dlist.is_array()) throw SpeciesSchemaError("decays: expected a list");
  for (std::size_t i = 0; i < dlist.size(); ++i) {
    const std::string where = "decays[" + std::to_string(i) + "]";
    DecayPath d;
    d.upper = lookup(require_string(dlist[i], "upper", where), where + ".upper");
    d.lower = lookup(require_string(dlist[i], "lower", where), where + ".lower");
    d.einstein_A = require_number(dlist[i], "einstein_A_per_s", where);
    d.wavelength = require_number(dlist[i], "wavelength_m", where);
    if (find_decay(decays, d.upper, d.lower) >= 0) {
      throw SpeciesSchemaError(where + ": duplicate decay path");
    }
    decays.push_back(d);
  }

  std::vector<Beam> beams;
  if (doc.contains("repump_beams")) {
    const json& blist = doc.at("repump_beams");
    if (!blist.is_array()) throw SpeciesSchemaError("repump_beams: expected a list");
    for (std::size_t i = 0; i < blist.size(); ++i) {
      const std::string where = "repump_beams[" + std::to_string(i) + "]";
      const int upper = lookup(require_string(blist[i], "upper", where), where + ".upper");
      const int lower = lookup(require_string(blist[i], "lower", where), where + ".lower");
      Beam b;
      b.path = find_decay(decays, upper, lower);
      if (b.path < 0) {
        throw SpeciesSchemaError(where + ": no decay path " + manifolds[upper].label + "->" +
                                 manifolds[lower].label + " for the beam to drive");
      }
      const json& pol = require(blist[i], "pol", where);
      if (!pol.is_array() || pol.size() != 3) {
        throw SpeciesSchemaError(where + ".pol: expected [sigma-, pi, sigma+]");
      }
      double norm = 0.0;
      for (std::size_t q = 0; q < 3; ++q) {
        b.polarization[q] = parse_amplitude(pol[q], where + ".pol");
        norm += std::norm(b.polarization[q]);
      }
      if (std::abs(norm - 1.0) > 1e-12) {
        throw SpeciesSchemaError(where + ".pol: polarization is not normalized (|pol|^2 = " +
                                 std::to_string(norm) + ")");
      }
      b.detuning = 2.0 * physical::pi * require_number(blist[i], "detuning_hz", where);
      b.power = require_number(blist[i], "power_w", where);
      b.waist = require_number(blist[i], "waist_m", where);
      beams.push_back(b);
    }
  }

  return SpeciesModel(name, std::move(manifolds), std::move(decays), std::move(beams));
}

SpeciesModel load_species_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open species file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_species(buffer.str());
  } catch (const SpeciesSchemaError& e) {
    throw SpeciesSchemaError(path.string() + ": " + e.what());
  }
}

std::filesystem::path species_path(std::string_view key, const std::filesystem::path& data_dir) {
  return data_dir / (std::string(key) + ".json");
}

const std::vector<std::string>& shipped_species() {
  static const std::vector<std::string> keys{"mg24", "ca40", "sr88", "ba138", "yb174"};
  return keys;
}

Eigen::MatrixXcd CollapseChannel::matrix(int dimension) const {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dimension, dimension);
  c(lower, upper) = amplitude;
  return c;
}

std::vector<CollapseChannel> collapse_operators(const SpeciesModel& model) {
  std::vector<CollapseChannel> channels;
  const auto s_half = model.find_manifold("S1/2");
  const auto p_half = model.find_manifold("P1/2");
  const auto& manifolds = model.manifolds();
  for (std::size_t p = 0; p < model.decays().size(); ++p) {
    const DecayPath& path = model.decays()[p];
    const Manifold& up = manifolds[static_cast<std::size_t>(path.upper)];
    const Manifold& lo = manifolds[static_cast<std::size_t>(path.lower)];
    const double scale = std::sqrt(path.einstein_A * up.J.multiplicity());
    const bool collectable = path.upper == p_half && path.lower == s_half;
    for (int tme = -up.J.twice(); tme <= up.J.twice(); tme += 2) {
      for (int tmg = -lo.J.twice(); tmg <= lo.J.twice(); tmg += 2) {
        const HalfInt me = HalfInt::from_twice(tme);
        const HalfInt mg = HalfInt::from_twice(tmg);
        const HalfInt photon = me - mg;
        if (std::abs(photon.twice()) > 2) continue;
        const double w = wigner3j(lo.J, HalfInt::from_int(1), up.J, mg, photon, -me);
        if (w == 0.0) continue;
        CollapseChannel ch;
        ch.path = static_cast<int>(p);
        ch.lower = model.index(path.lower, mg);
        ch.upper = model.index(path.upper, me);
        ch.amplitude = scale * w;
        ch.q = (tmg - tme) / 2;
        ch.collectable = collectable;
        channels.push_back(ch);
      }
    }
  }
  return channels;
}

double reduced_rabi_frequency(const SpeciesModel& model, const Beam& beam) {
  const DecayPath& path = model.decays().at(static_cast<std::size_t>(beam.path));
  const double gamma = path.einstein_A;
  const double lambda = path.wavelength;
  const double intensity = 2.0 * beam.power / (physical::pi * beam.waist * beam.waist);
  const double saturation = physical::pi * physical::planck * physical::speed_of_light * gamma /
                            (3.0 * lambda * lambda * lambda);
  return gamma * std::sqrt(intensity / (2.0 * saturation));
}

Complex rabi_frequency(const SpeciesModel& model, const Beam& beam, int g, int e) {
  const DecayPath& path = model.decays().at(static_cast<std::size_t>(beam.path));
  const Level& lg = model.levels().at(static_cast<std::size_t>(g));
  const Level& le = model.levels().at(static_cast<std::size_t>(e));
  if (lg.manifold != path.lower || le.manifold != path.upper) return 0.0;
  const int q = (le.m - lg.m).twice() / 2;
  if ((le.m - lg.m).twice() % 2 != 0 || q < -1 || q > 1) return 0.0;
  const Complex pol = beam.polarization[static_cast<std::size_t>(q + 1)];
  if (pol == 0.0) return 0.0;
  const HalfInt Jg = model.manifolds()[static_cast<std::size_t>(lg.manifold)].J;
  const HalfInt Je = model.manifolds()[static_cast<std::size_t>(le.manifold)].J;
  const double w = wigner3j(Jg, HalfInt::from_int(1), Je, lg.m, HalfInt::from_int(q), -le.m);
  return reduced_rabi_frequency(model, beam) * pol * std::sqrt(double(Je.multiplicity())) * w;
}

std::vector<RepumpCoupling> repump_couplings(const SpeciesModel& model) {
  std::vector<RepumpCoupling> couplings;
  for (const Beam& beam : model.beams()) {
    const DecayPath& path = model.decays()[static_cast<std::size_t>(beam.path)];
    const Manifold& up = model.manifolds()[static_cast<std::size_t>(path.upper)];
    const Manifold& lo = model.manifolds()[static_cast<std::size_t>(path.lower)];
    for (int g = lo.offset; g < lo.offset + lo.size(); ++g) {
      for (int e = up.offset; e < up.offset + up.size(); ++e) {
        const Complex omega = rabi_frequency(model, beam, g, e);
        if (omega != 0.0) couplings.push_back({g, e, omega, beam.detuning});
      }
    }
  }
  return couplings;
}

Eigen::MatrixXcd repump_hamiltonian(int dimension, const std::vector<RepumpCoupling>& couplings,
                                    double t) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dimension, dimension);
  for (const RepumpCoupling& c : couplings) {
    const Complex term = c.omega * std::polar(1.0, c.detuning * t);
    h(c.lower, c.upper) += term;
    h(c.upper, c.lower) += std::conj(term);
  }
  return h;
}

Eigen::MatrixXcd repump_hamiltonian(const SpeciesModel& model, double t) {
  return repump_hamiltonian(model.dimension(), repump_couplings(model), t);
}

double highest_beat_frequency(const SpeciesModel& model) {
  double beat = 0.0;
  const auto& beams = model.beams();
  for (std::size_t i = 0; i < beams.size(); ++i) {
    beat = std::max(beat, std::abs(beams[i].detuning));
    for (std::size_t j = i + 1; j < beams.size(); ++j) {
      beat = std::max(beat, std::abs(beams[i].detuning - beams[j].detuning));
    }
  }
  return beat / (2.0 * physical::pi);
}

}  // namespace ejuggle
