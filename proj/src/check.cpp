#include "ejuggle/check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include "ejuggle/angular_momentum.hpp"
#include "ejuggle/dynamics.hpp"
#include "ejuggle/excitation.hpp"
#include "ejuggle/juggle.hpp"

namespace ejuggle::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

const std::vector<std::string> kDipSpecies = {"ca40", "sr88", "ba138"};

bool has_dip(const std::string& key) {
  return std::find(kDipSpecies.begin(), kDipSpecies.end(), key) != kDipSpecies.end();
}

// Largest |a - b| over a scan of 3j orthogonality and symmetry relations.
double wigner_suite_error() {
  const int max_twice = 5;
  double worst = 0.0;
  auto h = HalfInt::from_twice;
  auto phase = [](int twice_sum) { return (twice_sum / 2) % 2 == 0 ? 1.0 : -1.0; };
  for (int j1 = 0; j1 <= max_twice; ++j1) {
    for (int j2 = 0; j2 <= max_twice; ++j2) {
      for (int j3 = std::abs(j1 - j2); j3 <= std::min(j1 + j2, max_twice); j3 += 2) {
        // Permutation and reflection symmetries.
        const double sign = phase(j1 + j2 + j3);
        for (int m1 = -j1; m1 <= j1; m1 += 2) {
          for (int m2 = -j2; m2 <= j2; m2 += 2) {
            const int m3 = -m1 - m2;
            if (std::abs(m3) > j3) continue;
            const double w = wigner3j(h(j1), h(j2), h(j3), h(m1), h(m2), h(m3));
            worst = std::max(worst, std::abs(w - wigner3j(h(j2), h(j3), h(j1), h(m2), h(m3), h(m1))));
            worst = std::max(worst, std::abs(w - wigner3j(h(j3), h(j1), h(j2), h(m3), h(m1), h(m2))));
            worst = std::max(worst, std::abs(w - sign * wigner3j(h(j2), h(j1), h(j3), h(m2), h(m1), h(m3))));
            worst = std::max(worst, std::abs(w - sign * wigner3j(h(j1), h(j3), h(j2), h(m1), h(m3), h(m2))));
            worst = std::max(worst, std::abs(w - sign * wigner3j(h(j1), h(j2), h(j3), h(-m1), h(-m2), h(-m3))));
          }
        }
        // Orthogonality over (m1, m2) for every (j3', m3, m3').
        for (int k3 = std::abs(j1 - j2); k3 <= j1 + j2; k3 += 2) {
          for (int m3 = -j3; m3 <= j3; m3 += 2) {
            for (int n3 = -k3; n3 <= k3; n3 += 2) {
              double sum = 0.0;
              for (int m1 = -j1; m1 <= j1; m1 += 2) {
                for (int m2 = -j2; m2 <= j2; m2 += 2) {
                  sum += wigner3j(h(j1), h(j2), h(j3), h(m1), h(m2), h(m3)) *
                         wigner3j(h(j1), h(j2), h(k3), h(m1), h(m2), h(n3));
                }
              }
              const double expected = (k3 == j3 && n3 == m3) ? 1.0 / (j3 + 1) : 0.0;
              worst = std::max(worst, std::abs(sum - expected));
            }
          }
        }
      }
    }
  }
  return worst;
}

struct ChannelProperties {
  double trace_error = 0.0;
  double choi_min = 0.0;
};

ChannelProperties channel_properties(const PulseChannel& channel, int dim) {
  ChannelProperties p;
  const Eigen::Index n = dim;
  Eigen::MatrixXcd choi = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
      e(i, j) = 1.0;
      const Eigen::MatrixXcd out = channel.apply(e);
      const Complex tr = out.trace();
      p.trace_error = std::max(p.trace_error, std::abs(tr - Complex(i == j ? 1.0 : 0.0)));
      choi.block(i * n, j * n, n, n) = out;
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(choi, Eigen::EigenvaluesOnly);
  p.choi_min = solver.eigenvalues().minCoeff();
  return p;
}

// Indices of local extrema in a sequence, ignoring changes below `noise`.
struct Shape {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

Shape shape_of(const std::vector<double>& v, double noise) {
  Shape s;
  // Collapse plateaus, then classify turning points of the strict sequence.
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (idx.empty() || std::abs(v[k] - v[idx.back()]) > noise) idx.push_back(k);
  }
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double here = v[idx[k]];
    const bool up_left = k == 0 || v[idx[k - 1]] < here;
    const bool up_right = k + 1 == idx.size() || v[idx[k + 1]] < here;
    const bool down_left = k > 0 && v[idx[k - 1]] > here;
    const bool down_right = k + 1 < idx.size() && v[idx[k + 1]] > here;
    if (up_left && up_right) s.maxima.push_back(idx[k]);
    if (down_left && down_right) s.minima.push_back(idx[k]);
  }
  return s;
}

}  // namespace

const std::vector<ReferenceRates>& reference_rates() {
  static const std::vector<ReferenceRates> table = {
      {"mg24", 6540, 950}, {"ca40", 2258, 717}, {"sr88", 2526, 760}, {"ba138", 941, 511}, {"yb174", 3146, 823}};
  return table;
}

std::string status_line(const CriterionResult& r) {
  return format("%s  %d  %-34s %s (%.1f s)", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.summary.c_str(), r.seconds);
}

TableRun run_table(const std::filesystem::path& data_dir, int workers, double f_min) {
  const auto start = Clock::now();
  std::vector<SpeciesModel> models;
  for (const ReferenceRates& ref : reference_rates()) {
    models.push_back(load_species_file(species_path(ref.species, data_dir)));
  }
  std::vector<SweepJob> jobs;
  for (const SpeciesModel& m : models) jobs.push_back({&m, Scenario::ideal()});
  for (const SpeciesModel& m : models) jobs.push_back({&m, Scenario::realistic()});
  std::vector<SweepResult> results = run_sweeps(jobs, workers);

  TableRun table;
  const std::size_t n = models.size();
  table.ideal.assign(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(n));
  table.realistic.assign(results.begin() + static_cast<std::ptrdiff_t>(n), results.end());
  for (std::size_t k = 0; k < n; ++k) {
    table.entries.push_back({reference_rates()[k].species, max_rate_at_fidelity(table.ideal[k], f_min),
                             max_rate_at_fidelity(table.realistic[k], f_min)});
  }
  table.seconds = seconds_since(start);
  return table;
}

void print_table(std::ostream& out, const TableRun& table) {
  out << format("%-8s %26s %26s\n", "species", "ideal: rate/s (ref)", "realistic: rate/s (ref)");
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const TableEntry& e = table.entries[k];
    const ReferenceRates& ref = reference_rates()[k];
    auto cell = [](const std::optional<Optimum>& o, double reference) {
      if (!o) return format("%12s (%6.0f)", "infeasible", reference);
      return format("%7.0f @%5.1fns (%6.0f)", o->rate, o->window * 1e9, reference);
    };
    out << format("%-8s %26s %26s\n", e.species.c_str(), cell(e.ideal, ref.ideal).c_str(),
                  cell(e.realistic, ref.realistic).c_str());
  }
}

CriterionResult check_ideal_rates(const TableRun& table) {
  CriterionResult r{5, "ideal-scenario peak rates", true, "", {}, 0.0};
  double lo = INFINITY, hi = 0.0;
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const ReferenceRates& ref = reference_rates()[k];
    const auto& best = table.entries[k].ideal;
    if (!best) {
      r.passed = false;
      r.details.push_back(ref.species + ": no window reaches fidelity 0.97");
      continue;
    }
    const double floor = ref.species == "ba138" ? 750.0 : 1000.0;
    const double ratio = best->rate / ref.ideal;
    const bool ok = best->rate > floor && ratio >= 0.75 && ratio <= 1.25;
    r.passed = r.passed && ok;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    r.details.push_back(format("%s: %.0f /s at %.2f ns (F %.4f), reference %.0f, ratio %.3f, floor %.0f %s",
                               ref.species.c_str(), best->rate, best->window * 1e9, best->fidelity, ref.ideal,
                               ratio, floor, ok ? "ok" : "OUT"));
  }
  r.summary = format("rate/reference in [%.3f, %.3f], need [0.75, 1.25] and floors", lo, hi);
  return r;
}

CriterionResult check_realistic_rates(const TableRun& table) {
  CriterionResult r{6, "realistic-scenario peak rates", true, "", {}, 0.0};
  double lo = INFINITY, hi = 0.0;
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const ReferenceRates& ref = reference_rates()[k];
    const auto& best = table.entries[k].realistic;
    if (!best) {
      r.passed = false;
      r.details.push_back(ref.species + ": no window reaches fidelity 0.97");
      continue;
    }
    const double ratio = best->rate / ref.realistic;
    const bool ok = best->rate > 250.0 && ratio >= 0.75 && ratio <= 1.25;
    r.passed = r.passed && ok;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    r.details.push_back(format("%s: %.0f /s at %.2f ns (F %.4f), reference %.0f, ratio %.3f %s",
                               ref.species.c_str(), best->rate, best->window * 1e9, best->fidelity,
                               ref.realistic, ratio, ok ? "ok" : "OUT"));
  }
  r.summary = format("rate/reference in [%.3f, %.3f], need [0.75, 1.25] and > 250 /s", lo, hi);
  return r;
}

Suite::Suite(SuiteOptions options) : options_(std::move(options)) {}

const SpeciesModel& Suite::model(const std::string& key) {
  auto it = models_.find(key);
  if (it == models_.end()) {
    it = models_.emplace(key, load_species_file(species_path(key, options_.data_dir))).first;
  }
  return it->second;
}

const TableRun& Suite::table() {
  if (!table_) {
    if (options_.progress) *options_.progress << "running ideal and realistic sweeps for all species...\n";
    table_ = run_table(options_.data_dir, options_.workers);
    if (!options_.out_dir.empty()) {
      for (const auto* set : {&table_->ideal, &table_->realistic}) {
        for (const SweepResult& s : *set) {
          emit_csv(s, options_.out_dir / (s.species + "_" + s.scenario + ".csv"));
        }
        PlotOptions plot;
        plot.title = set->front().scenario + " scenario";
        plot.show_fidelity = set == &table_->ideal;
        emit_plot(*set, options_.out_dir / (set->front().scenario + ".svg"), plot);
      }
    }
  }
  return *table_;
}

CriterionResult Suite::run(int id) {
  const auto start = Clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = kernel_properties(); break;
      case 2: r = expansion(); break;
      case 3: r = fidelity_limits(); break;
      case 4: r = fidelity_plateau(); break;
      case 5: r = ideal_rates(); break;
      case 6: r = realistic_rates(); break;
      case 7: r = curve_shapes(); break;
      case 8: r = table_harness(); break;
      case 9: r = determinism(); break;
      default: throw std::out_of_range("no acceptance criterion " + std::to_string(id));
    }
  } catch (const std::out_of_range&) {
    throw;
  } catch (const std::exception& e) {
    r.passed = false;
    r.summary = std::string("error: ") + e.what();
  }
  r.id = id;
  r.seconds = seconds_since(start);
  return r;
}

CriterionResult Suite::kernel_properties() {
  CriterionResult r{1, "physics-kernel properties", true, "", {}, 0.0};
  auto note = [&r](bool ok, const std::string& text) {
    r.passed = r.passed && ok;
    r.details.push_back(text + (ok ? "" : "  <- FAIL"));
  };

  // Full-species shot sequences with per-step monitoring.
  double drift = 0.0, herm = 0.0, min_eig = INFINITY;
  for (const ReferenceRates& ref : reference_rates()) {
    const SpeciesModel& m = model(ref.species);
    for (bool realistic : {false, true}) {
      ShotConfig c;
      c.window = 2.0 * m.p_half_lifetime();
      c.latency = realistic ? 100e-9 : 0.0;
      c.sigma_beta = realistic ? std::sqrt(0.02) : 0.0;
      c.burn_in_shots = 20;
      c.evolve.monitor_every_step = true;
      const ShotRun run = run_shots(m, c);
      drift = std::max(drift, run.max_trace_drift);
      herm = std::max(herm, run.max_hermiticity_error);
      min_eig = std::min(min_eig, run.min_eigenvalue);
    }
  }
  note(drift < 1e-8, format("max |Tr rho - 1| over all species runs: %.2e (< 1e-8)", drift));
  note(herm < 1e-10, format("max |rho - rho^dagger| per step: %.2e (< 1e-10)", herm));
  note(min_eig >= -1e-8, format("min eigenvalue: %.2e (>= -1e-8)", min_eig));

  // Two-level decay against exp(-gamma t), with the emitted flux.
  {
    const double gamma = 1.0 / 7e-9;
    CollapseChannel c;
    c.lower = 0;
    c.upper = 1;
    c.amplitude = std::sqrt(gamma);
    c.collectable = true;
    const LindbladGenerator gen(2, {}, {c});
    double worst = 0.0;
    for (double t : {1e-9, 5e-9, 2e-8, 5e-8}) {
      const EvolutionResult e = evolve(DensityOperator::pure(2, 1), t, gen);
      const double expect = std::exp(-gamma * t);
      worst = std::max(worst, std::abs(e.final_state.population(1) - expect));
      worst = std::max(worst, std::abs(e.fluxes.total() - (1.0 - expect)));
    }
    note(worst < 1e-6, format("two-level decay and flux vs exp(-gamma t): %.2e (< 1e-6)", worst));
  }

  // Flux balance: emitted flux equals lost excited population (no beams).
  {
    double worst = 0.0;
    for (const std::string key : {"ca40", "yb174"}) {
      const SpeciesModel bare = model(key).without_beams();
      const LindbladGenerator gen(bare);
      std::vector<int> excited;
      for (std::size_t k = 0; k < bare.manifolds().size(); ++k) {
        const Manifold& mf = bare.manifolds()[k];
        if (mf.label.starts_with("P") || mf.label.starts_with("B")) {
          for (int i = 0; i < mf.size(); ++i) excited.push_back(mf.offset + i);
        }
      }
      const DensityOperator rho0 = DensityOperator::mixed(bare.dimension(), excited);
      const EvolutionResult e = evolve(rho0, 3.0 * bare.p_half_lifetime(), gen);
      double left = 0.0;
      for (int i : excited) left += e.final_state.population(i);
      worst = std::max(worst, std::abs(e.fluxes.total() - (1.0 - left)));
    }
    note(worst < 1e-6, format("flux vs excited-population loss: %.2e (< 1e-6)", worst));
  }

  const double w3j = wigner_suite_error();
  note(w3j < 1e-12, format("3j orthogonality/symmetry, j <= 5/2: %.2e (< 1e-12)", w3j));

  double trace_err = 0.0, choi_min = INFINITY;
  for (const std::string key : {"mg24", "ca40"}) {
    const SpeciesModel& m = model(key);
    const PulseBlock block = pulse_block(m);
    for (Handedness h : {Handedness::right, Handedness::left}) {
      for (bool cross : {false, true}) {
        const ChannelProperties p =
            channel_properties(PulseChannel(block, h, std::sqrt(0.02), 21, cross), m.dimension());
        trace_err = std::max(trace_err, p.trace_error);
        choi_min = std::min(choi_min, p.choi_min);
      }
    }
  }
  note(trace_err < 1e-10, format("pulse channel trace preservation: %.2e (< 1e-10)", trace_err));
  note(choi_min >= -1e-9, format("pulse channel Choi min eigenvalue: %.2e (>= -1e-9)", choi_min));

  r.summary = r.passed ? "all kernel tolerances met" : "kernel tolerance violated";
  return r;
}

CriterionResult Suite::expansion() {
  CriterionResult r{2, "wrong-excitation expansion", true, "", {}, 0.0};
  const PulseBlock block = pulse_block(model("mg24"));
  const double sigma = std::sqrt(0.02);
  const double p = PulseChannel(block, Handedness::right, sigma).wrong_transfer();
  const bool value_ok = std::abs(p - 0.01234) <= 0.0005;
  r.details.push_back(format("sigma_beta = sqrt(0.02): wrong excitation %.6f, target 0.01234 +- 0.0005", p));

  // Least-squares slope of log|residual| against log sigma.
  const int n = 9;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    const double s = 0.02 * std::pow(10.0, static_cast<double>(k) / (n - 1));
    const double law = wrong_excitation_probability(s);
    const double residual = PulseChannel(block, Handedness::right, s).wrong_transfer() - law;
    const double x = std::log(s), y = std::log(std::abs(residual));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    r.details.push_back(format("sigma %.4f: residual %.3e", s, residual));
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const bool slope_ok = std::abs(slope - 4.0) <= 0.1;
  r.passed = value_ok && slope_ok;
  r.summary = format("p = %.5f (0.01234 +- 0.0005); residual slope %.3f (4 +- 0.1)", p, slope);
  return r;
}

CriterionResult Suite::fidelity_limits() {
  CriterionResult r{3, "ideal fidelity limits", true, "", {}, 0.0};
  double worst_short = 0.0, worst_long = 1.0;
  for (const ReferenceRates& ref : reference_rates()) {
    const auto start = Clock::now();
    const SpeciesModel& m = model(ref.species);
    const double tau = m.p_half_lifetime();
    const Scenario ideal = Scenario::ideal();
    const REGEstimate short_w = estimate_reg(m, ideal.shot_config(tau / 10.0));
    const REGEstimate long_w = estimate_reg(m, ideal.shot_config(10.0 * tau));
    const double elapsed = seconds_since(start);
    const bool ok = std::abs(short_w.fidelity - 0.5) <= 0.02 && long_w.fidelity >= 0.999 && elapsed < 60.0;
    r.passed = r.passed && ok;
    worst_short = std::max(worst_short, std::abs(short_w.fidelity - 0.5));
    worst_long = std::min(worst_long, long_w.fidelity);
    r.details.push_back(format("%s: tau %.2f ns, F(tau/10) %.4f, F(10 tau) %.6f, %.1f s %s", ref.species.c_str(),
                               tau * 1e9, short_w.fidelity, long_w.fidelity, elapsed, ok ? "ok" : "OUT"));
  }
  r.summary = format("max |F(tau/10) - 0.5| %.4f (<= 0.02), min F(10 tau) %.6f (>= 0.999)", worst_short,
                     worst_long);
  return r;
}

CriterionResult Suite::fidelity_plateau() {
  CriterionResult r{4, "realistic fidelity plateau", true, "", {}, 0.0};
  const TableRun& t = table();
  double lo = 1.0, hi = 0.0;
  for (std::size_t k = 0; k < t.realistic.size(); ++k) {
    const SweepResult& s = t.realistic[k];
    const double tau = model(reference_rates()[k].species).p_half_lifetime();
    double slo = 1.0, shi = 0.0;
    int used = 0;
    for (const SweepRow& row : s.rows) {
      if (row.window < 10.0 * tau) continue;
      if (!row.ok()) {
        r.passed = false;
        r.details.push_back(s.species + ": failed point " + row.error);
        continue;
      }
      slo = std::min(slo, row.fidelity);
      shi = std::max(shi, row.fidelity);
      ++used;
    }
    const bool ok = used > 0 && slo >= 0.979 && shi <= 0.991;
    r.passed = r.passed && ok;
    lo = std::min(lo, slo);
    hi = std::max(hi, shi);
    r.details.push_back(format("%s: F in [%.5f, %.5f] over %d windows >= 10 tau %s", s.species.c_str(), slo, shi,
                               used, ok ? "ok" : "OUT"));
  }
  r.summary = format("plateau fidelity in [%.4f, %.4f], need within [0.979, 0.991]", lo, hi);
  return r;
}

CriterionResult Suite::ideal_rates() { return check_ideal_rates(table()); }

CriterionResult Suite::realistic_rates() { return check_realistic_rates(table()); }

CriterionResult Suite::curve_shapes() {
  CriterionResult r{7, "ideal curve shapes", true, "", {}, 0.0};
  const TableRun& t = table();
  std::vector<std::string> verdicts;
  for (std::size_t k = 0; k < t.ideal.size(); ++k) {
    const SweepResult& s = t.ideal[k];
    const std::string& key = reference_rates()[k].species;
    std::vector<double> rate;
    bool failed = false;
    for (const SweepRow& row : s.rows) {
      failed = failed || !row.ok();
      rate.push_back(row.rate);
    }
    if (failed || rate.empty()) {
      r.passed = false;
      r.details.push_back(key + ": sweep has failed points");
      continue;
    }
    const double peak = *std::max_element(rate.begin(), rate.end());
    const auto global = static_cast<std::size_t>(std::max_element(rate.begin(), rate.end()) - rate.begin());
    const Shape shape = shape_of(rate, 1e-6 * peak);
    bool ok;
    std::string what;
    if (has_dip(key)) {
      const bool dip = std::any_of(shape.minima.begin(), shape.minima.end(), [&](std::size_t i) { return i < global; });
      ok = dip;
      what = dip ? "local minimum before the peak" : "no dip before the peak";
    } else {
      ok = shape.maxima.size() == 1 && shape.minima.empty();
      what = format("%zu maxima, %zu minima", shape.maxima.size(), shape.minima.size());
    }
    r.passed = r.passed && ok;
    r.details.push_back(format("%s: peak %.0f /s at %.2f ns; %s %s", key.c_str(), peak, s.rows[global].window * 1e9,
                               what.c_str(), ok ? "ok" : "OUT"));
    verdicts.push_back(key + (ok ? " ok" : " OUT"));
  }
  std::string joined;
  for (const std::string& v : verdicts) joined += (joined.empty() ? "" : ", ") + v;
  r.summary = "dip for Ca/Sr/Ba, unimodal Mg/Yb: " + joined;
  return r;
}

CriterionResult Suite::table_harness() {
  CriterionResult r{8, "Table I harness", true, "", {}, 0.0};
  const TableRun& t = table();
  int feasible = 0;
  for (const TableEntry& e : t.entries) feasible += (e.ideal ? 1 : 0) + (e.realistic ? 1 : 0);
  std::ostringstream text;
  print_table(text, t);
  std::string line;
  std::istringstream lines(text.str());
  while (std::getline(lines, line)) r.details.push_back(line);
  const CriterionResult c5 = check_ideal_rates(t);
  const CriterionResult c6 = check_realistic_rates(t);
  r.details.push_back(std::string("criterion 5 evaluated: ") + (c5.passed ? "pass" : "fail"));
  r.details.push_back(std::string("criterion 6 evaluated: ") + (c6.passed ? "pass" : "fail"));
  r.passed = feasible == 10 && t.seconds < 600.0;
  r.summary = format("%d/10 cells, %.0f s with %d worker(s) (< 600 s)", feasible, t.seconds, options_.workers);
  return r;
}

CriterionResult Suite::determinism() {
  CriterionResult r{9, "determinism and parallel speedup", true, "", {}, 0.0};
  const SpeciesModel& m = model("yb174");
  WindowGrid grid;
  grid.count = 32;
  const Scenario scenario = Scenario::realistic(grid);

  auto timed = [&](int workers, std::string& csv) {
    const auto start = Clock::now();
    const SweepResult s = run_sweep(m, scenario, workers);
    const double elapsed = seconds_since(start);
    std::ostringstream out;
    write_csv(out, s);
    csv = out.str();
    return elapsed;
  };
  std::string one, two, four;
  const double t1 = timed(1, one);
  const double t2 = timed(2, two);
  const double t4 = timed(4, four);
  const bool identical = one == two && one == four;
  const double speedup = t1 / t4;
  const unsigned cpus = std::thread::hardware_concurrency();
  r.details.push_back(format("1 worker %.2f s, 2 workers %.2f s, 4 workers %.2f s", t1, t2, t4));
  r.details.push_back(format("hardware threads reported: %u", cpus));
  r.passed = identical && speedup >= 2.0;
  r.summary = format("CSV identical across 1/2/4 workers: %s; speedup at 4 workers %.2fx (>= 2x)",
                     identical ? "yes" : "NO", speedup);
  return r;
}

}  // namespace ejuggle::acceptance
