#include "ejuggle/juggle.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace ejuggle {

void ShotConfig::validate() const {
  if (!(window > 0.0)) throw std::invalid_argument("shot config: window must be positive");
  if (!(latency >= 0.0)) throw std::invalid_argument("shot config: latency must be non-negative");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("shot config: eta must lie in (0, 1]");
  if (!(sigma_beta >= 0.0)) throw std::invalid_argument("shot config: sigma_beta must be non-negative");
  if (schedule.prep_pulses < 1) throw std::invalid_argument("shot config: prep_pulses must be >= 1");
  if (max_shots < 1 || burn_in_shots < 0) throw std::invalid_argument("shot config: bad shot counts");
}

ChannelPair make_channels(const PulseBlock& block, const ShotConfig& config) {
  return {PulseChannel(block, Handedness::right, config.sigma_beta, config.quadrature_order,
                       config.retain_cross_terms),
          PulseChannel(block, Handedness::left, config.sigma_beta, config.quadrature_order,
                       config.retain_cross_terms)};
}

Eigen::VectorXd hermitian_coordinates(const Eigen::MatrixXcd& m) {
  const Eigen::Index d = m.rows();
  Eigen::VectorXd v(d * d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) v[k++] = m(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v[k++] = m(i, j).real();
      v[k++] = m(i, j).imag();
    }
  }
  return v;
}

Eigen::MatrixXcd hermitian_from_coordinates(const Eigen::VectorXd& v, int dim) {
  const Eigen::Index d = dim;
  if (v.size() != d * d) throw std::invalid_argument("hermitian_from_coordinates: size mismatch");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = v[k++];
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      m(i, j) = {v[k], v[k + 1]};
      m(j, i) = std::conj(m(i, j));
      k += 2;
    }
  }
  return m;
}

std::optional<Eigen::MatrixXcd> fixed_point(const Eigen::MatrixXd& map, int dim) {
  const Eigen::Index n = map.rows();
  if (map.cols() != n || n != static_cast<Eigen::Index>(dim) * dim) {
    throw std::invalid_argument("fixed_point: map size does not match dimension");
  }
  // (M - I) x = 0 together with Tr x = 1, solved in the least-squares sense.
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = map - Eigen::MatrixXd::Identity(n, n);
  a.row(n).setZero();
  a.row(n).head(dim).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b[n] = 1.0;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n) return std::nullopt;
  const Eigen::VectorXd x = qr.solve(b);
  if ((a * x - b).norm() > 1e-9) return std::nullopt;
  Eigen::MatrixXcd rho = hermitian_from_coordinates(x, dim);
  const DensityOperator candidate = DensityOperator::unchecked(rho);
  if (candidate.min_eigenvalue() < -DensityTolerances{}.positivity) return std::nullopt;
  return rho;
}

namespace {

struct ShotOutcome {
  Eigen::MatrixXcd rho;
  double from_plus = 0.0;
  double from_minus = 0.0;
};

}  // namespace

ShotRun run_shots(const SpeciesModel& model, const ShotConfig& config, const ChannelPair& channels) {
  config.validate();
  const PulseBlock block = pulse_block(model);
  const LindbladGenerator generator(model);
  const auto& chans = generator.channels();
  const int dim = model.dimension();

  // Collectable channel indices grouped by source P1/2 sublevel.
  std::vector<std::size_t> from_plus, from_minus;
  for (std::size_t c = 0; c < chans.size(); ++c) {
    if (!chans[c].collectable) continue;
    if (chans[c].upper == block.p_plus) from_plus.push_back(c);
    if (chans[c].upper == block.p_minus) from_minus.push_back(c);
  }
  auto summed = [](const Eigen::VectorXd& flux, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t c : idx) s += flux[static_cast<Eigen::Index>(c)];
    return s;
  };

  ShotRun run;
  run.period = config.schedule.period();
  run.burn_in = config.burn_in_shots;
  run.records.reserve(static_cast<std::size_t>(config.max_shots));

  auto track = [&run](const EvolutionResult& r) {
    run.max_trace_drift = std::max(run.max_trace_drift, r.max_trace_drift);
    run.min_eigenvalue = std::min(run.min_eigenvalue, r.min_eigenvalue);
    run.max_hermiticity_error = std::max(run.max_hermiticity_error, r.max_hermiticity_error);
  };

  // The shot map is the same every period when states are viewed in a frame
  // that makes the Hamiltonian constant, provided the pulse commutes with the
  // frame rotation, i.e. the frame phase is equal on the pulse sublevels.
  const std::optional<Eigen::VectorXd>& phi = generator.static_frame();
  const bool framed = [&] {
    if (!phi) return false;
    const double p0 = (*phi)[block.s_minus];
    for (int k : {block.s_plus, block.p_minus, block.p_plus}) {
      if ((*phi)[k] != p0) return false;
    }
    return true;
  }();
  run.framed = framed;
  auto view = [&](const Eigen::MatrixXcd& m, double t) { return framed ? to_frame(m, *phi, t) : m; };
  auto unview = [&](const Eigen::MatrixXcd& m, double t) { return framed ? from_frame(m, *phi, t) : m; };

  // One pulse, window and latency starting at beam time `clock`.
  auto advance = [&](const Eigen::MatrixXcd& in, long shot, double& clock, bool monitored) {
    const Handedness h = config.schedule.handedness(shot);
    DensityOperator rho = DensityOperator::unchecked(in);
    if (config.pulses_enabled) rho = apply_birefringent_pulse(rho, channels[h]);

    EvolutionResult window = evolve(rho, config.window, generator, config.evolve, clock);
    clock += config.window;
    if (monitored) track(window);
    ShotOutcome out;
    out.from_plus = summed(window.fluxes.flux, from_plus);
    out.from_minus = summed(window.fluxes.flux, from_minus);
    rho = std::move(window.final_state);

    if (config.latency > 0.0) {
      EvolutionResult idle = evolve(rho, config.latency, generator, config.evolve, clock);
      clock += config.latency;
      if (monitored) track(idle);
      rho = std::move(idle.final_state);
    }
    out.rho = rho.matrix();
    return out;
  };

  // One-period map in frame coordinates, starting at beam time `start`.
  auto period_map = [&](long first, double start) {
    const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
    Eigen::MatrixXd map(n, n);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      unit[k] = 1.0;
      Eigen::MatrixXcd x = unview(hermitian_from_coordinates(unit, dim), start);
      unit[k] = 0.0;
      double c = start;
      for (long s = first; s < first + run.period; ++s) x = advance(x, s, c, false).rho;
      map.col(k) = hermitian_coordinates(view(x, c));
    }
    return map;
  };

  DensityOperator initial = config.initial_state
                                ? *config.initial_state
                                : DensityOperator::mixed(dim, std::array{block.s_minus, block.s_plus});
  Eigen::MatrixXcd rho = initial.matrix();
  run.min_eigenvalue = initial.min_eigenvalue();

  // Once the framed state repeats to round-off, later shots are copies of the
  // ones a period earlier.
  const bool may_reuse = framed && config.reuse_tol > 0.0;
  const bool may_jump = framed && config.solve_fixed_point;
  const double map_cost_periods = static_cast<double>(dim) * dim;
  bool repeating = false;
  bool jump_tried = false;
  std::vector<double> distances;  // same-phase distance per shot, NaN before one period

  double clock = 0.0;
  for (long shot = 0; shot < config.max_shots; ++shot) {
    const Handedness h = config.schedule.handedness(shot);
    if (repeating) {
      ShotRecord record = run.records[static_cast<std::size_t>(shot - run.period)];
      clock += config.window + config.latency;
      rho = unview(view(record.rho_after.matrix(), record.time), clock);
      record.index = shot;
      record.time = clock;
      record.rho_after = DensityOperator::unchecked(rho);
      run.records.push_back(std::move(record));
      run.last_distance = 0.0;
      if (shot + 1 >= config.burn_in_shots + run.period) {
        run.converged = true;
        break;
      }
      continue;
    }

    ShotOutcome out = advance(rho, shot, clock, true);
    rho = std::move(out.rho);
    run.records.push_back({shot, h, config.schedule.detected(shot),
                           h == Handedness::right ? out.from_plus : out.from_minus,
                           h == Handedness::right ? out.from_minus : out.from_plus,
                           DensityOperator::unchecked(rho), clock});

    if (shot < run.period) {
      distances.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const ShotRecord& earlier = run.records[static_cast<std::size_t>(shot - run.period)];
    run.last_distance = trace_distance(view(rho, clock), view(earlier.rho_after.matrix(), earlier.time));
    distances.push_back(run.last_distance);
    if (run.last_distance < config.steady_tol) {
      if (run.shots_to_steady < 0) run.shots_to_steady = shot;
    } else {
      run.shots_to_steady = -1;
    }
    if (run.shots_to_steady >= 0 && shot + 1 >= config.burn_in_shots + run.period) {
      run.converged = true;
      break;
    }
    if (may_reuse && run.last_distance < config.reuse_tol) {
      repeating = true;
      continue;
    }

    // Geometric extrapolation of the same-phase distance.
    if (may_jump && !jump_tried && shot >= 4 * run.period && run.last_distance >= config.steady_tol) {
      const double previous = distances[static_cast<std::size_t>(shot - run.period)];
      const double ratio = run.last_distance / previous;
      const double periods_left =
          ratio < 1.0 ? std::log(config.steady_tol / run.last_distance) / std::log(ratio)
                      : std::numeric_limits<double>::infinity();
      if (periods_left > map_cost_periods) {
        jump_tried = true;
        if (auto fixed = fixed_point(period_map(shot + 1, clock), dim)) {
          rho = unview(*fixed, clock);
          run.fixed_point_jump = shot + 1;
        }
      }
    }
  }
  return run;
}

ShotRun run_shots(const SpeciesModel& model, const ShotConfig& config) {
  return run_shots(model, config, make_channels(pulse_block(model), config));
}

SteadyStateStats steady_state_stats(const ShotRun& run) {
  if (!run.converged) {
    char distance[32];
    std::snprintf(distance, sizeof distance, "%.3e", run.last_distance);
    throw NonConvergenceError(std::string("shot sequence did not reach steady state (last same-phase distance ") +
                              distance + " after " + std::to_string(run.records.size()) + " shots)");
  }
  const long total = static_cast<long>(run.records.size());
  const long available = total - run.burn_in;
  const long periods = available / run.period;
  if (periods < 1) {
    throw NonConvergenceError("no complete schedule period after burn-in");
  }
  SteadyStateStats stats;
  std::array<long, 2> count{};
  double fidelity_sum = 0.0;
  long fidelity_count = 0;
  for (long k = total - periods * run.period; k < total; ++k) {
    const ShotRecord& r = run.records[static_cast<std::size_t>(k)];
    if (!r.detected) continue;
    const std::size_t side = r.handedness == Handedness::right ? 0 : 1;
    stats.p_r += r.p_r;
    stats.p_w += r.p_w;
    stats.p_r_by_handedness[side] += r.p_r;
    stats.p_w_by_handedness[side] += r.p_w;
    ++count[side];
    ++stats.shots_averaged;
    if (r.p_r + r.p_w > 0.0) {
      fidelity_sum += fidelity(r.p_r, r.p_w);
      ++fidelity_count;
    }
  }
  if (stats.shots_averaged == 0) throw NonConvergenceError("no detected shots after burn-in");
  stats.p_r /= static_cast<double>(stats.shots_averaged);
  stats.p_w /= static_cast<double>(stats.shots_averaged);
  for (std::size_t side = 0; side < 2; ++side) {
    if (count[side] > 0) {
      stats.p_r_by_handedness[side] /= static_cast<double>(count[side]);
      stats.p_w_by_handedness[side] /= static_cast<double>(count[side]);
    }
  }
  stats.p_gamma = stats.p_r + stats.p_w;
  stats.mean_shot_fidelity = fidelity_count > 0 ? fidelity_sum / fidelity_count : 0.0;
  return stats;
}

double fidelity(double p_r, double p_w) {
  const double total = p_r + p_w;
  if (!(total > 0.0)) {
    throw UndefinedFidelityError("fidelity undefined when p_r + p_w = 0");
  }
  return 1.0 - 2.0 * p_r * p_w / (total * total);
}

double herald_probability(double p_gamma, double eta) {
  if (p_gamma < 0.0 || p_gamma > 1.0 || eta < 0.0 || eta > 1.0) {
    throw std::invalid_argument("herald_probability: inputs must lie in [0, 1]");
  }
  const double detected = eta * p_gamma;
  return 0.5 * detected * detected;
}

double reg_rate(double p_herald, double window, double latency) {
  const double attempt = window + latency;
  if (!(attempt > 0.0)) throw std::invalid_argument("reg_rate: attempt time must be positive");
  return p_herald / attempt;
}

REGEstimate estimate_reg(const ShotRun& run, const ShotConfig& config) {
  const SteadyStateStats stats = steady_state_stats(run);
  REGEstimate est;
  est.p_r = stats.p_r;
  est.p_w = stats.p_w;
  est.p_gamma = stats.p_gamma;
  est.fidelity = fidelity(stats.p_r, stats.p_w);
  const int spa = config.schedule.shots_per_attempt();
  est.rate = reg_rate(herald_probability(stats.p_gamma, config.eta), spa * config.window,
                      spa * config.latency);
  est.shots_to_steady = run.shots_to_steady;
  est.shots_run = static_cast<long>(run.records.size());
  est.mean_shot_fidelity = stats.mean_shot_fidelity;
  return est;
}

REGEstimate estimate_reg(const SpeciesModel& model, const ShotConfig& config) {
  return estimate_reg(run_shots(model, config), config);
}

}  // namespace ejuggle
