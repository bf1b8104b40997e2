#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "ejuggle/juggle.hpp"

using namespace ejuggle;

namespace {

const SpeciesModel& model(const std::string& key) {
  static std::map<std::string, SpeciesModel> cache;
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, load_species_file(species_path(key))).first;
  return it->second;
}

ShotConfig realistic(double window) {
  ShotConfig c;
  c.window = window;
  c.latency = 100e-9;
  c.sigma_beta = std::sqrt(0.02);
  return c;
}

Eigen::MatrixXcd random_hermitian(int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  return a + a.adjoint();
}

}  // namespace

TEST_CASE("fidelity formula") {
  CHECK(fidelity(1.0, 0.0) == 1.0);
  CHECK(fidelity(0.3, 0.3) == doctest::Approx(0.5));
  const double p_r = 0.6, p_w = 0.4 * 0.0123;
  CHECK(fidelity(p_r, p_w) == doctest::Approx(1.0 - 2.0 * p_r * p_w / ((p_r + p_w) * (p_r + p_w))));
  CHECK(fidelity(p_r, p_w) == doctest::Approx(0.9839).epsilon(1e-4));
  CHECK(fidelity(0.2, 0.7) == doctest::Approx(fidelity(0.7, 0.2)));
  CHECK_THROWS_AS(fidelity(0.0, 0.0), UndefinedFidelityError);
}

TEST_CASE("herald probability and rate arithmetic") {
  CHECK(herald_probability(0.6, 0.025) == doctest::Approx(1.125e-4).epsilon(1e-12));
  CHECK(herald_probability(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(herald_probability(1.2, 0.025), std::invalid_argument);
  CHECK_THROWS_AS(herald_probability(0.5, -0.1), std::invalid_argument);
  CHECK(reg_rate(1e-4, 100e-9, 0.0) == doctest::Approx(1000.0));
  CHECK(reg_rate(1e-4, 50e-9, 50e-9) == doctest::Approx(1000.0));
  CHECK(reg_rate(1e-4, 100e-9, 100e-9) == doctest::Approx(500.0));
  CHECK_THROWS_AS(reg_rate(1e-4, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("schedule patterns") {
  Schedule alt;
  CHECK(alt.period() == 2);
  CHECK(alt.handedness(0) == Handedness::right);
  CHECK(alt.handedness(1) == Handedness::left);
  CHECK(alt.handedness(6) == Handedness::right);
  CHECK(alt.detected(0));
  CHECK(alt.detected(1));
  CHECK(alt.shots_per_attempt() == 1);

  Schedule three{3, Handedness::left};
  CHECK(three.period() == 4);
  const Handedness expected[] = {Handedness::left, Handedness::left, Handedness::left, Handedness::right};
  for (long s = 0; s < 8; ++s) {
    CHECK(three.handedness(s) == expected[s % 4]);
    CHECK(three.detected(s) == (s % 4 == 3));
  }
  CHECK(three.shots_per_attempt() == 4);
}

TEST_CASE("shot config validation") {
  ShotConfig c = realistic(10e-9);
  CHECK_NOTHROW(c.validate());
  c.window = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = realistic(10e-9);
  c.eta = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = realistic(10e-9);
  c.schedule.prep_pulses = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = realistic(10e-9);
  c.latency = -1e-9;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("Hermitian coordinates round-trip") {
  for (int d : {1, 2, 5}) {
    const Eigen::MatrixXcd h = random_hermitian(d, static_cast<unsigned>(d));
    const Eigen::VectorXd v = hermitian_coordinates(h);
    CHECK(v.size() == d * d);
    CHECK((hermitian_from_coordinates(v, d) - h).cwiseAbs().maxCoeff() < 1e-15);
    for (int k = 0; k < d; ++k) CHECK(v[k] == h(k, k).real());
  }
}

TEST_CASE("fixed point of a known map") {
  // Amplitude damping with strength 0.3 plus a dephasing factor on a qubit.
  const int d = 2;
  Eigen::MatrixXd map(d * d, d * d);
  auto channel = [](const Eigen::MatrixXcd& r) {
    Eigen::MatrixXcd out(2, 2);
    out(1, 1) = 0.7 * r(1, 1);
    out(0, 0) = r(0, 0) + 0.3 * r(1, 1);
    out(0, 1) = std::sqrt(0.7) * 0.9 * r(0, 1);
    out(1, 0) = std::conj(out(0, 1));
    return out;
  };
  for (int k = 0; k < d * d; ++k) {
    map.col(k) = hermitian_coordinates(channel(hermitian_from_coordinates(Eigen::VectorXd::Unit(d * d, k), d)));
  }
  const auto fp = fixed_point(map, d);
  REQUIRE(fp.has_value());
  CHECK(std::abs((*fp)(0, 0) - 1.0) < 1e-12);
  CHECK(fp->cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));
  // The identity map has no unique fixed point.
  CHECK_FALSE(fixed_point(Eigen::MatrixXd::Identity(d * d, d * d), d).has_value());
}

TEST_CASE("every shipped species reaches steady state with valid states") {
  for (const std::string& key : shipped_species()) {
    CAPTURE(key);
    const SpeciesModel& m = model(key);
    ShotConfig c = realistic(2.0 * m.p_half_lifetime());
    const ShotRun run = run_shots(m, c);
    CHECK(run.converged);
    CHECK(run.framed);
    CHECK(run.last_distance < c.steady_tol);
    CHECK(static_cast<long>(run.records.size()) <= c.max_shots);
    CHECK(run.max_trace_drift < 1e-8);
    CHECK(run.min_eigenvalue >= -1e-8);
    const SteadyStateStats s = steady_state_stats(run);
    CHECK(s.p_r > 0.1);
    CHECK(s.p_w > 0.0);
    CHECK(s.p_gamma == doctest::Approx(s.p_r + s.p_w));
    // Continuous clock.
    const double attempt = c.window + c.latency;
    CHECK(run.records[5].time == doctest::Approx(6 * attempt).epsilon(1e-12));
  }
}

TEST_CASE("starting handedness does not change the averages") {
  const SpeciesModel& m = model("ca40");
  ShotConfig c = realistic(25e-9);
  const REGEstimate r = estimate_reg(m, c);
  c.schedule.start = Handedness::left;
  const REGEstimate l = estimate_reg(m, c);
  const double tol = c.steady_tol * m.dimension();
  CHECK(std::abs(r.p_r - l.p_r) < tol);
  CHECK(std::abs(r.p_w - l.p_w) < tol);
}

TEST_CASE("R and L shots agree when the model is mirror symmetric") {
  // Mg+ has no repump beams; the D beam pairs of the other species are not
  // symmetric under m -> -m.
  const SpeciesModel& m = model("mg24");
  const SteadyStateStats s = steady_state_stats(run_shots(m, realistic(8e-9)));
  const double tol = 1e-8 * m.dimension();
  CHECK(std::abs(s.p_r_by_handedness[0] - s.p_r_by_handedness[1]) < tol);
  CHECK(std::abs(s.p_w_by_handedness[0] - s.p_w_by_handedness[1]) < tol);
}

TEST_CASE("ideal pulses: fidelity limits in the window") {
  for (const char* key : {"mg24", "ca40"}) {
    CAPTURE(key);
    const SpeciesModel& m = model(key);
    const double tau = m.p_half_lifetime();
    ShotConfig c;
    c.latency = 100e-9;
    c.window = 40.0 * tau;
    const double asymptote = estimate_reg(m, c).fidelity;
    for (double k : {10.0, 15.0, 20.0}) {
      c.window = k * tau;
      CHECK(std::abs(estimate_reg(m, c).fidelity - asymptote) < 1e-3);
    }
    c.window = tau / 10.0;
    c.latency = 0.0;
    CHECK(std::abs(estimate_reg(m, c).fidelity - 0.5) < 0.02);
  }
}

TEST_CASE("rate scales with the attempt time") {
  const SpeciesModel& m = model("mg24");
  ShotConfig c = realistic(20e-9);
  const REGEstimate e = estimate_reg(m, c);
  CHECK(e.rate == doctest::Approx(0.5 * std::pow(c.eta * e.p_gamma, 2) / (c.window + c.latency)));
}

TEST_CASE("extra preparation pulses lower the wrong-excitation share") {
  const SpeciesModel& m = model("ca40");
  double previous = 1.0;
  for (int n = 1; n <= 4; ++n) {
    ShotConfig c = realistic(30e-9);
    c.schedule.prep_pulses = n;
    const REGEstimate e = estimate_reg(m, c);
    const double share = e.p_w / (e.p_r + e.p_w);
    CAPTURE(n);
    CHECK(share < previous);
    previous = share;
    if (n > 1) {
      const double attempt = (n + 1) * (c.window + c.latency);
      CHECK(e.rate == doctest::Approx(herald_probability(e.p_gamma, c.eta) / attempt));
    }
  }
}

TEST_CASE("shortcuts reproduce plain iteration") {
  const SpeciesModel& m = model("ca40");
  ShotConfig fast = realistic(30e-9);
  ShotConfig plain = fast;
  plain.reuse_tol = 0.0;
  plain.solve_fixed_point = false;
  const REGEstimate a = estimate_reg(m, fast);
  const REGEstimate b = estimate_reg(m, plain);
  CHECK(std::abs(a.p_r - b.p_r) < 1e-8);
  CHECK(std::abs(a.p_w - b.p_w) < 1e-8);
}

TEST_CASE("fixed-point jump lands on the iterated steady state") {
  const SpeciesModel& m = model("ca40");
  ShotConfig fast;
  fast.latency = 0.0;
  fast.window = 1e-9;
  // Plain iteration contracts by ~0.98 per period here; a long burn-in keeps
  // the transient out of its average.
  ShotConfig plain = fast;
  plain.solve_fixed_point = false;
  plain.burn_in_shots = 3000;
  plain.max_shots = 6000;
  const ShotRun jumped = run_shots(m, fast);
  CHECK(jumped.fixed_point_jump > 0);
  const ShotRun iterated = run_shots(m, plain);
  REQUIRE(iterated.converged);
  CHECK(iterated.fixed_point_jump == -1);
  const SteadyStateStats a = steady_state_stats(jumped);
  const SteadyStateStats b = steady_state_stats(iterated);
  CHECK(std::abs(a.p_r - b.p_r) < 1e-9);
  CHECK(std::abs(a.p_w - b.p_w) < 1e-9);
}

TEST_CASE("no pulses means no photons") {
  const SpeciesModel& m = model("mg24");
  ShotConfig c = realistic(10e-9);
  c.pulses_enabled = false;
  const ShotRun run = run_shots(m, c);
  const SteadyStateStats s = steady_state_stats(run);
  CHECK(s.p_gamma == 0.0);
  CHECK_THROWS_AS(estimate_reg(run, c), UndefinedFidelityError);
}

TEST_CASE("runs that never settle are reported") {
  const SpeciesModel& m = model("ca40");
  ShotConfig c = realistic(5e-9);
  c.burn_in_shots = 2;
  c.max_shots = 4;
  c.solve_fixed_point = false;
  const ShotRun run = run_shots(m, c);
  CHECK_FALSE(run.converged);
  CHECK_THROWS_AS(steady_state_stats(run), NonConvergenceError);
}
