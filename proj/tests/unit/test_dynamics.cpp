#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ejuggle/dynamics.hpp"
#include "ejuggle/integrator.hpp"
#include "ejuggle/species.hpp"

using namespace ejuggle;

namespace {

constexpr double kTwoPi = 2.0 * physical::pi;

SpeciesModel load(const char* key) { return load_species_file(species_path(key)); }

Eigen::MatrixXcd random_density(int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

// Superoperator of a time-independent RHS acting on column-major vec(rho).
template <typename Rhs>
Eigen::MatrixXcd superoperator(int d, Rhs&& rhs) {
  Eigen::MatrixXcd l(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
      e(i, j) = 1.0;
      const Eigen::MatrixXcd out = rhs(e);
      l.col(j * d + i) = Eigen::Map<const Eigen::VectorXcd>(out.data(), d * d);
    }
  }
  return l;
}

LindbladGenerator two_level(double gamma, std::vector<RepumpCoupling> couplings = {}) {
  CollapseChannel c;
  c.lower = 0;
  c.upper = 1;
  c.amplitude = std::sqrt(gamma);
  c.collectable = true;
  return LindbladGenerator(2, std::move(couplings), {c});
}

}  // namespace

TEST_CASE("trace_distance examples") {
  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
  zero(0, 0) = 1.0;
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Zero(2, 2);
  one(1, 1) = 1.0;
  const Eigen::MatrixXcd mixed = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  CHECK(trace_distance(zero, mixed) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(trace_distance(zero, one) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(trace_distance(zero, zero) == 0.0);
  CHECK_THROWS_AS(trace_distance(zero, Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("DensityOperator validates its matrix") {
  CHECK_NOTHROW(DensityOperator(random_density(4, 1)));
  Eigen::MatrixXcd m = random_density(3, 2);
  m(0, 1) += Complex(0.0, 1e-3);
  CHECK_THROWS_AS(DensityOperator{m}, std::invalid_argument);
  CHECK_THROWS_AS(DensityOperator{2.0 * random_density(3, 3)}, std::invalid_argument);
  Eigen::MatrixXcd negative = Eigen::MatrixXcd::Zero(2, 2);
  negative(0, 0) = 1.1;
  negative(1, 1) = -0.1;
  CHECK_THROWS_AS(DensityOperator{negative}, std::invalid_argument);
  const int idx[] = {0, 2};
  const DensityOperator mix = DensityOperator::mixed(4, idx);
  CHECK(mix.population(0) == doctest::Approx(0.5));
  CHECK(mix.population(1) == 0.0);
  CHECK(DensityOperator::pure(3, 1).population(1) == 1.0);
}

TEST_CASE("lindblad_rhs is Hermitian and traceless") {
  const SpeciesModel m = load("ca40");
  const LindbladGenerator gen(m);
  const std::vector<Eigen::MatrixXcd> collapses = gen.collapse_matrices();
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXcd rho = random_density(m.dimension(), seed);
    const Eigen::MatrixXcd out = lindblad_rhs(rho, repump_hamiltonian(m, 1e-9 * seed), collapses);
    const double scale = out.cwiseAbs().maxCoeff();
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK(std::abs(out.trace()) <= 1e-12 * scale);
  }
}

TEST_CASE("sparse generator matches the dense Lindblad formula") {
  for (const char* key : {"ca40", "yb174"}) {
    const SpeciesModel m = load(key);
    const LindbladGenerator gen(m);
    const std::vector<Eigen::MatrixXcd> collapses = gen.collapse_matrices();
    for (unsigned seed = 10; seed < 14; ++seed) {
      const double t = 3.1e-9 * seed;
      const Eigen::MatrixXcd rho = random_density(m.dimension(), seed);
      const Eigen::MatrixXcd dense = lindblad_rhs(rho, repump_hamiltonian(m, t), collapses);
      const Eigen::MatrixXcd sparse = gen(t, rho);
      CHECK((dense - sparse).cwiseAbs().maxCoeff() <= 1e-12 * dense.cwiseAbs().maxCoeff());
      CHECK((gen.hamiltonian(t) - repump_hamiltonian(m, t)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("two-level decay follows the exponential law") {
  const double gamma = 1.0 / 7e-9;
  const LindbladGenerator gen = two_level(gamma);
  const EvolutionResult r = evolve(DensityOperator::pure(2, 1), std::log(2.0) / gamma, gen);
  CHECK(r.final_state.population(1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(r.fluxes.total() - 0.5) < 1e-6);
  const EvolutionResult half = evolve(DensityOperator::pure(2, 1), 2.0 / gamma, gen);
  CHECK(std::abs(half.final_state.population(1) - std::exp(-2.0)) < 1e-7);
}

TEST_CASE("emitted flux accounts for all excited population lost") {
  for (const char* key : {"ca40", "yb174"}) {
    const SpeciesModel m = load(key).without_beams();
    const LindbladGenerator gen(m);
    const int p = m.manifold_index("P1/2");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(m.dimension(), m.dimension());
    rho(m.index(p, HalfInt::from_twice(1)), m.index(p, HalfInt::from_twice(1))) = 0.7;
    rho(0, 0) = 0.3;
    const double tau = m.p_half_lifetime();
    const EvolutionResult r = evolve(DensityOperator(rho), 10.0 * tau, gen);
    double excited = 0.0;
    for (int k = 0; k < m.dimension(); ++k) {
      if (m.levels()[static_cast<std::size_t>(k)].manifold == p) excited += r.final_state.population(k);
    }
    CHECK(std::abs(0.7 - (excited + r.fluxes.total())) < 1e-6);
  }
}

TEST_CASE("resonant drive gives Rabi oscillations") {
  const double omega = kTwoPi * 5e6;
  const LindbladGenerator gen(2, {{0, 1, omega, 0.0}}, {});
  for (double t : {10e-9, 37e-9, 50e-9}) {
    const EvolutionResult r = evolve(DensityOperator::pure(2, 0), t, gen);
    const double s = std::sin(omega * t);
    CHECK(std::abs(r.final_state.population(1) - s * s) < 1e-7);
  }
}

TEST_CASE("static frame exists for the shipped species and makes H constant") {
  for (const std::string& key : shipped_species()) {
    CAPTURE(key);
    const SpeciesModel m = load(key.c_str());
    const LindbladGenerator gen(m);
    REQUIRE(gen.static_frame().has_value());
    const Eigen::VectorXd& phi = *gen.static_frame();
    for (const RepumpCoupling& c : gen.couplings()) {
      CHECK(std::abs(phi[c.lower] - phi[c.upper] - c.detuning) <= 1e-6 * (1.0 + std::abs(c.detuning)));
    }
    // W^dag H W does not depend on t; to_frame applies exactly that rotation.
    const Eigen::MatrixXcd h0 = to_frame(repump_hamiltonian(m, 0.0), phi, 0.0);
    const Eigen::MatrixXcd h1 = to_frame(repump_hamiltonian(m, 41.3e-9), phi, 41.3e-9);
    CHECK((h0 - h1).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, h0.cwiseAbs().maxCoeff()));
    const Eigen::MatrixXcd rho = random_density(m.dimension(), 4);
    CHECK((from_frame(to_frame(rho, phi, 3e-8), phi, 3e-8) - rho).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("static frame is absent when detunings disagree around a loop") {
  // Level 2 couples to 0 and 1; level 3 couples to 0 and 1 with a different gap.
  const std::vector<RepumpCoupling> couplings = {
      {0, 2, 1.0, 10.0}, {1, 2, 1.0, -10.0}, {0, 3, 1.0, 30.0}, {1, 3, 1.0, -30.0}};
  CHECK_FALSE(static_frame(4, couplings).has_value());
  const std::vector<RepumpCoupling> consistent = {
      {0, 2, 1.0, 10.0}, {1, 2, 1.0, -10.0}, {0, 3, 1.0, 30.0}, {1, 3, 1.0, 10.0}};
  CHECK(static_frame(4, consistent).has_value());
  CHECK(static_frame(3, {}).value().isZero());
}

TEST_CASE("evolution matches the matrix exponential of the framed Liouvillian") {
  const SpeciesModel m = load("ca40");
  const LindbladGenerator gen(m);
  const Eigen::VectorXd phi = gen.static_frame().value();
  const int d = m.dimension();
  const std::vector<Eigen::MatrixXcd> collapses = gen.collapse_matrices();
  // In the frame the drive is constant and the frame rotation adds -diag(phi).
  const Eigen::MatrixXcd h_eff =
      to_frame(repump_hamiltonian(m, 0.0), phi, 0.0) - Eigen::MatrixXcd(phi.cast<Complex>().asDiagonal());
  const Eigen::MatrixXcd l = superoperator(d, [&](const Eigen::MatrixXcd& e) {
    return Eigen::MatrixXcd(lindblad_rhs(e, h_eff, collapses));
  });

  const Eigen::MatrixXcd rho0 = random_density(d, 21);
  const double t0 = 13e-9, duration = 60e-9;
  const EvolutionResult r = evolve(DensityOperator(rho0), duration, gen, {}, t0);

  const Eigen::MatrixXcd start = to_frame(rho0, phi, t0);
  const Eigen::VectorXcd v = (l * duration).exp() * Eigen::Map<const Eigen::VectorXcd>(start.data(), d * d);
  const Eigen::MatrixXcd expected = from_frame(Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d), phi, t0 + duration);
  CHECK((r.final_state.matrix() - expected).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("commutator sign only mirrors the beam phases") {
  // d rho/dt = -i[H, rho] + D with (Omega, Delta) has the conjugate solution of
  // the coded -i[rho, H] + D with (conj Omega, -Delta); populations agree.
  const SpeciesModel m = load("sr88");
  const LindbladGenerator gen(m);
  const std::vector<Eigen::MatrixXcd> collapses = gen.collapse_matrices();
  std::vector<RepumpCoupling> mirrored = gen.couplings();
  for (RepumpCoupling& c : mirrored) {
    c.omega = std::conj(c.omega);
    c.detuning = -c.detuning;
  }
  const LindbladGenerator flipped(m.dimension(), mirrored, gen.channels());

  const int d = m.dimension();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  for (int k = m.manifolds()[3].offset; k < d; ++k) rho(k, k) = 1.0;  // D manifolds
  rho /= rho.trace();
  const double duration = 80e-9;

  Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
  auto textbook = [&](double t, const Eigen::VectorXcd& state, Eigen::VectorXcd& out) {
    const Eigen::Map<const Eigen::MatrixXcd> r(state.data(), d, d);
    const Eigen::MatrixXcd h = repump_hamiltonian(m, t);
    Eigen::MatrixXcd dr = -Complex(0.0, 1.0) * (h * r - r * h);
    for (const Eigen::MatrixXcd& c : collapses) {
      const Eigen::MatrixXcd cdc = c.adjoint() * c;
      dr += c * r * c.adjoint() - 0.5 * (cdc * r + r * cdc);
    }
    out = Eigen::Map<const Eigen::VectorXcd>(dr.data(), d * d);
  };
  StepControl ctl;
  ctl.rtol = 1e-10;
  ctl.atol = 1e-12;
  ctl.max_step = 1e-9;
  integrate_dopri5(textbook, 0.0, duration, y, ctl, [](double, Eigen::VectorXcd&) {});
  const Eigen::Map<const Eigen::MatrixXcd> reference(y.data(), d, d);

  const EvolutionResult coded = evolve(DensityOperator(rho), duration, flipped);
  double worst = 0.0, moved = 0.0;
  for (int k = 0; k < d; ++k) {
    worst = std::max(worst, std::abs(coded.final_state.population(k) - reference(k, k).real()));
    moved = std::max(moved, std::abs(reference(k, k).real() - rho(k, k).real()));
  }
  CHECK(moved > 1e-2);  // the beams did act
  CHECK(worst < 1e-7);
}

TEST_CASE("monitored evolution keeps a valid density operator") {
  for (const char* key : {"ba138", "yb174"}) {
    const SpeciesModel m = load(key);
    const LindbladGenerator gen(m);
    EvolveOptions opt;
    opt.monitor_every_step = true;
    const EvolutionResult r = evolve(DensityOperator(random_density(m.dimension(), 5)), 150e-9, gen, opt);
    CHECK(r.max_trace_drift < 1e-9);
    CHECK(r.max_hermiticity_error < 1e-10);
    CHECK(r.min_eigenvalue >= -1e-8);
    CHECK(r.steps_taken > 0);
  }
}

TEST_CASE("halving the tolerance moves populations by less than the coarse tolerance") {
  const SpeciesModel m = load("ca40");
  const LindbladGenerator gen(m);
  const DensityOperator rho(random_density(m.dimension(), 8));
  EvolveOptions coarse;
  EvolveOptions fine;
  fine.rtol = coarse.rtol / 2;
  fine.atol = coarse.atol / 2;
  const EvolutionResult a = evolve(rho, 100e-9, gen, coarse);
  const EvolutionResult b = evolve(rho, 100e-9, gen, fine);
  double worst = 0.0;
  for (int k = 0; k < m.dimension(); ++k)
    worst = std::max(worst, std::abs(a.final_state.population(k) - b.final_state.population(k)));
  CHECK(worst < coarse.rtol);
}

TEST_CASE("dopri5 integrates linear test equations") {
  Eigen::VectorXd y(1);
  y << 1.0;
  StepControl ctl;
  ctl.rtol = 1e-10;
  ctl.atol = 1e-12;
  const IntegrationStats s = integrate_dopri5(
      [](double, const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = -v; }, 0.0, 3.0, y, ctl,
      [](double, Eigen::VectorXd&) {});
  CHECK(std::abs(y[0] - std::exp(-3.0)) < 1e-9);
  CHECK(s.accepted > 0);
  CHECK(s.evaluations >= 6 * s.accepted);

  Eigen::VectorXcd z(1);
  z << Complex(1.0, 0.0);
  integrate_dopri5([](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) { out = Complex(0.0, 2.0) * v; },
                   0.0, 5.0, z, ctl, [](double, Eigen::VectorXcd&) {});
  CHECK(std::abs(z[0] - std::polar(1.0, 10.0)) < 1e-8);

  // Observer sees strictly increasing times ending at t1.
  double last = 0.0;
  bool increasing = true;
  y << 1.0;
  integrate_dopri5([](double, const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = -v; }, 0.0, 1.0, y, ctl,
                   [&](double t, Eigen::VectorXd&) {
                     increasing = increasing && t > last;
                     last = t;
                   });
  CHECK(increasing);
  CHECK(last == doctest::Approx(1.0));
}

TEST_CASE("dopri5 reports exhausted step budgets") {
  Eigen::VectorXd y(1);
  y << 1.0;
  StepControl ctl;
  ctl.max_steps = 3;
  ctl.max_step = 1e-3;
  try {
    integrate_dopri5([](double, const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = -v; }, 0.0, 1.0, y, ctl,
                     [](double, Eigen::VectorXd&) {});
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time_reached() > 0.0);
    CHECK(e.time_reached() < 1.0);
  }
}
