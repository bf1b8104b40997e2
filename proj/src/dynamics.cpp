#include "ejuggle/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ejuggle {

DensityOperator::DensityOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("density operator must be a non-empty square matrix");
  }
  validate();
}

DensityOperator DensityOperator::unchecked(Eigen::MatrixXcd matrix) {
  return DensityOperator(std::move(matrix), Unchecked{});
}

DensityOperator DensityOperator::pure(int dimension, int index) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dimension, dimension);
  m(index, index) = 1.0;
  return DensityOperator(std::move(m), Unchecked{});
}

DensityOperator DensityOperator::mixed(int dimension, std::span<const int> indices) {
  if (indices.empty()) throw std::invalid_argument("mixed state over an empty set of levels");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dimension, dimension);
  for (int i : indices) m(i, i) += 1.0 / static_cast<double>(indices.size());
  return DensityOperator(std::move(m));
}

double DensityOperator::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityOperator::validate(const DensityTolerances& tol) const {
  const double herm = hermiticity_error();
  if (herm > tol.hermiticity) {
    throw std::invalid_argument("density operator not Hermitian (error " + std::to_string(herm) + ")");
  }
  const double tr = trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw std::invalid_argument("density operator trace is " + std::to_string(tr));
  }
  const double lowest = min_eigenvalue();
  if (lowest < -tol.positivity) {
    throw std::invalid_argument("density operator has eigenvalue " + std::to_string(lowest));
  }
}

double steady_state_distance(const DensityOperator& a, const DensityOperator& b) {
  return trace_distance(a.matrix(), b.matrix());
}

LindbladGenerator::LindbladGenerator(int dimension, std::vector<RepumpCoupling> couplings,
                                     std::vector<CollapseChannel> channels)
    : dimension_(dimension),
      couplings_(std::move(couplings)),
      channels_(std::move(channels)),
      level_decay_(Eigen::VectorXd::Zero(dimension)) {
  for (const RepumpCoupling& c : couplings_) {
    if (c.lower < 0 || c.lower >= dimension || c.upper < 0 || c.upper >= dimension) {
      throw std::invalid_argument("repump coupling outside the basis");
    }
    auto it = std::find(detunings_.begin(), detunings_.end(), c.detuning);
    detuning_index_.push_back(static_cast<int>(it - detunings_.begin()));
    if (it == detunings_.end()) detunings_.push_back(c.detuning);
  }
  for (const CollapseChannel& c : channels_) {
    if (c.lower < 0 || c.lower >= dimension || c.upper < 0 || c.upper >= dimension) {
      throw std::invalid_argument("collapse channel outside the basis");
    }
    level_decay_[c.upper] += c.rate();
  }
  pair_decay_ = (0.5 * (level_decay_.replicate(1, dimension) +
                        level_decay_.transpose().replicate(dimension, 1)))
                    .cast<Complex>();
  frame_ = ejuggle::static_frame(dimension_, couplings_);
}

LindbladGenerator::LindbladGenerator(const SpeciesModel& model)
    : LindbladGenerator(model.dimension(), repump_couplings(model), collapse_operators(model)) {}

void LindbladGenerator::derivative(double t, const Eigen::Ref<const Eigen::MatrixXcd>& rho,
                                   Eigen::Ref<Eigen::MatrixXcd> drho,
                                   Eigen::Ref<Eigen::VectorXcd> dflux) const {
  const Eigen::Index n = dimension_;
  drho = -pair_decay_.cwiseProduct(rho);

  // -i [rho, H] with H = sum h |g><e| + conj(h) |e><g|.
  Complex phases[8];
  const std::size_t n_phases = std::min<std::size_t>(detunings_.size(), 8);
  for (std::size_t k = 0; k < n_phases; ++k) phases[k] = std::polar(1.0, detunings_[k] * t);
  for (std::size_t k = 0; k < couplings_.size(); ++k) {
    const RepumpCoupling& c = couplings_[k];
    const auto di = static_cast<std::size_t>(detuning_index_[k]);
    const Complex phase = di < n_phases ? phases[di] : std::polar(1.0, c.detuning * t);
    const Complex h = c.omega * phase;
    // -i h and -i conj(h)
    const Complex mih(h.imag(), -h.real());
    const Complex mihc(-h.imag(), -h.real());
    const Eigen::Index g = c.lower, e = c.upper;
    for (Eigen::Index r = 0; r < n; ++r) {
      drho(r, e) += mih * rho(r, g);
      drho(r, g) += mihc * rho(r, e);
    }
    for (Eigen::Index col = 0; col < n; ++col) {
      drho(g, col) -= mih * rho(e, col);
      drho(e, col) -= mihc * rho(g, col);
    }
  }
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    const CollapseChannel& c = channels_[k];
    const double jump = c.rate() * rho(c.upper, c.upper).real();
    drho(c.lower, c.lower) += jump;
    dflux[static_cast<Eigen::Index>(k)] = jump;
  }
}

Eigen::MatrixXcd LindbladGenerator::operator()(double t, const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out(dimension_, dimension_);
  Eigen::VectorXcd flux(static_cast<Eigen::Index>(channels_.size()));
  derivative(t, rho, out, flux);
  return out;
}

double LindbladGenerator::beat_step_cap() const {
  double beat = 0.0;
  for (std::size_t i = 0; i < couplings_.size(); ++i) {
    beat = std::max(beat, std::abs(couplings_[i].detuning));
    for (std::size_t j = i + 1; j < couplings_.size(); ++j) {
      beat = std::max(beat, std::abs(couplings_[i].detuning - couplings_[j].detuning));
    }
  }
  if (beat == 0.0) return 0.0;
  return 1.0 / (10.0 * beat / (2.0 * physical::pi));
}

Eigen::MatrixXcd LindbladGenerator::hamiltonian(double t) const {
  return repump_hamiltonian(dimension_, couplings_, t);
}

std::vector<Eigen::MatrixXcd> LindbladGenerator::collapse_matrices() const {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(channels_.size());
  for (const CollapseChannel& c : channels_) out.push_back(c.matrix(dimension_));
  return out;
}

std::optional<Eigen::VectorXd> static_frame(int dimension, const std::vector<RepumpCoupling>& couplings) {
  std::vector<std::vector<std::pair<int, double>>> edges(static_cast<std::size_t>(dimension));
  double scale = 0.0;
  for (const RepumpCoupling& c : couplings) {
    if (c.lower < 0 || c.lower >= dimension || c.upper < 0 || c.upper >= dimension) {
      throw std::invalid_argument("static_frame: coupling outside the basis");
    }
    // phi_upper = phi_lower - detuning
    edges[static_cast<std::size_t>(c.lower)].push_back({c.upper, -c.detuning});
    edges[static_cast<std::size_t>(c.upper)].push_back({c.lower, c.detuning});
    scale = std::max(scale, std::abs(c.detuning));
  }
  const double tol = 1e-9 * std::max(scale, 1.0);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(dimension);
  std::vector<bool> seen(static_cast<std::size_t>(dimension), false);
  for (int root = 0; root < dimension; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = true;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (const auto& [b, shift] : edges[static_cast<std::size_t>(a)]) {
        const double want = phi[a] + shift;
        if (seen[static_cast<std::size_t>(b)]) {
          if (std::abs(phi[b] - want) > tol) return std::nullopt;
          continue;
        }
        seen[static_cast<std::size_t>(b)] = true;
        phi[b] = want;
        stack.push_back(b);
      }
    }
  }
  return phi;
}

Eigen::MatrixXcd to_frame(const Eigen::MatrixXcd& rho, const Eigen::VectorXd& phi, double t) {
  const Eigen::VectorXcd w = (Complex(0, -1) * t * phi).array().exp();
  return w.asDiagonal() * rho * w.conjugate().asDiagonal();
}

Eigen::MatrixXcd from_frame(const Eigen::MatrixXcd& rho, const Eigen::VectorXd& phi, double t) {
  return to_frame(rho, phi, -t);
}

EvolutionResult evolve(const DensityOperator& rho0, double duration,
                       const LindbladGenerator& generator, const EvolveOptions& options,
                       double start_time) {
  if (!(duration >= 0.0)) throw std::invalid_argument("evolve: negative duration");
  const int n = generator.dimension();
  if (rho0.dim() != n) throw std::invalid_argument("evolve: state and generator dimensions differ");
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  const Eigen::Index nflux = static_cast<Eigen::Index>(generator.channels().size());

  Eigen::VectorXcd y(nn + nflux);
  Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n) = rho0.matrix();
  y.tail(nflux).setZero();

  const double initial_trace = rho0.trace();
  EvolutionResult result{DensityOperator::unchecked(rho0.matrix()), {}, 0, 0, 0.0, 0.0,
                         std::numeric_limits<double>::infinity()};

  if (duration > 0.0) {
    auto rhs = [&](double t, const Eigen::VectorXcd& state, Eigen::VectorXcd& dstate) {
      Eigen::Map<const Eigen::MatrixXcd> rho(state.data(), n, n);
      Eigen::Map<Eigen::MatrixXcd> drho(dstate.data(), n, n);
      generator.derivative(t, rho, drho, dstate.tail(nflux));
    };
    auto on_accept = [&](double, Eigen::VectorXcd& state) {
      Eigen::Map<Eigen::MatrixXcd> rho(state.data(), n, n);
      const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
      result.max_hermiticity_error = std::max(result.max_hermiticity_error, herm);
      if (options.symmetrize) {
        const Eigen::MatrixXcd sym = 0.5 * (rho + rho.adjoint());
        rho = sym;
      }
      result.max_trace_drift =
          std::max(result.max_trace_drift, std::abs(rho.trace().real() - initial_trace));
      if (options.monitor_every_step) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (rho + rho.adjoint()),
                                                              Eigen::EigenvaluesOnly);
        result.min_eigenvalue = std::min(result.min_eigenvalue, solver.eigenvalues().minCoeff());
      }
    };

    StepControl ctl;
    ctl.rtol = options.rtol;
    ctl.atol = options.atol;
    ctl.max_step = options.max_step > 0.0 ? options.max_step : generator.beat_step_cap();
    const IntegrationStats stats =
        integrate_dopri5(rhs, start_time, start_time + duration, y, ctl, on_accept);
    result.steps_taken = stats.accepted;
    result.steps_rejected = stats.rejected;
  }

  Eigen::MatrixXcd final_rho = Eigen::Map<const Eigen::MatrixXcd>(y.data(), n, n);
  result.final_state = DensityOperator::unchecked(std::move(final_rho));
  result.fluxes.flux = y.tail(nflux).real();
  result.min_eigenvalue = std::min(result.min_eigenvalue, result.final_state.min_eigenvalue());
  return result;
}

}  // namespace ejuggle
