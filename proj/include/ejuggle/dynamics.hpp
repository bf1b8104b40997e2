#pragma once

#include <span>
#include <stdexcept>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ejuggle/integrator.hpp"
#include "ejuggle/species.hpp"

namespace ejuggle {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Tolerances a density operator must satisfy.
struct DensityTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double positivity = 1e-8;  // smallest eigenvalue may not go below -positivity
};

/// Hermitian, unit-trace, positive semidefinite matrix over a species basis.
class DensityOperator {
 public:
  /// Validates against DensityTolerances{}; throws std::invalid_argument.
  explicit DensityOperator(Eigen::MatrixXcd matrix);

  /// Wraps a matrix without validation, for states known to be valid.
  static DensityOperator unchecked(Eigen::MatrixXcd matrix);

  static DensityOperator pure(int dimension, int index);

  /// Uniform mixture over the given basis indices.
  static DensityOperator mixed(int dimension, std::span<const int> indices);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  double population(int index) const { return matrix_(index, index).real(); }
  double trace() const { return matrix_.trace().real(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;

  void validate(const DensityTolerances& tol = {}) const;

 private:
  struct Unchecked {};
  DensityOperator(Eigen::MatrixXcd matrix, Unchecked) : matrix_(std::move(matrix)) {}

  Eigen::MatrixXcd matrix_;
};

/// Right-hand side of the Lindblad equation,
///   -i [rho, H] + 1/2 sum_C (2 C rho C^dag - rho C^dag C - C^dag C rho),
/// with H in angular-frequency units.
template <typename DerivedRho, typename DerivedH, typename Collapse>
ComplexMatrix<typename DerivedRho::RealScalar> lindblad_rhs(
    const Eigen::MatrixBase<DerivedRho>& rho, const Eigen::MatrixBase<DerivedH>& hamiltonian,
    const std::vector<Collapse>& collapses) {
  using Scalar = typename DerivedRho::Scalar;
  const Eigen::Index d = rho.rows();
  if (rho.cols() != d || hamiltonian.rows() != d || hamiltonian.cols() != d) {
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  }
  const Scalar i_unit(0, 1);
  ComplexMatrix<typename DerivedRho::RealScalar> out =
      -i_unit * (rho * hamiltonian - hamiltonian * rho);
  for (const auto& c : collapses) {
    if (c.rows() != d || c.cols() != d) throw std::invalid_argument("lindblad_rhs: collapse dimension mismatch");
    const auto cdc = (c.adjoint() * c).eval();
    out += c * rho * c.adjoint() - Scalar(0.5) * (rho * cdc + cdc * rho);
  }
  return out;
}

/// Trace distance 1/2 ||a - b||_1 between two Hermitian matrices.
template <typename DerivedA, typename DerivedB>
double trace_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  using Matrix = ComplexMatrix<typename DerivedA::RealScalar>;
  const Matrix diff = a - b;
  const Matrix hermitian = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double steady_state_distance(const DensityOperator& a, const DensityOperator& b);

/// Lindblad generator specialised to single-element jump operators and a
/// sparse repump Hamiltonian. Jump fluxes Tr[C^dag C rho] are reported per
/// channel.
class LindbladGenerator {
 public:
  LindbladGenerator(int dimension, std::vector<RepumpCoupling> couplings,
                    std::vector<CollapseChannel> channels);
  explicit LindbladGenerator(const SpeciesModel& model);

  int dimension() const { return dimension_; }
  const std::vector<CollapseChannel>& channels() const { return channels_; }
  const std::vector<RepumpCoupling>& couplings() const { return couplings_; }

  /// drho = L(t)[rho]; dflux(c) = rate_c * rho(upper_c, upper_c).
  void derivative(double t, const Eigen::Ref<const Eigen::MatrixXcd>& rho,
                  Eigen::Ref<Eigen::MatrixXcd> drho, Eigen::Ref<Eigen::VectorXcd> dflux) const;

  Eigen::MatrixXcd operator()(double t, const Eigen::MatrixXcd& rho) const;

  /// Step cap resolving the fastest beat among beam detunings; 0 if none.
  double beat_step_cap() const;

  Eigen::MatrixXcd hamiltonian(double t) const;
  std::vector<Eigen::MatrixXcd> collapse_matrices() const;

  /// Level phases of a frame in which the Hamiltonian is constant, if any.
  const std::optional<Eigen::VectorXd>& static_frame() const { return frame_; }

 private:
  int dimension_;
  std::vector<RepumpCoupling> couplings_;
  std::vector<CollapseChannel> channels_;
  Eigen::VectorXd level_decay_;     // total decay rate out of each level
  Eigen::MatrixXcd pair_decay_;     // 0.5 (gamma_i + gamma_j)
  std::vector<double> detunings_;   // distinct coupling detunings
  std::vector<int> detuning_index_; // per coupling, into detunings_
  std::optional<Eigen::VectorXd> frame_;
};

/// Angular frequencies phi (rad/s) with phi_g - phi_e = detuning for every
/// coupling, zero on levels without beams. With W(t) = diag(e^{i phi t}),
/// W^dagger H(t) W is time independent. Empty when two couplings of one
/// connected set of levels disagree.
std::optional<Eigen::VectorXd> static_frame(int dimension, const std::vector<RepumpCoupling>& couplings);

/// rho -> W(t)^dagger rho W(t), and the inverse.
Eigen::MatrixXcd to_frame(const Eigen::MatrixXcd& rho, const Eigen::VectorXd& phi, double t);
Eigen::MatrixXcd from_frame(const Eigen::MatrixXcd& rho, const Eigen::VectorXd& phi, double t);

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.0;  // 0: use the generator's beat cap
  bool monitor_every_step = false;  // eigen-decompose after each accepted step
  bool symmetrize = true;
};

/// Per-channel accumulated jump probabilities, aligned with the generator's
/// channel list.
struct FluxAccumulator {
  Eigen::VectorXd flux;

  double total() const { return flux.sum(); }
  double total_where(const std::vector<CollapseChannel>& channels, auto&& predicate) const {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (predicate(channels[c])) sum += flux[static_cast<Eigen::Index>(c)];
    }
    return sum;
  }
};

struct EvolutionResult {
  DensityOperator final_state;
  FluxAccumulator fluxes;
  long steps_taken = 0;
  long steps_rejected = 0;
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;  // before re-symmetrization
  double min_eigenvalue = 0.0;         // over monitored states
};

/// Integrates the Lindblad equation from start_time to start_time + duration.
EvolutionResult evolve(const DensityOperator& rho0, double duration,
                       const LindbladGenerator& generator, const EvolveOptions& options = {},
                       double start_time = 0.0);

}  // namespace ejuggle
