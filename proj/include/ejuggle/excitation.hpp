#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ejuggle/dynamics.hpp"
#include "ejuggle/species.hpp"

namespace ejuggle {

/// Circular handedness of an excitation pulse: right drives sigma+
/// (S- -> P+), left drives sigma- (S+ -> P-).
enum class Handedness { right, left };

constexpr Handedness flip(Handedness h) {
  return h == Handedness::right ? Handedness::left : Handedness::right;
}

constexpr char to_char(Handedness h) { return h == Handedness::right ? 'R' : 'L'; }

/// Circular components of an ideally pure pulse after a birefringent element
/// with axis angle alpha and retardance beta.
struct JonesCoefficients {
  Complex plus;   // sigma+ component
  Complex minus;  // sigma- component
};

JonesCoefficients jones_coefficients(Handedness h, double alpha, double beta);

/// Basis indices of the S1/2 and P1/2 sublevels. The "+" block is
/// {S-, P+}, addressed by sigma+ light; the "-" block is {S+, P-}.
struct PulseBlock {
  int dimension = 0;
  int s_minus = 0;
  int s_plus = 0;
  int p_minus = 0;
  int p_plus = 0;
};

PulseBlock pulse_block(const SpeciesModel& model);

/// Right (wanted) and wrong P1/2 sublevel for a pulse of handedness h.
constexpr int right_sublevel(const PulseBlock& b, Handedness h) {
  return h == Handedness::right ? b.p_plus : b.p_minus;
}
constexpr int wrong_sublevel(const PulseBlock& b, Handedness h) {
  return h == Handedness::right ? b.p_minus : b.p_plus;
}

/// Unitary cos(|theta|/2) 1 - i sin(|theta|/2) X_phi on each block, with
/// X_phi = e^{i phi}|S><P| + e^{-i phi}|P><S| and phi = arg theta; identity
/// on every other level.
Eigen::MatrixXcd pulse_propagator(const PulseBlock& block, Complex theta_plus, Complex theta_minus);

/// Perfect pi pulse on the block selected by h.
Eigen::MatrixXcd apply_ideal_pulse(const Eigen::MatrixXcd& rho, const PulseBlock& block, Handedness h);
DensityOperator apply_ideal_pulse(const DensityOperator& rho, const PulseBlock& block, Handedness h);

/// Gauss-Hermite rule for the standard normal weight exp(-x^2/2)/sqrt(2 pi);
/// weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_hermite_normal(int order);

/// Excitation pulse averaged over birefringence: axis angle uniform, retardance
/// Gaussian with spread sigma_beta.
///
/// The default form keeps, on each block, the population swap with
/// probability t and the untouched block with probability 1 - t, and drops
/// every coherence between the two blocks and between the S+P subspace and
/// the other levels. With retain_cross_terms the full average of U rho U^dag
/// is taken instead (exact over axis angle, quadrature over retardance).
class PulseChannel {
 public:
  PulseChannel(const PulseBlock& block, Handedness handedness, double sigma_beta,
               int quadrature_order = 21, bool retain_cross_terms = false);

  Handedness handedness() const { return handedness_; }
  double sigma_beta() const { return sigma_beta_; }
  const PulseBlock& block() const { return block_; }
  const QuadratureRule& quadrature() const { return rule_; }
  bool retains_cross_terms() const { return cross_terms_; }

  /// Averaged swap probability on the "+" / "-" block.
  double transfer_plus() const { return transfer_plus_; }
  double transfer_minus() const { return transfer_minus_; }

  /// Averaged probability of exciting the wrong S sublevel.
  double wrong_transfer() const {
    return handedness_ == Handedness::right ? transfer_minus_ : transfer_plus_;
  }

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

 private:
  Eigen::MatrixXcd apply_four_term(const Eigen::MatrixXcd& rho) const;
  Eigen::MatrixXcd apply_full(const Eigen::MatrixXcd& rho) const;

  PulseBlock block_;
  Handedness handedness_;
  double sigma_beta_;
  QuadratureRule rule_;
  bool cross_terms_;
  double transfer_plus_ = 0.0;
  double transfer_minus_ = 0.0;
};

Eigen::MatrixXcd apply_birefringent_pulse(const Eigen::MatrixXcd& rho, const PulseChannel& channel);
DensityOperator apply_birefringent_pulse(const DensityOperator& rho, const PulseChannel& channel);

/// Small-spread wrong-excitation probability pi^2 sigma^2 / 16.
double wrong_excitation_probability(double sigma_beta);

}  // namespace ejuggle
