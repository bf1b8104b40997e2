#include "ejuggle/excitation.hpp"

#include <cmath>
#include <stdexcept>

namespace ejuggle {

namespace {

constexpr double kPi = physical::pi;

// Uniform axis-angle samples on [0, pi). The integrand is a trigonometric
// polynomial in 2 alpha of degree at most 2, so 8 points are exact.
constexpr int kAlphaSamples = 8;

void swap_block(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out, int s, int p, double t) {
  out(s, s) = (1.0 - t) * rho(s, s) + t * rho(p, p);
  out(p, p) = (1.0 - t) * rho(p, p) + t * rho(s, s);
  out(s, p) = (1.0 - t) * rho(s, p);
  out(p, s) = (1.0 - t) * rho(p, s);
}

}  // namespace

JonesCoefficients jones_coefficients(Handedness h, double alpha, double beta) {
  const Complex i_unit(0.0, 1.0);
  const double c = std::cos(beta / 2.0);
  const double s = std::sin(beta / 2.0);
  if (h == Handedness::right) {
    return {c, i_unit * std::polar(1.0, -2.0 * alpha) * s};
  }
  return {i_unit * std::polar(1.0, 2.0 * alpha) * s, c};
}

PulseBlock pulse_block(const SpeciesModel& model) {
  const HalfInt half = HalfInt::from_twice(1);
  const int s = model.manifold_index("S1/2");
  const int p = model.manifold_index("P1/2");
  if (model.manifolds()[static_cast<std::size_t>(s)].J != half ||
      model.manifolds()[static_cast<std::size_t>(p)].J != half) {
    throw std::invalid_argument("pulse block needs J = 1/2 for S1/2 and P1/2");
  }
  return {model.dimension(), model.index(s, -half), model.index(s, half), model.index(p, -half),
          model.index(p, half)};
}

Eigen::MatrixXcd pulse_propagator(const PulseBlock& block, Complex theta_plus, Complex theta_minus) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(block.dimension, block.dimension);
  const Complex i_unit(0.0, 1.0);
  auto fill = [&](int s, int p, Complex theta) {
    const double area = std::abs(theta);
    const double phi = area > 0.0 ? std::arg(theta) : 0.0;
    const double c = std::cos(area / 2.0);
    const Complex minus_i_sin = -i_unit * std::sin(area / 2.0);
    u(s, s) = c;
    u(p, p) = c;
    u(s, p) = minus_i_sin * std::polar(1.0, phi);
    u(p, s) = minus_i_sin * std::polar(1.0, -phi);
  };
  fill(block.s_minus, block.p_plus, theta_plus);
  fill(block.s_plus, block.p_minus, theta_minus);
  return u;
}

Eigen::MatrixXcd apply_ideal_pulse(const Eigen::MatrixXcd& rho, const PulseBlock& block, Handedness h) {
  const Complex pi_area(kPi, 0.0);
  const Eigen::MatrixXcd u = h == Handedness::right ? pulse_propagator(block, pi_area, 0.0)
                                                    : pulse_propagator(block, 0.0, pi_area);
  return u * rho * u.adjoint();
}

DensityOperator apply_ideal_pulse(const DensityOperator& rho, const PulseBlock& block, Handedness h) {
  return DensityOperator::unchecked(apply_ideal_pulse(rho.matrix(), block, h));
}

QuadratureRule gauss_hermite_normal(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  double total = 0.0;
  for (int k = 0; k < order; ++k) {
    rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()[k];
    const double v = solver.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = v * v;
    total += v * v;
  }
  for (double& w : rule.weights) w /= total;
  // Exact zero for the odd-order middle node.
  if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  return rule;
}

PulseChannel::PulseChannel(const PulseBlock& block, Handedness handedness, double sigma_beta,
                           int quadrature_order, bool retain_cross_terms)
    : block_(block),
      handedness_(handedness),
      sigma_beta_(sigma_beta),
      rule_(gauss_hermite_normal(quadrature_order)),
      cross_terms_(retain_cross_terms) {
  if (!(sigma_beta >= 0.0)) throw std::invalid_argument("sigma_beta must be non-negative");
  for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
    const double beta = sigma_beta_ * rule_.nodes[k];
    // |c_{h,+-}| does not depend on the axis angle.
    const JonesCoefficients c = jones_coefficients(handedness_, 0.0, beta);
    const double sp = std::sin(kPi * std::abs(c.plus) / 2.0);
    const double sm = std::sin(kPi * std::abs(c.minus) / 2.0);
    transfer_plus_ += rule_.weights[k] * sp * sp;
    transfer_minus_ += rule_.weights[k] * sm * sm;
  }
}

Eigen::MatrixXcd PulseChannel::apply(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != block_.dimension || rho.cols() != block_.dimension) {
    throw std::invalid_argument("pulse channel: dimension mismatch");
  }
  return cross_terms_ ? apply_full(rho) : apply_four_term(rho);
}

Eigen::MatrixXcd PulseChannel::apply_four_term(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out = rho;
  const int block_levels[4] = {block_.s_minus, block_.s_plus, block_.p_minus, block_.p_plus};
  for (int level : block_levels) {
    out.row(level).setZero();
    out.col(level).setZero();
  }
  swap_block(rho, out, block_.s_minus, block_.p_plus, transfer_plus_);
  swap_block(rho, out, block_.s_plus, block_.p_minus, transfer_minus_);
  return out;
}

Eigen::MatrixXcd PulseChannel::apply_full(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (int a = 0; a < kAlphaSamples; ++a) {
    const double alpha = kPi * a / kAlphaSamples;
    for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
      const JonesCoefficients c = jones_coefficients(handedness_, alpha, sigma_beta_ * rule_.nodes[k]);
      const Eigen::MatrixXcd u = pulse_propagator(block_, kPi * c.plus, kPi * c.minus);
      out += (rule_.weights[k] / kAlphaSamples) * (u * rho * u.adjoint());
    }
  }
  return out;
}

Eigen::MatrixXcd apply_birefringent_pulse(const Eigen::MatrixXcd& rho, const PulseChannel& channel) {
  return channel.apply(rho);
}

DensityOperator apply_birefringent_pulse(const DensityOperator& rho, const PulseChannel& channel) {
  return DensityOperator::unchecked(channel.apply(rho.matrix()));
}

double wrong_excitation_probability(double sigma_beta) {
  if (!(sigma_beta >= 0.0)) throw std::invalid_argument("sigma_beta must be non-negative");
  return kPi * kPi * sigma_beta * sigma_beta / 16.0;
}

}  // namespace ejuggle
