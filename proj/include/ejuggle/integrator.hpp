#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ejuggle {

/// Thrown when the step size underflows or the step budget is exhausted.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_reached)
      : std::runtime_error(what + " (t = " + std::to_string(time_reached) + " s)"),
        time_reached_(time_reached) {}

  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

struct StepControl {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.0;      // 0 = unbounded
  double initial_step = 0.0;  // 0 = automatic
  long max_steps = 10'000'000;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace detail {

template <typename T>
double magnitude_squared(const T& x) {
  if constexpr (Eigen::NumTraits<T>::IsComplex) {
    return std::norm(x);
  } else {
    return x * x;
  }
}

template <typename Vector>
double weighted_rms(const Vector& err, const Vector& y0, const Vector& y1, const StepControl& ctl) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double peak = std::max(magnitude_squared(y0[i]), magnitude_squared(y1[i]));
    const double scale = ctl.atol + ctl.rtol * std::sqrt(peak);
    sum += magnitude_squared(err[i]) / (scale * scale);
  }
  return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

}  // namespace detail

/// Dormand-Prince 5(4) with local extrapolation and FSAL. `rhs(t, y, dydt)`
/// evaluates the derivative; `on_accept(t, y)` runs after every accepted
/// step and may adjust y in place.
template <typename Vector, typename Rhs, typename Observer>
IntegrationStats integrate_dopri5(Rhs&& rhs, double t0, double t1, Vector& y, const StepControl& ctl,
                                  Observer&& on_accept) {
  // Butcher tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  // b - b_hat, the embedded error estimator.
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  IntegrationStats stats;
  const double span = t1 - t0;
  if (!(span > 0.0)) return stats;

  const Eigen::Index n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  auto eval = [&](double t, const Vector& state, Vector& out) {
    rhs(t, state, out);
    ++stats.evaluations;
  };

  const double max_step = ctl.max_step > 0.0 ? std::min(ctl.max_step, span) : span;
  double t = t0;
  eval(t, y, k1);

  double h = ctl.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic, first-order part.
    const double d0 = detail::weighted_rms(y, y, y, ctl);
    const double d1 = detail::weighted_rms(k1, y, y, ctl);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
  }
  h = std::min(h, max_step);

  constexpr double safety = 0.9, min_factor = 0.2, max_factor = 5.0;
  double previous_error = 1e-4;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= ctl.max_steps) {
      throw IntegrationError("step budget exhausted", t);
    }
    const bool last = t + h >= t1 || t1 - (t + h) < 1e-12 * span;
    if (last) h = t1 - t;
    if (h <= std::abs(t) * 4 * std::numeric_limits<double>::epsilon() || h < 1e-300) {
      throw IntegrationError("step size underflow", t);
    }

    ytmp = y + h * a21 * k1;
    eval(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    eval(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    eval(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    eval(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double error = detail::weighted_rms(err, y, ynew, ctl);
    if (error <= 1.0) {
      t = last ? t1 : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++stats.accepted;
      on_accept(t, y);
      // PI controller (Gustafsson), exponents for a 5th-order pair.
      double factor = error == 0.0 ? max_factor
                                   : safety * std::pow(error, -0.7 / 5) *
                                         std::pow(previous_error, 0.4 / 5);
      factor = std::clamp(factor, min_factor, max_factor);
      previous_error = std::max(error, 1e-4);
      h = std::min(h * factor, max_step);
    } else {
      ++stats.rejected;
      h *= std::max(min_factor, safety * std::pow(error, -1.0 / 5));
    }
  }
  return stats;
}

}  // namespace ejuggle
