#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ddbh/errors.hpp"

namespace ddbh {

struct StepControl {
  double dt_init = 1e-3;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double dt_min = 1e-13;
  long max_steps = 50'000'000;
};

/// Dormand-Prince 5(4) with first-same-as-last reuse and local error control.
///
/// `rhs(t, y, dy)` writes dy/dt.  `project(y)` is applied to every accepted
/// state.  `observe(t, y, dydt)` runs after each accepted step with the RHS
/// already evaluated at the new point; returning false stops the integration.
/// Returns the final time reached.
template <class Rhs, class Project, class Observe>
double integrate_dopri5(Rhs&& rhs, Project&& project, Observe&& observe, double t0,
                        Eigen::VectorXcd& y, double t_end, const StepControl& ctl) {
  using Vec = Eigen::VectorXcd;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Eigen::Index n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
  double t = t0;
  double h = std::min(ctl.dt_init, t_end - t0);
  rhs(t, y, k1);
  if (!observe(t, y, k1)) return t;

  long steps = 0;
  bool last_rejected = false;
  while (t < t_end) {
    if (++steps > ctl.max_steps) throw StiffnessError("integrator exceeded max_steps");
    if (t + h > t_end) h = t_end - t;

    tmp = y + h * a21 * k1;
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = ctl.abs_tol + ctl.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = std::abs(err[i]) / sc;
      acc += r * r;
    }
    const double enorm = std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(n, 1)));
    if (!std::isfinite(enorm)) {
      // Non-finite stages: shrink hard and retry.
      h *= 0.1;
      last_rejected = true;
      if (h < ctl.dt_min) throw DivergenceError("non-finite state during integration");
      continue;
    }

    if (enorm <= 1.0) {
      t += h;
      y.swap(ynew);
      project(y);
      k1.swap(k7);
      double fac = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
      if (!observe(t, y, k1)) return t;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
      last_rejected = true;
    }
    if (h < ctl.dt_min)
      throw StiffnessError("step size underflow at t=" + std::to_string(t));
  }
  return t;
}

}  // namespace ddbh
