#pragma once

// Adaptive Dormand-Prince 5(4) integration for the small autonomous systems
// used by the profile and King solvers.  States are fixed-size Eigen vectors.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

namespace yamabe {

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  double h_init = 1e-4;
  double h_max = std::numeric_limits<double>::infinity();
  std::int64_t max_steps = 4'000'000;
};

enum class StepControl { kContinue, kStop };

template <int N>
struct OdeResult {
  Eigen::Matrix<double, N, 1> y;
  double t = 0.0;
  bool reached_end = false;
  bool stopped = false;         // observer requested stop
  bool step_underflow = false;  // controller drove h below representable size
  std::int64_t n_steps = 0;
};

// Integrates y' = f(t, y) from t0 to t1 (either direction).  The observer is
// called after every accepted step as obs(t, y) and may stop the run.
template <int N, class F, class Obs>
OdeResult<N> integrate(F&& f, double t0, Eigen::Matrix<double, N, 1> y,
                       double t1, const OdeOptions& opt, Obs&& obs) {
  using Vec = Eigen::Matrix<double, N, 1>;

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;

  OdeResult<N> res;
  res.t = t0;
  res.y = y;
  if (t1 == t0) {
    res.reached_end = true;
    return res;
  }
  const double dir = (t1 > t0) ? 1.0 : -1.0;
  double t = t0;
  double h = dir * std::min(std::abs(opt.h_init), opt.h_max);
  Vec k1 = f(t, y);

  while (res.n_steps < opt.max_steps) {
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    const bool last = (t + h == t1);

    Vec k2 = f(t + c2 * h, y + h * (a21 * k1));
    Vec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Vec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = f(t + h,
               y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = f(t + h, ynew);  // FSAL
    Vec errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc =
          opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = errv[i] / sc;
      err += r * r;
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;
      ++res.n_steps;
      res.t = t;
      res.y = y;
      if (obs(t, y) == StepControl::kStop) {
        res.stopped = true;
        return res;
      }
      if (last) {
        res.reached_end = true;
        return res;
      }
    }

    double fac = 0.9 * std::pow(err > 0.0 ? 1.0 / err : 1e10, 0.2);
    fac = std::min(5.0, std::max(0.2, fac));
    h *= fac;
    if (std::abs(h) > opt.h_max) h = dir * opt.h_max;
    if (t + h == t) {
      res.step_underflow = true;
      return res;
    }
  }
  return res;
}

template <int N, class F>
OdeResult<N> integrate(F&& f, double t0, Eigen::Matrix<double, N, 1> y,
                       double t1, const OdeOptions& opt) {
  return integrate<N>(std::forward<F>(f), t0, std::move(y), t1, opt,
                      [](double, const Eigen::Matrix<double, N, 1>&) {
                        return StepControl::kContinue;
                      });
}

}  // namespace yamabe
