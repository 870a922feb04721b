#pragma once

#include <cmath>
#include <stdexcept>

namespace yamabe {

// Constants fixed by the dimension n >= 3 of the evolving metric.
// The cylindrical equation is used in its normalized form
//   (phi^p)_tau = phi_xx + phi^p - phi,  p = (n+2)/(n-2),
// and all quantities in this library live in that gauge.
struct ModelParams {
  int n = 4;
  double p = 3.0;         // (n+2)/(n-2)
  double pm1 = 2.0;       // p - 1 = 4/(n-2)
  double m = 1.0;         // (n-2)/2
  double alpha = 2.0 / 3.0;  // (p-1)/p, growth rate of the cylinder mode
  // Rescaling constants between the raw cylindrical equation
  // (phi^p)_tau = phi_xx + a^{-1} phi^p - b phi and the normalized one.
  // Recorded for coordinate changes; not used by the solvers.
  double beta_raw = 1.0;   // b = (n-2)^2/4, the x rescale is x_raw = x/m
  double amp_raw = 1.0;    // amplitude rescale (a*b)^{1/(p-1)}, a = (p-1)/p

  static ModelParams dimension(int n) {
    if (n < 3) throw std::domain_error("ModelParams: need n >= 3");
    ModelParams mp;
    mp.n = n;
    mp.p = double(n + 2) / double(n - 2);
    mp.pm1 = 4.0 / double(n - 2);
    mp.m = double(n - 2) / 2.0;
    mp.alpha = mp.pm1 / mp.p;
    mp.beta_raw = mp.m * mp.m;
    mp.amp_raw = std::pow(mp.alpha * mp.beta_raw, 1.0 / mp.pm1);
    return mp;
  }
};

// Roots of the decay-exponent quadratic g^2 - lambda*p*g + (p-1) = 0.
// `minus` is computed from `plus` through the product of roots, which keeps
// both roots accurate when lambda*p is large.
struct GammaRoots {
  double minus = 0.0;  // smaller root, the realized tail rate for lambda > 1
  double plus = 0.0;   // larger root
};

inline GammaRoots gamma_roots(double lambda, const ModelParams& mp) {
  if (lambda < 1.0)
    throw std::domain_error("gamma_roots: lambda must be >= 1");
  const double lp = lambda * mp.p;
  const double disc = lp * lp - 4.0 * mp.pm1;
  if (disc < 0.0)
    throw std::domain_error("gamma_roots: negative discriminant");
  GammaRoots r;
  r.plus = 0.5 * (lp + std::sqrt(disc));
  r.minus = mp.pm1 / r.plus;
  return r;
}

struct GammaExponent {
  double value = 0.0;          // smaller root of the quadratic
  double other = 0.0;          // larger root
  bool lambda_one = false;     // at lambda == 1 the Barenblatt tail realizes
  double realized = 0.0;       // exponent p-1 instead of the smaller root
};

inline GammaExponent gamma_exponent_info(double lambda, const ModelParams& mp) {
  GammaRoots r = gamma_roots(lambda, mp);
  GammaExponent g;
  g.value = r.minus;
  g.other = r.plus;
  g.lambda_one = (lambda == 1.0);
  g.realized = g.lambda_one ? mp.pm1 : r.minus;
  return g;
}

inline double gamma_exponent(double lambda, const ModelParams& mp) {
  return gamma_roots(lambda, mp).minus;
}

// Gauge maps u = phi^{-(p-1)} and back, stable across the full dynamic range.
inline double pressure_from_conformal(double phi, const ModelParams& mp) {
  if (!(phi > 0.0))
    throw std::domain_error("pressure_from_conformal: phi must be positive");
  return std::exp(-mp.pm1 * std::log(phi));
}

inline double conformal_from_pressure(double u, const ModelParams& mp) {
  if (!(u > 0.0))
    throw std::domain_error("conformal_from_pressure: u must be positive");
  return std::exp(-std::log(u) / mp.pm1);
}

}  // namespace yamabe
