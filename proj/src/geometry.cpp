#include "yamabe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace yamabe {

CurvaturePoint curvature_point(double phi, double phi_x, double phi_xx,
                               const ModelParams& mp) {
  if (!(phi > 0.0))
    throw std::domain_error("curvature_point: phi must be positive");
  CurvaturePoint c;
  const double lphi = std::log(phi);
  const double inv_p = std::exp(-mp.p * lphi);
  const double inv_p1 = inv_p / phi;
  const double inv_pm1 = std::exp(-mp.pm1 * lphi);
  c.Rtilde = inv_p * (phi - phi_xx);
  c.Krad = mp.m * (phi_x * phi_x - phi * phi_xx) * inv_p1;
  c.Ktan = inv_pm1 * (phi * phi - phi_x * phi_x) / (phi * phi);
  return c;
}

CurvatureSlice curvature_slice(const Eigen::ArrayXd& x,
                               const Eigen::ArrayXd& phi,
                               const ModelParams& mp, double phi_floor) {
  const long N = x.size();
  if (phi.size() != N || N < 3)
    throw std::invalid_argument("curvature_slice: bad sample arrays");
  const double dx = x[1] - x[0];

  std::vector<double> xs, rt, kr, kt;
  xs.reserve(N);
  rt.reserve(N);
  kr.reserve(N);
  kt.reserve(N);
  double worst = 0.0;
  for (long i = 1; i + 1 < N; ++i) {
    if (!(phi[i] >= phi_floor)) continue;
    const double px = (phi[i + 1] - phi[i - 1]) / (2.0 * dx);
    const double pxx = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (dx * dx);
    const CurvaturePoint c = curvature_point(phi[i], px, pxx, mp);
    xs.push_back(x[i]);
    rt.push_back(c.Rtilde);
    kr.push_back(c.Krad);
    kt.push_back(c.Ktan);
    worst = std::max(worst, curvature_tensor_norm(c.Krad, c.Ktan, mp));
  }

  CurvatureSlice s;
  const long M = static_cast<long>(xs.size());
  s.x = Eigen::Map<const Eigen::ArrayXd>(xs.data(), M);
  s.Rtilde = Eigen::Map<const Eigen::ArrayXd>(rt.data(), M);
  s.Krad = Eigen::Map<const Eigen::ArrayXd>(kr.data(), M);
  s.Ktan = Eigen::Map<const Eigen::ArrayXd>(kt.data(), M);
  s.max_tensor_norm = worst;
  return s;
}

double curvature_tensor_norm(double Krad, double Ktan, const ModelParams& mp) {
  const double nm1 = mp.n - 1.0, nm2 = mp.n - 2.0;
  return std::sqrt(4.0 * nm1 * Krad * Krad +
                   2.0 * nm1 * nm2 * Ktan * Ktan);
}

double tip_curvature(double lambda, const ModelParams& mp) {
  // m (p-1) = 2 in every dimension, so the cap curvature
  // m (p-1) (lambda p + 1) / (p+1) collapses to this form.
  return 2.0 * (lambda * mp.p + 1.0) / (mp.p + 1.0);
}

double fitted_trace_constant(const ModelParams& mp) {
  // Slope of (2(n-1)Krad + (n-1)(n-2)Ktan) against Rtilde across a family
  // of discrete flat cylinder slices phi = const.
  const long N = 41;
  Eigen::ArrayXd x(N);
  for (long i = 0; i < N; ++i) x[i] = -2.0 + 0.1 * static_cast<double>(i);
  double sxx = 0.0, sxy = 0.0;
  for (double level : {0.6, 0.8, 1.0, 1.3}) {
    const Eigen::ArrayXd phi = Eigen::ArrayXd::Constant(N, level);
    const CurvatureSlice s = curvature_slice(x, phi, mp);
    for (long i = 0; i < s.x.size(); ++i) {
      const double rhat =
          2.0 * (mp.n - 1.0) * s.Krad[i] +
          (mp.n - 1.0) * (mp.n - 2.0) * s.Ktan[i];
      sxx += s.Rtilde[i] * s.Rtilde[i];
      sxy += s.Rtilde[i] * rhat;
    }
  }
  return sxy / sxx;
}

TypeIMonitor type1_monitor(const SpaceTimeField& f, double phi_floor) {
  if (f.snapshots.empty())
    throw std::invalid_argument("type1_monitor: run has no snapshots");
  const ModelParams mp = ModelParams::dimension(f.n);
  TypeIMonitor mon;
  for (std::size_t j = 0; j < f.snapshots.size(); ++j) {
    const CurvatureSlice s =
        curvature_slice(f.x, f.snapshots[j], mp, phi_floor);
    mon.tau.push_back(f.snapshot_tau[j]);
    mon.max_norm.push_back(s.max_tensor_norm);
  }
  const std::size_t early =
      std::max<std::size_t>(1, (mon.max_norm.size() + 3) / 4);
  for (std::size_t j = 0; j < mon.max_norm.size(); ++j) {
    if (j < early) mon.plateau = std::max(mon.plateau, mon.max_norm[j]);
    mon.overall = std::max(mon.overall, mon.max_norm[j]);
  }
  mon.bounded = mon.overall <= 2.0 * mon.plateau;
  return mon;
}

double cylindrical_from_radial(
    const std::function<double(double, double)>& phihat, double T, double x,
    double tau, const ModelParams& mp) {
  const double r = std::exp(x);
  const double Tmt = std::exp(-tau);  // T - t
  const double t = T - Tmt;
  return std::exp(tau / mp.pm1) * std::exp(mp.m * x) * phihat(r, t);
}

double radial_from_cylindrical(
    const std::function<double(double, double)>& phi, double T, double r,
    double t, const ModelParams& mp) {
  if (!(r > 0.0) || !(t < T))
    throw std::domain_error("radial_from_cylindrical: need r > 0, t < T");
  const double x = std::log(r);
  const double tau = -std::log(T - t);
  return std::exp(-tau / mp.pm1) * std::exp(-mp.m * x) * phi(x, tau);
}

PolarCap polar_frame(const WaveProfile& w, double lambda, double h, double M,
                     double tau, int samples) {
  if (!(M > 0.0) || samples < 2)
    throw std::domain_error("polar_frame: need M > 0 and >= 2 samples");
  const ModelParams& mp = w.params();
  PolarCap cap;
  cap.tau = tau;
  cap.x_edge = lambda * tau - h + mp.m * std::log(2.0 * M);
  cap.r = Eigen::ArrayXd(samples);
  cap.Phi = Eigen::ArrayXd(samples);
  for (int i = 0; i < samples; ++i) {
    const double r = 2.0 * M * static_cast<double>(i + 1) / samples;
    const double z = mp.m * std::log(r);
    cap.r[i] = r;
    cap.Phi[i] = w.eval(z).psi * std::exp(-mp.m * std::log(r));
  }
  return cap;
}

}  // namespace yamabe
