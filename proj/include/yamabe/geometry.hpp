#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "yamabe/evolution.hpp"
#include "yamabe/model.hpp"
#include "yamabe/profiles.hpp"

namespace yamabe {

// Curvature of the metric phi^{4/(n-2)} (dx_raw^2 + g_{S^{n-1}}) along one
// time slice, computed from a sampled profile with central differences.
// All x-derivatives of phi are taken in the normalized coordinate and
// rescaled internally (x_raw = x / m).  Nodes with phi below the floor are
// outside the window: curvatures blow up like phi^{-(p-1)} toward the tips
// and the approximations there are meaningless anyway.
struct CurvatureSlice {
  Eigen::ArrayXd x;
  Eigen::ArrayXd Rtilde;  // phi^{-p}(phi - phi_xx), normalized scalar curvature
  Eigen::ArrayXd Krad;    // radial-tangential sectional curvature
  Eigen::ArrayXd Ktan;    // tangential-tangential sectional curvature
  double max_tensor_norm = 0.0;
};

CurvatureSlice curvature_slice(const Eigen::ArrayXd& x,
                               const Eigen::ArrayXd& phi,
                               const ModelParams& mp,
                               double phi_floor = 1e-6);

// Same quantities from analytic derivatives at a single point.
struct CurvaturePoint {
  double Rtilde = 0.0;
  double Krad = 0.0;
  double Ktan = 0.0;
};

CurvaturePoint curvature_point(double phi, double phi_x, double phi_xx,
                               const ModelParams& mp);

// |Rm| of the warped metric: sqrt(4(n-1) Krad^2 + 2(n-1)(n-2) Ktan^2).
double curvature_tensor_norm(double Krad, double Ktan, const ModelParams& mp);

// Sectional curvature at the cap of a traveling wave, 2(lambda p + 1)/(p+1);
// the radial and tangential values coincide there.
double tip_curvature(double lambda, const ModelParams& mp);

// Ratio between the assembled scalar curvature 2(n-1)Krad + (n-1)(n-2)Ktan
// and Rtilde, measured on discrete cylinder slices.  Equals (n-1)(n-2); the
// fitted value is what the trace-identity checks freeze.
double fitted_trace_constant(const ModelParams& mp);

// Type-I boundedness monitor: the largest |Rm| over each stored snapshot
// must stay within twice the plateau set by the earliest quarter of them.
struct TypeIMonitor {
  std::vector<double> tau;
  std::vector<double> max_norm;
  double plateau = 0.0;
  double overall = 0.0;
  bool bounded = false;
};

TypeIMonitor type1_monitor(const SpaceTimeField& f, double phi_floor = 1e-6);

// Coordinate changes between the radial picture phihat(r, t) on (0,T) and
// the cylindrical one:  x = ln r, tau = -ln(T - t),
// phi(x,tau) = (T-t)^{-1/(p-1)} r^{2/(p-1)} phihat(r,t).
double cylindrical_from_radial(
    const std::function<double(double, double)>& phihat, double T, double x,
    double tau, const ModelParams& mp);

double radial_from_cylindrical(
    const std::function<double(double, double)>& phi, double T, double r,
    double t, const ModelParams& mp);

// Tip-centered polar chart of a traveling-wave cap at time tau: tip radius
// r = e^{z/m} with z = x - lambda tau + h, regular conformal factor
// Phi(r) = psi(z) r^{-m} (tends to the left tail coefficient at r -> 0).
// x_edge is the cylindrical coordinate where r = 2M.
struct PolarCap {
  double tau = 0.0;
  double x_edge = 0.0;
  Eigen::ArrayXd r;
  Eigen::ArrayXd Phi;
};

PolarCap polar_frame(const WaveProfile& w, double lambda, double h, double M,
                     double tau, int samples = 128);

}  // namespace yamabe
