#pragma once

// Closed-form special solutions (Barenblatt wave, cylinders, sphere steady
// state, King family) and the shooting solver for traveling-wave profiles.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "yamabe/model.hpp"

namespace yamabe {

struct GridSpec {
  double ymin = -20.0;
  double ymax = 60.0;
  double dy = 0.01;

  int size() const {
    return int(std::llround((ymax - ymin) / dy)) + 1;
  }
  double y(int i) const { return ymin + i * dy; }
};

// ---------------------------------------------------------------------------
// Closed forms

// Pressure of the explicit speed-1 wave: v1(y) = 1 + c_p e^{-(p-1)y},
// c_p = 2^{p-1} - 1 (forced by psi(0) = 1/2).
double barenblatt_cp(const ModelParams& mp);
double barenblatt_pressure(double y, const ModelParams& mp);
double barenblatt_profile(double y, const ModelParams& mp);  // psi1 = v1^{-1/(p-1)}

// Spatially flat solutions xi_k(tau) = 1/(1 - k e^{alpha tau}).
double cylinder_blowup_time(double k, const ModelParams& mp);  // +inf for k <= 0
double cylinder_pressure(double tau, double k, const ModelParams& mp);
double cylinder_excess(double tau, double k, const ModelParams& mp);  // xi_k - 1
double cylinder_pressure_dtau(double tau, double k, const ModelParams& mp);

// Steady state phi_S(x) = A sech^m(x/m), A = ((m+1)/m)^{1/(p-1)}, m = (n-2)/2.
double sphere_steady(double x, const ModelParams& mp);
double sphere_steady_xx(double x, const ModelParams& mp);   // analytic
double sphere_pressure(double x, const ModelParams& mp);    // (m/(m+1)) cosh^2(x/m)

// ---------------------------------------------------------------------------
// King solutions

struct KingState {
  double xi = 1.0;
  double zeta = 0.0;
  double tau = 0.0;
};

struct KingTrajectory {
  std::vector<double> tau;
  std::vector<double> xi;
  std::vector<double> zeta;
  bool blew_up = false;
};

// Right side of p xi' = p(p-1) zeta^2 + (p-1)(xi^2 - xi),
//               p zeta' = (p-1) zeta ((p+1) xi - 1).
Eigen::Vector2d king_rhs(const Eigen::Vector2d& s, const ModelParams& mp);

KingTrajectory king_integrate(const KingState& start, double tau_end,
                              const ModelParams& mp, double xi_cap = 1e6);

// Pressure ansatz u_K = xi + zeta cosh((p-1)x) and its exact derivatives.
double king_pressure(double x, double xi, double zeta, const ModelParams& mp);
double king_pressure_x(double x, double xi, double zeta, const ModelParams& mp);
double king_pressure_xx(double x, double xi, double zeta, const ModelParams& mp);

// Radial chart: phi_K = (a/(1+2br^2+r^4))^{(n-2)/4}, u_K = (1+2br^2+r^4)/a.
double king_radial_profile(double r, double a, double b, const ModelParams& mp);
double king_radial_pressure(double r, double a, double b);

// Slope fits d ln(xi-1)/dtau and d ln zeta/dtau over the most-negative-tau
// quarter of a trajectory (targets (p-1)/p and p-1 backward in time).
struct KingSlopes {
  double xi_slope = 0.0;
  double zeta_slope = 0.0;
  double xi_target = 0.0;    // (p-1)/p
  double zeta_target = 0.0;  // p-1
};
KingSlopes king_fit_slopes(const KingTrajectory& tr, const ModelParams& mp);

// ---------------------------------------------------------------------------
// Traveling waves

struct WavePoint {
  double psi = 0.0;
  double psi_y = 0.0;
  double psi_yy = 0.0;
  double delta = 0.0;    // 1 - psi, kept cancellation-free on the right tail
  double delta_y = 0.0;
  double v = 0.0;        // pressure psi^{-(p-1)}
  double v_y = 0.0;
  double v_yy = 0.0;
  double v_excess = 0.0; // v - 1, cancellation-free
};

// A solved wave profile. Immutable; evaluation anywhere on the line via cubic
// Hermite interpolation on the grid and the analytic tails outside it.
// psi'' is always reconstructed from the wave ODE, so the traveling-wave
// residual of evaluated points vanishes identically (pointwise algebra).
class WaveProfile {
 public:
  double lambda() const { return lambda_; }
  const ModelParams& params() const { return mp_; }
  const GridSpec& grid() const { return grid_; }

  double gamma() const { return gamma_; }          // smaller quadratic root
  double gamma_other() const { return gamma_plus_; }
  double gamma_tail() const { return gamma_tail_; } // realized right-tail rate
  double amplitude() const { return C_; }           // 1 - psi ~ C e^{-gamma_tail y}
  double pressure_amplitude() const { return mp_.pm1 * C_; }
  double left_coefficient() const { return a_left_; } // psi ~ a e^{y}, y -> -inf
  bool closed_form() const { return closed_form_; }
  double fit_flatness() const { return fit_flatness_; }
  double normalization_residual() const { return norm_residual_; }

  const Eigen::ArrayXd& psi_samples() const { return psi_; }
  const Eigen::ArrayXd& dpsi_samples() const { return dpsi_; }
  const Eigen::ArrayXd& delta_samples() const { return delta_; }
  const Eigen::ArrayXd& ddelta_samples() const { return ddelta_; }
  int switch_index() const { return i_switch_; }

  WavePoint eval(double y) const;
  double psi(double y) const { return eval(y).psi; }
  double v(double y) const { return eval(y).v; }

  static WaveProfile closed_form_barenblatt(const ModelParams& mp,
                                            const GridSpec& grid);

 private:
  friend WaveProfile solve_traveling_wave(double, const ModelParams&,
                                          const GridSpec&);
  WaveProfile() = default;
  WavePoint eval_closed_form(double y) const;
  WavePoint from_psi(double psi, double dpsi) const;
  WavePoint from_delta(double delta, double ddelta) const;

  void fill_curvature();

  ModelParams mp_;
  double lambda_ = 1.0;
  double gamma_ = 0.0, gamma_plus_ = 0.0, gamma_tail_ = 0.0;
  double C_ = 0.0;
  double a_left_ = 0.0, b_left_ = 0.0;
  bool closed_form_ = false;
  double fit_flatness_ = 0.0;
  double norm_residual_ = 0.0;
  GridSpec grid_;
  Eigen::ArrayXd psi_, dpsi_, delta_, ddelta_;
  Eigen::ArrayXd curv_;  // psi'' at nodes, from the ODE identity
  int i_switch_ = 0;  // first grid index where (delta, ddelta) is authoritative
};

// Shooting solve of psi'' + lambda p psi^{p-1} psi' + psi^p - psi = 0 with
// psi(0) = 1/2. lambda = 1 returns the closed form; lambda < 1 is a domain
// error. The grid should satisfy ymin <= -20, ymax >= 30/gamma; integration
// extends internally past ymax until the tail-amplitude fit is flat.
WaveProfile solve_traveling_wave(double lambda, const ModelParams& mp,
                                 const GridSpec& grid);

}  // namespace yamabe
