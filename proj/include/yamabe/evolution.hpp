#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "yamabe/barriers.hpp"
#include "yamabe/model.hpp"

namespace yamabe {

// One implicit-Euler run of the flow (phi^p)_tau = phi_xx + phi^p - phi on
// [-X, X], Dirichlet data on the ends, started at tau = -m.
struct EvolveConfig {
  double m = 30.0;
  double tau_end = -10.0;
  double X = 60.0;
  double dx = 0.05;
  double dtau = 1e-3;
  int snapshot_count = 9;
  double newton_tol = 1e-12;  // on max |delta phi| / |phi|, nodewise
  int newton_max_iter = 25;
  int max_halvings = 10;
  int diag_stride = 0;        // 0: pick ~400 diagnostic times per run
  bool allow_uncertified = false;
  std::string gauge = "conformal";  // "conformal" | "pressure"
};

struct TimeDiagnostics {
  double tau = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  // barrier margins in the phi gauge: phi must stay in
  // [(w+)^{-1/(p-1)}, (w-)^{-1/(p-1)}]
  double upper_violation = 0.0;  // how far phi dips below the w+ image
  double lower_violation = 0.0;  // how far phi rises above the w- image
  int newton_iters = 0;
  int halvings = 0;
};

struct SpaceTimeField {
  EvolveConfig config;
  AncientParams params;  // meaningful only for barrier-driven runs
  int n = 0;
  Eigen::ArrayXd x;
  Eigen::ArrayXd phi;    // state at tau_end
  double tau = 0.0;      // always tau_end after a completed run
  std::vector<double> snapshot_tau;
  std::vector<Eigen::ArrayXd> snapshots;
  std::vector<TimeDiagnostics> diagnostics;
  double max_upper_violation = 0.0;
  double max_lower_violation = 0.0;
  bool completed = false;

  Eigen::ArrayXd pressure() const;  // u = phi^{-(p-1)} at tau_end
};

// Runs the scheme against arbitrary initial/boundary data phi(x, tau);
// the same callable provides the initial slice and the Dirichlet ends.
SpaceTimeField evolve_field(const std::function<double(double, double)>& phi,
                            const ModelParams& mp, const EvolveConfig& cfg);

// Barrier-driven run: starts on the upper barrier at tau = -m, takes its
// Dirichlet data from it, and tracks the sandwich margins along the way.
// Refuses to run without a passing certification covering [-m, tau_end]
// unless cfg.allow_uncertified is set.
SpaceTimeField evolve(const BarrierSet& barriers, const EvolveConfig& cfg,
                      const CertificationReport* cert = nullptr);

// sup |u_A - u_B| over |x| <= window, taken over the final slice and every
// snapshot time >= tau_from that both runs recorded; the runs must share
// the grid and the final time.  tau_from restricts the comparison to the
// common window when the runs start at different depths.
double pressure_gap(const SpaceTimeField& a, const SpaceTimeField& b,
                    double window,
                    double tau_from = -std::numeric_limits<double>::infinity());

// Scheme-error constant C in err <= C (dtau + dx^2), measured by tracking
// exact solutions (a traveling wave and a shrinking cylinder) on the given
// grid and doubled for safety.  tol = C (dtau + dx^2) is the sandwich
// tolerance used by the acceptance runs.
double calibrate_scheme_constant(const ModelParams& mp,
                                 const EvolveConfig& cfg);

}  // namespace yamabe
