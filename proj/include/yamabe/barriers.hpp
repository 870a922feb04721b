#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "yamabe/model.hpp"
#include "yamabe/profiles.hpp"

namespace yamabe {

// Parameters of one member of the ancient family: two wave speeds, two
// phase shifts, the cylinder mass k, plus the supersolution bookkeeping
// (slow-down amplitude q, certification anchor time tau0 < 0).
struct AncientParams {
  double lambda = 2.0;
  double lambda2 = 2.0;
  double h = 0.0;
  double h2 = 0.0;
  double k = 0.0;
  double q = 0.0;
  double tau0 = -10.0;
};

// Quadratic pressure operator
//   L(u) = u u_xx - p/(p-1) u_x^2 + (p-1)(u^2 - u) - p u_tau.
// Exact solutions of the flow are its zeros; supersolutions have L <= 0.
double pressure_L(double u, double ux, double uxx, double utau,
                  const ModelParams& mp);

// Everything about the three blocks at one space-time point.
// w1 is the left-moving wave v_lambda(z), w3 the right-moving wave
// v_lambda2(zbar), w2 = xi_k(tau) - 1 the cylinder excess; e1 = w1 - 1 and
// e3 = w3 - 1 are carried separately so small excesses never pass through
// a subtraction.
struct BarrierEval {
  double z = 0.0, zbar = 0.0;
  double w1 = 1.0, w1_x = 0.0, w1_xx = 0.0, e1 = 0.0;
  double w2 = 0.0;
  double w3 = 1.0, w3_x = 0.0, w3_xx = 0.0, e3 = 0.0;
  double wminus = 1.0;
  double wplus = 1.0;
  double wplus_excess = 0.0;  // wplus - 1 = e1 + w2 + e3
};

// Grouped expansion of L(w+).  Each block solves its own equation exactly,
// so the residual is purely cross terms plus the two slow-down terms:
//   t1 = (w3)_xx (e1 + w2)         t2 = (w1)_xx (e3 + w2)
//   t3 = -2p/(p-1) (w1)_x (w3)_x   t4 = 2(p-1) e1 e3
//   t5 = 2(p-1) w2 (e1 + e3)
//   t6 = -p q lambda  E'(tau) (w1)_x
//   t7 = +p q lambda2 E'(tau) (w3)_x
// with E'(tau) = d/dtau [tau e^{alpha tau}] = e^{alpha tau}(1 + alpha tau),
// negative for tau < -1/alpha.  t1..t5 are nonnegative, t6 and t7 are the
// negative terms that must absorb them.
struct LTerms {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0;
  double t6 = 0.0, t7 = 0.0;
  double sum() const { return ((t1 + t2) + (t3 + t4)) + (t5 + (t6 + t7)); }
  double positive_part() const { return t1 + t2 + t3 + t4 + t5; }
};

// The barrier pair built from two traveling waves and a cylinder:
//   w-(x,tau) = max(w1, 1 + w2, w3)
//   w+(x,tau) = w1 + w2 + w3 - 1   (blocks at slowed arguments when q > 0)
// Wave arguments: z = x - lambda tau (1 - q e^{alpha tau}) + h and
// zbar = -x - lambda2 tau (1 - q e^{alpha tau}) + h2.
class BarrierSet {
 public:
  BarrierSet(AncientParams ap, std::shared_ptr<const WaveProfile> left,
             std::shared_ptr<const WaveProfile> right);

  const AncientParams& params() const { return ap_; }
  const ModelParams& model() const { return mp_; }
  const WaveProfile& left_wave() const { return *left_; }
  const WaveProfile& right_wave() const { return *right_; }

  // Same waves, different slow-down amplitude.
  BarrierSet with_q(double q) const;

  BarrierEval eval(double x, double tau) const;
  double lower(double x, double tau) const;
  double upper(double x, double tau) const;

  // Analytic tau-derivative of w+ (chain rule through the slowed arguments
  // plus the cylinder ODE); used to cross-check the grouped expansion.
  double upper_tau(double x, double tau) const;

  LTerms upper_terms(double x, double tau) const;

  // L(w+) assembled directly from (w+, w+_x, w+_xx, w+_tau); equals
  // upper_terms().sum() up to roundoff and is kept only as a consistency
  // check, since it cancels catastrophically where the blocks are large.
  double upper_L_direct(double x, double tau) const;

 private:
  AncientParams ap_;
  ModelParams mp_;
  std::shared_ptr<const WaveProfile> left_;
  std::shared_ptr<const WaveProfile> right_;
};

// Solves the two wave profiles (shared when lambda == lambda2) and
// assembles the barrier set.  Requires lambda, lambda2 >= 1, k >= 0,
// q >= 0 and tau0 < 0.
BarrierSet make_barriers(const AncientParams& ap, const ModelParams& mp);

// Space-time certification box and mesh.  dx and M may be left at 0 to get
// the defaults dx = 0.02 / max(1, gamma) and M = 10 / min(1, gamma, gamma').
struct CertifyGrid {
  double tau_min = -40.0;
  double xbox = 60.0;     // requested half-width; truncated per slice
  int tau_levels = 70;    // geometric ladder in |tau| from tau0 to tau_min
  double dx = 0.0;
  double M = 0.0;
};

struct CertificationReport {
  AncientParams params;
  int n = 0;
  double tau_min = 0.0, tau0 = 0.0;
  int tau_levels = 0;
  double dx = 0.0;
  double xbox = 0.0;
  double M = 0.0;
  // Scaled residual max L(w+)/max(1, w+^2) over the box, with argmax.
  double maxL_global = 0.0;
  double maxL_x = 0.0, maxL_tau = 0.0;
  std::array<double, 6> maxL_by_region{};
  static const std::array<const char*, 6>& region_labels();
  // Worst ratio (t1+..+t5+t7)/(-t6), and the same ratio against the
  // asymptotic form -(p-1) q lambda tau e^{alpha tau} (w1)_x of t6.
  double dominant_term_margin = 0.0;
  double dominant_term_asymptotic_margin = 0.0;
  // Largest |t1+..+t5| seen on a truncation edge: the cross terms that the
  // truncation argument discards.
  double edge_crossterm_bound = 0.0;
  // Residual-of-the-max re-estimated on the argmax slice at dx/2.
  double err_est = 0.0;
  bool windows_clamped = false;
  std::string verdict;  // "pass" | "fail" | "inconclusive"
};

// Scans L(w+)/max(1, w+^2) over the box.  Verdict:
//   pass          max <= 1e-7
//   fail          max > 1e-7 and max > 2 * err_est
//   inconclusive  otherwise
CertificationReport certify_supersolution(const BarrierSet& b,
                                          const CertifyGrid& g);

struct FindQResult {
  AncientParams params;         // q set to the certified value
  CertificationReport report;   // report at that q
  bool found = false;
  std::vector<std::pair<double, std::string>> trace;  // (q, verdict)
};

// Doubling search from q_seed followed by geometric bisection to ~1% width;
// returns the certified upper endpoint.  q is capped at 0.99 e^{-alpha tau0}
// so the slowed arguments stay monotone on tau <= tau0.
FindQResult find_q(const BarrierSet& b, const CertifyGrid& g,
                   double q_seed = 0.25);

// Where the two wave blocks exchange dominance, w1 = w3.
struct IntersectionInfo {
  double x_numeric = 0.0;
  double x_predicted = 0.0;  // tail asymptotics of both waves
  double w1_value = 0.0;     // common value at the crossing
};

IntersectionInfo intersection_point(const BarrierSet& b, double tau);

// Decay rate of w1 - 1 along the intersection curve,
// d = (gamma gamma' + (p-1)) / p.
double intersection_decay_exponent(const BarrierSet& b);

}  // namespace yamabe
