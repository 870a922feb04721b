#include "yamabe/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "yamabe/util.hpp"

namespace yamabe {

namespace {

constexpr double kScaledTol = 1e-7;  // certification threshold on L/max(1,w+^2)
constexpr double kTailMargin = 40.0;   // truncation padding in units of 1/gamma
constexpr double kExpBudget = 600.0;   // keep (p-1)|z| below this everywhere

double slow_factor(double tau, double q, const ModelParams& mp) {
  return 1.0 - q * std::exp(mp.alpha * tau);
}

// d/dtau of tau e^{alpha tau}, the profile of the slow-down correction.
double eprime(double tau, const ModelParams& mp) {
  return std::exp(mp.alpha * tau) * (1.0 + mp.alpha * tau);
}

}  // namespace

double pressure_L(double u, double ux, double uxx, double utau,
                  const ModelParams& mp) {
  return u * uxx - (mp.p / mp.pm1) * ux * ux + mp.pm1 * (u * u - u) -
         mp.p * utau;
}

BarrierSet::BarrierSet(AncientParams ap, std::shared_ptr<const WaveProfile> left,
                       std::shared_ptr<const WaveProfile> right)
    : ap_(ap), mp_(left->params()), left_(std::move(left)),
      right_(std::move(right)) {
  if (!(ap_.q >= 0.0)) throw std::domain_error("BarrierSet: q must be >= 0");
  if (!(ap_.k >= 0.0)) throw std::domain_error("BarrierSet: k must be >= 0");
  if (!(ap_.tau0 < 0.0)) throw std::domain_error("BarrierSet: tau0 must be < 0");
}

BarrierSet BarrierSet::with_q(double q) const {
  AncientParams ap = ap_;
  ap.q = q;
  return BarrierSet(ap, left_, right_);
}

BarrierEval BarrierSet::eval(double x, double tau) const {
  BarrierEval r;
  const double s = slow_factor(tau, ap_.q, mp_);
  r.z = x - ap_.lambda * tau * s + ap_.h;
  r.zbar = -x - ap_.lambda2 * tau * s + ap_.h2;
  const WavePoint p1 = left_->eval(r.z);
  const WavePoint p3 = right_->eval(r.zbar);
  r.w1 = p1.v;
  r.w1_x = p1.v_y;
  r.w1_xx = p1.v_yy;
  r.e1 = p1.v_excess;
  r.w3 = p3.v;
  r.w3_x = -p3.v_y;  // zbar runs against x
  r.w3_xx = p3.v_yy;
  r.e3 = p3.v_excess;
  r.w2 = cylinder_excess(tau, ap_.k, mp_);
  r.wplus_excess = (r.e1 + r.e3) + r.w2;
  r.wplus = 1.0 + r.wplus_excess;
  // The lower barrier is a max of exact solutions: its waves never slow down.
  double w1_exact = r.w1, w3_exact = r.w3;
  if (ap_.q != 0.0) {
    w1_exact = left_->eval(x - ap_.lambda * tau + ap_.h).v;
    w3_exact = right_->eval(-x - ap_.lambda2 * tau + ap_.h2).v;
  }
  r.wminus = std::max({w1_exact, 1.0 + r.w2, w3_exact});
  return r;
}

double BarrierSet::lower(double x, double tau) const {
  return eval(x, tau).wminus;
}

double BarrierSet::upper(double x, double tau) const {
  return eval(x, tau).wplus;
}

double BarrierSet::upper_tau(double x, double tau) const {
  const BarrierEval r = eval(x, tau);
  const double ep = eprime(tau, mp_);
  const double z_tau = -ap_.lambda * (1.0 - ap_.q * ep);
  const double zbar_tau = -ap_.lambda2 * (1.0 - ap_.q * ep);
  // r.w1_x = dv/dz and r.w3_x = -dv/dzbar.
  return r.w1_x * z_tau + (-r.w3_x) * zbar_tau +
         cylinder_pressure_dtau(tau, ap_.k, mp_);
}

LTerms BarrierSet::upper_terms(double x, double tau) const {
  const BarrierEval r = eval(x, tau);
  LTerms t;
  const double p = mp_.p, pm1 = mp_.pm1;
  t.t1 = r.w3_xx * (r.e1 + r.w2);
  t.t2 = r.w1_xx * (r.e3 + r.w2);
  t.t3 = -(2.0 * p / pm1) * r.w1_x * r.w3_x;
  t.t4 = 2.0 * pm1 * r.e1 * r.e3;
  t.t5 = 2.0 * pm1 * r.w2 * (r.e1 + r.e3);
  const double ep = eprime(tau, mp_);
  t.t6 = -p * ap_.q * ap_.lambda * ep * r.w1_x;
  t.t7 = p * ap_.q * ap_.lambda2 * ep * r.w3_x;
  return t;
}

double BarrierSet::upper_L_direct(double x, double tau) const {
  const BarrierEval r = eval(x, tau);
  const double u = r.wplus;
  const double ux = r.w1_x + r.w3_x;
  const double uxx = r.w1_xx + r.w3_xx;
  return pressure_L(u, ux, uxx, upper_tau(x, tau), mp_);
}

BarrierSet make_barriers(const AncientParams& ap, const ModelParams& mp) {
  if (!(ap.lambda >= 1.0) || !(ap.lambda2 >= 1.0))
    throw std::domain_error("make_barriers: wave speeds must be >= 1");
  auto grid_for = [&](double lambda) {
    const double gt =
        (lambda == 1.0) ? mp.pm1 : gamma_roots(lambda, mp).minus;
    GridSpec g;
    g.ymin = -40.0;
    g.ymax = std::max(60.0, std::ceil(30.0 / gt));
    g.dy = 0.01;
    return g;
  };
  auto left = std::make_shared<const WaveProfile>(
      solve_traveling_wave(ap.lambda, mp, grid_for(ap.lambda)));
  std::shared_ptr<const WaveProfile> right =
      (ap.lambda2 == ap.lambda)
          ? left
          : std::make_shared<const WaveProfile>(
                solve_traveling_wave(ap.lambda2, mp, grid_for(ap.lambda2)));
  return BarrierSet(ap, std::move(left), std::move(right));
}

const std::array<const char*, 6>& CertificationReport::region_labels() {
  static const std::array<const char*, 6> labels = {
      "z<=-M",  "-M<z<M",  "M<=z,left-of-crossing",
      "M<=zbar,right-of-crossing", "-M<zbar<M", "zbar<=-M"};
  return labels;
}

namespace {

// Tail-asymptotic crossing of the two wave excesses at one time slice,
// honoring the slowed arguments.
double predicted_crossing(const BarrierSet& b, double tau, bool slowed) {
  const AncientParams& ap = b.params();
  const double g1 = b.left_wave().gamma_tail();
  const double g2 = b.right_wave().gamma_tail();
  const double s = slowed ? slow_factor(tau, ap.q, b.model()) : 1.0;
  const double num = (g1 * ap.lambda - g2 * ap.lambda2) * tau * s -
                     g1 * ap.h + g2 * ap.h2 +
                     std::log(b.left_wave().amplitude() /
                              b.right_wave().amplitude());
  return num / (g1 + g2);
}

struct SliceOut {
  double maxLs = -std::numeric_limits<double>::infinity();
  double arg_x = 0.0;
  std::array<double, 6> region;
  double margin = 0.0;
  double margin_asym = 0.0;
  double edge = 0.0;
  bool clamped = false;
  SliceOut() { region.fill(-std::numeric_limits<double>::infinity()); }
};

SliceOut scan_slice(const BarrierSet& b, double tau, double dx, double xbox,
                    double M, double gmin) {
  const AncientParams& ap = b.params();
  const ModelParams& mp = b.model();
  SliceOut out;

  const double xint = predicted_crossing(b, tau, true);
  const double s = slow_factor(tau, ap.q, mp);
  const double lam_max = std::max(ap.lambda, ap.lambda2);
  const double h_max = std::max(std::abs(ap.h), std::abs(ap.h2));
  // Outside |x| <= |xint| + kTailMargin/gmin one block's excess is below
  // e^{-kTailMargin}; the window is additionally clamped so no wave
  // argument can push exp past the double range.
  double W = std::min(xbox, std::abs(xint) + kTailMargin / gmin);
  const double W_ovf =
      kExpBudget / mp.pm1 - lam_max * std::abs(tau) * s - h_max - 2.0;
  if (W > W_ovf) {
    W = W_ovf;
    out.clamped = true;
  }
  W = std::max(W, 1.0);

  const long nx = std::lround(std::floor(2.0 * W / dx)) + 1;
  const double ep = eprime(tau, mp);
  const double p = mp.p, pm1 = mp.pm1;
  const double E = std::exp(mp.alpha * tau);

  for (long i = 0; i < nx; ++i) {
    const double x = (i + 1 == nx) ? W : -W + static_cast<double>(i) * dx;
    const BarrierEval r = b.eval(x, tau);
    LTerms t;
    t.t1 = r.w3_xx * (r.e1 + r.w2);
    t.t2 = r.w1_xx * (r.e3 + r.w2);
    t.t3 = -(2.0 * p / pm1) * r.w1_x * r.w3_x;
    t.t4 = 2.0 * pm1 * r.e1 * r.e3;
    t.t5 = 2.0 * pm1 * r.w2 * (r.e1 + r.e3);
    t.t6 = -p * ap.q * ap.lambda * ep * r.w1_x;
    t.t7 = p * ap.q * ap.lambda2 * ep * r.w3_x;

    const double scale = std::max(1.0, r.wplus);
    const double Ls = (t.sum() / scale) / scale;
    const int reg = (x <= xint) ? (r.z <= -M ? 0 : (r.z < M ? 1 : 2))
                                : (r.zbar <= -M ? 5 : (r.zbar < M ? 4 : 3));
    if (Ls > out.maxLs) {
      out.maxLs = Ls;
      out.arg_x = x;
    }
    out.region[reg] = std::max(out.region[reg], Ls);
    const double neg = t.t6 + t.t7;
    if (neg < 0.0) {
      out.margin = std::max(out.margin, t.positive_part() / (-neg));
      // Asymptotic form of the slow-down terms, E' ~ alpha tau e^{alpha tau}.
      const double nega = -pm1 * ap.q * tau * E *
                          (ap.lambda * r.w1_x - ap.lambda2 * r.w3_x);
      if (nega < 0.0)
        out.margin_asym =
            std::max(out.margin_asym, t.positive_part() / (-nega));
    }
    if (i == 0 || i + 1 == nx) {
      const double cross = (t.positive_part() / scale) / scale;
      out.edge = std::max(out.edge, cross);
    }
  }
  return out;
}

}  // namespace

CertificationReport certify_supersolution(const BarrierSet& b,
                                          const CertifyGrid& g) {
  const AncientParams& ap = b.params();
  const ModelParams& mp = b.model();
  if (!(g.tau_min < ap.tau0))
    throw std::domain_error("certify_supersolution: need tau_min < tau0 < 0");
  if (ap.k > 0.0 && ap.tau0 >= cylinder_blowup_time(ap.k, mp))
    throw std::domain_error(
        "certify_supersolution: box reaches the cylinder blow-up time");
  if (g.tau_levels < 2)
    throw std::domain_error("certify_supersolution: need at least 2 levels");

  const double g1 = b.left_wave().gamma_tail();
  const double g2 = b.right_wave().gamma_tail();
  const double gmin = std::min({1.0, g1, g2});
  const double M = g.M > 0.0 ? g.M : 10.0 / gmin;
  const double dx = g.dx > 0.0 ? g.dx : 0.02 / std::max({1.0, g1, g2});

  const int L = g.tau_levels;
  std::vector<double> taus(L);
  const double a0 = -ap.tau0, a1 = -g.tau_min;
  const double ratio = std::pow(a1 / a0, 1.0 / (L - 1));
  for (int j = 0; j < L; ++j) taus[j] = -a0 * std::pow(ratio, j);
  taus.front() = ap.tau0;
  taus.back() = g.tau_min;

  std::vector<SliceOut> slices(L);
  parallel_for(L, [&](std::size_t j) {
    slices[j] = scan_slice(b, taus[j], dx, g.xbox, M, gmin);
  });

  CertificationReport rep;
  rep.params = ap;
  rep.n = mp.n;
  rep.tau_min = g.tau_min;
  rep.tau0 = ap.tau0;
  rep.tau_levels = L;
  rep.dx = dx;
  rep.xbox = g.xbox;
  rep.M = M;
  rep.maxL_by_region.fill(-std::numeric_limits<double>::infinity());

  int jworst = 0;
  for (int j = 0; j < L; ++j) {
    const SliceOut& so = slices[j];
    if (so.maxLs > slices[jworst].maxLs) jworst = j;
    for (int r = 0; r < 6; ++r)
      rep.maxL_by_region[r] = std::max(rep.maxL_by_region[r], so.region[r]);
    rep.dominant_term_margin = std::max(rep.dominant_term_margin, so.margin);
    rep.dominant_term_asymptotic_margin =
        std::max(rep.dominant_term_asymptotic_margin, so.margin_asym);
    rep.edge_crossterm_bound = std::max(rep.edge_crossterm_bound, so.edge);
    rep.windows_clamped = rep.windows_clamped || so.clamped;
  }
  rep.maxL_global = slices[jworst].maxLs;
  rep.maxL_x = slices[jworst].arg_x;
  rep.maxL_tau = taus[jworst];

  // Re-scan the worst slice at half the spacing: the shift of the max is a
  // direct estimate of the grid error of the scan itself.
  const SliceOut fine =
      scan_slice(b, taus[jworst], 0.5 * dx, g.xbox, M, gmin);
  rep.err_est = std::abs(fine.maxLs - slices[jworst].maxLs);
  if (fine.maxLs > rep.maxL_global) {
    rep.maxL_global = fine.maxLs;
    rep.maxL_x = fine.arg_x;
  }
  for (int r = 0; r < 6; ++r)
    rep.maxL_by_region[r] = std::max(rep.maxL_by_region[r], fine.region[r]);

  if (rep.maxL_global <= kScaledTol)
    rep.verdict = "pass";
  else if (rep.maxL_global > 2.0 * rep.err_est)
    rep.verdict = "fail";
  else
    rep.verdict = "inconclusive";
  return rep;
}

FindQResult find_q(const BarrierSet& b, const CertifyGrid& g, double q_seed) {
  if (!(q_seed > 0.0)) throw std::domain_error("find_q: seed must be > 0");
  const double cap =
      std::min(1e6, 0.99 * std::exp(-b.model().alpha * b.params().tau0));

  FindQResult out;
  out.params = b.params();

  CertificationReport pass_rep;
  double lo = 0.0, hi = -1.0;
  for (double q = std::min(q_seed, cap); q <= cap;) {
    CertificationReport rep = certify_supersolution(b.with_q(q), g);
    out.trace.emplace_back(q, rep.verdict);
    if (rep.verdict == "pass") {
      hi = q;
      pass_rep = rep;
      break;
    }
    lo = q;
    if (q == cap) break;
    q = std::min(2.0 * q, cap);
  }
  if (hi < 0.0) {
    out.found = false;
    return out;
  }
  // If the seed already certified, probe downward for a failing endpoint.
  while (lo == 0.0 && hi > 1e-4) {
    const double trial = 0.5 * hi;
    CertificationReport rep = certify_supersolution(b.with_q(trial), g);
    out.trace.emplace_back(trial, rep.verdict);
    if (rep.verdict == "pass") {
      hi = trial;
      pass_rep = rep;
    } else {
      lo = trial;
    }
  }
  while (lo > 0.0 && hi / lo > 1.01) {
    const double mid = std::sqrt(lo * hi);
    CertificationReport rep = certify_supersolution(b.with_q(mid), g);
    out.trace.emplace_back(mid, rep.verdict);
    if (rep.verdict == "pass") {
      hi = mid;
      pass_rep = rep;
    } else {
      lo = mid;
    }
  }
  out.found = true;
  out.params.q = hi;
  out.report = pass_rep;
  return out;
}

IntersectionInfo intersection_point(const BarrierSet& b, double tau) {
  IntersectionInfo info;
  const double g1 = b.left_wave().gamma_tail();
  const double g2 = b.right_wave().gamma_tail();
  const AncientParams& ap = b.params();
  info.x_predicted =
      (g1 - g2) / b.model().p * tau +
      (std::log(b.left_wave().amplitude() / b.right_wave().amplitude()) +
       ap.h2 * g2 - ap.h * g1) /
          (g1 + g2);

  auto f = [&](double x) {
    const BarrierEval r = b.eval(x, tau);
    return r.e1 - r.e3;  // decreasing in x
  };
  double lo = predicted_crossing(b, tau, true) - 2.0;
  double hi = lo + 4.0;
  double step = 2.0;
  int guard = 0;
  while (f(lo) <= 0.0) {
    lo -= step;
    step *= 1.5;
    if (++guard > 80)
      throw std::runtime_error("intersection_point: bracketing failed (left)");
  }
  step = 2.0;
  guard = 0;
  while (f(hi) >= 0.0) {
    hi += step;
    step *= 1.5;
    if (++guard > 80)
      throw std::runtime_error("intersection_point: bracketing failed (right)");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  info.x_numeric = 0.5 * (lo + hi);
  info.w1_value = b.eval(info.x_numeric, tau).w1;
  return info;
}

double intersection_decay_exponent(const BarrierSet& b) {
  const double g1 = b.left_wave().gamma_tail();
  const double g2 = b.right_wave().gamma_tail();
  const ModelParams& mp = b.model();
  return (g1 * g2 + mp.pm1) / mp.p;
}

}  // namespace yamabe
