#include "yamabe/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "yamabe/ode.hpp"

namespace yamabe {

namespace {

constexpr double kSeed = 1e-8;        // shooting seed amplitude at the left end
constexpr double kDeltaSwitch = 1e-3; // switch to delta = 1-psi below this
constexpr double kFitComb = 0.1;      // tail-fit sample spacing
constexpr double kFlatTol = 1e-4;

double log_cosh(double t) {
  t = std::abs(t);
  return t + std::log1p(std::exp(-2.0 * t)) - M_LN2;
}

// cubic Hermite on [0,1]
double hermite(double f0, double g0, double f1, double g1, double h, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return f0 * (2 * s3 - 3 * s2 + 1) + g0 * h * (s3 - 2 * s2 + s) +
         f1 * (-2 * s3 + 3 * s2) + g1 * h * (s3 - s2);
}

}  // namespace

// ---------------------------------------------------------------------------
// Closed forms

double barenblatt_cp(const ModelParams& mp) {
  return std::expm1(mp.pm1 * M_LN2);  // 2^{p-1} - 1
}

double barenblatt_pressure(double y, const ModelParams& mp) {
  return 1.0 + barenblatt_cp(mp) * std::exp(-mp.pm1 * y);
}

double barenblatt_profile(double y, const ModelParams& mp) {
  const double E = barenblatt_cp(mp) * std::exp(-mp.pm1 * y);
  return std::exp(-std::log1p(E) / mp.pm1);
}

double cylinder_blowup_time(double k, const ModelParams& mp) {
  if (k < 0.0) throw std::domain_error("cylinder: k must be >= 0");
  if (k == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(k) / mp.alpha;
}

double cylinder_excess(double tau, double k, const ModelParams& mp) {
  if (k < 0.0) throw std::domain_error("cylinder: k must be >= 0");
  if (k == 0.0) return 0.0;
  const double kE = k * std::exp(mp.alpha * tau);
  const double D = 1.0 - kE;
  if (D <= 0.0) throw std::range_error("cylinder evaluated at or past blow-up");
  return kE / D;
}

double cylinder_pressure(double tau, double k, const ModelParams& mp) {
  return 1.0 + cylinder_excess(tau, k, mp);
}

double cylinder_pressure_dtau(double tau, double k, const ModelParams& mp) {
  if (k < 0.0) throw std::domain_error("cylinder: k must be >= 0");
  if (k == 0.0) return 0.0;
  const double kE = k * std::exp(mp.alpha * tau);
  const double D = 1.0 - kE;
  if (D <= 0.0) throw std::range_error("cylinder evaluated at or past blow-up");
  return mp.alpha * kE / (D * D);
}

double sphere_steady(double x, const ModelParams& mp) {
  const double m = mp.m;
  const double A = std::pow((m + 1.0) / m, 1.0 / mp.pm1);
  return A * std::exp(-m * log_cosh(x / m));
}

double sphere_steady_xx(double x, const ModelParams& mp) {
  const double m = mp.m;
  const double A = std::pow((m + 1.0) / m, 1.0 / mp.pm1);
  const double th = std::tanh(x / m);
  const double ch = std::cosh(x / m);
  const double sech2 = 1.0 / (ch * ch);
  return A * std::exp(-m * log_cosh(x / m)) * (th * th - sech2 / m);
}

double sphere_pressure(double x, const ModelParams& mp) {
  const double m = mp.m;
  const double ch = std::cosh(x / m);
  return (m / (m + 1.0)) * ch * ch;
}

// ---------------------------------------------------------------------------
// King

Eigen::Vector2d king_rhs(const Eigen::Vector2d& s, const ModelParams& mp) {
  const double xi = s[0], zeta = s[1];
  return Eigen::Vector2d(mp.pm1 * zeta * zeta + mp.alpha * (xi * xi - xi),
                         mp.alpha * zeta * ((mp.p + 1.0) * xi - 1.0));
}

KingTrajectory king_integrate(const KingState& start, double tau_end,
                              const ModelParams& mp, double xi_cap) {
  KingTrajectory tr;
  tr.tau.push_back(start.tau);
  tr.xi.push_back(start.xi);
  tr.zeta.push_back(start.zeta);

  OdeOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  opt.h_init = 1e-4;

  auto f = [&mp](double, const Eigen::Vector2d& s) { return king_rhs(s, mp); };
  auto res = integrate<2>(
      f, start.tau, Eigen::Vector2d(start.xi, start.zeta), tau_end, opt,
      [&](double t, const Eigen::Vector2d& s) {
        tr.tau.push_back(t);
        tr.xi.push_back(s[0]);
        tr.zeta.push_back(s[1]);
        return s[0] >= xi_cap ? StepControl::kStop : StepControl::kContinue;
      });
  tr.blew_up = res.stopped;
  return tr;
}

double king_pressure(double x, double xi, double zeta, const ModelParams& mp) {
  return xi + zeta * std::cosh(mp.pm1 * x);
}

double king_pressure_x(double x, double xi, double zeta, const ModelParams& mp) {
  (void)xi;
  return zeta * mp.pm1 * std::sinh(mp.pm1 * x);
}

double king_pressure_xx(double x, double xi, double zeta,
                        const ModelParams& mp) {
  (void)xi;
  return zeta * mp.pm1 * mp.pm1 * std::cosh(mp.pm1 * x);
}

double king_radial_profile(double r, double a, double b,
                           const ModelParams& mp) {
  if (r < 0.0) throw std::domain_error("king radial: r must be >= 0");
  const double Q = 1.0 + 2.0 * b * r * r + r * r * r * r;
  if (Q <= 0.0) throw std::domain_error("king radial: nonpositive denominator");
  return std::exp(0.25 * (mp.n - 2) * (std::log(a) - std::log(Q)));
}

double king_radial_pressure(double r, double a, double b) {
  if (r < 0.0) throw std::domain_error("king radial: r must be >= 0");
  const double Q = 1.0 + 2.0 * b * r * r + r * r * r * r;
  if (Q <= 0.0) throw std::domain_error("king radial: nonpositive denominator");
  return Q / a;
}

KingSlopes king_fit_slopes(const KingTrajectory& tr, const ModelParams& mp) {
  KingSlopes ks;
  ks.xi_target = mp.alpha;
  ks.zeta_target = mp.pm1;
  if (tr.tau.size() < 4) return ks;
  const auto [lo_it, hi_it] = std::minmax_element(tr.tau.begin(), tr.tau.end());
  const double lo = *lo_it, hi = *hi_it;
  const double cut = lo + 0.25 * (hi - lo);

  auto ls_slope = [&](auto value) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < tr.tau.size(); ++i) {
      if (tr.tau[i] > cut) continue;
      const double val = value(i);
      if (!(val > 0.0)) continue;
      const double x = tr.tau[i], y = std::log(val);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  ks.xi_slope = ls_slope([&](std::size_t i) { return tr.xi[i] - 1.0; });
  ks.zeta_slope = ls_slope([&](std::size_t i) { return tr.zeta[i]; });
  return ks;
}

// ---------------------------------------------------------------------------
// WaveProfile evaluation

WavePoint WaveProfile::from_psi(double ps, double dps) const {
  if (!(ps > 0.0))
    throw std::runtime_error("wave eval: psi not positive (out of range?)");
  WavePoint w;
  w.psi = ps;
  w.psi_y = dps;
  w.delta = 1.0 - ps;
  w.delta_y = -dps;
  const double lnpsi = std::log(ps);
  const double psi_pm1 = std::exp(mp_.pm1 * lnpsi);
  w.psi_yy = -lambda_ * mp_.p * psi_pm1 * dps - ps * std::expm1(mp_.pm1 * lnpsi);
  w.v = std::exp(-mp_.pm1 * lnpsi);
  w.v_excess = std::expm1(-mp_.pm1 * lnpsi);
  const double vp = w.v / ps;        // psi^{-p}
  const double vpp = vp / ps;        // psi^{-(p+1)}
  w.v_y = -mp_.pm1 * vp * dps;
  w.v_yy = mp_.pm1 * vpp * (mp_.p * dps * dps - ps * w.psi_yy);
  return w;
}

WavePoint WaveProfile::from_delta(double d, double dd) const {
  WavePoint w;
  w.delta = d;
  w.delta_y = dd;
  w.psi = 1.0 - d;
  w.psi_y = -dd;
  const double lnpsi = std::log1p(-d);
  const double psi_pm1 = std::exp(mp_.pm1 * lnpsi);
  w.psi_yy =
      -lambda_ * mp_.p * psi_pm1 * w.psi_y - w.psi * std::expm1(mp_.pm1 * lnpsi);
  w.v = std::exp(-mp_.pm1 * lnpsi);
  w.v_excess = std::expm1(-mp_.pm1 * lnpsi);
  const double vp = w.v / w.psi;
  const double vpp = vp / w.psi;
  w.v_y = -mp_.pm1 * vp * w.psi_y;
  w.v_yy = mp_.pm1 * vpp * (mp_.p * w.psi_y * w.psi_y - w.psi * w.psi_yy);
  return w;
}

WavePoint WaveProfile::eval_closed_form(double y) const {
  const double cp = barenblatt_cp(mp_);
  const double E = cp * std::exp(-mp_.pm1 * y);
  const double lnv = std::log1p(E);
  WavePoint w;
  w.psi = std::exp(-lnv / mp_.pm1);
  w.delta = -std::expm1(-lnv / mp_.pm1);
  w.psi_y = E * std::exp(-mp_.p * lnv / mp_.pm1);
  w.delta_y = -w.psi_y;
  // ODE identity at lambda=1, using psi^{p-1} = 1/v
  const double inv_v = std::exp(-lnv);
  w.psi_yy = -mp_.p * inv_v * w.psi_y + w.psi * E * inv_v;
  w.v = 1.0 + E;
  w.v_excess = E;
  w.v_y = -mp_.pm1 * E;
  w.v_yy = mp_.pm1 * mp_.pm1 * E;
  return w;
}

WavePoint WaveProfile::eval(double y) const {
  if (closed_form_) return eval_closed_form(y);
  const int n = int(psi_.size());
  const double yl = grid_.ymin;
  const double yh = grid_.y(n - 1);
  if (y < yl) {
    const double ey = std::exp(y), epy = std::exp(mp_.p * y);
    return from_psi(a_left_ * ey - b_left_ * epy,
                    a_left_ * ey - mp_.p * b_left_ * epy);
  }
  if (y > yh) {
    const double d = C_ * std::exp(-gamma_tail_ * y);
    return from_delta(d, -gamma_tail_ * d);
  }
  double s = (y - yl) / grid_.dy;
  int i = std::min(std::max(int(std::floor(s)), 0), n - 2);
  s -= i;
  const double h = grid_.dy;
  if (i >= i_switch_) {
    const double d = hermite(delta_[i], ddelta_[i], delta_[i + 1],
                             ddelta_[i + 1], h, s);
    const double dd =
        hermite(ddelta_[i], -curv_[i], ddelta_[i + 1], -curv_[i + 1], h, s);
    return from_delta(d, dd);
  }
  const double ps = hermite(psi_[i], dpsi_[i], psi_[i + 1], dpsi_[i + 1], h, s);
  const double dps = hermite(dpsi_[i], curv_[i], dpsi_[i + 1], curv_[i + 1], h, s);
  return from_psi(ps, dps);
}

void WaveProfile::fill_curvature() {
  const int n = int(psi_.size());
  curv_.resize(n);
  for (int i = 0; i < n; ++i)
    curv_[i] = i >= i_switch_ ? from_delta(delta_[i], ddelta_[i]).psi_yy
                              : from_psi(psi_[i], dpsi_[i]).psi_yy;
}

WaveProfile WaveProfile::closed_form_barenblatt(const ModelParams& mp,
                                                const GridSpec& grid) {
  WaveProfile w;
  w.mp_ = mp;
  w.lambda_ = 1.0;
  const GammaRoots r = gamma_roots(1.0, mp);
  w.gamma_ = r.minus;
  w.gamma_plus_ = r.plus;
  w.gamma_tail_ = mp.pm1;  // the realized Barenblatt tail exponent
  const double cp = barenblatt_cp(mp);
  w.C_ = cp / mp.pm1;
  w.a_left_ = std::pow(cp, -1.0 / mp.pm1);
  w.b_left_ = (mp.p + 1.0) * std::pow(w.a_left_, mp.p) / (mp.p * mp.p - 1.0);
  w.closed_form_ = true;
  w.grid_ = grid;
  const int n = grid.size();
  w.psi_.resize(n);
  w.dpsi_.resize(n);
  w.delta_.resize(n);
  w.ddelta_.resize(n);
  w.i_switch_ = n;
  for (int i = 0; i < n; ++i) {
    const WavePoint pt = w.eval_closed_form(grid.y(i));
    w.psi_[i] = pt.psi;
    w.dpsi_[i] = pt.psi_y;
    w.delta_[i] = pt.delta;
    w.ddelta_[i] = pt.delta_y;
    if (w.i_switch_ == n && pt.delta < kDeltaSwitch) w.i_switch_ = i;
  }
  w.fill_curvature();
  return w;
}

// ---------------------------------------------------------------------------
// Shooting solver

namespace {

struct Target {
  double t;
  int kind;  // 0: grid node (index), 1: fit comb, 2: normalization check
  int index;
};

}  // namespace

WaveProfile solve_traveling_wave(double lambda, const ModelParams& mp,
                                 const GridSpec& grid) {
  if (!(lambda >= 1.0))
    throw std::domain_error("solve_traveling_wave: lambda must be >= 1");
  if (lambda == 1.0) return WaveProfile::closed_form_barenblatt(mp, grid);

  const double p = mp.p, pm1 = mp.pm1, lp = lambda * p;
  const GammaRoots gr = gamma_roots(lambda, mp);
  const double gt = gr.minus;

  WaveProfile w;
  w.mp_ = mp;
  w.lambda_ = lambda;
  w.gamma_ = gr.minus;
  w.gamma_plus_ = gr.plus;
  w.gamma_tail_ = gt;
  w.grid_ = grid;

  auto rhs_psi = [p, pm1, lp](double, const Eigen::Vector2d& s) {
    const double ps = s[0], dps = s[1];
    const double lnpsi = std::log(ps);
    const double psi_pm1 = std::exp(pm1 * lnpsi);
    return Eigen::Vector2d(dps,
                           -lp * psi_pm1 * dps - ps * std::expm1(pm1 * lnpsi));
  };
  auto rhs_delta = [p, pm1, lp](double, const Eigen::Vector2d& s) {
    const double d = s[0], dd = s[1];
    const double l1p = std::log1p(-d);
    return Eigen::Vector2d(dd, -lp * std::exp(pm1 * l1p) * dd +
                                   (1.0 - d) * std::expm1(pm1 * l1p));
  };

  OdeOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-300;  // pure relative; components stay one-signed
  opt.h_init = 1e-3;

  // Sweep 1: locate the crossing psi = 1/2 from the seeded left tail.
  const Eigen::Vector2d seed(kSeed, kSeed);
  double t_pre = 0.0;
  Eigen::Vector2d y_pre = seed;
  bool exited = false;
  auto sweep1 = integrate<2>(
      rhs_psi, 0.0, seed, 200.0, opt,
      [&](double t, const Eigen::Vector2d& s) {
        if (s[0] <= 0.0 || s[1] <= 0.0) {
          exited = true;
          return StepControl::kStop;
        }
        if (s[0] >= 0.5) return StepControl::kStop;
        t_pre = t;
        y_pre = s;
        return StepControl::kContinue;
      });
  if (exited)
    throw std::runtime_error(
        "shooting failure: psi left (0,1) before the half-crossing (lambda=" +
        std::to_string(lambda) + ", seed=" + std::to_string(kSeed) + ")");
  if (!sweep1.stopped)
    throw std::runtime_error("shooting failure: no half-crossing by t=200");

  double ystar = t_pre + (0.5 - y_pre[0]) / y_pre[1];
  for (int it = 0; it < 10; ++it) {
    auto r = integrate<2>(rhs_psi, t_pre, y_pre, ystar, opt);
    const double f = r.y[0] - 0.5;
    if (std::abs(f) < 1e-14) break;
    ystar -= f / r.y[1];
  }

  // Sweep 2: integrate through grid targets, the normalization check, and the
  // tail-fit comb; switch to delta variables once 1 - psi < kDeltaSwitch.
  const int n = grid.size();
  w.psi_.resize(n);
  w.dpsi_.resize(n);
  w.delta_.resize(n);
  w.ddelta_.resize(n);
  w.i_switch_ = n;

  const double b0 = (lp + 1.0) * std::pow(kSeed, p) / (p * p - 1.0);
  w.a_left_ = kSeed * std::exp(ystar);
  w.b_left_ = (lp + 1.0) * std::pow(w.a_left_, p) / (p * p - 1.0);

  std::vector<Target> targets;
  targets.reserve(n + 4096);
  for (int i = 0; i < n; ++i) {
    const double T = ystar + grid.y(i);
    if (T > 1e-12) {
      targets.push_back({T, 0, i});
    } else {
      const double eT = std::exp(T), epT = std::exp(p * T);
      w.psi_[i] = kSeed * eT - b0 * epT;
      w.dpsi_[i] = kSeed * eT - p * b0 * epT;
      w.delta_[i] = 1.0 - w.psi_[i];
      w.ddelta_[i] = -w.dpsi_[i];
    }
  }
  targets.push_back({ystar, 2, -1});

  double fit_ymax = std::max(grid.ymax, 30.0 / gt);
  const double fit_cap = 400.0 / gt;
  std::vector<std::pair<double, double>> comb;  // (y, log delta)
  for (double yc = 5.0; yc <= fit_ymax + 1e-9; yc += kFitComb)
    targets.push_back({ystar + yc, 1, -1});
  std::sort(targets.begin(), targets.end(),
            [](const Target& a, const Target& b) { return a.t < b.t; });

  bool delta_mode = false;
  double tcur = 0.0;
  Eigen::Vector2d Y = seed;
  auto run_targets = [&](const std::vector<Target>& tg) {
    for (const Target& target : tg) {
      if (target.t > tcur) {
        auto r = delta_mode ? integrate<2>(rhs_delta, tcur, Y, target.t, opt)
                            : integrate<2>(rhs_psi, tcur, Y, target.t, opt);
        if (!r.reached_end)
          throw std::runtime_error("shooting failure: integrator stalled");
        Y = r.y;
        tcur = target.t;
      }
      const double ps = delta_mode ? 1.0 - Y[0] : Y[0];
      const double d = delta_mode ? Y[0] : 1.0 - Y[0];
      if (target.kind == 0) {
        const int i = target.index;
        if (delta_mode) {
          w.delta_[i] = Y[0];
          w.ddelta_[i] = Y[1];
          w.psi_[i] = 1.0 - Y[0];
          w.dpsi_[i] = -Y[1];
          if (w.i_switch_ > i) w.i_switch_ = i;
        } else {
          w.psi_[i] = Y[0];
          w.dpsi_[i] = Y[1];
          w.delta_[i] = 1.0 - Y[0];
          w.ddelta_[i] = -Y[1];
        }
      } else if (target.kind == 1) {
        comb.emplace_back(target.t - ystar, std::log(d));
      } else {
        w.norm_residual_ = std::abs(ps - 0.5);
      }
      if (!delta_mode && d < kDeltaSwitch) {
        Y = Eigen::Vector2d(1.0 - Y[0], -Y[1]);
        delta_mode = true;
      }
    }
  };
  run_targets(targets);

  // i_switch_ marks the first node whose (delta, ddelta) came from the delta
  // integration; nodes recorded just before the switch keep the psi data.
  // Fit C as the plateau of delta * e^{gt y} over the last quarter of the
  // integrated range, extending the integration until the plateau is flat.
  for (;;) {
    const double wlo = fit_ymax - 0.25 * (fit_ymax - grid.ymin);
    double flat = 0.0, mean = 0.0;
    int cnt = 0;
    bool have_prev = false;
    double prev_s = 0.0, prev_y = 0.0;
    for (const auto& [yc, logd] : comb) {
      if (yc < wlo) continue;
      const double s = logd + gt * yc;
      if (have_prev) flat = std::max(flat, std::abs(s - prev_s) / (yc - prev_y));
      have_prev = true;
      prev_s = s;
      prev_y = yc;
      mean += s;
      ++cnt;
    }
    if (cnt >= 8 && flat < kFlatTol) {
      w.C_ = std::exp(mean / cnt);
      w.fit_flatness_ = flat;
      break;
    }
    const double next = std::min(fit_ymax * 1.5, fit_cap);
    if (next <= fit_ymax + 1e-9)
      throw std::runtime_error(
          "tail-amplitude fit did not flatten; enlarge ymax (lambda=" +
          std::to_string(lambda) + ", flatness=" + std::to_string(flat) + ")");
    std::vector<Target> more;
    for (double yc = comb.back().first + kFitComb; yc <= next + 1e-9;
         yc += kFitComb)
      more.push_back({ystar + yc, 1, -1});
    fit_ymax = next;
    run_targets(more);
  }
  w.fill_curvature();
  return w;
}

}  // namespace yamabe
