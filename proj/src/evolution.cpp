#include "yamabe/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "yamabe/profiles.hpp"

namespace yamabe {

namespace {

void validate(const EvolveConfig& cfg) {
  if (!(cfg.m > 0.0) || !(cfg.tau_end > -cfg.m) || !(cfg.tau_end <= 0.0))
    throw std::invalid_argument("evolve: need -m < tau_end <= 0");
  if (!(cfg.X > 0.0) || !(cfg.dx > 0.0) || !(cfg.dtau > 0.0))
    throw std::invalid_argument("evolve: grid spacings must be positive");
  if (!(cfg.dtau < 1.0))
    throw std::invalid_argument("evolve: dtau must be < 1");
  if (cfg.snapshot_count < 2)
    throw std::invalid_argument("evolve: need at least 2 snapshots");
  if (cfg.gauge != "conformal" && cfg.gauge != "pressure")
    throw std::invalid_argument("evolve: gauge must be conformal or pressure");
}

long grid_size(const EvolveConfig& cfg) {
  const double ratio = 2.0 * cfg.X / cfg.dx;
  const long ncell = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(ncell)) > 1e-9 || ncell < 4)
    throw std::invalid_argument("evolve: 2X must be a multiple of dx");
  return ncell + 1;
}

// phi^p with fast paths for the integer exponents (n = 3, 4, 6)
inline double pow_p(double v, double p) {
  if (p == 3.0) return v * v * v;
  if (p == 5.0) {
    const double v2 = v * v;
    return v2 * v2 * v;
  }
  if (p == 2.0) return v * v;
  return std::pow(v, p);
}

inline double pow_pm1(double v, double pm1) {
  if (pm1 == 2.0) return v * v;
  if (pm1 == 4.0) {
    const double v2 = v * v;
    return v2 * v2;
  }
  if (pm1 == 1.0) return v;
  return std::pow(v, pm1);
}

// in-place tridiagonal solve; diag and rhs are clobbered, rhs -> solution
void thomas(std::vector<double>& sub, std::vector<double>& diag,
            std::vector<double>& sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct Stepper {
  const ModelParams& mp;
  const EvolveConfig& cfg;
  double idx2;
  bool conformal;
  std::vector<double> sub, diag, sup, rhs;
  Eigen::ArrayXd old_pow, next;

  Stepper(const ModelParams& mp_, const EvolveConfig& cfg_, long N)
      : mp(mp_), cfg(cfg_), idx2(1.0 / (cfg_.dx * cfg_.dx)),
        conformal(cfg_.gauge == "conformal"), sub(N - 2), diag(N - 2),
        sup(N - 2), rhs(N - 2), old_pow(N), next(N) {}

  // One implicit Euler step of length dtau; state holds phi (conformal) or
  // u (pressure).  Returns false if Newton stalls.
  bool step(Eigen::ArrayXd& state, double bc_lo, double bc_hi, double dtau,
            int& iters) {
    return conformal ? step_conformal(state, bc_lo, bc_hi, dtau, iters)
                     : step_pressure(state, bc_lo, bc_hi, dtau, iters);
  }

  bool step_conformal(Eigen::ArrayXd& phi, double bc_lo, double bc_hi,
                      double dtau, int& iters) {
    const long N = phi.size();
    const double p = mp.p, pm1 = mp.pm1;
    for (long i = 0; i < N; ++i) old_pow[i] = pow_p(phi[i], p);
    next = phi;
    next[0] = bc_lo;
    next[N - 1] = bc_hi;
    for (iters = 1; iters <= cfg.newton_max_iter; ++iters) {
      for (long i = 1; i + 1 < N; ++i) {
        const double ph = next[i];
        const double phpm1 = pow_pm1(ph, pm1);
        const double php = phpm1 * ph;
        const double lap = (next[i - 1] - 2.0 * ph + next[i + 1]) * idx2;
        rhs[i - 1] = -(php - old_pow[i] - dtau * (lap + php - ph));
        diag[i - 1] = p * phpm1 * (1.0 - dtau) + dtau + 2.0 * dtau * idx2;
        sub[i - 1] = -dtau * idx2;
        sup[i - 1] = -dtau * idx2;
      }
      thomas(sub, diag, sup, rhs);
      double rel = 0.0;
      for (long i = 1; i + 1 < N; ++i) {
        next[i] += rhs[i - 1];
        rel = std::max(rel,
                       std::abs(rhs[i - 1]) / (1e-300 + std::abs(next[i])));
      }
      if (!(rel < 1e290)) return false;  // diverged or NaN
      if (rel <= cfg.newton_tol) {
        phi = next;
        return true;
      }
    }
    return false;
  }

  bool step_pressure(Eigen::ArrayXd& u, double bc_lo, double bc_hi,
                     double dtau, int& iters) {
    const long N = u.size();
    const double p = mp.p, pm1 = mp.pm1;
    const double dx = cfg.dx;
    next = u;
    next[0] = bc_lo;
    next[N - 1] = bc_hi;
    for (iters = 1; iters <= cfg.newton_max_iter; ++iters) {
      for (long i = 1; i + 1 < N; ++i) {
        const double ui = next[i];
        const double lap = (next[i - 1] - 2.0 * ui + next[i + 1]) * idx2;
        const double grad = (next[i + 1] - next[i - 1]) / (2.0 * dx);
        const double F = ui * lap - (p / pm1) * grad * grad +
                         pm1 * (ui * ui - ui);
        rhs[i - 1] = -(p * (ui - u[i]) - dtau * F);
        diag[i - 1] =
            p - dtau * (lap - 2.0 * ui * idx2 + pm1 * (2.0 * ui - 1.0));
        sub[i - 1] = -dtau * (ui * idx2 + (p / pm1) * grad / dx);
        sup[i - 1] = -dtau * (ui * idx2 - (p / pm1) * grad / dx);
      }
      thomas(sub, diag, sup, rhs);
      double rel = 0.0;
      for (long i = 1; i + 1 < N; ++i) {
        next[i] += rhs[i - 1];
        rel = std::max(rel,
                       std::abs(rhs[i - 1]) / (1e-300 + std::abs(next[i])));
      }
      if (!(rel < 1e290)) return false;
      if (rel <= cfg.newton_tol) {
        u = next;
        return true;
      }
    }
    return false;
  }
};

SpaceTimeField run(const std::function<double(double, double)>& phi_data,
                   const ModelParams& mp, const EvolveConfig& cfg,
                   const BarrierSet* barriers) {
  validate(cfg);
  const long N = grid_size(cfg);
  const bool conformal = cfg.gauge == "conformal";

  SpaceTimeField f;
  f.config = cfg;
  f.n = mp.n;
  if (barriers) f.params = barriers->params();
  f.x = Eigen::ArrayXd(N);
  for (long i = 0; i < N; ++i) f.x[i] = -cfg.X + static_cast<double>(i) * cfg.dx;

  const double tau0 = -cfg.m;
  const long nsteps =
      std::max<long>(1, std::lround(std::ceil((cfg.tau_end - tau0) / cfg.dtau -
                                              1e-9)));
  const double dtau = (cfg.tau_end - tau0) / static_cast<double>(nsteps);
  const long stride = cfg.diag_stride > 0
                          ? cfg.diag_stride
                          : std::max<long>(1, nsteps / 400);

  // state in the active gauge
  Eigen::ArrayXd state(N);
  for (long i = 0; i < N; ++i) {
    const double ph = phi_data(f.x[i], tau0);
    if (!(ph > 0.0))
      throw std::invalid_argument("evolve: initial data must be positive");
    state[i] = conformal ? ph : pressure_from_conformal(ph, mp);
  }

  auto to_phi = [&](const Eigen::ArrayXd& s) -> Eigen::ArrayXd {
    if (conformal) return s;
    Eigen::ArrayXd ph(N);
    for (long i = 0; i < N; ++i) ph[i] = conformal_from_pressure(s[i], mp);
    return ph;
  };

  auto record = [&](double tau, int iters, int halvings) {
    const Eigen::ArrayXd phi = to_phi(state);
    TimeDiagnostics d;
    d.tau = tau;
    d.phi_min = phi.minCoeff();
    d.phi_max = phi.maxCoeff();
    d.newton_iters = iters;
    d.halvings = halvings;
    if (barriers) {
      const double pm1 = mp.pm1;
      for (long i = 0; i < N; ++i) {
        const BarrierEval be = barriers->eval(f.x[i], tau);
        const double phi_lo = std::exp(-std::log1p(be.wplus_excess) / pm1);
        const double phi_hi = std::exp(-std::log(be.wminus) / pm1);
        d.upper_violation = std::max(d.upper_violation, phi_lo - phi[i]);
        d.lower_violation = std::max(d.lower_violation, phi[i] - phi_hi);
      }
      d.upper_violation = std::max(0.0, d.upper_violation);
      d.lower_violation = std::max(0.0, d.lower_violation);
      f.max_upper_violation =
          std::max(f.max_upper_violation, d.upper_violation);
      f.max_lower_violation =
          std::max(f.max_lower_violation, d.lower_violation);
    }
    f.diagnostics.push_back(d);
  };

  // snapshot step indices, evenly spread including both endpoints
  std::vector<long> snap_at(cfg.snapshot_count);
  for (int j = 0; j < cfg.snapshot_count; ++j)
    snap_at[j] = std::lround(static_cast<double>(j) * nsteps /
                             (cfg.snapshot_count - 1));

  auto snapshot = [&](long step_index, double tau) {
    for (int j = 0; j < cfg.snapshot_count; ++j)
      if (snap_at[j] == step_index) {
        f.snapshot_tau.push_back(tau);
        f.snapshots.push_back(to_phi(state));
        break;
      }
  };

  Stepper stepper(mp, cfg, N);
  record(tau0, 0, 0);
  snapshot(0, tau0);

  double tau = tau0;
  for (long s = 0; s < nsteps; ++s) {
    const double tau_next = tau0 + static_cast<double>(s + 1) * dtau;
    double remaining = tau_next - tau;
    double sub_dt = remaining;
    int halvings = 0;
    int iters = 0;
    while (remaining > 1e-14 * std::abs(tau_next)) {
      sub_dt = std::min(sub_dt, remaining);
      const double t_new = tau + sub_dt;
      const double bc_lo_phi = phi_data(f.x[0], t_new);
      const double bc_hi_phi = phi_data(f.x[N - 1], t_new);
      const double bc_lo =
          conformal ? bc_lo_phi : pressure_from_conformal(bc_lo_phi, mp);
      const double bc_hi =
          conformal ? bc_hi_phi : pressure_from_conformal(bc_hi_phi, mp);
      if (stepper.step(state, bc_lo, bc_hi, sub_dt, iters)) {
        tau = t_new;
        remaining = tau_next - tau;
      } else {
        if (++halvings > cfg.max_halvings)
          throw std::runtime_error(
              "evolve: Newton failed to converge after max step halvings");
        sub_dt *= 0.5;
      }
    }
    tau = tau_next;
    if ((s + 1) % stride == 0 || s + 1 == nsteps) record(tau, iters, halvings);
    snapshot(s + 1, tau);
  }

  f.phi = to_phi(state);
  f.tau = cfg.tau_end;
  f.completed = true;
  return f;
}

}  // namespace

Eigen::ArrayXd SpaceTimeField::pressure() const {
  const ModelParams mp = ModelParams::dimension(n);
  Eigen::ArrayXd u(phi.size());
  for (long i = 0; i < phi.size(); ++i)
    u[i] = pressure_from_conformal(phi[i], mp);
  return u;
}

SpaceTimeField evolve_field(const std::function<double(double, double)>& phi,
                            const ModelParams& mp, const EvolveConfig& cfg) {
  return run(phi, mp, cfg, nullptr);
}

SpaceTimeField evolve(const BarrierSet& barriers, const EvolveConfig& cfg,
                      const CertificationReport* cert) {
  if (!cfg.allow_uncertified) {
    if (!cert || cert->verdict != "pass")
      throw std::invalid_argument(
          "evolve: refusing to run without a passing certification "
          "(set allow_uncertified to override)");
    if (cert->tau_min > -cfg.m + 1e-12 || cert->tau0 < cfg.tau_end - 1e-12)
      throw std::invalid_argument(
          "evolve: certification box does not cover the run interval");
  }
  const ModelParams& mp = barriers.model();
  auto data = [&barriers, &mp](double x, double tau) {
    const BarrierEval be = barriers.eval(x, tau);
    return std::exp(-std::log1p(be.wplus_excess) / mp.pm1);
  };
  return run(data, mp, cfg, &barriers);
}

double pressure_gap(const SpaceTimeField& a, const SpaceTimeField& b,
                    double window, double tau_from) {
  if (a.x.size() != b.x.size() || a.config.dx != b.config.dx ||
      a.config.X != b.config.X || a.tau != b.tau)
    throw std::invalid_argument("pressure_gap: runs do not share a frame");
  const double pm1 = ModelParams::dimension(a.n).pm1;
  auto slice_gap = [&](const Eigen::ArrayXd& pa, const Eigen::ArrayXd& pb) {
    double g = 0.0;
    for (long i = 0; i < a.x.size(); ++i)
      if (std::abs(a.x[i]) <= window)
        g = std::max(g, std::abs(std::exp(-pm1 * std::log(pa[i])) -
                                 std::exp(-pm1 * std::log(pb[i]))));
    return g;
  };
  double gap = a.tau >= tau_from ? slice_gap(a.phi, b.phi) : 0.0;
  for (std::size_t i = 0; i < a.snapshot_tau.size(); ++i) {
    if (a.snapshot_tau[i] < tau_from) continue;
    for (std::size_t j = 0; j < b.snapshot_tau.size(); ++j)
      if (std::abs(a.snapshot_tau[i] - b.snapshot_tau[j]) <= 1e-6)
        gap = std::max(gap, slice_gap(a.snapshots[i], b.snapshots[j]));
  }
  return gap;
}

double calibrate_scheme_constant(const ModelParams& mp,
                                 const EvolveConfig& cfg) {
  EvolveConfig c = cfg;
  c.gauge = "conformal";
  c.allow_uncertified = true;

  double worst = 0.0;

  {  // shrinking cylinder, spatially flat
    const double k = 0.5;
    auto exact = [&](double, double tau) {
      return std::exp(-std::log(cylinder_pressure(tau, k, mp)) / mp.pm1);
    };
    const SpaceTimeField f = evolve_field(exact, mp, c);
    double err = 0.0;
    for (long i = 0; i < f.x.size(); ++i)
      err = std::max(err, std::abs(f.phi[i] - exact(f.x[i], f.tau)));
    worst = std::max(worst, err);
  }

  {  // traveling wave sweeping through the box
    const WaveProfile w = solve_traveling_wave(2.0, mp, GridSpec{});
    auto exact = [&](double x, double tau) {
      return w.eval(x - 2.0 * tau).psi;
    };
    const SpaceTimeField f = evolve_field(exact, mp, c);
    double err = 0.0;
    for (long i = 0; i < f.x.size(); ++i)
      err = std::max(err, std::abs(f.phi[i] - exact(f.x[i], f.tau)));
    worst = std::max(worst, err);
  }

  return 2.0 * worst / (c.dtau + c.dx * c.dx);
}

}  // namespace yamabe
