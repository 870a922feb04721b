#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "yamabe/barriers.hpp"
#include "yamabe/evolution.hpp"
#include "yamabe/model.hpp"
#include "yamabe/profiles.hpp"

using namespace yamabe;

namespace {

double track_error(const SpaceTimeField& f,
                   const std::function<double(double, double)>& exact) {
  double err = 0.0;
  for (long i = 0; i < f.x.size(); ++i)
    err = std::max(err, std::abs(f.phi[i] - exact(f.x[i], f.tau)));
  return err;
}

}  // namespace

TEST_CASE("implicit stepper tracks exact solutions") {
  const ModelParams mp = ModelParams::dimension(4);

  SUBCASE("shrinking cylinder") {
    const double k = 0.5;
    auto exact = [&](double, double tau) {
      return std::exp(-std::log(cylinder_pressure(tau, k, mp)) / mp.pm1);
    };
    EvolveConfig cfg;
    cfg.m = 3.0;
    cfg.tau_end = -1.0;
    cfg.X = 5.0;
    cfg.dx = 0.1;
    cfg.dtau = 1e-3;
    cfg.allow_uncertified = true;
    const SpaceTimeField f = evolve_field(exact, mp, cfg);
    CHECK(f.completed);
    CHECK(track_error(f, exact) < 1e-3);
  }

  SUBCASE("first order in time") {
    const WaveProfile w = solve_traveling_wave(2.0, mp, GridSpec{});
    auto exact = [&](double x, double tau) {
      return w.eval(x - 2.0 * tau - 21.0).psi;
    };
    EvolveConfig cfg;
    cfg.m = 10.5;
    cfg.tau_end = -10.0;
    cfg.X = 8.0;
    cfg.dx = 0.01;
    cfg.allow_uncertified = true;
    double err[3];
    double dt = 4e-3;
    for (int r = 0; r < 3; ++r, dt *= 0.5) {
      cfg.dtau = dt;
      err[r] = track_error(evolve_field(exact, mp, cfg), exact);
    }
    const double o1 = std::log2(err[0] / err[1]);
    const double o2 = std::log2(err[1] / err[2]);
    CHECK(o1 == doctest::Approx(1.0).epsilon(0.2));
    CHECK(o2 == doctest::Approx(1.0).epsilon(0.2));
  }

  SUBCASE("second order in space") {
    const WaveProfile w = solve_traveling_wave(2.0, mp, GridSpec{});
    auto exact = [&](double x, double tau) {
      return w.eval(x - 2.0 * tau - 21.0).psi;
    };
    EvolveConfig cfg;
    cfg.m = 10.25;
    cfg.tau_end = -10.0;
    cfg.X = 6.0;
    cfg.dtau = 2.5e-5;
    cfg.allow_uncertified = true;
    double err[3];
    double dx = 0.2;
    for (int r = 0; r < 3; ++r, dx *= 0.5) {
      cfg.dx = dx;
      err[r] = track_error(evolve_field(exact, mp, cfg), exact);
    }
    const double o1 = std::log2(err[0] / err[1]);
    const double o2 = std::log2(err[1] / err[2]);
    CHECK(o1 == doctest::Approx(2.0).epsilon(0.2));
    CHECK(o2 == doctest::Approx(2.0).epsilon(0.2));
  }

  SUBCASE("gauges agree where both are stable") {
    const WaveProfile w = solve_traveling_wave(2.0, mp, GridSpec{});
    auto exact = [&](double x, double tau) {
      return w.eval(x - 2.0 * tau - 18.0).psi;
    };
    EvolveConfig cfg;
    cfg.m = 10.4;
    cfg.tau_end = -10.0;
    cfg.X = 6.0;
    cfg.dx = 0.025;
    cfg.dtau = 1e-4;
    cfg.allow_uncertified = true;
    const SpaceTimeField fc = evolve_field(exact, mp, cfg);
    cfg.gauge = "pressure";
    const SpaceTimeField fp = evolve_field(exact, mp, cfg);
    CHECK(track_error(fc, exact) < 1e-3);
    CHECK(track_error(fp, exact) < 1e-3);
    CHECK((fc.phi - fp.phi).abs().maxCoeff() < 1e-3);
  }

  SUBCASE("config validation") {
    EvolveConfig cfg;
    cfg.m = 5.0;
    cfg.tau_end = -6.0;  // ends before it starts
    auto one = [](double, double) { return 1.0; };
    CHECK_THROWS_AS(evolve_field(one, mp, cfg), std::invalid_argument);
    cfg.tau_end = -1.0;
    cfg.dx = 0.3;  // 2X not a multiple
    cfg.X = 1.0;
    CHECK_THROWS_AS(evolve_field(one, mp, cfg), std::invalid_argument);
    cfg.dx = 0.1;
    cfg.gauge = "unknown";
    CHECK_THROWS_AS(evolve_field(one, mp, cfg), std::invalid_argument);
  }
}

TEST_CASE("barrier-driven evolution") {
  const ModelParams mp = ModelParams::dimension(4);
  AncientParams ap;
  ap.lambda = ap.lambda2 = 2.0;
  ap.h = ap.h2 = -8.0;
  ap.k = 1.0;
  ap.tau0 = -10.0;
  const BarrierSet b0 = make_barriers(ap, mp);

  CertifyGrid cg;
  cg.tau_min = -12.5;
  cg.tau_levels = 10;
  cg.dx = 0.04;
  cg.xbox = 60.0;

  EvolveConfig cfg;
  cfg.m = 12.0;
  cfg.tau_end = -10.0;
  cfg.X = 40.0;
  cfg.dx = 0.05;
  cfg.dtau = 1e-3;
  cfg.snapshot_count = 5;

  SUBCASE("refuses to run uncertified") {
    CHECK_THROWS_AS(evolve(b0, cfg, nullptr), std::invalid_argument);
    CertificationReport bad;
    bad.verdict = "fail";
    CHECK_THROWS_AS(evolve(b0, cfg, &bad), std::invalid_argument);
    // or with a box that stops short of the start time
    const FindQResult fq = find_q(b0, cg);
    REQUIRE(fq.found);
    EvolveConfig deep = cfg;
    deep.m = 20.0;
    CHECK_THROWS_AS(evolve(make_barriers(fq.params, mp), deep, &fq.report),
                    std::invalid_argument);
  }

  SUBCASE("certified run stays inside the sandwich") {
    const FindQResult fq = find_q(b0, cg);
    REQUIRE(fq.found);
    const BarrierSet bq = make_barriers(fq.params, mp);
    const SpaceTimeField f = evolve(bq, cfg, &fq.report);
    CHECK(f.completed);
    REQUIRE(!f.diagnostics.empty());
    // starts exactly on the upper barrier
    CHECK(f.diagnostics.front().upper_violation == 0.0);

    const double tol =
        calibrate_scheme_constant(mp, cfg) * (cfg.dtau + cfg.dx * cfg.dx);
    CHECK(f.max_upper_violation <= tol);
    CHECK(f.max_lower_violation <= tol);

    // symmetric data stay symmetric
    const long N = f.phi.size();
    double asym = 0.0;
    for (long i = 0; i < N; ++i)
      asym = std::max(asym, std::abs(f.phi[i] - f.phi[N - 1 - i]));
    CHECK(asym < 1e-9);

    CHECK(f.snapshots.size() == 5);
    CHECK(f.snapshot_tau.front() == -12.0);
    CHECK(f.snapshot_tau.back() == -10.0);
  }

  SUBCASE("without slow-down the upper margin is violated") {
    EvolveConfig free_cfg = cfg;
    free_cfg.allow_uncertified = true;
    const SpaceTimeField f = evolve(b0, free_cfg, nullptr);
    const double tol =
        calibrate_scheme_constant(mp, cfg) * (cfg.dtau + cfg.dx * cfg.dx);
    CHECK(f.max_upper_violation > tol);
  }
}
