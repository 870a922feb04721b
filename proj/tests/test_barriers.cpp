#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "yamabe/barriers.hpp"
#include "yamabe/model.hpp"
#include "yamabe/profiles.hpp"

using namespace yamabe;

namespace {

double scaled(double L, double u) { return std::abs(L) / std::max(1.0, u * u); }

}  // namespace

TEST_CASE("pressure operator vanishes on exact families") {
  SUBCASE("constants and cylinders") {
    const ModelParams mp = ModelParams::dimension(5);
    CHECK(pressure_L(1.0, 0.0, 0.0, 0.0, mp) == 0.0);
    // a generic constant is not a solution; L has a known closed value
    CHECK(pressure_L(3.0, 0.0, 0.0, 0.0, mp) ==
          doctest::Approx(mp.pm1 * 6.0).epsilon(1e-14));
    for (double k : {0.25, 1.0, 4.0}) {
      const double tstar = cylinder_blowup_time(k, mp);
      for (double tau : {tstar - 5.0, tstar - 15.0, tstar - 40.0}) {
        const double u = cylinder_pressure(tau, k, mp);
        const double ut = cylinder_pressure_dtau(tau, k, mp);
        CHECK(scaled(pressure_L(u, 0.0, 0.0, ut, mp), u) < 1e-13);
      }
    }
  }

  SUBCASE("sphere pressure is steady") {
    for (int n : {3, 4, 6}) {
      const ModelParams mp = ModelParams::dimension(n);
      const double m = mp.m, b = 1.0 / m, c = m / (m + 1.0);
      for (double x = -6.0; x <= 6.0; x += 0.37) {
        const double u = c * std::cosh(b * x) * std::cosh(b * x);
        const double ux = c * b * std::sinh(2.0 * b * x);
        const double uxx = 2.0 * c * b * b * std::cosh(2.0 * b * x);
        CHECK(scaled(pressure_L(u, ux, uxx, 0.0, mp), u) < 1e-12);
      }
    }
  }

  SUBCASE("traveling waves, both orientations") {
    const ModelParams mp = ModelParams::dimension(4);
    const WaveProfile w = solve_traveling_wave(2.0, mp, GridSpec{});
    double worst = 0.0;
    for (double tau : {-30.0, -10.0, -2.0}) {
      for (double x = -40.0; x <= 40.0; x += 0.73) {
        // left-moving front: u(x,tau) = v(x - lambda tau)
        {
          const WavePoint pt = w.eval(x - 2.0 * tau);
          const double L =
              pressure_L(pt.v, pt.v_y, pt.v_yy, -2.0 * pt.v_y, mp);
          worst = std::max(worst, scaled(L, pt.v));
        }
        // right-moving front: u(x,tau) = v(-x - lambda tau)
        {
          const WavePoint pt = w.eval(-x - 2.0 * tau);
          const double L =
              pressure_L(pt.v, -pt.v_y, pt.v_yy, -2.0 * pt.v_y, mp);
          worst = std::max(worst, scaled(L, pt.v));
        }
      }
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("two-parameter cosh family") {
    const ModelParams mp = ModelParams::dimension(4);
    KingState s0{1.5, 0.2, 0.0};
    const KingTrajectory tr = king_integrate(s0, -25.0, mp);
    REQUIRE(tr.tau.size() > 10);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.tau.size(); i += 7) {
      const Eigen::Vector2d s(tr.xi[i], tr.zeta[i]);
      const Eigen::Vector2d d = king_rhs(s, mp);
      for (double x = -3.0; x <= 3.0; x += 0.5) {
        const double ch = std::cosh(mp.pm1 * x), sh = std::sinh(mp.pm1 * x);
        const double u = s[0] + s[1] * ch;
        const double ux = s[1] * mp.pm1 * sh;
        const double uxx = s[1] * mp.pm1 * mp.pm1 * ch;
        const double ut = d[0] + d[1] * ch;
        worst = std::max(worst, scaled(pressure_L(u, ux, uxx, ut, mp), u));
      }
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("barrier assembly") {
  const ModelParams mp = ModelParams::dimension(4);
  AncientParams ap;
  ap.lambda = 2.0;
  ap.lambda2 = 3.0;
  ap.h = 1.0;
  ap.h2 = -2.0;
  ap.k = 1.0;
  ap.q = 0.3;
  const BarrierSet b = make_barriers(ap, mp);

  SUBCASE("grouped expansion equals direct assembly") {
    double worst = 0.0;
    for (double tau : {-2.0, -5.0, -10.0, -30.0}) {
      for (double x = -40.0; x <= 40.0; x += 1.7) {
        const double grouped = b.upper_terms(x, tau).sum();
        const double direct = b.upper_L_direct(x, tau);
        const double w = b.upper(x, tau);
        worst = std::max(worst,
                         std::abs(grouped - direct) / std::max(1.0, w * w));
      }
    }
    CHECK(worst < 1e-11);
  }

  SUBCASE("lower never exceeds upper") {
    for (double tau : {-40.0, -12.0, -5.0}) {
      for (double x = -80.0; x <= 80.0; x += 0.16) {
        const BarrierEval r = b.eval(x, tau);
        CHECK(r.wminus <= r.wplus * (1.0 + 1e-12));
      }
    }
  }

  SUBCASE("far from the fronts the lower barrier is the cylinder") {
    // waves receded: both excesses are exponentially below the k-mode
    for (double x = -1.0; x <= 1.0; x += 0.25) {
      CHECK(b.lower(x, -30.0) ==
            1.0 + cylinder_excess(-30.0, ap.k, mp));
    }
  }

  SUBCASE("deep tails follow the dominant wave") {
    AncientParams flat = ap;
    flat.k = 0.0;
    flat.q = 0.0;
    const BarrierSet b0 = make_barriers(flat, mp);
    const double tau = -10.0;
    const BarrierEval r = b0.eval(-60.0, tau);
    CHECK(b0.lower(-60.0, tau) == r.w1);
    CHECK(r.w1 > 1e6);  // left wave dominates far left
    // pressure grows like e^{(p-1)|z|} with the fitted amplitude
    const double pred =
        std::exp(mp.pm1 * (-r.z) - mp.pm1 * std::log(b0.left_wave().left_coefficient()));
    CHECK(r.w1 == doctest::Approx(pred).epsilon(1e-4));
  }

  SUBCASE("reflection equivariance") {
    AncientParams sw;
    sw.lambda = ap.lambda2;
    sw.lambda2 = ap.lambda;
    sw.h = ap.h2;
    sw.h2 = ap.h;
    sw.k = ap.k;
    sw.q = ap.q;
    const BarrierSet bs = make_barriers(sw, mp);
    for (double tau : {-25.0, -7.0}) {
      for (double x = -35.0; x <= 35.0; x += 2.3) {
        CHECK(b.upper(x, tau) == bs.upper(-x, tau));
        CHECK(b.lower(x, tau) == bs.lower(-x, tau));
      }
    }
  }

  SUBCASE("monotone in the cylinder mass") {
    auto wave = std::make_shared<const WaveProfile>(
        solve_traveling_wave(2.0, mp, GridSpec{}));
    AncientParams a0;
    a0.lambda = a0.lambda2 = 2.0;
    std::vector<BarrierSet> fam;
    for (double k : {0.0, 0.5, 1.0}) {
      AncientParams a = a0;
      a.k = k;
      fam.emplace_back(a, wave, wave);
    }
    for (double tau : {-20.0, -6.0}) {
      for (double x : {-15.0, 0.0, 9.0}) {
        CHECK(fam[0].upper(x, tau) < fam[1].upper(x, tau));
        CHECK(fam[1].upper(x, tau) < fam[2].upper(x, tau));
        CHECK(fam[0].lower(x, tau) <= fam[1].lower(x, tau));
        CHECK(fam[1].lower(x, tau) <= fam[2].lower(x, tau));
      }
    }
  }

  SUBCASE("parameter validation") {
    AncientParams bad = ap;
    bad.lambda = 0.5;
    CHECK_THROWS_AS(make_barriers(bad, mp), std::domain_error);
    bad = ap;
    bad.k = -1.0;
    CHECK_THROWS_AS(make_barriers(bad, mp), std::domain_error);
    bad = ap;
    bad.q = -0.1;
    CHECK_THROWS_AS(make_barriers(bad, mp), std::domain_error);
    bad = ap;
    bad.tau0 = 1.0;
    CHECK_THROWS_AS(make_barriers(bad, mp), std::domain_error);
  }
}

TEST_CASE("unit-speed barrier reduces to the explicit cosh form") {
  const ModelParams mp = ModelParams::dimension(3);
  AncientParams ap;
  ap.lambda = ap.lambda2 = 1.0;
  ap.k = 0.5;
  const BarrierSet b = make_barriers(ap, mp);
  const double cp = barenblatt_cp(mp);
  for (double tau : {-3.0, -8.0}) {
    for (double x = -2.0; x <= 2.0; x += 0.31) {
      const double expected = cylinder_pressure(tau, ap.k, mp) +
                              2.0 * cp * std::exp(mp.pm1 * tau) *
                                  std::cosh(mp.pm1 * x);
      CHECK(b.upper(x, tau) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("supersolution certification") {
  const ModelParams mp = ModelParams::dimension(4);
  AncientParams ap;
  ap.lambda = ap.lambda2 = 2.0;
  ap.k = 1.0;
  ap.tau0 = -10.0;
  const BarrierSet b = make_barriers(ap, mp);

  CertifyGrid cg;
  cg.tau_min = -40.0;
  cg.xbox = 60.0;
  cg.tau_levels = 30;   // light mesh; the acceptance run uses the full one
  cg.dx = 0.04;

  SUBCASE("without slow-down the residual is detectably positive") {
    const LTerms t = b.upper_terms(0.0, ap.tau0);
    CHECK(t.t6 == 0.0);
    CHECK(t.t7 == 0.0);
    CHECK(t.sum() > 1e-8);
    const CertificationReport rep = certify_supersolution(b, cg);
    CHECK(rep.verdict == "fail");
    CHECK(rep.maxL_global > 1e-7);
    CHECK(rep.maxL_global > 2.0 * rep.err_est);
  }

  SUBCASE("find_q certifies and the report is internally consistent") {
    const FindQResult fq = find_q(b, cg);
    REQUIRE(fq.found);
    CHECK(fq.report.verdict == "pass");
    CHECK(fq.params.q > 0.0);
    CHECK(fq.params.q <
          0.99 * std::exp(-mp.alpha * ap.tau0) * (1.0 + 1e-12));
    CHECK(fq.report.maxL_global <= 1e-7);

    // per-region maxima must reproduce the global maximum exactly
    const double regmax = *std::max_element(fq.report.maxL_by_region.begin(),
                                            fq.report.maxL_by_region.end());
    CHECK(regmax == fq.report.maxL_global);
    CHECK(fq.report.dominant_term_margin > 0.0);
    CHECK(std::isfinite(fq.report.dominant_term_asymptotic_margin));
    // the cross terms discarded at the box edge must not be able to flip
    // the verdict
    CHECK(fq.report.edge_crossterm_bound < 1e-7);

    // the certificate survives a finer mesh at the same q
    CertifyGrid fine = cg;
    fine.tau_levels = 45;
    fine.dx = 0.02;
    const CertificationReport rep2 =
        certify_supersolution(b.with_q(fq.params.q), fine);
    CHECK(rep2.verdict == "pass");
  }

  SUBCASE("certified amplitude does not grow as the anchor recedes") {
    const FindQResult fq0 = find_q(b, cg);
    REQUIRE(fq0.found);
    AncientParams deep = ap;
    deep.tau0 = -15.0;
    CertifyGrid cg2 = cg;
    const FindQResult fq1 = find_q(make_barriers(deep, mp), cg2);
    REQUIRE(fq1.found);
    CHECK(fq1.params.q <= fq0.params.q * 1.02);
  }

  SUBCASE("box validation") {
    CertifyGrid bad = cg;
    bad.tau_min = -5.0;  // not earlier than tau0
    CHECK_THROWS_AS(certify_supersolution(b, bad), std::domain_error);
  }
}

TEST_CASE("wave crossing point") {
  const ModelParams mp = ModelParams::dimension(4);

  SUBCASE("symmetric data cross at the origin") {
    AncientParams ap;
    ap.lambda = ap.lambda2 = 2.0;
    ap.k = 1.0;
    const BarrierSet b = make_barriers(ap, mp);
    for (double tau : {-40.0, -15.0}) {
      const IntersectionInfo info = intersection_point(b, tau);
      CHECK(std::abs(info.x_numeric) < 1e-10);
      CHECK(info.x_predicted == 0.0);
      CHECK(info.w1_value > 1.0);
    }
  }

  SUBCASE("asymmetric speeds: prediction and decay rate") {
    AncientParams ap;
    ap.lambda = 2.0;
    ap.lambda2 = 3.0;
    const BarrierSet b = make_barriers(ap, mp);

    const double d = intersection_decay_exponent(b);
    CHECK(d == doctest::Approx(0.69359).epsilon(1e-4));

    const IntersectionInfo far = intersection_point(b, -40.0);
    CHECK(std::abs(far.x_numeric - far.x_predicted) < 0.05);

    // fit the decay of the common excess along the crossing
    std::vector<double> taus, logs;
    for (double tau = -40.0; tau <= -36.0; tau += 1.0) {
      const IntersectionInfo info = intersection_point(b, tau);
      taus.push_back(tau);
      logs.push_back(std::log(info.w1_value - 1.0));
    }
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      st += taus[i];
      sl += logs[i];
      stt += taus[i] * taus[i];
      stl += taus[i] * logs[i];
    }
    const double nn = static_cast<double>(taus.size());
    const double slope = (nn * stl - st * sl) / (nn * stt - st * st);
    CHECK(slope == doctest::Approx(d).epsilon(0.02));
  }

  SUBCASE("shifts move the crossing as the tails dictate") {
    AncientParams ap;
    ap.lambda = ap.lambda2 = 2.0;
    ap.h = 3.0;
    ap.h2 = -1.0;
    const BarrierSet b = make_barriers(ap, mp);
    const IntersectionInfo info = intersection_point(b, -30.0);
    // equal speeds: crossing sits at (h2 - h)/2 exactly
    CHECK(info.x_numeric == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(info.x_predicted == doctest::Approx(-2.0).epsilon(1e-12));
  }
}
