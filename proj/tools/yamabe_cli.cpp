// Command-line front end: traveling waves, barrier certification, evolution
// runs, curvature reports and King trajectories.  Every invocation echoes a
// run manifest as JSON on stdout; outputs are deterministic.
//
// Exit codes: 0 pass, 1 verified fail / solver failure, 2 usage or config
// error, 3 inconclusive.  YAMABE_ANCIENTS_THREADS caps worker threads.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "yamabe/barriers.hpp"
#include "yamabe/evolution.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/io.hpp"
#include "yamabe/model.hpp"
#include "yamabe/profiles.hpp"

namespace {

using yamabe::io::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kInconclusive = 3;

int emit(const json& manifest, int code) {
  std::cout << manifest.dump(2) << "\n";
  return code;
}

json manifest_skeleton(const std::string& sub, const json& flags) {
  return json{{"kind", "run-manifest"},
              {"tool", yamabe::io::tool_info()},
              {"command", json{{"subcommand", sub}, {"flags", flags}}},
              {"inputs", json::array()},
              {"outputs", json::array()},
              {"result", json::object()}};
}

int verdict_code(const std::string& verdict) {
  if (verdict == "pass") return kPass;
  if (verdict == "fail") return kFail;
  return kInconclusive;
}

// ---------------------------------------------------------------------------
// wave

struct WaveArgs {
  int n = 4;
  double lambda = 2.0;
  yamabe::GridSpec grid;
  std::string out = "profile";
};

int cmd_wave(const WaveArgs& a) {
  if (a.lambda < 1.0) throw std::invalid_argument("lambda must be >= 1");
  const yamabe::ModelParams mp = yamabe::ModelParams::dimension(a.n);
  const yamabe::WaveProfile w =
      yamabe::solve_traveling_wave(a.lambda, mp, a.grid);

  const std::string csv = a.out + ".csv";
  const std::string side = a.out + ".json";
  yamabe::io::write_wave_csv(csv, w);
  yamabe::io::write_json(side, yamabe::io::wave_sidecar(w));

  json m = manifest_skeleton("wave", json{{"n", a.n},
                                          {"lambda", a.lambda},
                                          {"ymin", a.grid.ymin},
                                          {"ymax", a.grid.ymax},
                                          {"dy", a.grid.dy},
                                          {"out", a.out}});
  m["outputs"] = {csv, side};
  m["result"] = json{{"gamma", w.gamma()},
                     {"gamma_tail", w.gamma_tail()},
                     {"C", w.amplitude()},
                     {"closed_form", w.closed_form()},
                     {"normalization_residual", w.normalization_residual()},
                     {"verdict", "pass"}};
  return emit(m, kPass);
}

// ---------------------------------------------------------------------------
// barrier-check

struct BarrierArgs {
  int n = 4;
  yamabe::AncientParams ap;
  yamabe::CertifyGrid grid;
  std::string q = "auto";
  std::string out = "cert.json";
};

int cmd_barrier_check(const BarrierArgs& a) {
  const yamabe::ModelParams mp = yamabe::ModelParams::dimension(a.n);
  yamabe::AncientParams ap = a.ap;

  json flags{{"n", a.n},          {"lambda", ap.lambda},
             {"lambda2", ap.lambda2}, {"h", ap.h},
             {"h2", ap.h2},       {"k", ap.k},
             {"q", a.q},          {"tau0", ap.tau0},
             {"tau_min", a.grid.tau_min}, {"xbox", a.grid.xbox},
             {"tau_levels", a.grid.tau_levels}, {"dx", a.grid.dx},
             {"M", a.grid.M},     {"out", a.out}};
  json m = manifest_skeleton("barrier-check", flags);

  yamabe::CertificationReport report;
  if (a.q == "auto") {
    ap.q = 0.0;
    const yamabe::BarrierSet b = yamabe::make_barriers(ap, mp);
    const yamabe::FindQResult fr = yamabe::find_q(b, a.grid);
    report = fr.report;
    json trace = json::array();
    for (const auto& [q, verdict] : fr.trace)
      trace.push_back(json{{"q", q}, {"verdict", verdict}});
    m["result"]["q_search"] = json{{"found", fr.found}, {"trace", trace}};
  } else {
    std::size_t pos = 0;
    ap.q = std::stod(a.q, &pos);
    if (pos != a.q.size()) throw std::invalid_argument("bad --q value: " + a.q);
    const yamabe::BarrierSet b = yamabe::make_barriers(ap, mp);
    report = yamabe::certify_supersolution(b, a.grid);
  }

  yamabe::io::write_json(a.out, yamabe::io::to_json(report));
  m["outputs"] = {a.out};
  m["result"]["q"] = report.params.q;
  m["result"]["maxL_global"] = report.maxL_global;
  m["result"]["err_est"] = report.err_est;
  m["result"]["verdict"] = report.verdict;
  return emit(m, verdict_code(report.verdict));
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveArgs {
  std::string manifest;  // certification report path
  int n = 4;
  yamabe::AncientParams ap;  // used when no certification is supplied
  yamabe::EvolveConfig cfg;
  std::vector<double> compare_m;
  double window = 60.0;
  double tol_sand = 0.0;  // 0: calibrate C (dtau + dx^2) on this grid
  std::string out = "run";
};

int cmd_evolve(const EvolveArgs& a) {
  namespace fs = std::filesystem;
  json flags{{"manifest", a.manifest},
             {"m", a.cfg.m},
             {"tau_end", a.cfg.tau_end},
             {"X", a.cfg.X},
             {"dx", a.cfg.dx},
             {"dtau", a.cfg.dtau},
             {"snapshots", a.cfg.snapshot_count},
             {"gauge", a.cfg.gauge},
             {"allow_uncertified", a.cfg.allow_uncertified},
             {"compare_m", a.compare_m},
             {"window", a.window},
             {"tol_sand", a.tol_sand},
             {"out", a.out}};
  json m = manifest_skeleton("evolve", flags);

  yamabe::CertificationReport cert;
  const yamabe::CertificationReport* certp = nullptr;
  int n = a.n;
  yamabe::AncientParams ap = a.ap;
  if (!a.manifest.empty()) {
    cert = yamabe::io::certification_from_json(yamabe::io::read_json(a.manifest));
    if (cert.verdict != "pass")
      throw std::invalid_argument("certification manifest verdict is '" +
                                  cert.verdict + "', not 'pass'");
    certp = &cert;
    n = cert.n;
    ap = cert.params;
    m["inputs"].push_back(a.manifest);
  } else if (!a.cfg.allow_uncertified) {
    throw std::invalid_argument(
        "evolve requires --manifest with a passing certification "
        "(or --allow-uncertified)");
  }

  const yamabe::ModelParams mp = yamabe::ModelParams::dimension(n);
  const yamabe::BarrierSet barriers = yamabe::make_barriers(ap, mp);
  const double tol =
      a.tol_sand > 0.0
          ? a.tol_sand
          : yamabe::calibrate_scheme_constant(mp, a.cfg) *
                (a.cfg.dtau + a.cfg.dx * a.cfg.dx);
  m["result"]["sandwich_tol"] = tol;

  if (!a.compare_m.empty()) {
    // Cauchy-in-m ladder on the common window [-min m, tau_end] x [-X0, X0].
    if (a.compare_m.size() < 2)
      throw std::invalid_argument("--compare-m needs at least two values");
    std::vector<double> ms = a.compare_m;
    std::sort(ms.begin(), ms.end());
    std::vector<yamabe::SpaceTimeField> runs;
    json runlist = json::array();
    for (double mi : ms) {
      yamabe::EvolveConfig cfg = a.cfg;
      cfg.m = mi;
      const yamabe::SpaceTimeField f = yamabe::evolve(barriers, cfg, certp);
      char sub[32];
      std::snprintf(sub, sizeof(sub), "m%g", mi);
      const std::string dir = (fs::path(a.out) / sub).string();
      json inv = flags;
      inv["m"] = mi;
      yamabe::io::write_run(dir, f, json{{"subcommand", "evolve"},
                                         {"flags", inv}});
      runlist.push_back(json{{"m", mi},
                             {"dir", dir},
                             {"max_upper_violation", f.max_upper_violation},
                             {"max_lower_violation", f.max_lower_violation}});
      runs.push_back(f);
    }
    json gaps = json::array();
    bool contracting = true;
    double prev = 0.0;
    // gaps live on the common window: times no deeper than the shallowest run
    const double tau_from = -ms.front();
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
      const double d =
          yamabe::pressure_gap(runs[i], runs[i + 1], a.window, tau_from);
      gaps.push_back(json{{"between", {ms[i], ms[i + 1]}}, {"D", d}});
      if (i > 0 && d >= prev) contracting = false;
      prev = d;
    }
    const std::string verdict = contracting ? "pass" : "fail";
    json cauchy{{"kind", "cauchy-report"},
                {"tool", yamabe::io::tool_info()},
                {"model", json{{"n", n}}},
                {"window", a.window},
                {"m", ms},
                {"runs", runlist},
                {"gaps", gaps},
                {"verdict", verdict}};
    fs::create_directories(a.out);
    const std::string cpath = (fs::path(a.out) / "cauchy.json").string();
    yamabe::io::write_json(cpath, cauchy);
    m["outputs"].push_back(cpath);
    m["result"]["gaps"] = gaps;
    m["result"]["verdict"] = verdict;
    return emit(m, contracting ? kPass : kFail);
  }

  const yamabe::SpaceTimeField f = yamabe::evolve(barriers, a.cfg, certp);
  json run_manifest = yamabe::io::write_run(
      a.out, f, json{{"subcommand", "evolve"}, {"flags", flags}});
  const bool ok = f.completed && f.max_upper_violation <= tol &&
                  f.max_lower_violation <= tol;
  // record the sandwich verdict inside the run manifest as well
  run_manifest["result"]["sandwich_tol"] = tol;
  run_manifest["result"]["sandwich_verdict"] = ok ? "pass" : "fail";
  yamabe::io::write_json((fs::path(a.out) / "manifest.json").string(),
                         run_manifest);

  m["outputs"].push_back((fs::path(a.out) / "manifest.json").string());
  m["result"]["completed"] = f.completed;
  m["result"]["max_upper_violation"] = f.max_upper_violation;
  m["result"]["max_lower_violation"] = f.max_lower_violation;
  m["result"]["verdict"] = ok ? "pass" : "fail";
  return emit(m, ok ? kPass : kFail);
}

// ---------------------------------------------------------------------------
// curvature

struct CurvatureArgs {
  std::string run;
  double phi_floor = 0.0;  // 0: 5 dx, the smallest floor second differences support
  bool verdict = false;
  std::string out;
};

int cmd_curvature(const CurvatureArgs& a) {
  namespace fs = std::filesystem;
  if (!fs::exists(fs::path(a.run) / "manifest.json"))
    throw std::invalid_argument("no run manifest under '" + a.run + "'");
  const yamabe::SpaceTimeField f = yamabe::io::read_run(a.run);
  const double floor = a.phi_floor > 0.0 ? a.phi_floor : 5.0 * f.config.dx;
  const json rep = yamabe::io::curvature_report(f, floor, a.run);
  const std::string out =
      a.out.empty() ? (fs::path(a.run) / "curvature.json").string() : a.out;
  yamabe::io::write_json(out, rep);

  json m = manifest_skeleton("curvature", json{{"run", a.run},
                                               {"phi_floor", a.phi_floor},
                                               {"verdict", a.verdict},
                                               {"out", out}});
  m["inputs"].push_back(a.run);
  m["outputs"].push_back(out);
  m["result"]["phi_floor"] = floor;
  m["result"]["bounded"] = rep.at("verdict").at("bounded");
  m["result"]["plateau"] = rep.at("verdict").at("plateau");
  m["result"]["overall"] = rep.at("verdict").at("overall");
  const bool bounded = rep.at("verdict").at("bounded").get<bool>();
  m["result"]["verdict"] = bounded ? "pass" : "fail";
  return emit(m, !a.verdict || bounded ? kPass : kFail);
}

// ---------------------------------------------------------------------------
// king

struct KingArgs {
  int n = 4;
  double xi0 = 1.001;
  double zeta0 = 1e-6;
  double tau0 = -5.0;
  double tau1 = 0.0;
  std::string out = "king.json";
};

int cmd_king(const KingArgs& a) {
  if (a.tau1 <= a.tau0) throw std::invalid_argument("need tau1 > tau0");
  if (a.xi0 < 1.0 || a.zeta0 < 0.0)
    throw std::invalid_argument("need xi0 >= 1 and zeta0 >= 0");
  const yamabe::ModelParams mp = yamabe::ModelParams::dimension(a.n);
  yamabe::KingState start;
  start.xi = a.xi0;
  start.zeta = a.zeta0;
  start.tau = a.tau0;
  const yamabe::KingTrajectory tr = yamabe::king_integrate(start, a.tau1, mp);
  const yamabe::KingSlopes sl = yamabe::king_fit_slopes(tr, mp);

  json rep{{"kind", "king-report"},
           {"tool", yamabe::io::tool_info()},
           {"model", json{{"n", a.n}, {"p", mp.p}}},
           {"start", json{{"xi0", a.xi0}, {"zeta0", a.zeta0}, {"tau0", a.tau0}}},
           {"tau1", a.tau1},
           {"blew_up", tr.blew_up},
           {"final", json{{"tau", tr.tau.back()},
                          {"xi", tr.xi.back()},
                          {"zeta", tr.zeta.back()}}},
           {"slopes", json{{"xi_slope", sl.xi_slope},
                           {"xi_target", sl.xi_target},
                           {"zeta_slope", sl.zeta_slope},
                           {"zeta_target", sl.zeta_target}}}};
  yamabe::io::write_json(a.out, rep);

  json m = manifest_skeleton("king", json{{"n", a.n},
                                          {"xi0", a.xi0},
                                          {"zeta0", a.zeta0},
                                          {"tau0", a.tau0},
                                          {"tau1", a.tau1},
                                          {"out", a.out}});
  m["outputs"].push_back(a.out);
  m["result"]["blew_up"] = tr.blew_up;
  m["result"]["slopes"] = rep.at("slopes");
  m["result"]["verdict"] = tr.blew_up ? "fail" : "pass";
  return emit(m, tr.blew_up ? kFail : kPass);
}

json error_json(const std::string& kind, const std::string& message) {
  return json{{"kind", "error"},
              {"tool", yamabe::io::tool_info()},
              {"error", kind},
              {"message", message}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Ancient solutions of the rescaled cylindrical Yamabe flow: traveling "
      "waves, barriers, certified evolution, curvature monitors."};
  app.set_version_flag("--version",
                       std::string(yamabe::io::kToolName) + " " +
                           yamabe::io::kToolVersion);
  app.require_subcommand(1);
  app.footer("YAMABE_ANCIENTS_THREADS caps worker threads.");

  WaveArgs wa;
  CLI::App* wave = app.add_subcommand("wave", "Solve a traveling-wave profile");
  wave->add_option("--n", wa.n, "dimension (>= 3)");
  wave->add_option("--lambda", wa.lambda, "wave speed (>= 1)")->required();
  wave->add_option("--ymin", wa.grid.ymin, "grid start");
  wave->add_option("--ymax", wa.grid.ymax, "grid end");
  wave->add_option("--dy", wa.grid.dy, "grid step");
  wave->add_option("--out", wa.out, "output prefix (.csv/.json)");

  BarrierArgs ba;
  CLI::App* bc = app.add_subcommand(
      "barrier-check", "Certify the upper barrier as a supersolution");
  bc->set_help_flag("--help", "print help");  // frees -h for the phase shift
  bc->add_option("--n", ba.n, "dimension (>= 3)");
  bc->add_option("--lambda", ba.ap.lambda, "left wave speed");
  bc->add_option("--lambda2", ba.ap.lambda2, "right wave speed");
  bc->add_option("--h", ba.ap.h, "left phase shift");
  bc->add_option("--h2", ba.ap.h2, "right phase shift");
  bc->add_option("--k", ba.ap.k, "cylinder mass");
  bc->add_option("--tau0", ba.ap.tau0, "certification anchor time (< 0)");
  bc->add_option("--q", ba.q, "slow-down amplitude, or 'auto' to search");
  bc->add_option("--tau-min", ba.grid.tau_min, "earliest time of the box");
  bc->add_option("--xbox", ba.grid.xbox, "half-width of the box");
  bc->add_option("--tau-levels", ba.grid.tau_levels, "time ladder size");
  bc->add_option("--dx", ba.grid.dx, "mesh step (0: auto)");
  bc->add_option("--M", ba.grid.M, "region split parameter (0: auto)");
  bc->add_option("--out", ba.out, "report path");

  EvolveArgs ea;
  CLI::App* ev = app.add_subcommand(
      "evolve", "Run the approximating initial-value problem off the barrier");
  ev->set_help_flag("--help", "print help");
  ev->add_option("--manifest", ea.manifest,
                 "passing certification report (JSON)");
  ev->add_option("--n", ea.n, "dimension (uncertified runs only)");
  ev->add_option("--lambda", ea.ap.lambda, "left wave speed (uncertified)");
  ev->add_option("--lambda2", ea.ap.lambda2, "right wave speed (uncertified)");
  ev->add_option("--h", ea.ap.h, "left phase shift (uncertified)");
  ev->add_option("--h2", ea.ap.h2, "right phase shift (uncertified)");
  ev->add_option("--k", ea.ap.k, "cylinder mass (uncertified)");
  ev->add_option("--q", ea.ap.q, "slow-down amplitude (uncertified)");
  ev->add_option("--tau0", ea.ap.tau0, "anchor time (uncertified)");
  ev->add_option("--m", ea.cfg.m, "start time is -m");
  ev->add_option("--tau-end", ea.cfg.tau_end, "final time");
  ev->add_option("--X", ea.cfg.X, "half-width of the spatial box");
  ev->add_option("--dx", ea.cfg.dx, "space step");
  ev->add_option("--dtau", ea.cfg.dtau, "time step");
  ev->add_option("--snapshots", ea.cfg.snapshot_count, "stored time slices");
  ev->add_option("--gauge", ea.cfg.gauge, "conformal | pressure");
  ev->add_flag("--allow-uncertified", ea.cfg.allow_uncertified,
               "run without a certification manifest");
  ev->add_option("--compare-m", ea.compare_m,
                 "comma-separated m ladder for the Cauchy report")
      ->delimiter(',');
  ev->add_option("--window", ea.window, "half-width of the Cauchy window");
  ev->add_option("--tol-sand", ea.tol_sand,
                 "sandwich tolerance (0: calibrate C (dtau + dx^2))");
  ev->add_option("--out", ea.out, "run directory");

  CurvatureArgs ca;
  CLI::App* cv = app.add_subcommand("curvature",
                                    "Curvature report for a stored run");
  cv->add_option("--run", ca.run, "run directory")->required();
  cv->add_option("--phi-floor", ca.phi_floor,
                 "curvature window floor (0: 5 dx)");
  cv->add_flag("--verdict", ca.verdict, "exit 1 unless type-I bounded");
  cv->add_option("--out", ca.out, "report path (default <run>/curvature.json)");

  KingArgs ka;
  CLI::App* kg = app.add_subcommand("king", "Integrate a King trajectory");
  kg->add_option("--n", ka.n, "dimension (>= 3)");
  kg->add_option("--xi0", ka.xi0, "initial xi (>= 1)");
  kg->add_option("--zeta0", ka.zeta0, "initial zeta (>= 0)");
  kg->add_option("--tau0", ka.tau0, "start time");
  kg->add_option("--tau1", ka.tau1, "end time");
  kg->add_option("--out", ka.out, "report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message to stderr
    std::cout << error_json("usage", e.what()).dump(2) << "\n";
    return kUsage;
  }

  try {
    if (*wave) return cmd_wave(wa);
    if (*bc) return cmd_barrier_check(ba);
    if (*ev) return cmd_evolve(ea);
    if (*cv) return cmd_curvature(ca);
    if (*kg) return cmd_king(ka);
    std::cout << error_json("usage", "no subcommand").dump(2) << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << error_json("config", e.what()).dump(2) << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << error_json("config", e.what()).dump(2) << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << error_json("runtime", e.what()).dump(2) << "\n";
    return kFail;
  }
}
