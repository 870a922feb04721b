// Smoke tests for the command-line front end: exit-code contract, file
// outputs, and the JSON shapes downstream tooling depends on.  The binary
// path comes in through YAMABE_CLI_PATH.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "yamabe/model.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "yamabe_cli_test";

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(YAMABE_CLI_PATH) + " " + args;
  if (!stdout_file.empty()) cmd += " > " + stdout_file;
  cmd += " 2> " + (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

json load(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return json::parse(in);
}

std::string at(const fs::path& p) { return (kDir / p).string(); }

}  // namespace

TEST_CASE("cli usage gates") {
  fs::create_directories(kDir);

  SUBCASE("lambda below the soliton range") {
    const int rc = run("wave --n 4 --lambda 0.5 --out " + at("w"),
                       at("gate.json"));
    CHECK(rc == 2);
    const json e = load(at("gate.json"));
    CHECK(e.at("kind") == "error");
    CHECK(e.at("message").get<std::string>().find("lambda must be >= 1") !=
          std::string::npos);
  }

  SUBCASE("missing required flag") {
    CHECK(run("wave --n 4", at("gate.json")) == 2);
    CHECK(load(at("gate.json")).at("kind") == "error");
  }

  SUBCASE("unknown subcommand") {
    CHECK(run("paint --n 4", at("gate.json")) == 2);
  }

  SUBCASE("evolve refuses to run blind") {
    const int rc = run("evolve --m 2 --tau-end -1 --X 5 --dx 0.1 --dtau 0.01 "
                       "--tol-sand 1 --out " + at("norun"),
                       at("gate.json"));
    CHECK(rc == 2);
    const json e = load(at("gate.json"));
    CHECK(e.at("kind") == "error");
    CHECK(e.at("error") == "config");
  }

  SUBCASE("curvature without a run directory") {
    CHECK(run("curvature --run " + at("missing"), at("gate.json")) == 2);
  }

  SUBCASE("version is a fixed string") {
    CHECK(run("--version", at("v.txt")) == 0);
    std::ifstream in(at("v.txt"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "yamabe-ancients 1.0.0");
  }
}

TEST_CASE("cli wave artifacts") {
  fs::create_directories(kDir);
  const int rc = run("wave --n 4 --lambda 2 --ymin -15 --ymax 40 --out " +
                         at("profile"),
                     at("wave_manifest.json"));
  CHECK(rc == 0);

  const json m = load(at("wave_manifest.json"));
  CHECK(m.at("kind") == "run-manifest");
  CHECK(m.at("command").at("subcommand") == "wave");
  CHECK(m.at("result").at("verdict") == "pass");

  const json side = load(at("profile.json"));
  // frozen quadratic-root oracle for (lambda, n) = (2, 4)
  CHECK(side.at("gamma").get<double>() ==
        doctest::Approx(0.3542486889354095).epsilon(1e-12));
  CHECK_FALSE(side.at("closed_form").get<bool>());
  CHECK(side.at("ygrid").at("dy").get<double>() == 0.01);

  std::ifstream csv(at("profile.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "y,psi,v");

  // Barenblatt branch flips the closed-form flag
  CHECK(run("wave --n 4 --lambda 1 --ymin -15 --ymax 40 --out " + at("bb"),
            at("bb_manifest.json")) == 0);
  CHECK(load(at("bb.json")).at("closed_form").get<bool>());
}

TEST_CASE("cli king report") {
  fs::create_directories(kDir);
  const int rc = run(
      "king --n 4 --xi0 1.001 --zeta0 1e-6 --tau0 -5 --tau1 0 --out " +
          at("king.json"),
      at("king_manifest.json"));
  CHECK(rc == 0);
  const json rep = load(at("king.json"));
  CHECK(rep.at("kind") == "king-report");
  CHECK_FALSE(rep.at("blew_up").get<bool>());
  // targets are the exact backward rates; fits live near them on this window
  CHECK(rep.at("slopes").at("xi_target").get<double>() ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(rep.at("slopes").at("zeta_target").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rep.at("slopes").at("xi_slope").get<double>() ==
        doctest::Approx(2.0 / 3.0).epsilon(0.05));
  CHECK(rep.at("slopes").at("zeta_slope").get<double>() ==
        doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("cli certification and evolution pipeline") {
  fs::create_directories(kDir);
  const std::string box =
      "--tau0 -10 --tau-min -13 --xbox 40 --tau-levels 8 --dx 0.08 ";

  // q = 0 is a verified failure: the cross terms have nothing to absorb them
  {
    const int rc = run("barrier-check --n 4 --lambda 2 --lambda2 2 --h 0 "
                       "--h2 0 --k 1 --q 0 " + box + "--out " + at("bad.json"),
                       at("bc0.json"));
    CHECK(rc == 1);
    CHECK(load(at("bad.json")).at("result").at("verdict") == "fail");
  }

  // automatic slow-down search certifies the same family
  {
    const int rc = run("barrier-check --n 4 --lambda 2 --lambda2 2 --h 0 "
                       "--h2 0 --k 1 --q auto " + box + "--out " +
                           at("cert.json"),
                       at("bc.json"));
    CHECK(rc == 0);
    const json cert = load(at("cert.json"));
    CHECK(cert.at("kind") == "certification");
    CHECK(cert.at("result").at("verdict") == "pass");
    CHECK(cert.at("params").at("q").get<double>() > 0.0);
    const json m = load(at("bc.json"));
    CHECK(m.at("result").at("q_search").at("found").get<bool>());
  }

  // evolve off the certified barrier, then run the curvature monitor
  {
    const int rc = run("evolve --manifest " + at("cert.json") +
                           " --m 12 --tau-end -10 --X 30 --dx 0.1 "
                           "--dtau 5e-3 --snapshots 3 --tol-sand 1 --out " +
                           at("run"),
                       at("ev.json"));
    CHECK(rc == 0);
    const json m = load(at("ev.json"));
    CHECK(m.at("result").at("completed").get<bool>());
    CHECK(m.at("result").at("verdict") == "pass");
    const json rm = load(kDir / "run" / "manifest.json");
    CHECK(rm.at("kind") == "evolution-run");
    CHECK(rm.at("result").at("sandwich_verdict") == "pass");
    CHECK(rm.at("snapshots").size() == 3);
    CHECK(fs::exists(kDir / "run" / "snapshot_002.csv"));
  }
  {
    const int rc = run("curvature --run " + at("run") + " --verdict",
                       at("cv.json"));
    CHECK(rc == 0);
    const json rep = load(kDir / "run" / "curvature.json");
    CHECK(rep.at("kind") == "curvature-report");
    CHECK(rep.at("verdict").at("bounded").get<bool>());
    CHECK(rep.at("sup_norms").size() == 3);
    CHECK(rep.at("phi_floor").get<double>() == 0.5);  // 5 dx default
    CHECK(fs::exists(kDir / "run" / "curvature_001.csv"));
  }

  // a certification that fails cannot drive a run
  {
    const int rc = run("evolve --manifest " + at("bad.json") +
                           " --m 12 --tau-end -10 --X 30 --dx 0.1 "
                           "--dtau 5e-3 --tol-sand 1 --out " + at("run2"),
                       at("ev2.json"));
    CHECK(rc == 2);
    CHECK(load(at("ev2.json")).at("error") == "config");
  }

  fs::remove_all(kDir);
}
