#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ksproof/pipeline.hpp"

using namespace ksproof;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(KSPROOF_DATA_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "ksproof_test_pipeline";
  fs::create_directories(d);
  return d / name;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::vector<std::vector<double>> read_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n[run]\nnu = 0.75\nm = 2\nM = 10   # inline\nlabel = \"two modes\"\n"
      "candidate = 0.5, -0.25\ntail_rule = sharp\nrho = 0.9\n");
  RunConfig c = parse_config(in);
  CHECK(c.nu == 0.75);
  CHECK(c.m == 2);
  CHECK(c.M == 10);
  CHECK(c.label == "two modes");
  CHECK(c.candidate == std::vector<double>{0.5, -0.25});
  CHECK(c.tail_rule == TailRule::Sharp);
  CHECK(*c.rho0 == 0.9);
  CHECK(*c.rho1 == 0.9);
  CHECK(c.depth == 12);
  CHECK(c.to_json()["tail_rule"] == "sharp");

  std::istringstream bad1("nu = abc\n"), bad2("colour = red\n"), bad3("nu 0.5\n"), bad4("m = 2.5\n");
  CHECK_THROWS_AS(parse_config(bad1), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(bad2), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(bad3), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(bad4), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), std::invalid_argument);
  CHECK(load_config(data("bimodal.toml")).candidate.size() == 28);
}

TEST_CASE("config errors stop before any work") {
  RunConfig c;
  c.nu = 0.1;
  c.m = 2;
  c.M = 10;
  c.candidate = {0.1, 0.1};
  RunResult r = run_certify(c);
  CHECK(r.exit_code == kExitConfig);
  CHECK(r.stage == "config");
  CHECK(r.diagnostic.find("nu*m^2 > 1") != std::string::npos);
  CHECK(r.seconds < 0.1);

  RunConfig c2 = load_config(data("two_mode.toml"));
  c2.candidate = {1, 2, 3};
  CHECK(run_certify(c2).exit_code == kExitConfig);
}

TEST_CASE("worked example end to end") {
  RunConfig c = load_config(data("two_mode.toml"));
  c.output = scratch("s4.json").string();
  RunResult r = run_certify(c);
  REQUIRE(r.exit_code == kExitOk);
  REQUIRE(r.certificate);
  CHECK(r.certificate->conley.q == 0);
  CHECK(r.certificate->bounds.tail().s == 10);
  CHECK(r.certificate->l2_error <= 3 * 0.052);
  CHECK(r.certificate->c0_error <= 3 * 0.05);
  CHECK(r.seconds < 5);
  nlohmann::json j = read_json(c.output);
  CHECK(check_certificate(j).ok);
  CHECK(j["metadata"]["run_options"]["max_iter"] == 3);
  CHECK(j["metadata"]["run_options"]["rho0"] == 0.9017340824130694);
  CHECK(j["label"] == "two-mode");
  for (const auto& e : fs::directory_iterator(scratch("").parent_path()))
    CHECK(e.path().string().find(".tmp.") == std::string::npos);
}

TEST_CASE("certificates are deterministic") {
  RunConfig c = load_config(data("two_mode.toml"));
  RunResult a = run_certify(c), b = run_certify(c);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(to_json(*a.certificate, false).dump() == to_json(*b.certificate, false).dump());
}

TEST_CASE("bimodal equilibrium at nu = 0.1") {
  RunConfig c = load_config(data("bimodal.toml"));
  c.output = scratch("t11.json").string();
  RunResult r = run_certify(c);
  REQUIRE(r.exit_code == kExitOk);
  CHECK(r.certificate->conley.q == 2);
  CHECK(r.certificate->l2_error <= 1e-10);
  CHECK(r.certificate->c0_error <= 1e-10);
  CHECK(check_certificate(read_json(c.output)).ok);

  // Profile: two interior extrema on (0, pi), scale of the dominant mode.
  std::ostringstream os;
  emit_profile(*r.certificate, os, 513);
  auto rows = read_csv(os.str());
  REQUIRE(rows.size() == 513);
  double umax = 0;
  int extrema = 0;
  for (size_t i = 1; i + 1 < rows.size(); ++i) {
    umax = std::max(umax, std::fabs(rows[i][1]));
    if (rows[i][0] > 0 && rows[i][0] < 3.14159 &&
        (rows[i][1] - rows[i - 1][1]) * (rows[i + 1][1] - rows[i][1]) < 0)
      ++extrema;
  }
  CHECK(extrema == 2);
  CHECK(umax > 0.5 * 1.25665);
  CHECK(umax < 1.5 * 1.25665);
  for (const auto& row : rows) CHECK(row[3] - row[2] == doctest::Approx(2 * r.certificate->c0_error));
}

TEST_CASE("stage failures map to exit codes") {
  RunConfig base = load_config(data("two_mode.toml"));

  RunConfig tiny = base;
  tiny.trial_radius = 1e-5;  // block cannot fit the truncation errors
  RunResult r1 = run_certify(tiny);
  CHECK(r1.exit_code == kExitFace);

  RunConfig loose = base;
  loose.rho0 = loose.rho1 = 40.0;
  loose.max_iter = 1;
  RunResult r2 = run_certify(loose);
  CHECK(r2.exit_code == kExitC4a);
  CHECK(r2.diagnostic.find("C4a") != std::string::npos);

  // Newton pulls a distant start back to the fixed point.
  RunConfig far = base;
  far.candidate = {1e5, -1e5};
  RunResult r3 = run_certify(far);
  REQUIRE(r3.exit_code == kExitOk);
  CHECK(std::fabs(r3.certificate->block.frame.candidate[0] - 0.7071067811865476) < 1e-12);
  // Without polishing the same start cannot be certified.
  far.polish = false;
  RunResult r4 = run_certify(far);
  CHECK(r4.exit_code != kExitOk);
  CHECK(!r4.certificate);

  RunConfig scout = base;
  scout.candidate_source = "scout";
  scout.candidate_index = 99;
  CHECK(run_certify(scout).exit_code == kExitCandidate);

  std::string help = exit_code_help();
  for (const char* w : {"C1/C2", "C4a", "face", "index", "Newton", "eigenframe", "check"})
    CHECK(help.find(w) != std::string::npos);
}

TEST_CASE("sweep") {
  RunConfig base = load_config(data("sweep.toml"));
  std::ostringstream empty;
  write_sweep_table(empty, run_sweep({}, base));
  CHECK(empty.str() == "nu,label,status,q,l2_error,c0_error,certificate,diagnostic\n");

  fs::path dir = scratch("sweep");
  fs::remove_all(dir);
  auto rows = run_sweep({0.5}, base, dir.string(), 2);
  int certified = 0;
  for (const auto& r : rows) {
    if (r.exit_code != 0) continue;
    ++certified;
    CHECK(check_certificate(read_json(r.certificate_path)).ok);
  }
  CHECK(certified >= 2);
  std::ostringstream os;
  write_sweep_table(os, rows);
  CHECK(os.str().find("certified") != std::string::npos);
}

TEST_CASE("profile of the zero function") {
  ProofCertificate c;
  c.block.frame.candidate = std::vector<double>(4, 0.0);
  c.c0_error = 0.25;
  std::ostringstream os;
  emit_profile(c, os, 9);
  auto rows = read_csv(os.str());
  REQUIRE(rows.size() == 9);
  CHECK(rows.front()[0] == doctest::Approx(-3.141592653589793));
  CHECK(rows.back()[0] == doctest::Approx(3.141592653589793));
  for (const auto& r : rows) {
    CHECK(r[1] == 0);
    CHECK(r[2] == -0.25);
    CHECK(r[3] == 0.25);
  }
}

TEST_CASE("atomic write") {
  fs::path p = scratch("atomic/out.txt");
  fs::remove_all(p.parent_path());
  write_atomic(p.string(), "hello\n");
  std::ifstream in(p);
  std::string s;
  std::getline(in, s);
  CHECK(s == "hello");
  write_atomic(p.string(), "again\n");
  std::ifstream in2(p);
  std::getline(in2, s);
  CHECK(s == "again");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(p.parent_path())) ++files;
  CHECK(files == 1);
}
