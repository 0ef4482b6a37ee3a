// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <mpfr.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "common.hpp"
#include "ksproof/pipeline.hpp"

using namespace ksproof;
using namespace fixture;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;
std::vector<std::string> emitted;  // certificate files for the round trip

void report(const std::string& name, bool ok, double secs, const std::string& detail) {
  std::printf("%s %s (%.2fs) %s\n", ok ? "PASS" : "FAIL", name.c_str(), secs, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string data(const std::string& name) { return std::string(KSPROOF_DATA_DIR) + "/" + name; }

fs::path workdir() {
  fs::path d = fs::temp_directory_path() / "ksproof_acceptance";
  fs::create_directories(d);
  return d;
}

bool within_factor(double ours, double ref, double f) {
  if (ref == 0) return std::fabs(ours) < 1e-12;
  double r = ours / ref;
  return r > 0 && r <= f && r >= 1 / f;
}

void golden_refinement() {
  auto t0 = Clock::now();
  const double table[][2] = {{0, 0.021055},          {-0.00192301, 0},         {-1.8253e-7, 1.41734e-4},
                             {-9.85549e-6, 8.64999e-9}, {-6.55526e-10, 6.42034e-7}, {-4.03088e-8, 9.30992e-11},
                             {-3.51558e-10, 2.79203e-9}, {-1.11597e-9, 9.71368e-10}};
  SelfConsistentBounds b = s4_seeded();
  for (int i = 0; i < 3; ++i) b = refine_once(b);
  bool ok = b.tail().s == 10 && within_factor(b.tail().C, 10285.3, 2);
  double worst = 1;
  for (int k = 3; k <= 10; ++k) {
    double got[2] = {b.mode(k).lo(), b.mode(k).hi()};
    for (int e = 0; e < 2; ++e) {
      ok = ok && within_factor(got[e], table[k - 3][e], 2);
      if (table[k - 3][e] != 0) worst = std::max(worst, std::max(got[e] / table[k - 3][e], table[k - 3][e] / got[e]));
    }
  }
  double t = since(t0);
  std::ostringstream d;
  d << "s=" << b.tail().s << " C=" << b.tail().C << " worst_ratio=" << worst;
  report("1 golden refinement", ok && t < 5, t, d.str());
}

void golden_block() {
  auto t0 = Clock::now();
  RunConfig c = load_config(data("two_mode.toml"));
  c.output = (workdir() / "two_mode.json").string();
  RunResult r = run_certify(c);
  double t = since(t0);
  if (r.exit_code != 0) {
    report("2 golden block", false, t, "exit=" + std::to_string(r.exit_code) + " " + r.diagnostic);
    return;
  }
  emitted.push_back(c.output);
  const ProofCertificate& cert = *r.certificate;
  const double ref[2][2] = {{-0.0623385, 0.0701918}, {-0.0132425, 0.00353264}};
  bool ok = cert.block.slot_bounds.size() == 2;
  double worst = 0;
  for (int i = 0; ok && i < 2; ++i)
    for (int e = 0; e < 2; ++e) {
      double got = e ? cert.block.slot_bounds[i].hi() : cert.block.slot_bounds[i].lo();
      double dev = std::fabs(got / ref[i][e] - 1);
      worst = std::max(worst, dev);
      ok = ok && dev <= 0.1;
    }
  bool faces = !cert.block.faces.empty();
  for (const auto& f : cert.block.faces) faces = faces && f.margin > 0;
  bool errs = cert.l2_error <= 3 * 0.052 && cert.c0_error <= 3 * 0.05;
  std::ostringstream d;
  d << "max_rel_dev=" << worst << " min_face_margin=" << cert.block.min_margin() << " l2=" << cert.l2_error
    << " c0=" << cert.c0_error;
  report("2 golden block", ok && faces && errs && t < 10, t, d.str());
}

void bimodal() {
  auto t0 = Clock::now();
  RunConfig c = load_config(data("bimodal.toml"));
  c.output = (workdir() / "bimodal.json").string();
  RunResult r = run_certify(c);
  double t = since(t0);
  if (r.exit_code != 0) {
    report("3 bimodal equilibrium nu=0.1", false, t, "exit=" + std::to_string(r.exit_code) + " " + r.diagnostic);
    return;
  }
  emitted.push_back(c.output);
  std::ostringstream d;
  d << "M=" << c.M << " s=" << r.certificate->bounds.tail().s << " l2=" << r.certificate->l2_error
    << " c0=" << r.certificate->c0_error << " q=" << r.certificate->conley.q;
  report("3 bimodal equilibrium nu=0.1", r.certificate->l2_error <= 1e-10 && r.certificate->c0_error <= 1e-10 && t < 60,
         t, d.str());
}

void sweep() {
  auto t0 = Clock::now();
  RunConfig base = load_config(data("sweep.toml"));
  fs::path dir = workdir() / "sweep";
  fs::remove_all(dir);
  auto rows = run_sweep({0.5, 0.3, 0.1}, base, dir.string());
  {
    std::ofstream out(workdir() / "sweep.csv");
    write_sweep_table(out, rows);
  }
  std::map<double, int> got;
  for (const auto& row : rows)
    if (row.exit_code == 0) {
      ++got[row.nu];
      emitted.push_back(row.certificate_path);
    }
  double t = since(t0);
  bool ok = got[0.5] >= 2 && got[0.3] >= 2 && got[0.1] >= 4 && t < 600;
  std::ostringstream d;
  d << "certified nu=0.5:" << got[0.5] << " nu=0.3:" << got[0.3] << " nu=0.1:" << got[0.1] << " of " << rows.size();
  report("4 sweep coverage", ok, t, d.str());
}

// 5a: random interval operations against 2200-bit MPFR.
void interval_fuzz() {
  auto t0 = Clock::now();
  std::mt19937_64 g(777);
  std::uniform_real_distribution<double> mant(-1, 1), u(0, 1);
  std::uniform_int_distribution<int> ex(-30, 30);
  auto rd = [&] { return std::ldexp(mant(g), ex(g)); };
  auto ri = [&](bool nonzero) {
    for (;;) {
      double a = rd(), b = u(g) < 0.1 ? a : rd();
      Interval x(std::min(a, b), std::max(a, b));
      if (!nonzero || !x.contains_zero()) return x;
    }
  };
  auto pick = [&](const Interval& x) {
    double c = u(g);
    if (c < 0.1) return x.lo();
    if (c < 0.2) return x.hi();
    return std::clamp(x.lo() + u(g) * (x.hi() - x.lo()), x.lo(), x.hi());
  };
  mpfr_t x, y, r;
  mpfr_inits2(2200, x, y, r, static_cast<mpfr_ptr>(nullptr));
  long bad = 0, ops = 100000;
  for (long t = 0; t < ops; ++t) {
    int op = static_cast<int>(t % 6);
    Interval X = ri(false), Y = ri(op == 3);
    if (op == 5) X = Interval(abs_min(X), abs_max(X));
    Interval Z = op == 0 ? X + Y : op == 1 ? X - Y : op == 2 ? X * Y : op == 3 ? X / Y : op == 4 ? sqr(X) : sqrt(X);
    for (int s = 0; s < 10; ++s) {
      mpfr_set_d(x, pick(X), MPFR_RNDN);
      mpfr_set_d(y, pick(Y), MPFR_RNDN);
      switch (op) {
        case 0: mpfr_add(r, x, y, MPFR_RNDN); break;
        case 1: mpfr_sub(r, x, y, MPFR_RNDN); break;
        case 2: mpfr_mul(r, x, y, MPFR_RNDN); break;
        case 3: mpfr_div(r, x, y, MPFR_RNDN); break;
        case 4: mpfr_mul(r, x, x, MPFR_RNDN); break;
        default: mpfr_sqrt(r, x, MPFR_RNDN); break;
      }
      if (mpfr_cmp_d(r, Z.lo()) < 0 || mpfr_cmp_d(r, Z.hi()) > 0) ++bad;
    }
  }
  mpfr_clears(x, y, r, static_cast<mpfr_ptr>(nullptr));
  report("5a interval containment fuzz", bad == 0, since(t0),
         std::to_string(ops) + " ops, violations=" + std::to_string(bad));
}

// 5b: brute-force truncated sums with analytic remainder inside the enclosures.
void fs_is_oracle() {
  auto t0 = Clock::now();
  std::mt19937_64 g(2025);
  std::uniform_real_distribution<double> u(0, 1);
  const int M = 8, N = 20000;
  long bad = 0, checks = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    int s = 2 + seq % 4, m = 1 + seq % 4;
    double C = 0.2 + 2 * u(g);
    IntervalVector head, mid;
    for (int k = 1; k <= M; ++k) {
      double rk = C / std::pow(k, s), c = (2 * u(g) - 1) * rk, w = u(g) * rk;
      (k <= m ? head : mid).push_back(u(g) < 0.2 ? Interval(c) : Interval(c - w, c + w));
    }
    SelfConsistentBounds b(Parameters(0.75, m, M), head, mid, TailDecay(C, s));
    auto a = draw_sequence(g, b, N);
    double slack = 1e-15 * static_cast<double>(brute_abs_is(a, 0) + 1);
    for (int k : {1, m, M, M + 1, 2 * M, 2 * M + 1, 3 * M, 5 * M + 3}) {
      Interval fsb = finite_sum_bound(k, b), isb = infinite_sum_bound(k, b);
      long double f = brute_fs(a, k), v = brute_is(a, k);
      double rem = is_remainder(C, s, N, k) + slack;
      if (!(fsb.lo() <= f + slack && f - slack <= fsb.hi())) ++bad;
      if (!(isb.lo() <= v + rem && v - rem <= isb.hi())) ++bad;
      checks += 2;
    }
    for (int k = 1; k <= m; ++k) {
      Interval pe = projection_error(k, b);
      long double v = 0;
      for (int n = m - k + 1; n + k <= N; ++n) v += static_cast<long double>(a[n]) * a[n + k];
      v *= 2 * k;
      double rem = 2 * k * is_remainder(C, s, N, k) + 1e-15;
      if (!(pe.lo() <= v + rem && v - rem <= pe.hi())) ++bad;
      ++checks;
    }
  }
  report("5b FS/IS oracle", bad == 0, since(t0),
         "1000 sequences, " + std::to_string(checks) + " enclosures, misses=" + std::to_string(bad));
}

// 5c: pinned endpoint evaluations of the mode derivative against the verified sign.
void c4a_cross_check() {
  auto t0 = Clock::now();
  SelfConsistentBounds b = s4_refined();
  C4aReport rep = verify_c4a(b);
  std::mt19937_64 g(4242);
  std::uniform_int_distribution<int> kd(3, 100);
  const int N = 3000;
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    int k = t < 16 ? 3 + t / 2 : kd(g);
    bool upper = t % 2 == 0;
    auto a = draw_sequence(g, b, N);
    a[k] = upper ? b.mode(k).hi() : b.mode(k).lo();
    long double d = brute_derivative(a, 0.75, k);
    double rem = 2.0 * k * is_remainder(b.tail().C, b.tail().s, N, k);
    if (upper ? !(d + rem < 0) : !(d - rem > 0)) ++bad;
  }
  report("5c C4a cross-check", rep.verified && bad == 0, since(t0),
         "1000 samples, wrong_sign=" + std::to_string(bad));
}

// 5d: every certificate written above passes the command line check.
void round_trip() {
  auto t0 = Clock::now();
  int bad = 0;
  for (const auto& p : emitted) {
    std::string cmd = std::string("\"") + KSPROOF_CLI + "\" check \"" + p + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      ++bad;
      std::printf("  check failed: %s\n", p.c_str());
    }
  }
  report("5d certificate round trip", !emitted.empty() && bad == 0, since(t0),
         std::to_string(emitted.size()) + " certificates, rejected=" + std::to_string(bad));
}

}  // namespace

int main() {
  auto t0 = Clock::now();
  golden_refinement();
  golden_block();
  bimodal();
  sweep();
  interval_fuzz();
  fs_is_oracle();
  c4a_cross_check();
  round_trip();
  std::printf("%s %d failed, total %.1fs\n", failures ? "FAIL" : "PASS", failures, since(t0));
  return failures ? 1 : 0;
}
