#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ksproof/pipeline.hpp"

using namespace ksproof;
using nlohmann::json;

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;
};

void add_config_args(CLI::App* sub, ConfigArgs& a) {
  sub->add_option("config", a.path, "run config file (key = value)");
  sub->add_option("--set", a.sets, "override a config key, e.g. --set M=40")->take_all();
}

RunConfig build_config(const ConfigArgs& a) {
  RunConfig c = a.path.empty() ? RunConfig{} : load_config(a.path);
  for (const auto& kv : a.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

// One line, key=value pairs, for scripts.
int fail(int code, const std::string& stage, const std::string& msg) {
  std::string m = msg;
  for (char& ch : m)
    if (ch == '\n') ch = ' ';
  std::cerr << "ksproof: status=fail exit=" << code << " stage=" << stage << " reason=\"" << m << "\"\n";
  return code;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return json::parse(in);
}

std::vector<double> parse_nu_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validated equilibria of the odd Kuramoto-Sivashinsky equation"};
  app.footer(exit_code_help());
  app.require_subcommand(1);

  // scout
  auto* scout = app.add_subcommand("scout", "find approximate Galerkin equilibria (non-rigorous)");
  std::string scout_nu;
  int scout_m = 16;
  SweepOptions sopt;
  std::string scout_out;
  scout->add_option("--nu", scout_nu, "comma separated nu values")->required();
  scout->add_option("--m", scout_m, "Galerkin dimension");
  scout->add_option("--restarts", sopt.restarts, "random Newton restarts per nu");
  scout->add_option("--seed", sopt.seed, "random seed");
  scout->add_flag("--keep-trivial", sopt.keep_trivial, "keep the zero solution");
  scout->add_option("-o,--out", scout_out, "candidate CSV (default stdout)");

  // seed / refine / certify share the config
  ConfigArgs seed_args, refine_args, cert_args;
  auto* seed = app.add_subcommand("seed", "print seeded a priori bounds as JSON");
  add_config_args(seed, seed_args);
  auto* refine = app.add_subcommand("refine", "run the refinement loop and report C4a");
  add_config_args(refine, refine_args);
  auto* certify_cmd = app.add_subcommand("certify", "full proof; writes a certificate");
  add_config_args(certify_cmd, cert_args);
  std::string cert_out;
  certify_cmd->add_option("-o,--out", cert_out, "certificate path (overrides config output)");

  auto* check = app.add_subcommand("check", "re-verify a certificate");
  std::string check_path;
  check->add_option("certificate", check_path)->required();

  auto* sweep = app.add_subcommand("sweep", "scout and certify every branch over a nu list");
  ConfigArgs sweep_args;
  add_config_args(sweep, sweep_args);
  std::string sweep_nu, sweep_dir, sweep_table;
  int sweep_workers = 0;
  sweep->add_option("--nu", sweep_nu, "comma separated nu values")->required();
  sweep->add_option("--out-dir", sweep_dir, "directory for certificates");
  sweep->add_option("--table", sweep_table, "summary CSV (default stdout)");
  sweep->add_option("--workers", sweep_workers, "worker threads (default KSPROOF_WORKERS or all cores)");

  auto* profile = app.add_subcommand("profile", "u(x) with the rigorous error band as CSV");
  std::string prof_path, prof_out;
  int prof_n = 257;
  profile->add_option("certificate", prof_path)->required();
  profile->add_option("-n,--points", prof_n, "grid points on [-pi, pi]");
  profile->add_option("-o,--out", prof_out, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*scout) {
      auto cands = sweep_branches(parse_nu_list(scout_nu), scout_m, sopt);
      if (scout_out.empty()) {
        write_candidates_csv(std::cout, cands);
      } else {
        std::ostringstream os;
        write_candidates_csv(os, cands);
        write_atomic(scout_out, os.str());
      }
      return 0;
    }

    if (*seed || *refine) {
      RunConfig cfg;
      try {
        cfg = build_config(*seed ? seed_args : refine_args);
      } catch (const std::exception& e) {
        return fail(kExitConfig, "config", e.what());
      }
      PreparedRun pr;
      try {
        pr = prepare_run(cfg);
      } catch (const StageError& e) {
        return fail(e.code, e.stage, e.what());
      }
      if (*seed) {
        json j = {{"rho0", pr.seed.rho0},
                  {"rho1", pr.seed.rho1},
                  {"seed_constant", seed_constant(pr.seed)},
                  {"bounds", bounds_json(pr.seeded)}};
        std::cout << j.dump(1) << "\n";
        return 0;
      }
      auto [b, rep] = refine_loop(pr.seeded, cfg.max_iter, cfg.stop_tol, pr.refine);
      std::cout << "iter,D,tail_C,tail_s\n" << std::setprecision(9);
      for (size_t i = 0; i < rep.snapshots.size(); ++i)
        std::cout << i + 1 << "," << rep.snapshots[i].D << "," << rep.snapshots[i].tail.C << ","
                  << rep.snapshots[i].tail.s << "\n";
      std::cout << "k,lo,hi,c4a_margin_upper,c4a_margin_lower\n";
      for (int k = cfg.m + 1; k <= cfg.M; ++k)
        std::cout << k << "," << b.mode(k).lo() << "," << b.mode(k).hi() << ","
                  << rep.c4a.margin_upper[k - cfg.m - 1] << "," << rep.c4a.margin_lower[k - cfg.m - 1] << "\n";
      std::cout << "tail_D," << rep.c4a.tail_D << ",tail_margin," << rep.c4a.tail_margin << "\n";
      if (!rep.c4a.verified) return fail(kExitC4a, "C4a", rep.c4a.first_failure(cfg.m));
      return 0;
    }

    if (*certify_cmd) {
      RunConfig cfg;
      try {
        cfg = build_config(cert_args);
      } catch (const std::exception& e) {
        return fail(kExitConfig, "config", e.what());
      }
      if (!cert_out.empty()) cfg.output = cert_out;
      RunResult r = run_certify(cfg);
      if (r.exit_code != 0) return fail(r.exit_code, r.stage, r.diagnostic);
      const auto& c = *r.certificate;
      std::cout << std::setprecision(6) << "certified " << (c.label.empty() ? "equilibrium" : c.label)
                << " nu=" << cfg.nu << " M=" << cfg.M << " tail s=" << c.bounds.tail().s
                << " q=" << c.conley.q << " l2_error=" << c.l2_error << " c0_error=" << c.c0_error
                << " seconds=" << r.seconds << (cfg.output.empty() ? "" : " certificate=" + cfg.output)
                << "\n";
      return 0;
    }

    if (*check) {
      json j;
      try {
        j = read_json(check_path);
      } catch (const std::exception& e) {
        return fail(kExitCheck, "check", e.what());
      }
      CheckResult cr = check_certificate(j);
      if (!cr.ok) return fail(kExitCheck, "check", cr.problems.empty() ? "unknown" : cr.problems.front());
      std::cout << "ok " << check_path << " min_margin=" << cr.min_margin << "\n";
      return 0;
    }

    if (*sweep) {
      RunConfig base;
      try {
        base = build_config(sweep_args);
      } catch (const std::exception& e) {
        return fail(kExitConfig, "config", e.what());
      }
      auto rows = run_sweep(parse_nu_list(sweep_nu), base, sweep_dir, sweep_workers);
      std::ostringstream os;
      write_sweep_table(os, rows);
      if (sweep_table.empty()) std::cout << os.str();
      else write_atomic(sweep_table, os.str());
      return 0;
    }

    if (*profile) {
      ProofCertificate c;
      try {
        c = certificate_from_json(read_json(prof_path));
      } catch (const std::exception& e) {
        return fail(kExitCheck, "profile", e.what());
      }
      std::ostringstream os;
      emit_profile(c, os, prof_n);
      if (prof_out.empty()) std::cout << os.str();
      else write_atomic(prof_out, os.str());
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(kExitInternal, "internal", e.what());
  }
  return 0;
}
