#include "ksproof/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

namespace ksproof {

namespace fs = std::filesystem;
using nlohmann::json;

const char* exit_code_help() {
  return "exit codes: 0 proof complete, 1 internal error, 2 config error, 3 C1/C2 failure, "
         "4 C4a failure, 5 block/face failure, 6 index failure, 7 candidate (Newton) failure, "
         "8 eigenframe failure, 9 certificate check failure";
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config key '" + key + "' expects a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d != std::floor(d) || std::fabs(d) > 1e9)
    throw std::invalid_argument("config key '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, std::string v) {
  for (char& c : v)
    if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
  std::istringstream is(v);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
  std::string v = unquote(trim(raw));
  if (key == "nu") nu = to_double(key, v);
  else if (key == "m") m = to_int(key, v);
  else if (key == "M") M = to_int(key, v);
  else if (key == "initial_s") initial_s = to_int(key, v);
  else if (key == "rho0") rho0 = to_double(key, v);
  else if (key == "rho1") rho1 = to_double(key, v);
  else if (key == "rho") rho0 = rho1 = to_double(key, v);
  else if (key == "max_iter") max_iter = to_int(key, v);
  else if (key == "stop_tol") stop_tol = to_double(key, v);
  else if (key == "tail_rule") {
    if (v == "classic") tail_rule = TailRule::Classic;
    else if (v == "sharp") tail_rule = TailRule::Sharp;
    else throw std::invalid_argument("tail_rule must be 'classic' or 'sharp'");
  } else if (key == "inflation") inflation = to_double(key, v);
  else if (key == "depth" || key == "subdivision_depth") depth = to_int(key, v);
  else if (key == "widen") widen = to_double(key, v);
  else if (key == "annulus") annulus = to_double(key, v);
  else if (key == "symmetric_remainder") symmetric_remainder = to_bool(key, v);
  else if (key == "candidate_source") {
    if (v != "inline" && v != "scout") throw std::invalid_argument("candidate_source must be inline or scout");
    candidate_source = v;
  } else if (key == "candidate") candidate = parse_list(key, v);
  else if (key == "candidate_file") {
    fs::path p(v);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) throw std::invalid_argument("cannot read candidate_file " + p.string());
    std::stringstream ss;
    std::string line;
    while (std::getline(in, line)) {
      auto h = line.find('#');
      ss << (h == std::string::npos ? line : line.substr(0, h)) << ' ';
    }
    candidate = parse_list(key, ss.str());
  } else if (key == "candidate_index") candidate_index = to_int(key, v);
  else if (key == "polish") polish = to_bool(key, v);
  else if (key == "head_radius") head_radius = to_double(key, v);
  else if (key == "trial_radius") trial_radius = to_double(key, v);
  else if (key == "tighten_rounds") tighten_rounds = to_int(key, v);
  else if (key == "tighten_factor") tighten_factor = to_double(key, v);
  else if (key == "tighten_iter") tighten_iter = to_int(key, v);
  else if (key == "seed") seed = static_cast<unsigned long long>(to_double(key, v));
  else if (key == "output") output = v;
  else if (key == "label") label = v;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

json RunConfig::to_json() const {
  json j = {{"nu", to_hex(nu)},
            {"m", m},
            {"M", M},
            {"initial_s", initial_s},
            {"max_iter", max_iter},
            {"stop_tol", stop_tol},
            {"tail_rule", tail_rule == TailRule::Classic ? "classic" : "sharp"},
            {"inflation", inflation},
            {"depth", depth},
            {"widen", widen},
            {"annulus", annulus},
            {"symmetric_remainder", symmetric_remainder},
            {"candidate_source", candidate_source},
            {"candidate_index", candidate_index},
            {"polish", polish},
            {"head_radius", head_radius},
            {"trial_radius", trial_radius},
            {"tighten_rounds", tighten_rounds},
            {"tighten_factor", tighten_factor},
            {"tighten_iter", tighten_iter},
            {"seed", seed}};
  j["rho0"] = rho0 ? json(*rho0) : json("heuristic");
  j["rho1"] = rho1 ? json(*rho1) : json("heuristic");
  return j;
}

RunConfig parse_config(std::istream& in, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

RunConfig parse_config(std::istream& in) { return parse_config(in, ""); }

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return parse_config(in, fs::path(path).parent_path().string());
}

void write_atomic(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

namespace {

struct Attempt {
  SelfConsistentBounds bounds;
  RefinementReport rep;
  IsolatingBlock block;
};

IntervalVector cube(int m, double r) { return IntervalVector(m, Interval::symmetric(r)); }

}  // namespace

PreparedRun prepare_run(const RunConfig& cfg) {
  PreparedRun pr;
  pr.params = cfg.params();
  const Parameters& p = pr.params;
  try {
    p.validate();
    if (cfg.initial_s < 2) throw std::invalid_argument("initial_s must be >= 2");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (cfg.head_radius < 0 || cfg.trial_radius < 0) throw std::invalid_argument("radii must be >= 0");
    if (cfg.tighten_factor <= 1) throw std::invalid_argument("tighten_factor must exceed 1");
  } catch (const std::exception& e) {
    throw StageError(kExitConfig, "config", e.what());
  }

  pr.block.max_depth = cfg.depth;
  pr.block.widen = cfg.widen;
  pr.block.annulus = cfg.annulus;
  pr.block.symmetric_remainder = cfg.symmetric_remainder;
  pr.refine.tail_rule = cfg.tail_rule;
  pr.refine.inflation = cfg.inflation;

  std::vector<double> cand;
  pr.label = cfg.label;
  try {
    if (cfg.candidate_source == "scout") {
      SweepOptions so;
      so.seed = cfg.seed;
      auto cs = sweep_branches({cfg.nu}, cfg.m, so);
      if (cfg.candidate_index < 0 || cfg.candidate_index >= static_cast<int>(cs.size()))
        throw StageError(kExitCandidate, "candidate", "scout found no candidate with the requested index");
      cand = cs[cfg.candidate_index].coeffs;
      if (pr.label.empty()) pr.label = cs[cfg.candidate_index].label;
    } else {
      cand = cfg.candidate;
      if (static_cast<int>(cand.size()) > cfg.m)
        throw StageError(kExitConfig, "config", "candidate has more than m coefficients");
      cand.resize(cfg.m, 0.0);
    }
    if (cfg.polish) cand = newton_equilibrium(cfg.nu, cfg.m, cand).coeffs;
  } catch (const NewtonError& e) {
    throw StageError(kExitCandidate, "candidate", e.what());
  }
  pr.candidate = cand;

  try {
    pr.frame = eigenframe(cand, p);
  } catch (const std::exception& e) {
    throw StageError(kExitFrame, "eigenframe", e.what());
  }

  if (cfg.head_radius > 0) {
    for (double c : cand)
      pr.W.push_back(Interval(rnd::sub_down(c, cfg.head_radius), rnd::add_up(c, cfg.head_radius)));
    double tr = cfg.trial_radius > 0 ? cfg.trial_radius : fitting_cube_radius(pr.frame, pr.W);
    if (!(tr > 0)) throw StageError(kExitFace, "block", "no trial box fits inside the head box");
    pr.Wt = cube(cfg.m, tr);
  } else {
    double tr = cfg.trial_radius > 0 ? cfg.trial_radius : 1e-3;
    pr.Wt = cube(cfg.m, tr);
    pr.W = block_in_modes(pr.frame, pr.Wt);
  }

  if (cfg.rho0 && cfg.rho1) {
    pr.seed = {*cfg.rho0, *cfg.rho1};
  } else {
    TrajectoryOptions topt;
    topt.seed = cfg.seed;
    try {
      pr.seed = heuristic_apriori(cfg.nu, cfg.m, topt);
    } catch (const std::exception& e) {
      throw StageError(kExitConfig, "seed", std::string("heuristic a priori bound: ") + e.what());
    }
    if (cfg.rho0) pr.seed.rho0 = *cfg.rho0;
    if (cfg.rho1) pr.seed.rho1 = *cfg.rho1;
  }

  try {
    pr.seeded = seed_bounds(pr.seed, p, pr.W);
    if (cfg.initial_s != 4) {
      // Match C/k^s to the seed tail at k = M+1.
      double C = pr.seeded.tail().C;
      double f = cfg.initial_s > 4 ? pow_up(p.M + 1.0, cfg.initial_s - 4)
                                   : rnd::div_up(1.0, pow_down(p.M + 1.0, 4 - cfg.initial_s));
      pr.seeded.set_tail(TailDecay(rnd::mul_up(C, f), cfg.initial_s));
    }
  } catch (const std::exception& e) {
    throw StageError(kExitConfig, "seed", e.what());
  }
  return pr;
}

RunResult run_certify(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  auto finish = [&](int code, const std::string& stage, const std::string& diag) {
    r.exit_code = code;
    r.stage = stage;
    r.diagnostic = diag;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };

  PreparedRun pr;
  try {
    pr = prepare_run(cfg);
  } catch (const StageError& e) {
    return finish(e.code, e.stage, e.what());
  }
  const Parameters& p = pr.params;
  const EigenFrame& frame = pr.frame;
  const BlockOptions& bopt = pr.block;
  const RefineOptions& ropt = pr.refine;
  IntervalVector Wt = pr.Wt;
  std::string label = pr.label;

  Attempt cur;
  try {
    auto [b, rep] = refine_loop(pr.seeded, cfg.max_iter, cfg.stop_tol, ropt);
    cur.bounds = b;
    cur.rep = rep;
  } catch (const std::exception& e) {
    return finish(kExitC4a, "refine", e.what());
  }
  r.refinement = cur.rep;
  C13Report c13 = verify_c1_c3(cur.bounds);
  if (!c13.ok()) return finish(kExitC1C2, "C1/C2", c13.c1 ? "C2: sum of squares not finite" : "C1: tail constant not positive");
  if (!cur.rep.c4a.verified) return finish(kExitC4a, "C4a", cur.rep.c4a.first_failure(p.m));

  try {
    cur.block = build_block(frame, cur.bounds, Wt, bopt);
  } catch (const std::exception& e) {
    return finish(kExitFace, "block", e.what());
  }
  verify_block(cur.block, cur.bounds, bopt);
  if (!cur.block.verified) {
    std::ostringstream os;
    os << "face transversality failed";
    for (const auto& f : cur.block.faces)
      if (!(f.margin > 0)) {
        os << ": slot " << f.slot << " side " << f.side << " margin " << f.margin;
        break;
      }
    return finish(kExitFace, "face", os.str());
  }

  for (int round = 0; round < cfg.tighten_rounds; ++round) {
    IntervalVector Wt2(cfg.m);
    for (int i = 0; i < cfg.m; ++i) {
      const Interval& N = cur.block.slot_bounds[i];
      double c = N.mid();
      double h = rnd::mul_up(std::max(N.hi() - c, c - N.lo()), cfg.tighten_factor);
      Wt2[i] = Interval(rnd::sub_down(c, h), rnd::add_up(c, h));
    }
    SelfConsistentBounds bb = cur.bounds;
    bb.set_head(block_in_modes(frame, Wt2));
    try {
      auto [b2, rep2] = refine_loop(bb, cfg.tighten_iter, cfg.stop_tol, ropt);
      if (!rep2.c4a.verified || !verify_c1_c3(b2).ok()) break;
      IsolatingBlock blk2 = build_block(frame, b2, Wt2, bopt);
      verify_block(blk2, b2, bopt);
      if (!blk2.verified) break;
      cur = {b2, rep2, blk2};
      r.refinement = rep2;
    } catch (const std::exception&) {
      break;
    }
  }

  ConleyData cd;
  try {
    cd = conley_index(cur.block, cur.rep.c4a);
  } catch (const std::exception& e) {
    return finish(kExitIndex, "index", e.what());
  }

  ProofCertificate cert = certify(frame, cur.bounds, cur.block, cd, cur.rep.c4a, bopt);
  cert.run_options = cfg.to_json();
  cert.label = label;
  if (!cfg.output.empty()) {
    try {
      write_atomic(cfg.output, to_json(cert).dump(1) + "\n");
    } catch (const std::exception& e) {
      return finish(kExitInternal, "output", e.what());
    }
  }
  r.certificate = cert;
  return finish(kExitOk, "done", "proof complete");
}

int worker_count_from_env() {
  if (const char* s = std::getenv("KSPROOF_WORKERS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> run_sweep(const std::vector<double>& nu_list, const RunConfig& base,
                                const std::string& out_dir, int workers) {
  std::vector<RunConfig> jobs;
  std::vector<SweepRow> rows;
  for (size_t inu = 0; inu < nu_list.size(); ++inu) {
    double nu = nu_list[inu];
    SweepOptions so;
    so.seed = base.seed;
    auto cands = sweep_branches({nu}, base.m, so);
    for (size_t i = 0; i < cands.size(); ++i) {
      RunConfig c = base;
      c.nu = nu;
      c.candidate_source = "inline";
      c.candidate = cands[i].coeffs;
      c.label = cands[i].label;
      if (!out_dir.empty()) {
        std::ostringstream name;
        name << "nu" << std::setprecision(6) << nu << "_" << i << ".json";
        c.output = (fs::path(out_dir) / name.str()).string();
      } else {
        c.output.clear();
      }
      jobs.push_back(c);
      SweepRow row;
      row.nu = nu;
      row.label = c.label;
      row.certificate_path = c.output;
      rows.push_back(row);
    }
  }
  if (workers <= 0) workers = worker_count_from_env();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      RunResult res;
      try {
        res = run_certify(jobs[i]);
      } catch (const std::exception& e) {
        res.exit_code = kExitInternal;
        res.diagnostic = e.what();
      }
      rows[i].exit_code = res.exit_code;
      rows[i].diagnostic = res.diagnostic;
      if (res.certificate) {
        rows[i].q = res.certificate->conley.q;
        rows[i].l2 = res.certificate->l2_error;
        rows[i].c0 = res.certificate->c0_error;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

void write_sweep_table(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "nu,label,status,q,l2_error,c0_error,certificate,diagnostic\n";
  for (const auto& r : rows) {
    os << std::setprecision(6) << r.nu << "," << r.label << ","
       << (r.exit_code == 0 ? "certified" : "failed(" + std::to_string(r.exit_code) + ")") << "," << r.q
       << "," << std::setprecision(6) << r.l2 << "," << r.c0 << "," << r.certificate_path << ",\""
       << r.diagnostic << "\"\n";
  }
}

void emit_profile(const ProofCertificate& cert, std::ostream& os, int n) {
  const auto& a = cert.block.frame.candidate;
  double band = cert.c0_error;
  os << "x,u,lower,upper\n" << std::setprecision(17);
  for (int i = 0; i < n; ++i) {
    double x = n == 1 ? 0.0 : -std::numbers::pi + 2 * std::numbers::pi * i / (n - 1);
    double u = 0;
    for (size_t k = 0; k < a.size(); ++k) u += a[k] * std::sin((k + 1.0) * x);
    os << x << "," << u << "," << u - band << "," << u + band << "\n";
  }
}

}  // namespace ksproof
