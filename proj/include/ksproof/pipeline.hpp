#pragma once

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "ksproof/certificate.hpp"
#include "ksproof/scout.hpp"

namespace ksproof {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitC1C2 = 3,
  kExitC4a = 4,
  kExitFace = 5,
  kExitIndex = 6,
  kExitCandidate = 7,
  kExitFrame = 8,
  kExitCheck = 9,
};

const char* exit_code_help();

struct RunConfig {
  double nu = 0;
  int m = 0;
  int M = 0;
  int initial_s = 4;
  std::optional<double> rho0, rho1;
  int max_iter = 3;
  double stop_tol = 1e-3;
  TailRule tail_rule = TailRule::Classic;
  double inflation = 1e-6;
  int depth = 12;
  double widen = 1e-3;
  double annulus = 1e-3;
  bool symmetric_remainder = true;
  std::string candidate_source = "inline";  // inline | scout
  std::vector<double> candidate;
  int candidate_index = 0;  // which scout candidate
  bool polish = true;
  double head_radius = 0;   // W = candidate +- head_radius
  double trial_radius = 0;  // W~ = [-r, r]^m
  int tighten_rounds = 0;
  double tighten_factor = 2;
  int tighten_iter = 3;
  unsigned long long seed = 20240601;
  std::string output;
  std::string label;
  std::string base_dir;  // for relative candidate_file paths

  // Keys as in the config file; throws std::invalid_argument.
  void set(const std::string& key, const std::string& value);
  Parameters params() const { return Parameters(nu, m, M); }
  nlohmann::json to_json() const;
};

// key = value lines, '#' comments, optional [section] headers ignored.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(std::istream& in, const std::string& base_dir);
RunConfig load_config(const std::string& path);

struct RunResult {
  int exit_code = kExitInternal;
  std::string stage;
  std::string diagnostic;
  std::optional<ProofCertificate> certificate;
  RefinementReport refinement;
  double seconds = 0;
};

class StageError : public std::runtime_error {
 public:
  StageError(int code, std::string stage, const std::string& what)
      : std::runtime_error(what), code(code), stage(std::move(stage)) {}
  int code;
  std::string stage;
};

// Everything up to (not including) refinement: validated config, polished
// candidate, eigenframe, head box W, trial box W~ and seeded bounds.
struct PreparedRun {
  Parameters params;
  std::vector<double> candidate;
  std::string label;
  EigenFrame frame;
  IntervalVector W, Wt;
  AprioriSeed seed;
  SelfConsistentBounds seeded;
  RefineOptions refine;
  BlockOptions block;
};
// Throws StageError.
PreparedRun prepare_run(const RunConfig& cfg);

RunResult run_certify(const RunConfig& cfg);
// Writes to path via a temporary file and rename.
void write_atomic(const std::string& path, const std::string& text);

struct SweepRow {
  double nu = 0;
  std::string label;
  int exit_code = 0;
  std::string diagnostic;
  int q = -1;
  double l2 = 0, c0 = 0;
  std::string certificate_path;
};

// One certify run per (nu, scout candidate). Worker count from
// KSPROOF_WORKERS, default hardware concurrency.
std::vector<SweepRow> run_sweep(const std::vector<double>& nu_list, const RunConfig& base,
                                const std::string& out_dir = "", int workers = 0);
void write_sweep_table(std::ostream& os, const std::vector<SweepRow>& rows);
int worker_count_from_env();

// (x, u(x), lower, upper) on n uniform points of [-pi, pi].
void emit_profile(const ProofCertificate& cert, std::ostream& os, int n = 257);

}  // namespace ksproof
