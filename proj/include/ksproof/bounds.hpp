#pragma once

#include <string>
#include <vector>

#include "ksproof/spectral.hpp"

namespace ksproof {

struct AprioriSeed {
  double rho0 = 0;  // bound on |u|
  double rho1 = 0;  // bound on ||u||
};

// Which constant drives the tail update C_{s+2} = D / (nu - (M+1)^{-2}).
enum class TailRule { Classic, Sharp };

struct RefineOptions {
  TailRule tail_rule = TailRule::Classic;
  // Relative outward widening of every refined mid endpoint. Keeps the C4a
  // margins of a refinement fixed point strictly positive.
  double inflation = 1e-6;
};

struct C4aReport {
  // margin_upper[k-m-1] = -sup da_k/dt with a_k = a_k^+, margin_lower = inf
  // da_k/dt with a_k = a_k^-. Positive means verified.
  std::vector<double> margin_upper;
  std::vector<double> margin_lower;
  std::vector<int> dir;  // -1, 0 or +1 per mode m < k <= M
  double tail_D = 0;       // uniform constant used for k > M
  double tail_margin = 0;  // lower bound of C (nu (M+1)^2 - 1) - D
  bool verified = false;

  double min_margin() const;
  int tail_dir() const { return tail_margin > 0 ? -1 : 0; }
  std::string first_failure(int m) const;
};

struct RefinementSnapshot {
  IntervalVector mid;
  TailDecay tail;
  double D = 0;  // constant that produced this tail
};

struct RefinementReport {
  int iterations = 0;
  std::vector<RefinementSnapshot> snapshots;
  bool converged = false;
  double last_change = 0;
  C4aReport c4a;
};

// Candidate-free seed of the mid and tail bounds; head supplied by caller.
// Throws std::invalid_argument if (m+1)^4 > 1/nu^2 fails.
SelfConsistentBounds seed_bounds(const AprioriSeed& seed, const Parameters& p,
                                 const IntervalVector& head);
// The seed constant 4 sqrt(2 pi rho0 rho1^3), rounded up.
double seed_constant(const AprioriSeed& seed);

SelfConsistentBounds refine_once(const SelfConsistentBounds& b, const RefineOptions& opt = {},
                                 double* D_used = nullptr);

C4aReport verify_c4a(const SelfConsistentBounds& b);

struct C13Report {
  bool c1 = false;
  bool c2 = false;
  bool c3 = true;  // structural: polynomial field, continuous on the bound set
  double sum_sq_bound = 0;  // upper bound of sum_k max|a_k^±|^2
  bool ok() const { return c1 && c2 && c3; }
};
C13Report verify_c1_c3(const SelfConsistentBounds& b);

std::pair<SelfConsistentBounds, RefinementReport> refine_loop(const SelfConsistentBounds& b,
                                                              int max_iter, double stop_tol,
                                                              const RefineOptions& opt = {});

// Signed tail slack C (nu (M+1)^2 - 1) - D, rounded down.
double tail_c4a_margin(const TailDecay& t, const Parameters& p, double D);

}  // namespace ksproof
