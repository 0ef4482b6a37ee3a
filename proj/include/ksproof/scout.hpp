#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksproof/bounds.hpp"

namespace ksproof {

// Non-rigorous exploration of the m-mode Galerkin system.

struct Candidate {
  double nu = 0;
  std::vector<double> coeffs;
  double residual = 0;
  std::vector<std::complex<double>> spectrum;
  int unstable_dim = 0;
  std::string label;
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, std::vector<double> last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  std::vector<double> last_iterate;
};

double galerkin_residual(const std::vector<double>& a, double nu);

Candidate newton_equilibrium(double nu, int m, const std::vector<double>& start, int max_iter = 80,
                             double tol = 1e-12);

// Spatial translation by pi: a_k -> (-1)^k a_k maps equilibria to equilibria.
std::vector<double> conjugate(const std::vector<double>& a);

std::string branch_label(const std::vector<double>& a, int unstable_dim);

struct SweepOptions {
  int restarts = 64;
  std::uint64_t seed = 20240601;
  bool keep_trivial = false;
  double dedup_tol = 1e-7;
};

// Per nu: Newton from random starts with per-mode amplitude rho1/k,
// deduplicated, closed under the conjugacy, sorted deterministically.
std::vector<Candidate> sweep_branches(const std::vector<double>& nu_list, int m,
                                      const SweepOptions& opt = {});

struct TrajectoryOptions {
  double transient = 40;
  double window = 20;
  double safety = 1.5;
  double floor = 1e-3;
  std::uint64_t seed = 7;
  bool zero_start = false;
  int max_modes = 20;  // the sup norms are carried by the low modes
};

// Sup of the coefficient norms sqrt(sum a_k^2) and sqrt(sum k^2 a_k^2) along a
// trajectory after a transient, times the safety factor.
AprioriSeed heuristic_apriori(double nu, int m, const TrajectoryOptions& opt = {});

void write_candidates_csv(std::ostream& os, const std::vector<Candidate>& cands);

}  // namespace ksproof
