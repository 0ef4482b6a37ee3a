#pragma once

#include <vector>

#include "ksproof/interval.hpp"

namespace ksproof {

// Odd periodic Kuramoto-Sivashinsky in sine coefficients:
//   da_k/dt = k^2 (1 - nu k^2) a_k - k FS(k) + 2k IS(k)
//   FS(k) = sum_{n=1}^{k-1} a_n a_{k-n},  IS(k) = sum_{n>=1} a_n a_{n+k}.
//
// m is the Galerkin dimension, modes m+1..M carry explicit intervals and
// modes beyond M follow the power law |a_k| <= C / k^s.
struct Parameters {
  double nu = 0;
  int m = 0;
  int M = 0;

  Parameters() = default;
  Parameters(double nu_, int m_, int M_) : nu(nu_), m(m_), M(M_) {}

  // Throws std::invalid_argument naming the violated condition.
  void validate() const;
  // The proof is carried out for every viscosity within one ulp of nu, so a
  // decimal value that is not representable is still covered.
  Interval nu_enclosure() const;
};

struct TailDecay {
  double C = 0;
  int s = 2;

  TailDecay() = default;
  TailDecay(double C_, int s_);
};

class SelfConsistentBounds {
 public:
  SelfConsistentBounds() = default;
  // head has m entries, mid has M - m entries.
  SelfConsistentBounds(const Parameters& p, IntervalVector head, IntervalVector mid,
                       const TailDecay& tail);

  const Parameters& params() const { return p_; }
  const TailDecay& tail() const { return tail_; }
  void set_tail(const TailDecay& t);

  int m() const { return p_.m; }
  int M() const { return p_.M; }

  // Mode k >= 1. For k > M this is the tail interval [-C/k^s, C/k^s].
  Interval mode(int k) const;
  void set_mode(int k, const Interval& x);
  // Upper bound of |a_k|.
  double mode_abs(int k) const;
  // Upper bound of C / k^s.
  double tail_abs(int k) const;

  IntervalVector head() const;
  IntervalVector mid() const;
  void set_head(const IntervalVector& head);

 private:
  Parameters p_;
  IntervalVector a_;  // a_[k-1], k = 1..M
  TailDecay tail_;
};

Interval linear_coeff(int k, const Interval& nu);
Interval linear_coeff(int k, double nu);

// Upper bound of sum_{n>M} 1/n^s via 1/((s-1) M^{s-1}).
double tail_sum_up(int M, int s);

Interval finite_sum_bound(int k, const SelfConsistentBounds& b);
Interval infinite_sum_bound(int k, const SelfConsistentBounds& b);
// 2k sum_{n=m-k+1}^inf a_n a_{n+k}, the part of mode k (k <= m) dropped by the
// Galerkin projection.
Interval projection_error(int k, const SelfConsistentBounds& b);
Interval mode_derivative_bound(int k, const SelfConsistentBounds& b);
// Same with a_k replaced by the point value x (x must lie in the mode's
// bound for the result to be meaningful; k <= M).
Interval mode_derivative_pinned(int k, const SelfConsistentBounds& b, double x);

// Dissipativity constant driving the tail update of the refinement:
//   D_s = max(D1, D2) with |-FS(k) + 2 IS(k)| <= D_s / k^{s-1} for k > M.
// D2 is the k-free closed form (the k^{1-s} prefactor in the condensed
// statement is dropped, see README).
double dissipativity_constant(const SelfConsistentBounds& b);

// Sharper uniform constant with the same guarantee, built from per-term
// estimates (exact loop over M < k <= 2M, per-term bounds at k = 2M+1 where
// every scaled term is maximal). Used for verification of the tail.
double tail_dissipativity_bound(const SelfConsistentBounds& b);

// Sum over k <= M of upper bounds for |a_k|.
double sum_abs_modes(const SelfConsistentBounds& b);

// Galerkin field of the first m modes at a point (interval evaluation).
IntervalVector galerkin_field(const IntervalVector& a, const Interval& nu);
// Float versions for non-rigorous numerics.
std::vector<double> galerkin_field(const std::vector<double>& a, double nu);
// Row-major m x m Jacobian.
std::vector<double> galerkin_jacobian(const std::vector<double>& a, double nu);
std::vector<Interval> galerkin_jacobian(const IntervalVector& a, const Interval& nu);
// Quadratic part Q(d, d) of the Galerkin field.
IntervalVector galerkin_quadratic(const IntervalVector& d);

}  // namespace ksproof
