#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ksproof/bounds.hpp"
#include "ksproof/spectral.hpp"

namespace fixture {

using namespace ksproof;

// nu = 0.75, m = 2, M = 10 worked example. rho0 = rho1 reproduce the seed
// constant 8.152802 of the initial table.
inline constexpr double kRho = 0.9017340824130694;
inline const std::vector<double> kFixedPoint = {0.7071067811865476, -0.125};

inline Parameters s4_params() { return Parameters(0.75, 2, 10); }

inline IntervalVector s4_head() {
  IntervalVector W;
  for (double c : kFixedPoint) W.push_back(Interval(c - 0.1, c + 0.1));
  return W;
}

inline SelfConsistentBounds s4_seeded() { return seed_bounds({kRho, kRho}, s4_params(), s4_head()); }

inline SelfConsistentBounds s4_refined(int iters = 3) {
  SelfConsistentBounds b = s4_seeded();
  for (int i = 0; i < iters; ++i) b = refine_once(b);
  return b;
}

// Independent brute-force evaluation on an explicit finite sequence a[1..N]
// (a[0] unused), long double accumulation.
inline long double brute_fs(const std::vector<double>& a, int k) {
  long double s = 0;
  for (int n = 1; n < k; ++n) s += static_cast<long double>(a[n]) * a[k - n];
  return s;
}

inline long double brute_is(const std::vector<double>& a, int k) {
  long double s = 0;
  int N = static_cast<int>(a.size()) - 1;
  for (int n = 1; n + k <= N; ++n) s += static_cast<long double>(a[n]) * a[n + k];
  return s;
}

inline long double brute_abs_is(const std::vector<double>& a, int k) {
  long double s = 0;
  int N = static_cast<int>(a.size()) - 1;
  for (int n = 1; n + k <= N; ++n) s += std::fabs(static_cast<long double>(a[n]) * a[n + k]);
  return s;
}

// Bound on |sum_{n >= N+1-k} a_n a_{n+k}| dropped by truncation at N, when
// |a_n| <= C/n^s beyond the explicit range.
inline double is_remainder(double C, int s, int N, int k) {
  int n0 = std::max(1, N + 1 - k);
  return 2 * C * C / ((2.0 * s - 1) * std::pow(static_cast<double>(n0), 2 * s - 1));
}

inline double draw(std::mt19937_64& g, const Interval& x) {
  std::uniform_int_distribution<int> pick(0, 5);
  int c = pick(g);
  if (c == 0) return x.lo();
  if (c == 1) return x.hi();
  std::uniform_real_distribution<double> u(x.lo(), x.hi());
  return x.lo() == x.hi() ? x.lo() : u(g);
}

// Member sequence of the bound set up to N.
inline std::vector<double> draw_sequence(std::mt19937_64& g, const SelfConsistentBounds& b, int N) {
  std::vector<double> a(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) a[n] = draw(g, b.mode(n));
  return a;
}

inline long double brute_derivative(const std::vector<double>& a, double nu, int k) {
  long double kk = k;
  return kk * kk * (1 - nu * kk * kk) * a[k] - kk * brute_fs(a, k) + 2 * kk * brute_is(a, k);
}

}  // namespace fixture
