#include "ksproof/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ksproof {

using rnd::add_up;
using rnd::div_up;
using rnd::mul_up;

void Parameters::validate() const {
  if (!(nu > 0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be positive");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (M < m) throw std::invalid_argument("M must be >= m");
  // nu m^2 > 1 checked in interval arithmetic.
  Interval num = nu_enclosure() * Interval(static_cast<double>(m) * m);
  if (!(num.lo() > 1.0))
    throw std::invalid_argument("nu*m^2 > 1 violated: modes k >= m are not linearly stable");
}

Interval Parameters::nu_enclosure() const { return Interval(rnd::next_down(nu), rnd::next_up(nu)); }

TailDecay::TailDecay(double C_, int s_) : C(C_), s(s_) {
  if (!(C_ >= 0) || !std::isfinite(C_)) throw std::invalid_argument("tail constant must be finite and >= 0");
  if (s_ <= 1) throw std::invalid_argument("tail exponent must be > 1");
}

SelfConsistentBounds::SelfConsistentBounds(const Parameters& p, IntervalVector head,
                                           IntervalVector mid, const TailDecay& tail)
    : p_(p), tail_(tail) {
  if (p.m < 1 || p.M < p.m) throw std::invalid_argument("bounds need 1 <= m <= M");
  if (static_cast<int>(head.size()) != p.m) throw std::invalid_argument("head size must equal m");
  if (static_cast<int>(mid.size()) != p.M - p.m) throw std::invalid_argument("mid size must equal M - m");
  a_ = std::move(head);
  a_.insert(a_.end(), mid.begin(), mid.end());
}

void SelfConsistentBounds::set_tail(const TailDecay& t) { tail_ = t; }

Interval SelfConsistentBounds::mode(int k) const {
  if (k < 1) throw std::out_of_range("mode index must be >= 1");
  if (k <= p_.M) return a_[k - 1];
  return Interval::symmetric(tail_abs(k));
}

void SelfConsistentBounds::set_mode(int k, const Interval& x) {
  if (k < 1 || k > p_.M) throw std::out_of_range("set_mode index outside 1..M");
  a_[k - 1] = x;
}

double SelfConsistentBounds::mode_abs(int k) const {
  if (k <= p_.M) return abs_max(a_.at(k - 1));
  return tail_abs(k);
}

double SelfConsistentBounds::tail_abs(int k) const {
  if (tail_.C == 0) return 0.0;
  return div_up(tail_.C, pow_down(static_cast<double>(k), tail_.s));
}

IntervalVector SelfConsistentBounds::head() const {
  return IntervalVector(a_.begin(), a_.begin() + p_.m);
}

IntervalVector SelfConsistentBounds::mid() const {
  return IntervalVector(a_.begin() + p_.m, a_.end());
}

void SelfConsistentBounds::set_head(const IntervalVector& head) {
  if (static_cast<int>(head.size()) != p_.m) throw std::invalid_argument("head size must equal m");
  std::copy(head.begin(), head.end(), a_.begin());
}

Interval linear_coeff(int k, const Interval& nu) {
  double k2 = static_cast<double>(k) * k;
  return Interval(k2) * (Interval(1.0) - nu * Interval(k2));
}

Interval linear_coeff(int k, double nu) { return linear_coeff(k, Interval(nu)); }

double tail_sum_up(int M, int s) {
  return div_up(1.0, rnd::mul_down(static_cast<double>(s - 1), pow_down(static_cast<double>(M), s - 1)));
}

namespace {

// upper bound of x / n^s for x >= 0
double over_pow(double x, long long n, int s) {
  if (x == 0) return 0.0;
  return div_up(x, pow_down(static_cast<double>(n), s));
}

// 2 sum_{n=lo}^{hi} a_n a_{k-n} + e(k) a_{k/2}^2 for modes inside 1..M
Interval paired_products(int k, int lo, const SelfConsistentBounds& b) {
  Interval acc(0.0);
  int hi = (k - 1) / 2;
  for (int n = std::max(lo, 1); n <= hi; ++n) acc += Interval(2.0) * (b.mode(n) * b.mode(k - n));
  if (k % 2 == 0) acc += sqr(b.mode(k / 2));
  return acc;
}

// C * sum_{n=lo}^{hi} |a_n| / (k + sign*n)^s, rounded up
double weighted_abs_sum(const SelfConsistentBounds& b, int lo, int hi, int k, int sign) {
  double acc = 0;
  for (int n = std::max(lo, 1); n <= hi; ++n)
    acc = add_up(acc, over_pow(b.mode_abs(n), static_cast<long long>(k) + sign * n, b.tail().s));
  return mul_up(b.tail().C, acc);
}

double pure_tail_is(int k, const SelfConsistentBounds& b) {
  const auto& t = b.tail();
  if (t.C == 0) return 0.0;
  double c2 = mul_up(t.C, t.C);
  double d = over_pow(c2, static_cast<long long>(k) + b.M() + 1, t.s);
  return mul_up(d, tail_sum_up(b.M(), t.s));
}

// Per-term bound of |FS(k)| for k > 2M.
double fs_far_bound(int k, const SelfConsistentBounds& b) {
  const auto& t = b.tail();
  int M = b.M(), s = t.s;
  if (t.C == 0) return 0.0;
  double t1 = mul_up(2.0, weighted_abs_sum(b, 1, M, k, -1));
  double c2 = mul_up(t.C, t.C);
  double t2 = mul_up(mul_up(2.0, c2), pow_up(2.0, s));
  t2 = over_pow(t2, k, s);
  t2 = mul_up(t2, tail_sum_up(M, s));
  double t3 = 0;
  if (k % 2 == 0) t3 = over_pow(mul_up(c2, pow_up(4.0, s)), k, 2 * s);
  return add_up(add_up(t1, t2), t3);
}

}  // namespace

Interval finite_sum_bound(int k, const SelfConsistentBounds& b) {
  if (k <= 1) return Interval(0.0);
  int M = b.M();
  if (k <= 2 * M) {
    Interval acc = paired_products(k, k - M, b);
    if (k > M) acc += Interval::symmetric(mul_up(2.0, weighted_abs_sum(b, 1, k - M - 1, k, -1)));
    return acc;
  }
  return Interval::symmetric(fs_far_bound(k, b));
}

Interval infinite_sum_bound(int k, const SelfConsistentBounds& b) {
  int M = b.M();
  Interval acc(0.0);
  for (int n = 1; n <= M - k; ++n) acc += b.mode(n) * b.mode(n + k);
  double cross = weighted_abs_sum(b, M - k + 1, M, k, +1);
  acc += Interval::symmetric(add_up(cross, pure_tail_is(k, b)));
  return acc;
}

Interval projection_error(int k, const SelfConsistentBounds& b) {
  int m = b.m(), M = b.M();
  if (k < 1 || k > m) throw std::out_of_range("projection_error needs 1 <= k <= m");
  Interval acc(0.0);
  for (int n = m - k + 1; n <= M - k; ++n) acc += b.mode(n) * b.mode(n + k);
  double cross = weighted_abs_sum(b, M - k + 1, M, k, +1);
  acc += Interval::symmetric(add_up(cross, pure_tail_is(k, b)));
  return Interval(2.0 * k) * acc;
}

Interval mode_derivative_bound(int k, const SelfConsistentBounds& b) {
  Interval kk(static_cast<double>(k));
  Interval lin = linear_coeff(k, b.params().nu_enclosure()) * b.mode(k);
  return lin - kk * finite_sum_bound(k, b) + Interval(2.0) * kk * infinite_sum_bound(k, b);
}

Interval mode_derivative_pinned(int k, const SelfConsistentBounds& b, double x) {
  SelfConsistentBounds c = b;
  c.set_mode(k, Interval(x));
  return mode_derivative_bound(k, c);
}

double sum_abs_modes(const SelfConsistentBounds& b) {
  double s = 0;
  for (int n = 1; n <= b.M(); ++n) s = add_up(s, b.mode_abs(n));
  return s;
}

double dissipativity_constant(const SelfConsistentBounds& b) {
  const auto& t = b.tail();
  int M = b.M(), s = t.s;
  double S = sum_abs_modes(b);
  double C = t.C;
  // 2C/(M+1) * (2C/((M+1)^{s-1}(s-1)) + S)
  double inner = div_up(mul_up(2.0, C), rnd::mul_down(pow_down(M + 1.0, s - 1), s - 1.0));
  double P = div_up(mul_up(mul_up(2.0, C), add_up(inner, S)), M + 1.0);

  double d1 = 0;
  for (int k = M + 1; k <= 2 * M; ++k)
    d1 = std::max(d1, mul_up(pow_up(k, s - 1), abs_max(finite_sum_bound(k, b))));
  d1 = add_up(P, d1);

  double two_m1 = 2.0 * M + 1.0;
  double a = div_up(mul_up(pow_up(2.0, s + 1), S), rnd::next_down(two_m1));
  double bterm = div_up(mul_up(C, pow_up(4.0, s)), pow_down(two_m1, s + 1));
  double cterm = div_up(mul_up(C, pow_up(2.0, s)), rnd::mul_down(s - 1.0, pow_down(M, s)));
  double d2 = add_up(P, mul_up(C, add_up(add_up(a, bterm), cterm)));
  return std::max(d1, d2);
}

double tail_dissipativity_bound(const SelfConsistentBounds& b) {
  const auto& t = b.tail();
  int M = b.M(), s = t.s;
  double C = t.C;
  // k^{s-1} * 2 IS(k) <= 2C (sum |a_n|/(M+1+n) + C/((2M+2)(s-1)M^{s-1}))
  double w = 0;
  for (int n = 1; n <= M; ++n) w = add_up(w, div_up(b.mode_abs(n), M + 1.0 + n));
  double pt = div_up(mul_up(C, tail_sum_up(M, s)), 2.0 * M + 2.0);
  double P = mul_up(mul_up(2.0, C), add_up(w, pt));

  double fs = 0;
  for (int k = M + 1; k <= 2 * M + 1; ++k)
    fs = std::max(fs, mul_up(pow_up(k, s - 1), abs_max(finite_sum_bound(k, b))));
  return add_up(P, fs);
}

IntervalVector galerkin_quadratic(const IntervalVector& d) {
  int m = static_cast<int>(d.size());
  IntervalVector q(m);
  for (int k = 1; k <= m; ++k) {
    Interval fs(0.0);
    for (int n = 1; n <= (k - 1) / 2; ++n) fs += Interval(2.0) * (d[n - 1] * d[k - n - 1]);
    if (k % 2 == 0) fs += sqr(d[k / 2 - 1]);
    Interval is(0.0);
    for (int n = 1; n <= m - k; ++n) is += d[n - 1] * d[n + k - 1];
    Interval kk(static_cast<double>(k));
    q[k - 1] = Interval(2.0) * kk * is - kk * fs;
  }
  return q;
}

IntervalVector galerkin_field(const IntervalVector& a, const Interval& nu) {
  IntervalVector f = galerkin_quadratic(a);
  for (size_t i = 0; i < a.size(); ++i)
    f[i] = linear_coeff(static_cast<int>(i + 1), nu) * a[i] + f[i];
  return f;
}

std::vector<double> galerkin_field(const std::vector<double>& a, double nu) {
  int m = static_cast<int>(a.size());
  std::vector<double> f(m);
  for (int k = 1; k <= m; ++k) {
    double fs = 0, is = 0;
    for (int n = 1; n <= k - 1; ++n) fs += a[n - 1] * a[k - n - 1];
    for (int n = 1; n <= m - k; ++n) is += a[n - 1] * a[n + k - 1];
    double k2 = static_cast<double>(k) * k;
    f[k - 1] = k2 * (1 - nu * k2) * a[k - 1] - k * fs + 2.0 * k * is;
  }
  return f;
}

std::vector<double> galerkin_jacobian(const std::vector<double>& a, double nu) {
  int m = static_cast<int>(a.size());
  std::vector<double> J(static_cast<size_t>(m) * m, 0.0);
  for (int k = 1; k <= m; ++k) {
    double k2 = static_cast<double>(k) * k;
    for (int j = 1; j <= m; ++j) {
      double v = 0;
      if (j == k) v += k2 * (1 - nu * k2);
      if (j < k) v -= 2.0 * k * a[k - j - 1];
      if (j + k <= m) v += 2.0 * k * a[j + k - 1];
      if (j > k) v += 2.0 * k * a[j - k - 1];
      J[(k - 1) * m + (j - 1)] = v;
    }
  }
  return J;
}

std::vector<Interval> galerkin_jacobian(const IntervalVector& a, const Interval& nu) {
  int m = static_cast<int>(a.size());
  std::vector<Interval> J(static_cast<size_t>(m) * m, Interval(0.0));
  for (int k = 1; k <= m; ++k) {
    Interval k2k(2.0 * k);
    for (int j = 1; j <= m; ++j) {
      Interval v(0.0);
      if (j == k) v += linear_coeff(k, nu);
      if (j < k) v -= k2k * a[k - j - 1];
      if (j + k <= m) v += k2k * a[j + k - 1];
      if (j > k) v += k2k * a[j - k - 1];
      J[(k - 1) * m + (j - 1)] = v;
    }
  }
  return J;
}

}  // namespace ksproof
