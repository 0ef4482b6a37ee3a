#include "ksproof/interval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace ksproof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude fma residuals may be inexact (subnormal range), so the
// rounded result is nudged unconditionally.
constexpr double kTiny = 1e-290;

}  // namespace

namespace rnd {

double next_down(double a) { return std::nextafter(a, -kInf); }
double next_up(double a) { return std::nextafter(a, kInf); }

double add_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s == kInf ? std::numeric_limits<double>::max() : s;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return e < 0 ? next_down(s) : s;
}

double add_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s == -kInf ? std::numeric_limits<double>::lowest() : s;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return e > 0 ? next_up(s) : s;
}

double sub_down(double a, double b) { return add_down(a, -b); }
double sub_up(double a, double b) { return add_up(a, -b); }

double mul_down(double a, double b) {
  double p = a * b;
  if (!std::isfinite(p)) return p == kInf ? std::numeric_limits<double>::max() : p;
  if (a == 0.0 || b == 0.0) return 0.0;
  if (std::fabs(p) < kTiny) return next_down(p);
  double e = std::fma(a, b, -p);
  return e < 0 ? next_down(p) : p;
}

double mul_up(double a, double b) {
  double p = a * b;
  if (!std::isfinite(p)) return p == -kInf ? std::numeric_limits<double>::lowest() : p;
  if (a == 0.0 || b == 0.0) return 0.0;
  if (std::fabs(p) < kTiny) return next_up(p);
  double e = std::fma(a, b, -p);
  return e > 0 ? next_up(p) : p;
}

// sign(a/b - q) = sign(a - q*b) * sign(b)
double div_down(double a, double b) {
  double q = a / b;
  if (!std::isfinite(q)) return q == kInf ? std::numeric_limits<double>::max() : q;
  if (a == 0.0) return 0.0;
  if (std::fabs(q) < kTiny || std::fabs(a) < kTiny) return next_down(q);
  double r = std::fma(-q, b, a);
  if (r == 0) return q;
  return ((r < 0) != (b < 0)) ? next_down(q) : q;
}

double div_up(double a, double b) {
  double q = a / b;
  if (!std::isfinite(q)) return q == -kInf ? std::numeric_limits<double>::lowest() : q;
  if (a == 0.0) return 0.0;
  if (std::fabs(q) < kTiny || std::fabs(a) < kTiny) return next_up(q);
  double r = std::fma(-q, b, a);
  if (r == 0) return q;
  return ((r > 0) != (b < 0)) ? next_up(q) : q;
}

double sqrt_down(double a) {
  double r = std::sqrt(a);
  if (r == 0 || !std::isfinite(r)) return r;
  if (a < kTiny) return next_down(r);
  double e = std::fma(-r, r, a);
  return e < 0 ? next_down(r) : r;
}

double sqrt_up(double a) {
  double r = std::sqrt(a);
  if (r == 0 || !std::isfinite(r)) return r;
  if (a < kTiny) return next_up(r);
  double e = std::fma(-r, r, a);
  return e > 0 ? next_up(r) : r;
}

}  // namespace rnd

Interval::Interval(double x) : lo_(x), hi_(x) {
  if (std::isnan(x)) throw IntervalError("NaN interval endpoint");
}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw IntervalError("NaN interval endpoint");
  if (lo > hi) throw IntervalError("interval with lo > hi");
}

double Interval::mid() const {
  if (lo_ == -hi_) return 0.0;
  return lo_ + 0.5 * (hi_ - lo_);
}

double Interval::rad() const { return rnd::mul_up(0.5, rnd::sub_up(hi_, lo_)); }

Interval Interval::symmetric(double r) {
  r = std::fabs(r);
  return Interval(-r, r);
}

Interval Interval::from_int(long long k) {
  double d = static_cast<double>(k);
  if (static_cast<long long>(d) == k) return Interval(d);
  return Interval(rnd::next_down(d), rnd::next_up(d));
}

Interval& Interval::operator+=(const Interval& o) { return *this = *this + o; }
Interval& Interval::operator-=(const Interval& o) { return *this = *this - o; }
Interval& Interval::operator*=(const Interval& o) { return *this = *this * o; }
Interval& Interval::operator/=(const Interval& o) { return *this = *this / o; }

Interval operator+(const Interval& a, const Interval& b) {
  return Interval(rnd::add_down(a.lo(), b.lo()), rnd::add_up(a.hi(), b.hi()));
}

Interval operator-(const Interval& a, const Interval& b) {
  return Interval(rnd::sub_down(a.lo(), b.hi()), rnd::sub_up(a.hi(), b.lo()));
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
  double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
  double lo = std::min({rnd::mul_down(al, bl), rnd::mul_down(al, bh), rnd::mul_down(ah, bl),
                        rnd::mul_down(ah, bh)});
  double hi = std::max({rnd::mul_up(al, bl), rnd::mul_up(al, bh), rnd::mul_up(ah, bl),
                        rnd::mul_up(ah, bh)});
  return Interval(lo, hi);
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) throw IntervalError("division by an interval containing zero");
  double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
  double lo = std::min({rnd::div_down(al, bl), rnd::div_down(al, bh), rnd::div_down(ah, bl),
                        rnd::div_down(ah, bh)});
  double hi = std::max({rnd::div_up(al, bl), rnd::div_up(al, bh), rnd::div_up(ah, bl),
                        rnd::div_up(ah, bh)});
  return Interval(lo, hi);
}

bool operator==(const Interval& a, const Interval& b) {
  return a.lo() == b.lo() && a.hi() == b.hi();
}

double pow_up(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r = rnd::mul_up(r, x);
  return r;
}

double pow_down(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r = rnd::mul_down(r, x);
  return r;
}

Interval pow_int(const Interval& x, int n) {
  if (n < 0) throw IntervalError("pow_int with negative exponent");
  if (n == 0) return Interval(1.0);
  if (n == 1) return x;
  double l = x.lo(), h = x.hi();
  if (n % 2 == 0) {
    double amax = abs_max(x);
    double amin = abs_min(x);
    return Interval(pow_down(amin, n), pow_up(amax, n));
  }
  double lo = l >= 0 ? pow_down(l, n) : -pow_up(-l, n);
  double hi = h >= 0 ? pow_up(h, n) : -pow_down(-h, n);
  return Interval(lo, hi);
}

Interval sqr(const Interval& x) { return pow_int(x, 2); }

Interval sqrt(const Interval& x) {
  if (x.lo() < 0) throw IntervalError("sqrt of an interval with negative part");
  return Interval(rnd::sqrt_down(x.lo()), rnd::sqrt_up(x.hi()));
}

Interval abs(const Interval& x) { return Interval(abs_min(x), abs_max(x)); }

double abs_max(const Interval& x) { return std::max(std::fabs(x.lo()), std::fabs(x.hi())); }

double abs_min(const Interval& x) {
  if (x.contains_zero()) return 0.0;
  return std::min(std::fabs(x.lo()), std::fabs(x.hi()));
}

bool contains(const Interval& outer, const Interval& inner) {
  return inner.lo() >= outer.lo() && inner.hi() <= outer.hi();
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

Interval hull(const Interval& a, double x) { return hull(a, Interval(x)); }

bool intersects(const Interval& a, const Interval& b) {
  return a.lo() <= b.hi() && b.lo() <= a.hi();
}

Interval sum(const IntervalVector& v) {
  Interval s(0.0);
  for (const auto& x : v) s += x;
  return s;
}

std::string to_hex(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  bool neg = std::signbit(x);
  auto res = std::to_chars(buf, buf + sizeof buf, std::fabs(x), std::chars_format::hex);
  std::string body(buf, res.ptr);
  return (neg ? "-0x" : "0x") + body;
}

double from_hex(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw std::invalid_argument("bad float literal: " + s);
  return v;
}

std::string to_decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace ksproof
