#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ksproof {

// Thrown for operations without a closed nonempty interval result
// (division by an interval containing zero, sqrt of a negative interval,
// reversed or NaN endpoints).
class IntervalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Directed rounding of a single floating operation. Each function returns a
// double that is a lower (down) or upper (up) bound of the exact real result.
// The error of the round-to-nearest result is recovered exactly (TwoSum, fma)
// and the result is moved by one ulp only when that error points outward, so
// exactly representable results stay exact.
namespace rnd {
double add_down(double a, double b);
double add_up(double a, double b);
double sub_down(double a, double b);
double sub_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);
double div_down(double a, double b);
double div_up(double a, double b);
double sqrt_down(double a);
double sqrt_up(double a);
double next_down(double a);
double next_up(double a);
}  // namespace rnd

class Interval {
 public:
  constexpr Interval() : lo_(0.0), hi_(0.0) {}
  Interval(double x);  // NOLINT: implicit point interval
  Interval(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const;
  // Upper bound of the half width.
  double rad() const;
  double width_up() const { return rnd::sub_up(hi_, lo_); }
  bool is_point() const { return lo_ == hi_; }
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }

  static Interval symmetric(double r);  // [-|r|, |r|]
  static Interval from_int(long long k);

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  Interval& operator/=(const Interval& o);

 private:
  double lo_;
  double hi_;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

bool operator==(const Interval& a, const Interval& b);
inline bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }

Interval pow_int(const Interval& x, int n);
Interval sqr(const Interval& x);
Interval sqrt(const Interval& x);
Interval abs(const Interval& x);
// max(|lo|, |hi|); exact in floating point, so no rounding is needed.
double abs_max(const Interval& x);
// min |x| over the interval.
double abs_min(const Interval& x);

bool contains(const Interval& outer, const Interval& inner);
Interval hull(const Interval& a, const Interval& b);
Interval hull(const Interval& a, double x);
bool intersects(const Interval& a, const Interval& b);

// Upper bound of a nonnegative power k^s for integer k, s.
double pow_up(double x, int n);
double pow_down(double x, int n);

using IntervalVector = std::vector<Interval>;

// Left-to-right accumulation with per-step outward rounding.
Interval sum(const IntervalVector& v);

// Exact hexadecimal float text ("0x1.8p+1") and its inverse.
std::string to_hex(double x);
double from_hex(const std::string& s);
std::string to_decimal(double x);

}  // namespace ksproof
