#include "ksproof/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ksproof {

using rnd::add_up;
using rnd::div_up;
using rnd::mul_up;

double C4aReport::min_margin() const {
  double r = tail_margin;
  for (double v : margin_upper) r = std::min(r, v);
  for (double v : margin_lower) r = std::min(r, v);
  return r;
}

std::string C4aReport::first_failure(int m) const {
  std::ostringstream os;
  for (size_t i = 0; i < margin_upper.size(); ++i) {
    if (!(margin_upper[i] > 0)) {
      os << "C4a k=" << m + 1 + static_cast<int>(i) << " upper margin " << margin_upper[i];
      return os.str();
    }
    if (!(margin_lower[i] > 0)) {
      os << "C4a k=" << m + 1 + static_cast<int>(i) << " lower margin " << margin_lower[i];
      return os.str();
    }
  }
  if (!(tail_margin > 0)) {
    os << "C4a tail margin " << tail_margin << " (D=" << tail_D << ")";
    return os.str();
  }
  return "";
}

double seed_constant(const AprioriSeed& seed) {
  Interval r = Interval(2.0) * Interval(std::numbers::pi) * Interval(seed.rho0) *
               pow_int(Interval(seed.rho1), 3);
  // pi is rounded to nearest; widen by one ulp.
  r = Interval(rnd::next_down(r.lo()), rnd::next_up(r.hi()));
  if (r.lo() < 0) r = Interval(0.0, r.hi());
  return mul_up(4.0, sqrt(r).hi());
}

SelfConsistentBounds seed_bounds(const AprioriSeed& seed, const Parameters& p,
                                 const IntervalVector& head) {
  if (!(seed.rho0 >= 0) || !(seed.rho1 >= 0)) throw std::invalid_argument("seed radii must be >= 0");
  Interval nu = p.nu_enclosure();
  if (!((nu * Interval((p.m + 1.0) * (p.m + 1.0))).lo() > 1.0))
    throw std::invalid_argument("(m+1)^4 > 1/nu^2 violated: nu (m+1)^2 must exceed 1");
  double K = seed_constant(seed);
  IntervalVector mid;
  for (int k = p.m + 1; k <= p.M; ++k) {
    double k2 = static_cast<double>(k) * k;
    Interval den = Interval(k2) * (nu * Interval(k2) - Interval(1.0));
    double r = std::min({seed.rho0, div_up(seed.rho1, k), div_up(K, den.lo())});
    mid.push_back(Interval::symmetric(r));
  }
  double M1 = p.M + 1.0;
  Interval dt = nu - Interval(1.0) / Interval(M1 * M1);
  TailDecay tail(div_up(K, dt.lo()), 4);
  return SelfConsistentBounds(p, head, mid, tail);
}

namespace {

Interval widen_rel(const Interval& x, double delta) {
  if (delta <= 0) return x;
  double lo = rnd::sub_down(x.lo(), mul_up(delta, std::fabs(x.lo())));
  double hi = add_up(x.hi(), mul_up(delta, std::fabs(x.hi())));
  return Interval(lo, hi);
}

double rel_change(double a, double b) {
  double d = std::fabs(a - b);
  double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0 ? 0.0 : d / s;
}

}  // namespace

SelfConsistentBounds refine_once(const SelfConsistentBounds& b, const RefineOptions& opt,
                                 double* D_used) {
  const Parameters& p = b.params();
  Interval nu = p.nu_enclosure();
  double D = opt.tail_rule == TailRule::Classic ? dissipativity_constant(b) : tail_dissipativity_bound(b);
  if (D_used) *D_used = D;
  double M1 = p.M + 1.0;
  Interval dt = nu - Interval(1.0) / Interval(M1 * M1);
  if (!(dt.lo() > 0)) throw std::domain_error("non-positive tail denominator nu - (M+1)^-2");

  SelfConsistentBounds nb = b;
  nb.set_tail(TailDecay(div_up(D, dt.lo()), b.tail().s + 2));
  for (int k = p.m + 1; k <= p.M; ++k) {
    Interval f = Interval(2.0) * infinite_sum_bound(k, nb) - finite_sum_bound(k, nb);
    double k2 = static_cast<double>(k) * k;
    Interval den = Interval(static_cast<double>(k)) * (nu * Interval(k2) - Interval(1.0));
    if (!(den.lo() > 0)) throw std::domain_error("non-positive denominator k^3 (nu - k^-2)");
    Interval q = f / den;
    q = hull(q, 0.0);
    nb.set_mode(k, widen_rel(q, opt.inflation));
  }
  return nb;
}

double tail_c4a_margin(const TailDecay& t, const Parameters& p, double D) {
  double M1 = p.M + 1.0;
  Interval g = p.nu_enclosure() * Interval(M1 * M1) - Interval(1.0);
  Interval lhs = Interval(t.C) * g;
  return rnd::sub_down(lhs.lo(), D);
}

C4aReport verify_c4a(const SelfConsistentBounds& b) {
  C4aReport r;
  const Parameters& p = b.params();
  bool ok = true;
  for (int k = p.m + 1; k <= p.M; ++k) {
    Interval a = b.mode(k);
    Interval up = mode_derivative_pinned(k, b, a.hi());
    Interval lo = mode_derivative_pinned(k, b, a.lo());
    double mu = -up.hi();
    double ml = lo.lo();
    r.margin_upper.push_back(mu);
    r.margin_lower.push_back(ml);
    int d = 0;
    if (mu > 0 && ml > 0) d = -1;
    else if (up.lo() > 0 && lo.hi() < 0) d = 1;
    r.dir.push_back(d);
    ok = ok && mu > 0 && ml > 0;
  }
  r.tail_D = tail_dissipativity_bound(b);
  r.tail_margin = tail_c4a_margin(b.tail(), p, r.tail_D);
  r.verified = ok && r.tail_margin > 0 && b.tail().C > 0;
  return r;
}

C13Report verify_c1_c3(const SelfConsistentBounds& b) {
  C13Report r;
  const auto& t = b.tail();
  r.c1 = t.C > 0 && t.s > 1;
  double s = 0;
  for (int k = 1; k <= b.M(); ++k) {
    double a = b.mode_abs(k);
    s = add_up(s, mul_up(a, a));
  }
  // sum_{k>M} C^2/k^{2s} <= C^2 / ((2s-1) M^{2s-1})
  s = add_up(s, mul_up(mul_up(t.C, t.C), tail_sum_up(b.M(), 2 * t.s)));
  r.sum_sq_bound = s;
  r.c2 = std::isfinite(s);
  return r;
}

std::pair<SelfConsistentBounds, RefinementReport> refine_loop(const SelfConsistentBounds& b,
                                                              int max_iter, double stop_tol,
                                                              const RefineOptions& opt) {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  RefinementReport rep;
  SelfConsistentBounds cur = b;
  for (int it = 0; it < max_iter; ++it) {
    double D = 0;
    SelfConsistentBounds nb = cur;
    try {
      nb = refine_once(cur, opt, &D);
    } catch (const std::exception&) {
      break;  // tail constant overflowed; keep the last finite bounds
    }
    // Past some s the factor k^(s-1) in D outgrows the decay it buys.
    // Never trade verified bounds for unverified ones; a rejected pass on
    // verified bounds means they are as good as this loop gets.
    if (nb.tail_abs(cur.M() + 1) > cur.tail_abs(cur.M() + 1) ||
        (it > 0 && !verify_c4a(nb).verified && verify_c4a(cur).verified)) {
      rep.converged = verify_c4a(cur).verified;
      break;
    }
    double change = 0;
    for (int k = cur.m() + 1; k <= cur.M(); ++k) {
      change = std::max(change, rel_change(cur.mode(k).lo(), nb.mode(k).lo()));
      change = std::max(change, rel_change(cur.mode(k).hi(), nb.mode(k).hi()));
    }
    rep.snapshots.push_back({nb.mid(), nb.tail(), D});
    rep.iterations = it + 1;
    rep.last_change = change;
    cur = nb;
    if (change < stop_tol) {
      rep.converged = true;
      break;
    }
  }
  rep.c4a = verify_c4a(cur);
  return {cur, rep};
}

}  // namespace ksproof
