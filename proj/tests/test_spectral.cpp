#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"

using namespace ksproof;
using namespace fixture;

namespace {

SelfConsistentBounds zero_bounds(int m, int M, double C = 0, int s = 4, double nu = 0.75) {
  return SelfConsistentBounds(Parameters(nu, m, M), IntervalVector(m, Interval(0.0)),
                              IntervalVector(M - m, Interval(0.0)), TailDecay(C, s));
}

// Random bounds with |a_k| roughly below C/k^s everywhere.
SelfConsistentBounds random_bounds(std::mt19937_64& g, int m, int M, int s) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double C = 0.2 + 2 * u(g);
  IntervalVector head, mid;
  for (int k = 1; k <= M; ++k) {
    double r = C / std::pow(k, s);
    double c = (2 * u(g) - 1) * r;
    double w = u(g) * r;
    Interval x(c - w, c + w);
    if (u(g) < 0.2) x = Interval(c);
    (k <= m ? head : mid).push_back(x);
  }
  return SelfConsistentBounds(Parameters(0.75, m, M), head, mid, TailDecay(C, s));
}

}  // namespace

TEST_CASE("parameters") {
  CHECK_NOTHROW(Parameters(0.75, 2, 10).validate());
  CHECK_THROWS_AS(Parameters(0.1, 2, 10).validate(), std::invalid_argument);
  CHECK_THROWS_AS(Parameters(0.75, 3, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(Parameters(0.25, 2, 10).validate(), std::invalid_argument);  // nu m^2 = 1 exactly
  CHECK(Parameters(0.1, 28, 60).nu_enclosure().contains(0.1));
  CHECK_THROWS_AS(TailDecay(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(TailDecay(-1.0, 4), std::invalid_argument);
  CHECK_THROWS(SelfConsistentBounds(Parameters(0.75, 2, 4), IntervalVector(2), IntervalVector(1), TailDecay(1, 4)));
}

TEST_CASE("linear coefficient") {
  CHECK(linear_coeff(1, 0.75).contains(0.25));
  CHECK(linear_coeff(2, 0.75).contains(-8.0));
  for (int k = 1; k < 50; ++k) CHECK(linear_coeff(k, Interval(1.0 / (k * k))).contains(0.0));
}

TEST_CASE("finite sum examples") {
  SelfConsistentBounds b = zero_bounds(2, 10, 0.5);
  CHECK(finite_sum_bound(1, b) == Interval(0.0));
  b.set_mode(1, sqrt(Interval(0.5)));
  Interval fs = finite_sum_bound(2, b);
  CHECK(fs.contains(0.5));
  CHECK(fs.width_up() < 1e-15);
}

TEST_CASE("infinite sum examples") {
  const double C = 0.7;
  const int s = 4, M = 10;
  SelfConsistentBounds b = zero_bounds(2, M, C, s);
  for (int k = 1; k <= M; ++k) {
    double expect = C * C / (std::pow(k + M + 1.0, s) * (s - 1) * std::pow(M, s - 1));
    Interval r = infinite_sum_bound(k, b);
    CHECK(r.hi() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.lo() == doctest::Approx(-expect).epsilon(1e-12));
  }
  SelfConsistentBounds z = zero_bounds(2, M, 0.0, s);
  for (int k = M + 1; k < 3 * M; ++k) CHECK(infinite_sum_bound(k, z) == Interval(0.0));
}

TEST_CASE("projection error") {
  SelfConsistentBounds z = zero_bounds(2, 10);
  CHECK(projection_error(1, z) == Interval(0.0));
  CHECK(projection_error(2, z) == Interval(0.0));

  SelfConsistentBounds b = s4_refined();
  Interval e1 = projection_error(1, b), e2 = projection_error(2, b);
  // Reference enclosures, reproduced to about 4 digits.
  CHECK(e1.lo() == doctest::Approx(-0.00955626).epsilon(1e-4));
  CHECK(e2.hi() == doctest::Approx(0.0697171).epsilon(1e-4));
  CHECK(e1.hi() >= 0);
  CHECK(e2.lo() <= 0);
  CHECK(e1.hi() < 1e-9);
  CHECK(e2.lo() > -2e-8);
}

TEST_CASE("mode derivative on the two mode system") {
  // M = m and no tail: the field is exactly (a1/4 + 2 a1 a2, -8 a2 - 2 a1^2).
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    double a1 = u(g), a2 = u(g);
    SelfConsistentBounds b(Parameters(0.75, 2, 2), {Interval(a1), Interval(a2)}, {}, TailDecay(0.0, 4));
    CHECK(mode_derivative_bound(1, b).contains(0.25 * a1 + 2 * a1 * a2));
    CHECK(mode_derivative_bound(2, b).contains(-8 * a2 - 2 * a1 * a1));
    CHECK(mode_derivative_bound(1, b).width_up() < 1e-14);
  }
  SelfConsistentBounds fp(Parameters(0.75, 2, 2), {Interval(kFixedPoint[0]), Interval(kFixedPoint[1])}, {},
                          TailDecay(0.0, 4));
  CHECK(mode_derivative_bound(1, fp).contains(0.0));
  CHECK(mode_derivative_bound(2, fp).contains(0.0));
  SelfConsistentBounds z = zero_bounds(2, 10);
  for (int k = 1; k < 40; ++k) CHECK(mode_derivative_bound(k, z) == Interval(0.0));
}

TEST_CASE("galerkin field float and interval agree") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    int m = 2 + i % 9;
    std::vector<double> a(m);
    IntervalVector ai(m);
    for (int k = 0; k < m; ++k) ai[k] = Interval(a[k] = u(g) / (k + 1));
    auto f = galerkin_field(a, 0.3);
    auto fi = galerkin_field(ai, Interval(0.3));
    for (int k = 0; k < m; ++k) {
      CHECK(fi[k].lo() <= f[k] + 1e-14);
      CHECK(f[k] - 1e-14 <= fi[k].hi());
      CHECK(fi[k].width_up() < 1e-12);
    }
    std::vector<double> ext(m + 1, 0.0);
    for (int k = 0; k < m; ++k) ext[k + 1] = a[k];
    for (int k = 1; k <= m; ++k)
      CHECK(static_cast<double>(brute_derivative(ext, 0.3, k)) == doctest::Approx(f[k - 1]).epsilon(1e-12));
  }
}

TEST_CASE("dissipativity constant") {
  CHECK(dissipativity_constant(zero_bounds(2, 10)) == 0);
  CHECK(tail_dissipativity_bound(zero_bounds(2, 10)) == 0);

  SelfConsistentBounds b = s4_refined(2);
  double D = 0;
  SelfConsistentBounds nb = refine_once(b, {}, &D);
  CHECK(D == dissipativity_constant(b));
  Interval lhs = Interval(nb.tail().C) * (Interval(0.75) - Interval(1.0) / Interval(121.0));
  CHECK(lhs.hi() >= D);
  CHECK(lhs.lo() <= D * (1 + 1e-12));

  // |-FS(k) + 2 IS(k)| <= D / k^(s-1) for 100 k in (M, 10M].
  const SelfConsistentBounds& r = nb;
  double Dr = dissipativity_constant(r), Ds = tail_dissipativity_bound(r);
  CHECK(Ds <= Dr);
  for (int k = 11; k <= 110; ++k) {
    Interval v = -finite_sum_bound(k, r) + Interval(2.0) * infinite_sum_bound(k, r);
    double env = Ds / std::pow(static_cast<double>(k), r.tail().s - 1);
    CHECK(abs_max(v) <= env * (1 + 1e-12));
  }
}

TEST_CASE("FS/IS oracle on random decay-respecting sequences") {
  std::mt19937_64 g(2024);
  const int M = 8, N = 10000 * M;
  long bad = 0, checks = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    int s = 2 + seq % 4;
    int m = 1 + seq % 4;
    SelfConsistentBounds b = random_bounds(g, m, M, s);
    std::vector<double> a = draw_sequence(g, b, N);
    double C = b.tail().C;
    std::vector<int> ks = {1, m, M - 1, M, M + 1, 2 * M - 1, 2 * M, 2 * M + 1, 3 * M, 5 * M + 3};
    for (int k : ks) {
      if (k < 1) continue;
      Interval fs = finite_sum_bound(k, b);
      long double f = brute_fs(a, k);
      double slack = 1e-15 * static_cast<double>(brute_abs_is(a, 0) + 1);
      if (!(fs.lo() <= f + slack && f - slack <= fs.hi())) ++bad;
      Interval is = infinite_sum_bound(k, b);
      long double v = brute_is(a, k);
      double rem = is_remainder(C, s, N, k) + slack;
      if (!(is.lo() <= v + rem && v - rem <= is.hi())) ++bad;
      checks += 2;
    }
    for (int k = 1; k <= m; ++k) {
      Interval pe = projection_error(k, b);
      long double v = 0;
      for (int n = m - k + 1; n + k <= N; ++n) v += static_cast<long double>(a[n]) * a[n + k];
      v *= 2 * k;
      double rem = 2 * k * is_remainder(C, s, N, k) + 1e-15;
      if (!(pe.lo() <= v + rem && v - rem <= pe.hi())) ++bad;
      ++checks;
    }
  }
  CHECK(checks > 20000);
  CHECK(bad == 0);
}

TEST_CASE("enclosures are monotone in the bounds") {
  std::mt19937_64 g(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    SelfConsistentBounds big = random_bounds(g, 2, 10, 4);
    SelfConsistentBounds small = big;
    for (int k = 1; k <= 10; ++k) {
      Interval x = big.mode(k);
      double a = x.lo() + u(g) * (x.hi() - x.lo());
      double b = x.lo() + u(g) * (x.hi() - x.lo());
      small.set_mode(k, Interval(std::min(a, b), std::max(a, b)));
    }
    small.set_tail(TailDecay(big.tail().C * u(g), 4));
    for (int k = 1; k <= 25; ++k) {
      CHECK(contains(finite_sum_bound(k, big), finite_sum_bound(k, small)));
      CHECK(contains(infinite_sum_bound(k, big), infinite_sum_bound(k, small)));
    }
    for (int k = 1; k <= 2; ++k) CHECK(contains(projection_error(k, big), projection_error(k, small)));
  }
}
