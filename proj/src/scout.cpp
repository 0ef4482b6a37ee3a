#include "ksproof/scout.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>

#include "ksproof/spectral.hpp"

namespace ksproof {

double galerkin_residual(const std::vector<double>& a, double nu) {
  double r = 0;
  for (double x : galerkin_field(a, nu)) r = std::max(r, std::fabs(x));
  return r;
}

namespace {

Eigen::MatrixXd jacobian(const std::vector<double>& a, double nu) {
  int m = static_cast<int>(a.size());
  auto J = galerkin_jacobian(a, nu);
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = J[i * m + j];
  return A;
}

void fill_spectrum(Candidate& c) {
  Eigen::MatrixXd J = jacobian(c.coeffs, c.nu);
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  c.spectrum.clear();
  c.unstable_dim = 0;
  for (int i = 0; i < J.rows(); ++i) {
    c.spectrum.push_back(es.eigenvalues()(i));
    if (es.eigenvalues()(i).real() > 0) c.unstable_dim++;
  }
  std::sort(c.spectrum.begin(), c.spectrum.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
  });
}

double max_abs(const std::vector<double>& v) {
  double r = 0;
  for (double x : v) r = std::max(r, std::fabs(x));
  return r;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0;
  for (size_t i = 0; i < a.size(); ++i) r = std::max(r, std::fabs(a[i] - b[i]));
  return r;
}

}  // namespace

Candidate newton_equilibrium(double nu, int m, const std::vector<double>& start, int max_iter, double tol) {
  if (static_cast<int>(start.size()) != m) throw std::invalid_argument("start vector length differs from m");
  std::vector<double> x = start;
  double res = galerkin_residual(x, nu);
  int extra = 0;
  for (int it = 0; it < max_iter; ++it) {
    if (res < tol && ++extra > 2) break;
    Eigen::MatrixXd J = jacobian(x, nu);
    auto F = galerkin_field(x, nu);
    Eigen::VectorXd f = Eigen::Map<Eigen::VectorXd>(F.data(), m);
    Eigen::VectorXd dx = J.fullPivLu().solve(f);
    if (!dx.allFinite()) throw NewtonError("singular Jacobian in Newton iteration", x);
    double t = 1.0;
    std::vector<double> y(m);
    bool moved = false;
    for (int h = 0; h < 40 && !moved; ++h, t *= 0.5) {
      for (int i = 0; i < m; ++i) y[i] = x[i] - t * dx(i);
      double ry = galerkin_residual(y, nu);
      if (ry < res) {
        x = y;
        res = ry;
        moved = true;
      }
    }
    if (!moved) {
      if (res < tol) break;
      throw NewtonError("Newton line search stalled", x);
    }
    if (max_abs(x) > 1e6) throw NewtonError("Newton iterates diverged", x);
  }
  if (!(res < tol)) throw NewtonError("Newton did not converge", x);
  Candidate c;
  c.nu = nu;
  c.coeffs = x;
  c.residual = res;
  fill_spectrum(c);
  c.label = branch_label(x, c.unstable_dim);
  return c;
}

std::vector<double> conjugate(const std::vector<double>& a) {
  std::vector<double> b = a;
  for (size_t i = 0; i < b.size(); ++i)
    if ((i + 1) % 2 == 1) b[i] = -b[i];
  return b;
}

std::string branch_label(const std::vector<double>& a, int unstable_dim) {
  if (max_abs(a) < 1e-10) return "trivial";
  static const char* names[] = {"", "unimodal", "bimodal", "trimodal", "quadrimodal"};
  size_t k = 0;
  for (size_t i = 1; i < a.size(); ++i)
    if (std::fabs(a[i]) > std::fabs(a[k])) k = i;
  std::string s = k + 1 <= 4 ? names[k + 1] : "mode" + std::to_string(k + 1);
  s += a[k] > 0 ? "+" : "-";
  s += unstable_dim == 0 ? " stable" : " unstable(" + std::to_string(unstable_dim) + ")";
  return s;
}

AprioriSeed heuristic_apriori(double nu, int m, const TrajectoryOptions& opt) {
  int n = std::min(m, opt.max_modes);
  std::vector<double> a(n, 0.0);
  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  if (!opt.zero_start)
    for (int k = 1; k <= n; ++k) a[k - 1] = 0.5 * U(gen) / k;

  double lmax = 0;
  for (int k = 1; k <= n; ++k) {
    double k2 = static_cast<double>(k) * k;
    lmax = std::max(lmax, k2 * std::fabs(1 - nu * k2));
  }
  // RK4 is stable on the negative real axis up to about 2.78.
  double dt = std::min(0.01, 2.0 / std::max(lmax, 1.0));
  auto rhs = [&](const std::vector<double>& y) { return galerkin_field(y, nu); };
  std::vector<double> k1, k2, k3, k4, y(n);
  double t = 0, r0 = 0, r1 = 0;
  double tend = opt.transient + opt.window;
  while (t < tend) {
    k1 = rhs(a);
    for (int i = 0; i < n; ++i) y[i] = a[i] + 0.5 * dt * k1[i];
    k2 = rhs(y);
    for (int i = 0; i < n; ++i) y[i] = a[i] + 0.5 * dt * k2[i];
    k3 = rhs(y);
    for (int i = 0; i < n; ++i) y[i] = a[i] + dt * k3[i];
    k4 = rhs(y);
    for (int i = 0; i < n; ++i) a[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += dt;
    if (!std::isfinite(a[0]) || max_abs(a) > 1e8) throw std::runtime_error("trajectory blew up");
    if (t >= opt.transient) {
      double s0 = 0, s1 = 0;
      for (int k = 1; k <= n; ++k) {
        s0 += a[k - 1] * a[k - 1];
        s1 += static_cast<double>(k) * k * a[k - 1] * a[k - 1];
      }
      r0 = std::max(r0, std::sqrt(s0));
      r1 = std::max(r1, std::sqrt(s1));
    }
  }
  return {std::max(opt.safety * r0, opt.floor), std::max(opt.safety * r1, opt.floor)};
}

std::vector<Candidate> sweep_branches(const std::vector<double>& nu_list, int m, const SweepOptions& opt) {
  std::vector<Candidate> out;
  for (size_t inu = 0; inu < nu_list.size(); ++inu) {
    double nu = nu_list[inu];
    TrajectoryOptions topt;
    topt.seed = opt.seed + 1000 * inu;
    AprioriSeed seed = heuristic_apriori(nu, m, topt);
    std::mt19937_64 gen(opt.seed + inu);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Candidate> found;
    auto known = [&](const std::vector<double>& x) {
      for (const auto& c : found)
        if (dist(c.coeffs, x) < opt.dedup_tol * std::max(1.0, max_abs(x))) return true;
      return false;
    };
    for (int r = 0; r < opt.restarts; ++r) {
      std::vector<double> start(m);
      for (int k = 1; k <= m; ++k) start[k - 1] = seed.rho1 * U(gen) / k;
      try {
        Candidate c = newton_equilibrium(nu, m, start);
        if (!opt.keep_trivial && max_abs(c.coeffs) < 1e-8) continue;
        if (!known(c.coeffs)) found.push_back(c);
        auto cj = conjugate(c.coeffs);
        if (!known(cj)) {
          Candidate p = newton_equilibrium(nu, m, cj);
          if (!known(p.coeffs)) found.push_back(p);
        }
      } catch (const NewtonError&) {
      }
    }
    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
      if (a.unstable_dim != b.unstable_dim) return a.unstable_dim < b.unstable_dim;
      return a.coeffs < b.coeffs;
    });
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

void write_candidates_csv(std::ostream& os, const std::vector<Candidate>& cands) {
  size_t m = 0;
  for (const auto& c : cands) m = std::max(m, c.coeffs.size());
  os << "nu";
  for (size_t k = 1; k <= m; ++k) os << ",a" << k;
  os << ",residual,unstable_dim,leading_eigenvalues,label\n";
  os << std::setprecision(17);
  for (const auto& c : cands) {
    os << c.nu;
    for (size_t k = 0; k < m; ++k) os << "," << (k < c.coeffs.size() ? c.coeffs[k] : 0.0);
    os << "," << c.residual << "," << c.unstable_dim << ",\"";
    for (size_t i = 0; i < std::min<size_t>(3, c.spectrum.size()); ++i) {
      if (i) os << " ";
      os << std::setprecision(6) << c.spectrum[i].real();
      if (c.spectrum[i].imag() != 0) os << (c.spectrum[i].imag() > 0 ? "+" : "") << c.spectrum[i].imag() << "i";
    }
    os << std::setprecision(17) << "\"," << c.label << "\n";
  }
}

}  // namespace ksproof
