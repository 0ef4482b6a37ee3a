#include "ksproof/block.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace ksproof {

using rnd::add_up;
using rnd::div_up;
using rnd::mul_up;

Eigen::MatrixXd EigenFrame::lambda_matrix() const {
  int n = m();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : slots) {
    L(s.index, s.index) = s.re;
    if (s.complex) {
      L(s.index, s.index + 1) = s.im;
      L(s.index + 1, s.index) = -s.im;
      L(s.index + 1, s.index + 1) = s.re;
    }
  }
  return L;
}

namespace {

// First clearly nonzero component positive.
void fix_sign(Eigen::VectorXd& v) {
  double n = v.norm();
  for (int i = 0; i < v.size(); ++i) {
    if (std::fabs(v(i)) > 1e-8 * n) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace

EigenFrame eigenframe(const std::vector<double>& candidate, const Parameters& p, double max_condition) {
  int m = static_cast<int>(candidate.size());
  if (m != p.m) throw FrameError("candidate length differs from m");
  std::vector<double> Jv = galerkin_jacobian(candidate, p.nu);
  Eigen::MatrixXd J(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) J(i, j) = Jv[i * m + j];

  Eigen::EigenSolver<Eigen::MatrixXd> es(J, true);
  if (es.info() != Eigen::Success) throw FrameError("eigen-decomposition failed");
  auto vals = es.eigenvalues();
  auto vecs = es.eigenvectors();
  double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  double tol = 1e-12 * scale;

  struct Item {
    std::complex<double> val;
    int col;
  };
  std::vector<Item> items;
  for (int j = 0; j < m; ++j)
    if (vals(j).imag() >= -tol) items.push_back({vals(j), j});
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.val.real() != b.val.real()) return a.val.real() > b.val.real();
    return a.val.imag() > b.val.imag();
  });

  EigenFrame f;
  f.candidate = candidate;
  f.V = Eigen::MatrixXd::Zero(m, m);
  int idx = 0;
  for (const auto& it : items) {
    bool cplx = std::fabs(it.val.imag()) > tol;
    if (!cplx) {
      if (idx >= m) throw FrameError("eigenvalue bookkeeping mismatch");
      Eigen::VectorXd v = vecs.col(it.col).real();
      v.normalize();
      fix_sign(v);
      f.V.col(idx) = v;
      f.slots.push_back({false, idx, it.val.real(), 0.0});
      idx += 1;
    } else {
      if (idx + 1 >= m) throw FrameError("eigenvalue bookkeeping mismatch");
      Eigen::VectorXcd v = vecs.col(it.col);
      // Rotate so that real and imaginary parts are orthogonal.
      Eigen::VectorXd a = v.real(), b = v.imag();
      double phi = 0.5 * std::atan2(-2.0 * a.dot(b), a.dot(a) - b.dot(b));
      v *= std::complex<double>(std::cos(phi), std::sin(phi));
      v /= v.norm();
      Eigen::VectorXd u = v.real(), w = v.imag();
      double sgn = 1.0;
      for (int i = 0; i < m; ++i) {
        if (std::fabs(u(i)) > 1e-8) {
          sgn = u(i) < 0 ? -1.0 : 1.0;
          break;
        }
      }
      f.V.col(idx) = sgn * u;
      f.V.col(idx + 1) = sgn * w;
      f.slots.push_back({true, idx, it.val.real(), it.val.imag()});
      idx += 2;
    }
  }
  if (idx != m) throw FrameError("slot dimensions do not sum to m");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.V);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  f.condition = smin > 0 ? smax / smin : INFINITY;
  if (!(f.condition <= max_condition)) {
    std::ostringstream os;
    os << "eigenvector matrix condition number " << f.condition
       << " exceeds threshold; try a larger m or a different candidate";
    throw FrameError(os.str());
  }
  for (const auto& s : f.slots)
    if (s.re == 0) throw FrameError("non-hyperbolic eigen-direction (zero real part)");

  auto F = galerkin_field(candidate, p.nu);
  double r = 0;
  for (double x : F) r = std::max(r, std::fabs(x));
  f.residual = r;
  return f;
}

InverseEnclosure enclose_inverse(const Eigen::MatrixXd& V) {
  int m = static_cast<int>(V.rows());
  Eigen::MatrixXd S = V.partialPivLu().inverse();
  // R = I - S V
  double normR = 0, normS = 0;
  for (int i = 0; i < m; ++i) {
    double rowR = 0, rowS = 0;
    for (int j = 0; j < m; ++j) {
      Interval acc(i == j ? 1.0 : 0.0);
      for (int k = 0; k < m; ++k) acc -= Interval(S(i, k)) * Interval(V(k, j));
      rowR = add_up(rowR, abs_max(acc));
      rowS = add_up(rowS, std::fabs(S(i, j)));
    }
    normR = std::max(normR, rowR);
    normS = std::max(normS, rowS);
  }
  if (!(normR < 1)) throw FrameError("cannot enclose the inverse of the eigenvector matrix");
  InverseEnclosure e;
  e.err = div_up(mul_up(normR, normS), rnd::sub_down(1.0, normR));
  e.Tinv.resize(static_cast<size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      e.Tinv[i * m + j] = Interval(rnd::sub_down(S(i, j), e.err), add_up(S(i, j), e.err));
  return e;
}

EigenSystem::EigenSystem(const EigenFrame& frame, const SelfConsistentBounds& b) : m_(frame.m()) {
  int m = m_;
  if (b.m() != m) throw BlockError("frame and bounds disagree on m");
  Interval nu = b.params().nu_enclosure();
  V_.resize(static_cast<size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) V_[i * m + j] = Interval(frame.V(i, j));
  Tinv_ = enclose_inverse(frame.V).Tinv;

  IntervalVector p(frame.candidate.begin(), frame.candidate.end());
  IntervalVector F = galerkin_field(p, nu);
  std::vector<Interval> J = galerkin_jacobian(p, nu);

  r0_.assign(m, Interval(0.0));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) r0_[i] += Tinv_[i * m + k] * F[k];

  std::vector<Interval> JV(static_cast<size_t>(m) * m, Interval(0.0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) JV[i * m + j] += J[i * m + k] * V_[k * m + j];
  Eigen::MatrixXd L = frame.lambda_matrix();
  Ares_.assign(static_cast<size_t>(m) * m, Interval(0.0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Interval acc(0.0);
      for (int k = 0; k < m; ++k) acc += Tinv_[i * m + k] * JV[k * m + j];
      Ares_[i * m + j] = acc - Interval(L(i, j));
    }

  IntervalVector eps(m);
  for (int k = 1; k <= m; ++k) eps[k - 1] = projection_error(k, b);
  eps_.assign(m, Interval(0.0));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) eps_[i] += Tinv_[i * m + k] * eps[k];
}

IntervalVector EigenSystem::to_modes(const IntervalVector& Z) const {
  IntervalVector d(m_, Interval(0.0));
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) d[i] += V_[i * m_ + j] * Z[j];
  return d;
}

IntervalVector EigenSystem::qmodes(const IntervalVector& Z) const {
  return galerkin_quadratic(to_modes(Z));
}

IntervalVector EigenSystem::quadratic(const IntervalVector& Z) const {
  IntervalVector q = qmodes(Z);
  IntervalVector r(m_, Interval(0.0));
  for (int i = 0; i < m_; ++i)
    for (int k = 0; k < m_; ++k) r[i] += Tinv_[i * m_ + k] * q[k];
  return r;
}

Interval EigenSystem::quadratic_i(int i, const IntervalVector& Z) const {
  IntervalVector q = qmodes(Z);
  Interval r(0.0);
  for (int k = 0; k < m_; ++k) r += Tinv_[i * m_ + k] * q[k];
  return r;
}

Interval EigenSystem::linear_i(int i, const IntervalVector& Z) const {
  Interval r(0.0);
  for (int j = 0; j < m_; ++j) r += Ares_[i * m_ + j] * Z[j];
  return r;
}

Interval EigenSystem::g_i(int i, const IntervalVector& Z) const {
  return r0_[i] + linear_i(i, Z) + quadratic_i(i, Z) + eps_[i];
}

IntervalVector truncation_errors(const EigenFrame& frame, const SelfConsistentBounds& b) {
  return EigenSystem(frame, b).eps();
}

double IsolatingBlock::min_margin() const {
  double r = INFINITY;
  for (const auto& f : faces) r = std::min(r, f.margin);
  return r;
}

IntervalVector block_in_modes(const EigenFrame& frame, const IntervalVector& Z) {
  int m = frame.m();
  IntervalVector a(m);
  for (int i = 0; i < m; ++i) {
    Interval acc(frame.candidate[i]);
    for (int j = 0; j < m; ++j) acc += Interval(frame.V(i, j)) * Z[j];
    a[i] = acc;
  }
  return a;
}

double fitting_cube_radius(const EigenFrame& frame, const IntervalVector& head) {
  int m = frame.m();
  double r = INFINITY;
  for (int i = 0; i < m; ++i) {
    double room = std::min(rnd::sub_down(frame.candidate[i], head[i].lo()),
                           rnd::sub_down(head[i].hi(), frame.candidate[i]));
    if (room <= 0) return 0;
    double row = 0;
    for (int j = 0; j < m; ++j) row = add_up(row, std::fabs(frame.V(i, j)));
    r = std::min(r, rnd::div_down(room, row));
  }
  for (int tries = 0; tries < 60; ++tries) {
    IntervalVector Z(m, Interval::symmetric(r));
    IntervalVector a = block_in_modes(frame, Z);
    bool ok = true;
    for (int i = 0; i < m; ++i) ok = ok && contains(head[i], a[i]);
    if (ok) return r;
    r *= (1 - 1e-9);
  }
  return 0;
}

IsolatingBlock build_block(const EigenFrame& frame, const SelfConsistentBounds& b,
                           const IntervalVector& trial_box, const BlockOptions& opt) {
  int m = frame.m();
  if (static_cast<int>(trial_box.size()) != m) throw BlockError("trial box dimension differs from m");
  IntervalVector img = block_in_modes(frame, trial_box);
  for (int i = 0; i < m; ++i)
    if (!contains(b.mode(i + 1), img[i]))
      throw BlockError("T(W~) is not contained in the head box W (mode " + std::to_string(i + 1) + ")");

  EigenSystem sys(frame, b);
  IntervalVector quad = sys.quadratic(trial_box);
  IntervalVector G(m);
  for (int i = 0; i < m; ++i) {
    Interval q = opt.symmetric_remainder ? Interval::symmetric(abs_max(quad[i])) : quad[i];
    G[i] = sys.r0()[i] + sys.linear_i(i, trial_box) + q + sys.eps()[i];
  }

  IsolatingBlock blk;
  blk.frame = frame;
  blk.trial_box = trial_box;
  blk.slot_bounds.assign(m, Interval(0.0));
  blk.radii.assign(frame.slots.size(), 0.0);
  for (size_t si = 0; si < frame.slots.size(); ++si) {
    const auto& s = frame.slots[si];
    if (!s.complex) {
      Interval N = -G[s.index] / Interval(s.re);
      double w = mul_up(opt.widen, N.rad());
      blk.slot_bounds[s.index] = Interval(rnd::sub_down(N.lo(), w), add_up(N.hi(), w));
    } else {
      double gx = abs_max(G[s.index]), gy = abs_max(G[s.index + 1]);
      double g = rnd::sqrt_up(add_up(mul_up(gx, gx), mul_up(gy, gy)));
      double r = div_up(g, std::fabs(s.re));
      r = mul_up(r, 1.0 + opt.widen);
      blk.radii[si] = r;
      blk.slot_bounds[s.index] = Interval::symmetric(r);
      blk.slot_bounds[s.index + 1] = Interval::symmetric(r);
    }
  }
  for (int i = 0; i < m; ++i)
    if (!contains(trial_box[i], blk.slot_bounds[i]))
      throw BlockError("block escapes the trial box in eigen-coordinate " + std::to_string(i) +
                       "; enlarge the trial box or tighten the bounds");
  return blk;
}

namespace {

struct FaceJob {
  const EigenSystem* sys;
  const EigenSlot* slot;
  int side;
  int max_depth;
  int pieces = 0;
  int deepest = 0;
};

// Margin of one real face piece: positive means the flow crosses the face in
// the direction required by the slot's stability.
double real_margin(FaceJob& job, const IntervalVector& Z) {
  const EigenSlot& s = *job.slot;
  double c = Z[s.index].lo();
  Interval v = Interval(s.re) * Interval(c) + job.sys->g_i(s.index, Z);
  bool outward_positive = (job.side > 0) == s.unstable();
  return outward_positive ? v.lo() : -v.hi();
}

int widest(const IntervalVector& Z, int skip0, int skip1) {
  int best = -1;
  double w = -1;
  for (int j = 0; j < static_cast<int>(Z.size()); ++j) {
    if (j == skip0 || j == skip1) continue;
    double wj = Z[j].hi() - Z[j].lo();
    if (wj > w) {
      w = wj;
      best = j;
    }
  }
  return best;
}

double real_face(FaceJob& job, IntervalVector& Z, int depth) {
  double mg = real_margin(job, Z);
  if (mg > 0 || depth >= job.max_depth) {
    job.pieces++;
    job.deepest = std::max(job.deepest, depth);
    return mg;
  }
  int j = widest(Z, job.slot->index, -1);
  if (j < 0 || Z[j].is_point()) {
    job.pieces++;
    return mg;
  }
  Interval saved = Z[j];
  double mid = saved.mid();
  Z[j] = Interval(saved.lo(), mid);
  double a = real_face(job, Z, depth + 1);
  double bm = -INFINITY;
  if (a > 0) {
    Z[j] = Interval(mid, saved.hi());
    bm = real_face(job, Z, depth + 1);
  }
  Z[j] = saved;
  return a > 0 ? std::min(a, bm) : a;
}

// Box enclosing {(r cos t, r sin t) : r in [r0, r1], t in [t0, t1]}.
std::pair<Interval, Interval> arc_box(double r0, double r1, double t0, double t1) {
  std::vector<double> xs, ys;
  for (double r : {r0, r1})
    for (double t : {t0, t1}) {
      xs.push_back(r * std::cos(t));
      ys.push_back(r * std::sin(t));
    }
  const double h = std::numbers::pi / 2;
  for (long q = static_cast<long>(std::ceil(t0 / h)); q * h <= t1; ++q) {
    int qq = static_cast<int>(((q % 4) + 4) % 4);
    double cx = qq == 0 ? 1 : (qq == 2 ? -1 : 0);
    double cy = qq == 1 ? 1 : (qq == 3 ? -1 : 0);
    for (double r : {r0, r1}) {
      xs.push_back(r * cx);
      ys.push_back(r * cy);
    }
  }
  double pad = 8 * 2.220446049250313e-16 * r1;
  auto mm = [&](std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return Interval(rnd::sub_down(*lo, pad), add_up(*hi, pad));
  };
  return {mm(xs), mm(ys)};
}

struct CircleJob {
  const EigenSystem* sys;
  const EigenSlot* slot;
  double r0, r1;
  int max_depth;
  int pieces = 0;
  int deepest = 0;
};

double circle_margin(CircleJob& job, IntervalVector& Z, double t0, double t1) {
  const EigenSlot& s = *job.slot;
  auto [x, y] = arc_box(job.r0, job.r1, t0, t1);
  Z[s.index] = x;
  Z[s.index + 1] = y;
  Interval R2(rnd::mul_down(job.r0, job.r0), mul_up(job.r1, job.r1));
  Interval v = Interval(s.re) * R2 + x * job.sys->g_i(s.index, Z) + y * job.sys->g_i(s.index + 1, Z);
  return s.unstable() ? v.lo() : -v.hi();
}

double circle_face(CircleJob& job, IntervalVector& Z, double t0, double t1, int depth) {
  double mg = circle_margin(job, Z, t0, t1);
  if (mg > 0 || depth >= job.max_depth) {
    job.pieces++;
    job.deepest = std::max(job.deepest, depth);
    return mg;
  }
  int j = widest(Z, job.slot->index, job.slot->index + 1);
  double arc = job.r1 * (t1 - t0);
  if (j >= 0 && Z[j].hi() - Z[j].lo() > arc) {
    Interval saved = Z[j];
    double mid = saved.mid();
    Z[j] = Interval(saved.lo(), mid);
    double a = circle_face(job, Z, t0, t1, depth + 1);
    double bm = INFINITY;
    if (a > 0) {
      Z[j] = Interval(mid, saved.hi());
      bm = circle_face(job, Z, t0, t1, depth + 1);
    }
    Z[j] = saved;
    return std::min(a, bm);
  }
  double tm = 0.5 * (t0 + t1);
  double a = circle_face(job, Z, t0, tm, depth + 1);
  if (!(a > 0)) return a;
  return std::min(a, circle_face(job, Z, tm, t1, depth + 1));
}

}  // namespace

std::vector<FaceMargin> verify_block(IsolatingBlock& block, const SelfConsistentBounds& b,
                                     const BlockOptions& opt) {
  const EigenFrame& frame = block.frame;
  int m = frame.m();
  IntervalVector img = block_in_modes(frame, block.slot_bounds);
  bool inside = true;
  for (int i = 0; i < m; ++i) inside = inside && contains(b.mode(i + 1), img[i]);

  EigenSystem sys(frame, b);
  std::vector<FaceMargin> out;
  for (size_t si = 0; si < frame.slots.size(); ++si) {
    const EigenSlot& s = frame.slots[si];
    if (!s.complex) {
      for (int side : {-1, 1}) {
        IntervalVector Z = block.slot_bounds;
        double c = side < 0 ? Z[s.index].lo() : Z[s.index].hi();
        Z[s.index] = Interval(c);
        FaceJob job{&sys, &s, side, opt.max_depth};
        double mg = real_face(job, Z, 0);
        out.push_back({static_cast<int>(si), side, mg, job.pieces, job.deepest});
      }
    } else {
      double r1 = block.radii[si];
      double r0 = rnd::mul_down(r1, 1.0 - opt.annulus);
      CircleJob job{&sys, &s, r0, r1, opt.max_depth};
      IntervalVector Z = block.slot_bounds;
      double mg = INFINITY;
      const int sectors = 8;
      for (int q = 0; q < sectors && mg > 0; ++q) {
        double t0 = 2 * std::numbers::pi * q / sectors;
        double t1 = 2 * std::numbers::pi * (q + 1) / sectors;
        mg = std::min(mg, circle_face(job, Z, t0, t1, 0));
      }
      out.push_back({static_cast<int>(si), 0, mg, job.pieces, job.deepest});
    }
  }
  block.faces = out;
  block.verified = inside;
  for (const auto& f : out) block.verified = block.verified && f.margin > 0;
  return out;
}

ConleyData conley_index(const IsolatingBlock& block, const C4aReport& c4a) {
  if (!block.verified) throw BlockError("conley_index needs a verified block");
  ConleyData c;
  c.dir = c4a.dir;
  c.tail_dir = c4a.tail_dir();
  for (int d : c.dir) {
    if (d == 0) throw BlockError("dir(k) = 0 forces a trivial index; certification aborted");
    if (d == 1) c.d++;
  }
  if (c.tail_dir == 0) throw BlockError("tail direction not established; certification aborted");
  for (const auto& s : block.frame.slots)
    if (s.unstable()) c.q += s.dim();
  // The lifted index is the m-dimensional one shifted by d.
  int j = c.q + c.d;
  c.homology = "CH_j = Z for j = " + std::to_string(j) + ", 0 otherwise";
  return c;
}

}  // namespace ksproof
