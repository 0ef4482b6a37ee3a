#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksproof/bounds.hpp"
#include "ksproof/spectral.hpp"

namespace ksproof {

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One invariant subspace of the linearization. A complex pair occupies
// coordinates index and index+1 with the real Jordan block
// [[re, im], [-im, re]].
struct EigenSlot {
  bool complex = false;
  int index = 0;
  double re = 0;
  double im = 0;
  int dim() const { return complex ? 2 : 1; }
  bool unstable() const { return re > 0; }
};

// a = candidate + V z. Computed in floating point; nothing here is rigorous.
struct EigenFrame {
  std::vector<double> candidate;
  Eigen::MatrixXd V;
  std::vector<EigenSlot> slots;
  double condition = 0;
  double residual = 0;

  int m() const { return static_cast<int>(candidate.size()); }
  // Block diagonal matrix of the slots.
  Eigen::MatrixXd lambda_matrix() const;
};

EigenFrame eigenframe(const std::vector<double>& candidate, const Parameters& p,
                      double max_condition = 1e10);

// Rigorous enclosure of V^{-1}: S +- e entrywise with S a float inverse.
struct InverseEnclosure {
  std::vector<Interval> Tinv;  // row-major m x m
  double err = 0;
};
InverseEnclosure enclose_inverse(const Eigen::MatrixXd& V);

// Galerkin field plus truncation error in eigen-coordinates:
//   z' = Lambda z + g(z),  g(z) = r0 + (T^-1 J V - Lambda) z + T^-1 Q(Vz, Vz) + eps~
class EigenSystem {
 public:
  EigenSystem(const EigenFrame& frame, const SelfConsistentBounds& b);

  int m() const { return m_; }
  const IntervalVector& eps() const { return eps_; }
  const IntervalVector& r0() const { return r0_; }
  // T^-1 Q(VZ, VZ)
  IntervalVector quadratic(const IntervalVector& Z) const;
  Interval quadratic_i(int i, const IntervalVector& Z) const;
  // Linear residual row i: sum_j (A - Lambda)_ij Z_j
  Interval linear_i(int i, const IntervalVector& Z) const;
  Interval g_i(int i, const IntervalVector& Z) const;
  // a-coordinates V Z (no offset)
  IntervalVector to_modes(const IntervalVector& Z) const;

 private:
  IntervalVector qmodes(const IntervalVector& Z) const;
  int m_;
  std::vector<Interval> V_, Tinv_, Ares_;
  IntervalVector r0_, eps_;
};

IntervalVector truncation_errors(const EigenFrame& frame, const SelfConsistentBounds& b);

struct BlockOptions {
  // Enclose the quadratic remainder over the trial box as +-sup|f_i|.
  bool symmetric_remainder = true;
  // Relative widening of each slot bound (fraction of its half width).
  double widen = 1e-3;
  int max_depth = 12;
  // Relative width of the annulus on which complex radial checks run.
  double annulus = 1e-3;
};

struct FaceMargin {
  int slot = 0;
  int side = 0;  // -1 lower face, +1 upper face, 0 circle of a complex slot
  double margin = 0;
  int pieces = 0;
  int depth = 0;
};

struct IsolatingBlock {
  EigenFrame frame;
  IntervalVector trial_box;    // W~ in eigen-coordinates
  IntervalVector slot_bounds;  // N~ per coordinate; complex slots as [-b, b]^2
  std::vector<double> radii;   // per slot: b for complex slots, 0 for real
  std::vector<FaceMargin> faces;
  bool verified = false;

  double min_margin() const;
};

IsolatingBlock build_block(const EigenFrame& frame, const SelfConsistentBounds& b,
                           const IntervalVector& trial_box, const BlockOptions& opt = {});
// Evaluates every face; updates block.faces and block.verified.
std::vector<FaceMargin> verify_block(IsolatingBlock& block, const SelfConsistentBounds& b,
                                     const BlockOptions& opt = {});

// Interval hull of candidate + V Z.
IntervalVector block_in_modes(const EigenFrame& frame, const IntervalVector& Z);
// Largest cube radius r with candidate + V [-r,r]^m inside the head box.
double fitting_cube_radius(const EigenFrame& frame, const IntervalVector& head);

struct ConleyData {
  std::vector<int> dir;  // modes m < k <= M
  int tail_dir = -1;     // uniform value for k > M
  int q = 0;             // unstable dimension of the block
  int d = 0;             // number of dir = +1 modes
  std::string homology;
};

// Throws BlockError if any dir is 0 (index would vanish) or the block is
// not verified.
ConleyData conley_index(const IsolatingBlock& block, const C4aReport& c4a);

}  // namespace ksproof
