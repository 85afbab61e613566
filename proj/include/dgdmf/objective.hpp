#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dgdmf/matrix.hpp"
#include "dgdmf/topology.hpp"

namespace dgdmf {

/// Column partition of a data matrix into per-node blocks. Reassembling the
/// blocks reproduces the matrix exactly.
struct DataPartition {
  DenseMatrix y;
  std::vector<int> widths;
  std::vector<DenseMatrix> blocks;

  static DataPartition split(DenseMatrix y, std::vector<int> widths);
  /// Even split with the remainder distributed to the leading blocks:
  /// m = 7, J = 3 gives widths [3, 2, 2].
  static DataPartition even_split(DenseMatrix y, int node_count);

  int node_count() const { return static_cast<int>(widths.size()); }
  const DenseMatrix& block(int j) const { return blocks[static_cast<std::size_t>(j)]; }
  std::vector<double> block_norms() const;
};

/// Factor pair (U, V) approximating Y as U V^T; U is rows x rank, V is
/// cols x rank.
struct FactorPair {
  DenseMatrix u;
  DenseMatrix v;

  int rank() const { return u.cols(); }
};

/// Shape of a network point: node_count copies of a rows x rank shared
/// factor plus one widths[j] x rank local factor per node.
struct NetDims {
  int node_count = 0;
  int rows = 0;
  int rank = 0;
  std::vector<int> widths;

  long total_dim() const;
};

/// Stacked network variable: one copy of the shared factor per node plus
/// the per-node local factors.
struct NetworkPoint {
  std::vector<DenseMatrix> copies;
  std::vector<DenseMatrix> locals;

  int node_count() const { return static_cast<int>(copies.size()); }
  NetDims dims() const;

  static NetworkPoint zeros(const NetDims& dims);
  /// Every copy set to p.u, locals set to the row blocks of p.v.
  static NetworkPoint consensus_lift(const FactorPair& p, std::span<const int> widths);
  /// Mean of the copies paired with the stacked locals.
  FactorPair assemble() const;
};

/// Ball norm used for initialization and iterate monitoring: the copy
/// blocks are averaged, sqrt((1/J) sum_j |U^j|_F^2 + sum_j |V_j|_F^2), so a
/// consensus point has exactly the norm of its underlying factor pair.
double ball_norm(const NetworkPoint& z);

/// Plain Frobenius norm of the concatenation of all blocks. Used for
/// gradient magnitudes and iterate distances.
double concat_norm(const NetworkPoint& z);
double concat_norm_sq(const NetworkPoint& z);
double concat_dist(const NetworkPoint& a, const NetworkPoint& b);

/// a + s * b, elementwise over all blocks.
NetworkPoint add_scaled(const NetworkPoint& a, double s, const NetworkPoint& b);

// --- objective values -------------------------------------------------

/// |U V^T - Y|_F^2 (no 1/2 factor).
double f_value(const FactorPair& p, const DenseMatrix& y);

/// Blockwise evaluation sum_j |U V_j^T - Y_j|_F^2; also computes the direct
/// value and throws NumericalError if the two disagree beyond 1e-12 relative.
double f_value(const FactorPair& p, const DataPartition& d);

/// The per-block terms |U V_j^T - Y_j|_F^2 of the decomposition above.
std::vector<double> f_block_values(const FactorPair& p, const DataPartition& d);

/// sum_j ( |U^j V_j^T - Y_j|_F^2 + sum_i w_ji |U^j - U^i|_F^2 ), with the
/// penalty summed over both ordered index pairs.
double g_value(const NetworkPoint& z, const GDWeights& w, const DataPartition& d);

// --- gradients ----------------------------------------------------------

/// (2 (U V^T - Y) V, 2 (U V^T - Y)^T U).
FactorPair grad_f(const FactorPair& p, const DenseMatrix& y);

/// Per-node gradient blocks of |U V_j^T - Y_j|_F^2 with respect to (U, V_j).
std::pair<DenseMatrix, DenseMatrix> grad_f_block(const DenseMatrix& u, const DenseMatrix& vj,
                                                 const DenseMatrix& yj);

/// Exact gradient of g_value: copy block j is
/// 2 (U^j V_j^T - Y_j) V_j + 4 sum_i w_ji (U^j - U^i), local block j is
/// 2 (U^j V_j^T - Y_j)^T U^j.
NetworkPoint grad_g(const NetworkPoint& z, const GDWeights& w, const DataPartition& d);

// --- Hessian quadratic forms ---------------------------------------------

/// Hessian quadratic form of f_value at p in direction dir:
/// 2 ( |dU V^T + U dV^T|_F^2 + 2 <U V^T - Y, dU dV^T> ).
double quadform_f(const FactorPair& p, const FactorPair& dir, const DenseMatrix& y);

double quadform_f_block(const DenseMatrix& u, const DenseMatrix& vj, const DenseMatrix& yj,
                        const DenseMatrix& du, const DenseMatrix& dvj);

/// Hessian quadratic form of g_value at z in direction q; the penalty term
/// contributes 2 w_ji |q_xj - q_xi|^2 over both ordered index pairs.
double quadform_g(const NetworkPoint& z, const NetworkPoint& q, const GDWeights& w,
                  const DataPartition& d);

// --- smoothness and stepsize bounds ----------------------------------

/// L + 2 omega / mu.
double lipschitz_Lg(double lipschitz, double omega_value, double mu);

/// Closed-form bounds on |f_j|, the gradient norm, and the Hessian norm of a
/// single block objective over the radius-2rho ball:
///   l0 = 32 rho^4 + 2 |Y_j|_F^2
///   l1 = 32 rho^3 + 8 rho |Y_j|_F
///   l2 = 20 rho^2 + 2 |Y_j|_F
struct BoundsTriple {
  double l0 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double rho = 0.0;
};

BoundsTriple local_bounds(double rho, double block_norm);

/// Open stepsize bound (1 - 2 omega) / L; callers must step strictly below
/// it. Rejects omega >= 1/2 with a hint to apply lazy_fix.
double stepsize_generic(double lipschitz, double omega_value);

/// Open stepsize bound for the matrix-factorization objective:
/// (1 - 2 omega) / max_j [ (212 + 64 pi) rho^2 + 34 |Y_j|_F
///                         + ((4 + 4 pi) / rho^2) |Y_j|_F^2 ].
/// Internally cross-checks the denominator against the composition
/// l2 + 4 l1 / rho + (2 + 2 pi) l0 / rho^2 of local_bounds per block.
double stepsize_mf(double rho, double omega_value, std::span<const double> block_norms);

/// Radial window used to cap the objective outside the monitored ball:
/// value 1 inside radius rho, a smooth descent to 0 between rho and 2 rho,
/// 0 outside. slope is the magnitude of the radial derivative; on the middle
/// branch it equals (2/rho) sin^2(pi r / rho). hess_bound_ok reports whether
/// the analytic Hessian norm at this radius respects (2 + 2 pi) / rho^2.
struct WindowEval {
  double value = 0.0;
  double slope = 0.0;
  bool hess_bound_ok = true;
};

WindowEval window_eval(double radius, double rho);

}  // namespace dgdmf
