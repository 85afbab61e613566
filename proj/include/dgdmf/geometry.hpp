#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dgdmf/objective.hpp"

namespace dgdmf {

/// Maximum copy deviation from the mean copy, max_j |U^j - Ubar|_F.
double consensus_error(const NetworkPoint& z);

/// f_value(p, Y) minus the best achievable rank-r value |Y - Y_r|_F^2
/// (r = p.rank()). Values within rounding of zero are clipped to zero; a
/// significantly negative gap indicates a broken decomposition and throws.
double opt_gap(const FactorPair& p, const DenseMatrix& y);

/// Gap computation shared with the solver loop, which precomputes the
/// rank-r residual once per run.
double opt_gap_value(double f_val, double rank_residual_sq, double y_norm_sq);

/// Estimate of the smallest Rayleigh quotient of a symmetric quadratic form,
/// with a unit witness direction attaining the estimate. The estimate is an
/// upper bound on the true minimum eigenvalue.
struct EigEstimate {
  double lambda_min = 0.0;
  std::vector<double> witness;
  /// False when the Rayleigh quotient failed to stabilize (relative change
  /// above 1e-9) within the iteration cap.
  bool converged = false;
};

/// Shifted power iteration on a quadratic-form oracle: an unshifted pass
/// estimates the largest quotient magnitude, the shifted pass then isolates
/// the smallest eigenvalue. Matrix-vector products are synthesized from the
/// form by polarization. Witness sign convention: the largest-magnitude
/// coordinate is nonnegative.
EigEstimate min_quadform_eig(const std::function<double(std::span<const double>)>& quadform,
                             int dim, int iters, std::uint64_t seed);

enum class CriticalKind { GlobalMin, StrictSaddle, NotCritical };

std::string critical_kind_name(CriticalKind kind);

struct CriticalVerdict {
  CriticalKind kind = CriticalKind::NotCritical;
  double grad_norm = 0.0;
  /// Smallest Rayleigh quotient estimate (normalized by direction norm^2);
  /// zero when the estimate was not computed.
  double min_quadform = 0.0;
  std::optional<FactorPair> witness;
};

/// Classifies a point of the factored objective: NotCritical when the
/// gradient exceeds tol_grad; otherwise GlobalMin when the optimality gap is
/// within tol_grad * (1 + |Y|_F^2); otherwise StrictSaddle when a negative
/// curvature direction below -tol_saddle is found. A critical point passing
/// neither test throws NumericalError: no such point should exist.
/// Negative tolerances select the defaults tol_grad = 1e-9 (1 + |Y|_F) and
/// tol_saddle = 1e-8.
CriticalVerdict classify_critical(const FactorPair& p, const DenseMatrix& y,
                                  double tol_grad = -1.0, double tol_saddle = -1.0);

/// Rebalances a non-degenerate factor pair onto the singular-value scaling:
/// the product is preserved and the output Gram matrices agree,
/// Unew^T Unew == Vnew^T Vnew. Inputs whose product has numerical rank below
/// the factor rank are rejected.
FactorPair balance_factors(const FactorPair& p, double rank_tol = 1e-12);

/// Network direction with every copy block equal to q_shared and the given
/// local blocks. At a consensus point this turns a direction of the factored
/// objective into a direction of the network objective with equal quadratic
/// form.
NetworkPoint lift_direction(const DenseMatrix& q_shared, std::vector<DenseMatrix> q_locals);

/// |<grad_U f_j, U> - <grad_Vj f_j, V_j>| / (1 + |<grad_U f_j, U>|). Zero up
/// to rounding for every (U, V_j, Y_j) by trace cyclicity.
double symmetric_gradient_residual(const DenseMatrix& u, const DenseMatrix& vj,
                                   const DenseMatrix& yj);

}  // namespace dgdmf
