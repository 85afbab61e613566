#pragma once

#include <vector>

#include "dgdmf/matrix.hpp"

namespace dgdmf {

/// Reduced singular value decomposition A = left * diag(singular_values) * right^T.
/// Columns of left/right are orthonormal; singular values are sorted descending
/// and values below rank_tol * sigma_max are truncated away. Sign convention:
/// the first nonzero entry of each left singular vector is nonnegative.
struct SvdResult {
  DenseMatrix left;
  std::vector<double> singular_values;
  DenseMatrix right;

  int rank() const { return static_cast<int>(singular_values.size()); }
  DenseMatrix reconstruct() const;
  /// Rank-k truncation of this decomposition, k <= rank().
  DenseMatrix truncated(int k) const;
};

/// One-sided Jacobi SVD for desk-scale dense matrices. Throws NumericalError
/// if the rotation sweeps do not converge within the documented cap (100).
SvdResult reduced_svd(const DenseMatrix& a, double rank_tol = 1e-12);

/// All min(rows, cols) singular values, descending, without truncation.
std::vector<double> singular_values(const DenseMatrix& a);

/// Sum of all singular values.
double nuclear_norm(const DenseMatrix& a);

/// Squared distance to the closest rank-r matrix: sum of sigma_i^2 for i > r.
double rank_r_residual_sq(const DenseMatrix& a, int r);

}  // namespace dgdmf
