#include "dgdmf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "dgdmf/rng.hpp"
#include "dgdmf/svd.hpp"

namespace dgdmf {

namespace {

double vec_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

void normalize(std::vector<double>& v) {
  const double n = vec_norm(v);
  if (n == 0.0) return;
  for (double& x : v) x /= n;
}

// Deterministic sign convention: the largest-magnitude coordinate (lowest
// index on ties) is made nonnegative. Anchoring on the dominant coordinate
// keeps the flip from keying off iteration noise in near-zero entries.
void fix_sign(std::vector<double>& v) {
  std::size_t anchor = 0;
  double largest = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > largest) {
      largest = std::abs(v[i]);
      anchor = i;
    }
  }
  if (largest > 0.0 && v[anchor] < 0.0) {
    for (double& y : v) y = -y;
  }
}

// (H v)_i = B(e_i, v) with B(u, w) = (q(u + w) - q(u - w)) / 4.
std::vector<double> apply_form(const std::function<double(std::span<const double>)>& quadform,
                               std::span<const double> v) {
  const int dim = static_cast<int>(v.size());
  std::vector<double> plus(v.begin(), v.end());
  std::vector<double> minus(v.begin(), v.end());
  std::vector<double> out(static_cast<std::size_t>(dim), 0.0);
  for (int i = 0; i < dim; ++i) {
    plus[static_cast<std::size_t>(i)] += 1.0;
    minus[static_cast<std::size_t>(i)] -= 1.0;
    out[static_cast<std::size_t>(i)] = 0.25 * (quadform(plus) - quadform(minus));
    plus[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
    minus[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double n = 0.0;
  while (n == 0.0) {
    for (double& x : v) x = rng.gaussian();
    n = vec_norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

FactorPair unpack_pair_direction(std::span<const double> v, int rows, int cols, int rank) {
  DenseMatrix du(rows, rank);
  DenseMatrix dv(cols, rank);
  std::copy_n(v.begin(), du.values().size(), du.values().begin());
  std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(du.values().size()), dv.values().size(),
              dv.values().begin());
  return FactorPair{std::move(du), std::move(dv)};
}

}  // namespace

double consensus_error(const NetworkPoint& z) {
  if (z.copies.empty()) return 0.0;
  DenseMatrix mean = z.copies.front();
  for (std::size_t j = 1; j < z.copies.size(); ++j) {
    add_scaled(mean, 1.0, z.copies[j]);
  }
  const double inv = 1.0 / static_cast<double>(z.copies.size());
  for (double& v : mean.values()) v *= inv;
  double worst = 0.0;
  for (const auto& c : z.copies) {
    worst = std::max(worst, frob_norm(c - mean));
  }
  return worst;
}

double opt_gap_value(double f_val, double rank_residual_sq, double y_norm_sq) {
  const double gap = f_val - rank_residual_sq;
  const double slack = 1e-12 * (1.0 + y_norm_sq);
  if (gap < -slack) {
    throw NumericalError("opt_gap: value below the rank-constrained optimum");
  }
  return gap <= slack ? 0.0 : gap;
}

double opt_gap(const FactorPair& p, const DenseMatrix& y) {
  return opt_gap_value(f_value(p, y), rank_r_residual_sq(y, p.rank()), frob_norm_sq(y));
}

EigEstimate min_quadform_eig(const std::function<double(std::span<const double>)>& quadform,
                             int dim, int iters, std::uint64_t seed) {
  if (dim < 1) {
    throw DomainError("min_quadform_eig: dimension must be positive");
  }
  if (iters < 1) {
    throw DomainError("min_quadform_eig: need at least one iteration");
  }
  constexpr double kStabilityTol = 1e-9;
  Rng rng(seed);

  EigEstimate out;
  if (dim == 1) {
    out.lambda_min = quadform(std::vector<double>{1.0});
    out.witness = {1.0};
    out.converged = true;
    return out;
  }

  // Pass 1: unshifted iteration for an upper bound on the largest quotient
  // magnitude. |H v| <= |lambda|_max for unit v throughout.
  std::vector<double> v = random_unit(rng, dim);
  double bound = 0.0;
  for (int k = 0; k < iters; ++k) {
    std::vector<double> hv = apply_form(quadform, v);
    const double norm_hv = vec_norm(hv);
    if (norm_hv == 0.0) {
      // Zero operator as far as this vector can tell; the form is flat.
      out.lambda_min = 0.0;
      out.witness = std::move(v);
      fix_sign(out.witness);
      out.converged = true;
      return out;
    }
    const bool stable = std::abs(norm_hv - bound) <= kStabilityTol * (1.0 + norm_hv);
    bound = std::max(bound, norm_hv);
    v = std::move(hv);
    normalize(v);
    if (stable) break;
  }
  const double shift = 1.01 * bound + 1e-30;

  // Pass 2: power iteration on shift*I - H converges to the eigenvector of
  // the smallest eigenvalue of H.
  std::vector<double> u = random_unit(rng, dim);
  double rq = quadform(u);
  bool converged = false;
  int polish = 10;  // extra rounds after the quotient stabilizes clean up the witness
  for (int k = 0; k < iters; ++k) {
    std::vector<double> hu = apply_form(quadform, u);
    for (int i = 0; i < dim; ++i) {
      hu[static_cast<std::size_t>(i)] = shift * u[static_cast<std::size_t>(i)] - hu[static_cast<std::size_t>(i)];
    }
    const double n = vec_norm(hu);
    if (n == 0.0) break;  // u is an exact eigenvector of the shifted operator
    for (double& x : hu) x /= n;
    u = std::move(hu);
    const double next_rq = quadform(u);
    if (std::abs(next_rq - rq) <= kStabilityTol * (1.0 + std::abs(next_rq))) {
      converged = true;
      if (--polish <= 0) {
        rq = next_rq;
        break;
      }
    }
    rq = next_rq;
  }

  fix_sign(u);
  out.lambda_min = quadform(u);
  out.witness = std::move(u);
  out.converged = converged;
  return out;
}

std::string critical_kind_name(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::GlobalMin: return "GlobalMin";
    case CriticalKind::StrictSaddle: return "StrictSaddle";
    case CriticalKind::NotCritical: return "NotCritical";
  }
  return "?";
}

CriticalVerdict classify_critical(const FactorPair& p, const DenseMatrix& y, double tol_grad,
                                  double tol_saddle) {
  const double y_norm = frob_norm(y);
  if (tol_grad < 0.0) tol_grad = 1e-9 * (1.0 + y_norm);
  if (tol_saddle < 0.0) tol_saddle = 1e-8;

  CriticalVerdict verdict;
  const FactorPair g = grad_f(p, y);
  verdict.grad_norm = std::sqrt(frob_norm_sq(g.u) + frob_norm_sq(g.v));
  if (verdict.grad_norm > tol_grad) {
    verdict.kind = CriticalKind::NotCritical;
    return verdict;
  }

  if (opt_gap(p, y) <= tol_grad * (1.0 + y_norm * y_norm)) {
    verdict.kind = CriticalKind::GlobalMin;
    return verdict;
  }

  const int rows = p.u.rows();
  const int cols = p.v.rows();
  const int rank = p.rank();
  const int dim = (rows + cols) * rank;
  auto form = [&](std::span<const double> v) {
    return quadform_f(p, unpack_pair_direction(v, rows, cols, rank), y);
  };
  const EigEstimate est = min_quadform_eig(form, dim, 2000, 0x5eedULL);
  verdict.min_quadform = est.lambda_min;
  if (est.lambda_min < -tol_saddle) {
    verdict.kind = CriticalKind::StrictSaddle;
    verdict.witness = unpack_pair_direction(est.witness, rows, cols, rank);
    return verdict;
  }
  throw NumericalError(
      "classify_critical: critical point is neither a global minimum nor a strict saddle "
      "(grad_norm " + std::to_string(verdict.grad_norm) + ", min quadform estimate " +
      std::to_string(est.lambda_min) + ")");
}

FactorPair balance_factors(const FactorPair& p, double rank_tol) {
  const int rank = p.rank();
  if (p.v.cols() != rank) {
    throw DimensionError("balance_factors: factor ranks disagree");
  }
  const DenseMatrix product = matmul_nt(p.u, p.v);
  const SvdResult svd = reduced_svd(product, rank_tol);
  if (svd.rank() < rank) {
    throw DomainError("balance_factors: degenerate input, numerical rank " +
                      std::to_string(svd.rank()) + " below factor rank " + std::to_string(rank));
  }

  // Pseudoinverses of the factors via their reduced SVDs; both have full
  // column rank here because the product has rank r.
  auto pinv_apply = [&](const DenseMatrix& a, const DenseMatrix& rhs) {
    const SvdResult s = reduced_svd(a, rank_tol);
    if (s.rank() < a.cols()) {
      throw DomainError("balance_factors: factor is rank deficient");
    }
    DenseMatrix t = matmul_tn(s.left, rhs);  // rank x rhs_cols
    for (int i = 0; i < t.rows(); ++i) {
      for (int j = 0; j < t.cols(); ++j) {
        t(i, j) /= s.singular_values[static_cast<std::size_t>(i)];
      }
    }
    return matmul(s.right, t);
  };

  DenseMatrix p_scaled = svd.left;    // P sqrt(Sigma)
  DenseMatrix q_scaled = svd.right;   // Q sqrt(Sigma)
  for (int j = 0; j < rank; ++j) {
    const double root = std::sqrt(svd.singular_values[static_cast<std::size_t>(j)]);
    for (int i = 0; i < p_scaled.rows(); ++i) p_scaled(i, j) *= root;
    for (int i = 0; i < q_scaled.rows(); ++i) q_scaled(i, j) *= root;
  }

  const DenseMatrix d = pinv_apply(p.u, p_scaled);
  const DenseMatrix g = pinv_apply(p.v, q_scaled);
  return FactorPair{matmul(p.u, d), matmul(p.v, g)};
}

NetworkPoint lift_direction(const DenseMatrix& q_shared, std::vector<DenseMatrix> q_locals) {
  if (q_locals.empty()) {
    throw DimensionError("lift_direction: need at least one local block");
  }
  for (const auto& l : q_locals) {
    if (l.cols() != q_shared.cols()) {
      throw DimensionError("lift_direction: local block rank does not match the shared block");
    }
  }
  NetworkPoint q;
  q.copies.assign(q_locals.size(), q_shared);
  q.locals = std::move(q_locals);
  return q;
}

double symmetric_gradient_residual(const DenseMatrix& u, const DenseMatrix& vj,
                                   const DenseMatrix& yj) {
  auto [gu, gv] = grad_f_block(u, vj, yj);
  const double lhs = frob_dot(gu, u);
  const double rhs = frob_dot(gv, vj);
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

}  // namespace dgdmf
