#include "dgdmf/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace dgdmf {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffTol = 1e-14;

struct CoreResult {
  DenseMatrix work;  // rotated copy of the input; columns mutually orthogonal
  DenseMatrix v;     // accumulated right rotations, orthogonal
};

// One-sided Jacobi on a tall matrix (rows >= cols): applies plane rotations
// on the right until all column pairs are orthogonal relative to kOffTol.
CoreResult one_sided_jacobi(DenseMatrix w) {
  const int rows = w.rows();
  const int cols = w.cols();
  DenseMatrix v = DenseMatrix::identity(cols);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_off = 0.0;
    for (int p = 0; p < cols - 1; ++p) {
      for (int q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < rows; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          app += wp * wp;
          aqq += wq * wq;
          apq += wp * wq;
        }
        if (app == 0.0 || aqq == 0.0) continue;
        const double off = std::abs(apq) / std::sqrt(app * aqq);
        max_off = std::max(max_off, off);
        if (off <= kOffTol) continue;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (int i = 0; i < rows; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = cs * wp - sn * wq;
          w(i, q) = sn * wp + cs * wq;
        }
        for (int i = 0; i < cols; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = cs * vp - sn * vq;
          v(i, q) = sn * vp + cs * vq;
        }
      }
    }
    if (max_off <= kOffTol) {
      return {std::move(w), std::move(v)};
    }
  }
  throw NumericalError("reduced_svd: Jacobi sweeps did not converge within " +
                       std::to_string(kMaxSweeps) + " sweeps");
}

struct ThinSvd {
  DenseMatrix u;
  std::vector<double> sigma;  // descending, length = cols of the tall input
  DenseMatrix v;
};

ThinSvd thin_svd_tall(const DenseMatrix& a) {
  CoreResult core = one_sided_jacobi(a);
  const int rows = core.work.rows();
  const int cols = core.work.cols();
  std::vector<double> norms(cols, 0.0);
  for (int j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (int i = 0; i < rows; ++i) {
      acc += core.work(i, j) * core.work(i, j);
    }
    norms[j] = std::sqrt(acc);
  }
  std::vector<int> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return norms[x] > norms[y]; });

  ThinSvd out;
  out.u = DenseMatrix(rows, cols);
  out.v = DenseMatrix(cols, cols);
  out.sigma.resize(cols);
  for (int j = 0; j < cols; ++j) {
    const int src = order[j];
    const double s = norms[src];
    out.sigma[j] = s;
    if (s > 0.0) {
      for (int i = 0; i < rows; ++i) {
        out.u(i, j) = core.work(i, src) / s;
      }
    }
    for (int i = 0; i < cols; ++i) {
      out.v(i, j) = core.v(i, src);
    }
  }
  return out;
}

DenseMatrix keep_columns(const DenseMatrix& a, int k) {
  DenseMatrix out(a.rows(), k);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < k; ++j) {
      out(i, j) = a(i, j);
    }
  }
  return out;
}

}  // namespace

DenseMatrix SvdResult::reconstruct() const { return truncated(rank()); }

DenseMatrix SvdResult::truncated(int k) const {
  if (k < 0 || k > rank()) {
    throw DimensionError("SvdResult::truncated: rank out of range");
  }
  DenseMatrix out(left.rows(), right.rows());
  for (int l = 0; l < k; ++l) {
    const double s = singular_values[static_cast<std::size_t>(l)];
    for (int i = 0; i < left.rows(); ++i) {
      const double u = s * left(i, l);
      for (int j = 0; j < right.rows(); ++j) {
        out(i, j) += u * right(j, l);
      }
    }
  }
  return out;
}

SvdResult reduced_svd(const DenseMatrix& a, double rank_tol) {
  if (rank_tol <= 0.0) {
    throw DomainError("reduced_svd: rank_tol must be positive");
  }
  if (a.empty()) {
    throw DimensionError("reduced_svd: empty input");
  }
  const bool flip = a.rows() < a.cols();
  ThinSvd thin = thin_svd_tall(flip ? transpose(a) : a);

  const double sigma_max = thin.sigma.empty() ? 0.0 : thin.sigma.front();
  int k = 0;
  for (double s : thin.sigma) {
    if (sigma_max > 0.0 && s >= rank_tol * sigma_max) {
      ++k;
    }
  }

  SvdResult out;
  out.singular_values.assign(thin.sigma.begin(), thin.sigma.begin() + k);
  if (flip) {
    out.left = keep_columns(thin.v, k);
    out.right = keep_columns(thin.u, k);
  } else {
    out.left = keep_columns(thin.u, k);
    out.right = keep_columns(thin.v, k);
  }

  // Orient each pair so the first nonzero entry of the left vector is >= 0.
  for (int j = 0; j < k; ++j) {
    double lead = 0.0;
    for (int i = 0; i < out.left.rows(); ++i) {
      if (out.left(i, j) != 0.0) {
        lead = out.left(i, j);
        break;
      }
    }
    if (lead < 0.0) {
      for (int i = 0; i < out.left.rows(); ++i) out.left(i, j) = -out.left(i, j);
      for (int i = 0; i < out.right.rows(); ++i) out.right(i, j) = -out.right(i, j);
    }
  }
  return out;
}

std::vector<double> singular_values(const DenseMatrix& a) {
  if (a.empty()) {
    throw DimensionError("singular_values: empty input");
  }
  const bool flip = a.rows() < a.cols();
  return thin_svd_tall(flip ? transpose(a) : a).sigma;
}

double nuclear_norm(const DenseMatrix& a) {
  const auto sigma = singular_values(a);
  double acc = 0.0;
  for (double s : sigma) acc += s;
  return acc;
}

double rank_r_residual_sq(const DenseMatrix& a, int r) {
  if (r < 0) {
    throw DomainError("rank_r_residual_sq: negative rank");
  }
  const auto sigma = singular_values(a);
  double acc = 0.0;
  for (std::size_t i = static_cast<std::size_t>(r); i < sigma.size(); ++i) {
    acc += sigma[i] * sigma[i];
  }
  return acc;
}

}  // namespace dgdmf
