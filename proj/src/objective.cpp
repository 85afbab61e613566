#include "dgdmf/objective.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dgdmf {

namespace {

constexpr double kPi = std::numbers::pi;

void require_partition_match(const NetworkPoint& z, const DataPartition& d) {
  if (z.node_count() != d.node_count()) {
    throw DimensionError("network point and partition disagree on node count");
  }
  for (int j = 0; j < z.node_count(); ++j) {
    const auto& vj = z.locals[static_cast<std::size_t>(j)];
    if (vj.rows() != d.widths[static_cast<std::size_t>(j)]) {
      throw DimensionError("local block " + std::to_string(j + 1) + " height does not match partition");
    }
  }
}

void require_same_dims(const NetworkPoint& a, const NetworkPoint& b) {
  if (a.node_count() != b.node_count()) {
    throw DimensionError("network points disagree on node count");
  }
  for (int j = 0; j < a.node_count(); ++j) {
    const auto& ca = a.copies[static_cast<std::size_t>(j)];
    const auto& cb = b.copies[static_cast<std::size_t>(j)];
    const auto& la = a.locals[static_cast<std::size_t>(j)];
    const auto& lb = b.locals[static_cast<std::size_t>(j)];
    if (ca.rows() != cb.rows() || ca.cols() != cb.cols() || la.rows() != lb.rows() ||
        la.cols() != lb.cols()) {
      throw DimensionError("network points disagree on block shapes");
    }
  }
}

void require_weights_match(const NetworkPoint& z, const GDWeights& w) {
  if (w.size != z.node_count()) {
    throw DimensionError("weight matrix size does not match node count");
  }
}

// Residual U Vj^T - Yj for one block.
DenseMatrix block_residual(const DenseMatrix& u, const DenseMatrix& vj, const DenseMatrix& yj) {
  if (u.cols() != vj.cols()) {
    throw DimensionError("factor ranks do not match");
  }
  if (u.rows() != yj.rows() || vj.rows() != yj.cols()) {
    throw DimensionError("factor shapes do not match the data block");
  }
  DenseMatrix r = matmul_nt(u, vj);
  const double* py = yj.values().data();
  double* pr = r.values().data();
  for (std::size_t i = 0; i < r.values().size(); ++i) {
    pr[i] -= py[i];
  }
  return r;
}

}  // namespace

DataPartition DataPartition::split(DenseMatrix y, std::vector<int> widths) {
  if (widths.empty()) {
    throw DimensionError("DataPartition: no blocks");
  }
  DataPartition d;
  d.blocks = split_cols(y, widths);  // validates widths
  d.y = std::move(y);
  d.widths = std::move(widths);
  return d;
}

DataPartition DataPartition::even_split(DenseMatrix y, int node_count) {
  if (node_count < 1 || node_count > y.cols()) {
    throw DimensionError("DataPartition: node count must be in [1, cols]");
  }
  const int base = y.cols() / node_count;
  const int remainder = y.cols() % node_count;
  std::vector<int> widths(static_cast<std::size_t>(node_count), base);
  for (int j = 0; j < remainder; ++j) {
    ++widths[static_cast<std::size_t>(j)];
  }
  return split(std::move(y), std::move(widths));
}

std::vector<double> DataPartition::block_norms() const {
  std::vector<double> norms;
  norms.reserve(blocks.size());
  for (const auto& b : blocks) {
    norms.push_back(frob_norm(b));
  }
  return norms;
}

long NetDims::total_dim() const {
  long dim = static_cast<long>(node_count) * rows * rank;
  for (int w : widths) {
    dim += static_cast<long>(w) * rank;
  }
  return dim;
}

NetDims NetworkPoint::dims() const {
  NetDims d;
  d.node_count = node_count();
  d.rows = copies.empty() ? 0 : copies.front().rows();
  d.rank = copies.empty() ? 0 : copies.front().cols();
  d.widths.reserve(locals.size());
  for (const auto& l : locals) {
    d.widths.push_back(l.rows());
  }
  return d;
}

NetworkPoint NetworkPoint::zeros(const NetDims& dims) {
  if (dims.node_count < 1 || static_cast<int>(dims.widths.size()) != dims.node_count) {
    throw DimensionError("NetworkPoint: bad dims");
  }
  NetworkPoint z;
  z.copies.reserve(static_cast<std::size_t>(dims.node_count));
  z.locals.reserve(static_cast<std::size_t>(dims.node_count));
  for (int j = 0; j < dims.node_count; ++j) {
    z.copies.emplace_back(dims.rows, dims.rank);
    z.locals.emplace_back(dims.widths[static_cast<std::size_t>(j)], dims.rank);
  }
  return z;
}

NetworkPoint NetworkPoint::consensus_lift(const FactorPair& p, std::span<const int> widths) {
  NetworkPoint z;
  z.locals = split_rows(p.v, widths);
  z.copies.assign(widths.size(), p.u);
  return z;
}

FactorPair NetworkPoint::assemble() const {
  if (copies.empty()) {
    throw DimensionError("NetworkPoint::assemble: empty point");
  }
  DenseMatrix mean = copies.front();
  for (std::size_t j = 1; j < copies.size(); ++j) {
    add_scaled(mean, 1.0, copies[j]);
  }
  const double inv = 1.0 / static_cast<double>(copies.size());
  for (double& v : mean.values()) {
    v *= inv;
  }
  return FactorPair{std::move(mean), vstack(locals)};
}

double ball_norm(const NetworkPoint& z) {
  double copies_sq = 0.0;
  for (const auto& c : z.copies) {
    copies_sq += frob_norm_sq(c);
  }
  double locals_sq = 0.0;
  for (const auto& l : z.locals) {
    locals_sq += frob_norm_sq(l);
  }
  return std::sqrt(copies_sq / static_cast<double>(z.node_count()) + locals_sq);
}

double concat_norm_sq(const NetworkPoint& z) {
  double acc = 0.0;
  for (const auto& c : z.copies) acc += frob_norm_sq(c);
  for (const auto& l : z.locals) acc += frob_norm_sq(l);
  return acc;
}

double concat_norm(const NetworkPoint& z) { return std::sqrt(concat_norm_sq(z)); }

double concat_dist(const NetworkPoint& a, const NetworkPoint& b) {
  require_same_dims(a, b);
  double acc = 0.0;
  for (int j = 0; j < a.node_count(); ++j) {
    const auto& ca = a.copies[static_cast<std::size_t>(j)].values();
    const auto& cb = b.copies[static_cast<std::size_t>(j)].values();
    for (std::size_t i = 0; i < ca.size(); ++i) {
      const double dv = ca[i] - cb[i];
      acc += dv * dv;
    }
    const auto& la = a.locals[static_cast<std::size_t>(j)].values();
    const auto& lb = b.locals[static_cast<std::size_t>(j)].values();
    for (std::size_t i = 0; i < la.size(); ++i) {
      const double dv = la[i] - lb[i];
      acc += dv * dv;
    }
  }
  return std::sqrt(acc);
}

NetworkPoint add_scaled(const NetworkPoint& a, double s, const NetworkPoint& b) {
  require_same_dims(a, b);
  NetworkPoint out = a;
  for (int j = 0; j < a.node_count(); ++j) {
    add_scaled(out.copies[static_cast<std::size_t>(j)], s, b.copies[static_cast<std::size_t>(j)]);
    add_scaled(out.locals[static_cast<std::size_t>(j)], s, b.locals[static_cast<std::size_t>(j)]);
  }
  return out;
}

double f_value(const FactorPair& p, const DenseMatrix& y) {
  return frob_norm_sq(block_residual(p.u, p.v, y));
}

std::vector<double> f_block_values(const FactorPair& p, const DataPartition& d) {
  const auto v_blocks = split_rows(p.v, d.widths);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(d.node_count()));
  for (int j = 0; j < d.node_count(); ++j) {
    terms.push_back(
        frob_norm_sq(block_residual(p.u, v_blocks[static_cast<std::size_t>(j)], d.block(j))));
  }
  return terms;
}

double f_value(const FactorPair& p, const DataPartition& d) {
  const double direct = f_value(p, d.y);
  double blockwise = 0.0;
  for (double term : f_block_values(p, d)) {
    blockwise += term;
  }
  if (std::abs(direct - blockwise) > 1e-12 * (1.0 + std::abs(direct))) {
    throw NumericalError("f_value: blockwise decomposition disagrees with the direct value");
  }
  return direct;
}

double g_value(const NetworkPoint& z, const GDWeights& w, const DataPartition& d) {
  require_partition_match(z, d);
  require_weights_match(z, w);
  double acc = 0.0;
  for (int j = 0; j < z.node_count(); ++j) {
    const auto& uj = z.copies[static_cast<std::size_t>(j)];
    acc += frob_norm_sq(block_residual(uj, z.locals[static_cast<std::size_t>(j)], d.block(j)));
    for (int i = 0; i < z.node_count(); ++i) {
      const double wji = w.w(j, i);
      if (wji == 0.0) continue;
      const auto& ui = z.copies[static_cast<std::size_t>(i)];
      double diff_sq = 0.0;
      const double* pj = uj.values().data();
      const double* pi = ui.values().data();
      for (std::size_t t = 0; t < uj.values().size(); ++t) {
        const double dv = pj[t] - pi[t];
        diff_sq += dv * dv;
      }
      acc += wji * diff_sq;
    }
  }
  return acc;
}

std::pair<DenseMatrix, DenseMatrix> grad_f_block(const DenseMatrix& u, const DenseMatrix& vj,
                                                 const DenseMatrix& yj) {
  const DenseMatrix r = block_residual(u, vj, yj);
  return {2.0 * matmul(r, vj), 2.0 * matmul_tn(r, u)};
}

FactorPair grad_f(const FactorPair& p, const DenseMatrix& y) {
  auto [gu, gv] = grad_f_block(p.u, p.v, y);
  return FactorPair{std::move(gu), std::move(gv)};
}

NetworkPoint grad_g(const NetworkPoint& z, const GDWeights& w, const DataPartition& d) {
  require_partition_match(z, d);
  require_weights_match(z, w);
  NetworkPoint g;
  g.copies.reserve(z.copies.size());
  g.locals.reserve(z.locals.size());
  for (int j = 0; j < z.node_count(); ++j) {
    const auto& uj = z.copies[static_cast<std::size_t>(j)];
    auto [gu, gv] = grad_f_block(uj, z.locals[static_cast<std::size_t>(j)], d.block(j));
    for (int i = 0; i < z.node_count(); ++i) {
      const double wji = w.w(j, i);
      if (wji == 0.0) continue;
      const auto& ui = z.copies[static_cast<std::size_t>(i)];
      double* pg = gu.values().data();
      const double* pj = uj.values().data();
      const double* pi = ui.values().data();
      const double coeff = 4.0 * wji;
      for (std::size_t t = 0; t < gu.values().size(); ++t) {
        pg[t] += coeff * (pj[t] - pi[t]);
      }
    }
    g.copies.push_back(std::move(gu));
    g.locals.push_back(std::move(gv));
  }
  return g;
}

double quadform_f_block(const DenseMatrix& u, const DenseMatrix& vj, const DenseMatrix& yj,
                        const DenseMatrix& du, const DenseMatrix& dvj) {
  const DenseMatrix r = block_residual(u, vj, yj);
  DenseMatrix mixed = matmul_nt(du, vj);
  add_scaled(mixed, 1.0, matmul_nt(u, dvj));
  const double cross = frob_dot(r, matmul_nt(du, dvj));
  return 2.0 * (frob_norm_sq(mixed) + 2.0 * cross);
}

double quadform_f(const FactorPair& p, const FactorPair& dir, const DenseMatrix& y) {
  if (p.u.rows() != dir.u.rows() || p.u.cols() != dir.u.cols() || p.v.rows() != dir.v.rows() ||
      p.v.cols() != dir.v.cols()) {
    throw DimensionError("quadform_f: direction shape does not match the point");
  }
  return quadform_f_block(p.u, p.v, y, dir.u, dir.v);
}

double quadform_g(const NetworkPoint& z, const NetworkPoint& q, const GDWeights& w,
                  const DataPartition& d) {
  require_partition_match(z, d);
  require_same_dims(z, q);
  require_weights_match(z, w);
  double acc = 0.0;
  for (int j = 0; j < z.node_count(); ++j) {
    acc += quadform_f_block(z.copies[static_cast<std::size_t>(j)],
                            z.locals[static_cast<std::size_t>(j)], d.block(j),
                            q.copies[static_cast<std::size_t>(j)],
                            q.locals[static_cast<std::size_t>(j)]);
    const auto& qj = q.copies[static_cast<std::size_t>(j)];
    for (int i = 0; i < z.node_count(); ++i) {
      const double wji = w.w(j, i);
      if (wji == 0.0) continue;
      const auto& qi = q.copies[static_cast<std::size_t>(i)];
      double diff_sq = 0.0;
      const double* pj = qj.values().data();
      const double* pi = qi.values().data();
      for (std::size_t t = 0; t < qj.values().size(); ++t) {
        const double dv = pj[t] - pi[t];
        diff_sq += dv * dv;
      }
      acc += 2.0 * wji * diff_sq;
    }
  }
  return acc;
}

double lipschitz_Lg(double lipschitz, double omega_value, double mu) {
  if (!(mu > 0.0)) {
    throw DomainError("lipschitz_Lg: stepsize must be positive");
  }
  return lipschitz + 2.0 * omega_value / mu;
}

BoundsTriple local_bounds(double rho, double block_norm) {
  if (!(rho > 0.0)) {
    throw DomainError("local_bounds: rho must be positive");
  }
  BoundsTriple b;
  b.rho = rho;
  b.l0 = 32.0 * rho * rho * rho * rho + 2.0 * block_norm * block_norm;
  b.l1 = 32.0 * rho * rho * rho + 8.0 * rho * block_norm;
  b.l2 = 20.0 * rho * rho + 2.0 * block_norm;
  return b;
}

double stepsize_generic(double lipschitz, double omega_value) {
  if (!(lipschitz > 0.0)) {
    throw DomainError("stepsize_generic: Lipschitz constant must be positive");
  }
  if (omega_value < 0.0) {
    throw DomainError("stepsize_generic: omega must be nonnegative");
  }
  if (omega_value >= 0.5) {
    throw DomainError("stepsize_generic: omega >= 1/2; apply lazy_fix to the mixing matrix");
  }
  return (1.0 - 2.0 * omega_value) / lipschitz;
}

double stepsize_mf(double rho, double omega_value, std::span<const double> block_norms) {
  if (!(rho > 0.0)) {
    throw DomainError("stepsize_mf: rho must be positive");
  }
  if (omega_value < 0.0) {
    throw DomainError("stepsize_mf: omega must be nonnegative");
  }
  if (omega_value >= 0.5) {
    throw DomainError("stepsize_mf: omega >= 1/2; apply lazy_fix to the mixing matrix");
  }
  if (block_norms.empty()) {
    throw DomainError("stepsize_mf: need at least one block norm");
  }
  double denom = 0.0;
  for (double bn : block_norms) {
    const double direct =
        (212.0 + 64.0 * kPi) * rho * rho + 34.0 * bn + ((4.0 + 4.0 * kPi) / (rho * rho)) * bn * bn;
    const BoundsTriple b = local_bounds(rho, bn);
    const double composed = b.l2 + 4.0 * b.l1 / rho + (2.0 + 2.0 * kPi) * b.l0 / (rho * rho);
    if (std::abs(direct - composed) > 1e-12 * direct) {
      throw NumericalError("stepsize_mf: closed form disagrees with the bounds composition");
    }
    denom = std::max(denom, direct);
  }
  return (1.0 - 2.0 * omega_value) / denom;
}

WindowEval window_eval(double radius, double rho) {
  if (!(rho > 0.0)) {
    throw DomainError("window_eval: rho must be positive");
  }
  if (radius < 0.0) {
    throw DomainError("window_eval: radius must be nonnegative");
  }
  WindowEval out;
  const double hess_cap = (2.0 + 2.0 * kPi) / (rho * rho);
  if (radius <= rho) {
    out.value = 1.0;
    out.slope = 0.0;
    out.hess_bound_ok = true;
  } else if (radius < 2.0 * rho) {
    const double ratio = radius / rho;
    out.value = 2.0 - ratio + std::sin(2.0 * kPi * ratio) / (2.0 * kPi);
    const double s = std::sin(kPi * ratio);
    out.slope = 2.0 / rho * s * s;
    const double hess_norm = std::abs(2.0 / (rho * radius) * std::sin(kPi * ratio) -
                                      2.0 * kPi / (rho * rho) * std::sin(2.0 * kPi * ratio));
    out.hess_bound_ok = hess_norm <= hess_cap * (1.0 + 1e-12);
  } else {
    out.value = 0.0;
    out.slope = 0.0;
    out.hess_bound_ok = true;
  }
  return out;
}

}  // namespace dgdmf
