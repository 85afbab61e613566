#include "dgdmf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

#include "dgdmf/geometry.hpp"
#include "dgdmf/svd.hpp"

#include "json.hpp"

namespace dgdmf {

namespace {

void require_mixing_match(const NetworkPoint& z, const MixingMatrix& m) {
  if (m.size() != z.node_count()) {
    throw DimensionError("mixing matrix size does not match node count");
  }
}

}  // namespace

std::string status_name(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::GradToleranceMet: return "GradToleranceMet";
    case TerminalStatus::MaxIters: return "MaxIters";
    case TerminalStatus::LeftBall: return "LeftBall";
  }
  return "?";
}

void RunConfig::validate() const {
  if (!(mu > 0.0)) throw ConfigError("run config: stepsize must be positive");
  if (!(rho > 0.0)) throw ConfigError("run config: ball radius must be positive");
  if (max_iters < 0) throw ConfigError("run config: max_iters must be nonnegative");
  if (!(tol_grad > 0.0)) throw ConfigError("run config: tol_grad must be positive");
  if (!(tol_consensus > 0.0)) throw ConfigError("run config: tol_consensus must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("run config: safety must be in (0, 1]");
}

bool IterateTrace::g_nonincreasing(double slack) const {
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double prev = records[k - 1].g_value;
    if (records[k].g_value > prev + slack * (1.0 + std::abs(prev))) {
      return false;
    }
  }
  return true;
}

NetworkPoint dgd_local_step(const NetworkPoint& z, const MixingMatrix& m, double mu,
                            const DataPartition& d) {
  require_mixing_match(z, m);
  if (z.node_count() != d.node_count()) {
    throw DimensionError("network point and partition disagree on node count");
  }
  NetworkPoint next;
  next.copies.reserve(z.copies.size());
  next.locals.reserve(z.locals.size());
  for (int j = 0; j < z.node_count(); ++j) {
    const auto& uj = z.copies[static_cast<std::size_t>(j)];
    const auto& vj = z.locals[static_cast<std::size_t>(j)];
    auto [gu, gv] = grad_f_block(uj, vj, d.block(j));

    DenseMatrix mixed(uj.rows(), uj.cols());
    for (int i = 0; i < z.node_count(); ++i) {
      const double wji = m(j, i);
      if (wji == 0.0) continue;
      add_scaled(mixed, wji, z.copies[static_cast<std::size_t>(i)]);
    }
    add_scaled(mixed, -mu, gu);
    DenseMatrix local = vj;
    add_scaled(local, -mu, gv);
    next.copies.push_back(std::move(mixed));
    next.locals.push_back(std::move(local));
  }
  return next;
}

NetworkPoint gd_g_step(const NetworkPoint& z, const GDWeights& w, double mu,
                       const DataPartition& d) {
  return add_scaled(z, -mu, grad_g(z, w, d));
}

FactorPair gd_central_step(const FactorPair& p, double mu, const DenseMatrix& y) {
  auto [gu, gv] = grad_f_block(p.u, p.v, y);
  FactorPair next = p;
  add_scaled(next.u, -mu, gu);
  add_scaled(next.v, -mu, gv);
  return next;
}

IterateTrace run(Engine engine, const NetworkPoint& z0, const RunConfig& cfg,
                 const MixingMatrix& m, const DataPartition& d) {
  cfg.validate();
  require_mixing_match(z0, m);

  const int rank = z0.copies.empty() ? 0 : z0.copies.front().cols();
  const double rank_residual = rank_r_residual_sq(d.y, rank);
  const double y_norm_sq = frob_norm_sq(d.y);
  const GDWeights w = to_gd_weights(m, cfg.mu);

  IterateTrace trace;
  trace.records.reserve(static_cast<std::size_t>(std::min<long>(cfg.max_iters + 1, 1 << 20)));

  NetworkPoint z = z0;
  FactorPair p = z0.assemble();  // state for the central engine

  for (long k = 0;; ++k) {
    TraceRecord rec;
    rec.iter = k;
    if (engine == Engine::Central) {
      auto [gu, gv] = grad_f_block(p.u, p.v, d.y);
      rec.f_central = f_value(p, d.y);
      rec.g_value = rec.f_central;
      rec.grad_norm = std::sqrt(frob_norm_sq(gu) + frob_norm_sq(gv));
      rec.consensus_err = 0.0;
      rec.z_norm = std::sqrt(frob_norm_sq(p.u) + frob_norm_sq(p.v));
    } else {
      rec.f_central = f_value(z.assemble(), d.y);
      rec.g_value = g_value(z, w, d);
      rec.grad_norm = concat_norm(grad_g(z, w, d));
      rec.consensus_err = consensus_error(z);
      rec.z_norm = ball_norm(z);
    }
    rec.opt_gap = opt_gap_value(rec.f_central, rank_residual, y_norm_sq);
    rec.in_ball = rec.z_norm < cfg.rho;
    if (!rec.in_ball) {
      trace.left_ball_ever = true;
    }
    trace.records.push_back(rec);

    if (rec.grad_norm <= cfg.tol_grad) {
      trace.status = TerminalStatus::GradToleranceMet;
      trace.iters = k;
      break;
    }
    if (!rec.in_ball && cfg.halt_on_leave) {
      trace.status = TerminalStatus::LeftBall;
      trace.iters = k;
      break;
    }
    if (k == cfg.max_iters) {
      trace.status = TerminalStatus::MaxIters;
      trace.iters = k;
      break;
    }

    switch (engine) {
      case Engine::DgdLocal:
        z = dgd_local_step(z, m, cfg.mu, d);
        break;
      case Engine::GdOnG:
        z = gd_g_step(z, w, cfg.mu, d);
        break;
      case Engine::Central:
        p = gd_central_step(p, cfg.mu, d.y);
        break;
    }
  }
  return trace;
}

double equivalence_check(const NetworkPoint& z0, const MixingMatrix& m, double mu,
                         const DataPartition& d, int iterations) {
  if (iterations < 1) {
    throw DomainError("equivalence_check: need at least one iteration");
  }
  const GDWeights w = to_gd_weights(m, mu);
  NetworkPoint za = z0;
  NetworkPoint zb = z0;
  double worst = 0.0;
  for (int k = 0; k < iterations; ++k) {
    za = dgd_local_step(za, m, mu, d);
    zb = gd_g_step(zb, w, mu, d);
    const double dist = concat_dist(za, zb);
    const double scale = std::max(concat_norm(za), concat_norm(zb));
    worst = std::max(worst, scale > 0.0 ? dist / scale : dist);
  }
  return worst;
}

void write_trace_csv(std::ostream& out, const IterateTrace& trace) {
  out << "iter,f_central,g_value,grad_norm,consensus_err,opt_gap,z_norm,in_ball\n";
  char line[512];
  for (const auto& r : trace.records) {
    std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.iter,
                  r.f_central, r.g_value, r.grad_norm, r.consensus_err, r.opt_gap, r.z_norm,
                  r.in_ball ? 1 : 0);
    out << line;
  }
}

std::string summary_json(const IterateTrace& trace) {
  const TraceRecord& last = trace.final_record();
  nlohmann::ordered_json j;
  j["status"] = status_name(trace.status);
  j["iters"] = trace.iters;
  j["final_f"] = last.f_central;
  j["final_consensus_err"] = last.consensus_err;
  j["final_opt_gap"] = last.opt_gap;
  j["left_ball_ever"] = trace.left_ball_ever;
  return j.dump(2) + "\n";
}

}  // namespace dgdmf
