#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgdmf/objective.hpp"
#include "dgdmf/topology.hpp"

namespace dgdmf {

enum class Engine { DgdLocal, GdOnG, Central };

enum class TerminalStatus { GradToleranceMet, MaxIters, LeftBall };

std::string status_name(TerminalStatus status);

struct RunConfig {
  double mu = 0.0;             // stepsize (resolved; auto handling lives in the harness)
  double rho = 0.0;            // monitoring ball radius
  long max_iters = 200000;
  double tol_grad = 0.0;       // absolute gradient-norm threshold
  double tol_consensus = 1e-6;
  std::uint64_t seed = 0;
  double safety = 0.99;
  /// When true, leaving the ball terminates the run with status LeftBall;
  /// by default the event is only recorded.
  bool halt_on_leave = false;

  void validate() const;
};

struct TraceRecord {
  long iter = 0;
  double f_central = 0.0;
  double g_value = 0.0;
  double grad_norm = 0.0;
  double consensus_err = 0.0;
  double opt_gap = 0.0;
  double z_norm = 0.0;
  bool in_ball = true;
};

struct IterateTrace {
  std::vector<TraceRecord> records;
  TerminalStatus status = TerminalStatus::MaxIters;
  long iters = 0;
  bool left_ball_ever = false;

  const TraceRecord& final_record() const { return records.back(); }
  /// True when g never increases between consecutive records beyond
  /// slack * (1 + |g|).
  bool g_nonincreasing(double slack = 1e-12) const;
};

/// One synchronous round of the distributed update: every copy is mixed with
/// its neighbors' iteration-k values and takes a local gradient step,
///   U^j <- sum_i wtilde_ji U^i - 2 mu (U^j V_j^T - Y_j) V_j,
///   V_j <- V_j - 2 mu (U^j V_j^T - Y_j)^T U^j.
NetworkPoint dgd_local_step(const NetworkPoint& z, const MixingMatrix& m, double mu,
                            const DataPartition& d);

/// Plain gradient step z - mu * grad_g(z).
NetworkPoint gd_g_step(const NetworkPoint& z, const GDWeights& w, double mu,
                       const DataPartition& d);

/// (U, V) - mu * grad_f(U, V).
FactorPair gd_central_step(const FactorPair& p, double mu, const DenseMatrix& y);

/// Iterates the chosen engine from z0 until the gradient norm drops to
/// tol_grad, max_iters is reached, or (if configured) the iterate leaves the
/// monitoring ball. The trace carries one record per visited iterate and is
/// bitwise deterministic for a fixed (z0, config).
IterateTrace run(Engine engine, const NetworkPoint& z0, const RunConfig& cfg,
                 const MixingMatrix& m, const DataPartition& d);

/// Runs the distributed update and gradient descent on the network objective
/// side by side for `iterations` steps and returns the largest relative
/// iterate deviation observed.
double equivalence_check(const NetworkPoint& z0, const MixingMatrix& m, double mu,
                         const DataPartition& d, int iterations);

/// CSV with header iter,f_central,g_value,grad_norm,consensus_err,opt_gap,z_norm,in_ball.
void write_trace_csv(std::ostream& out, const IterateTrace& trace);

/// Summary JSON text with keys status, iters, final_f, final_consensus_err,
/// final_opt_gap, left_ball_ever.
std::string summary_json(const IterateTrace& trace);

}  // namespace dgdmf
