#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "dgdmf/geometry.hpp"
#include "dgdmf/harness.hpp"
#include "dgdmf/solvers.hpp"
#include "dgdmf/svd.hpp"

using namespace dgdmf;

namespace {

DenseMatrix random_matrix(Rng& rng, int rows, int cols) {
  DenseMatrix a(rows, cols);
  for (double& v : a.values()) v = rng.gaussian();
  return a;
}

NetworkPoint random_network(Rng& rng, const NetDims& dims) {
  NetworkPoint z = NetworkPoint::zeros(dims);
  for (auto& c : z.copies) {
    for (double& v : c.values()) v = rng.gaussian();
  }
  for (auto& l : z.locals) {
    for (double& v : l.values()) v = rng.gaussian();
  }
  return z;
}

struct Setup {
  DataPartition d;
  MixingMatrix mixing;
  NetDims dims;
};

Setup ring_setup(Rng& rng, int nodes = 4, int rows = 4, int cols = 8, int rank = 2,
                 bool lazy = true) {
  MixingMatrix m = metropolis_weights(build_graph(GraphKind::Ring, nodes, 0));
  if (lazy) m = lazy_fix(m);
  DataPartition d = DataPartition::even_split(random_matrix(rng, rows, cols), nodes);
  NetDims dims{nodes, rows, rank, d.widths};
  return Setup{std::move(d), std::move(m), std::move(dims)};
}

}  // namespace

TEST_CASE("exact-fit consensus points are fixed points of the distributed step") {
  Rng rng(1);
  const int nodes = 4, rows = 4, cols = 8, rank = 2;
  const FactorPair p{random_matrix(rng, rows, rank), random_matrix(rng, cols, rank)};
  const DataPartition d = DataPartition::even_split(matmul_nt(p.u, p.v), nodes);
  const MixingMatrix m = lazy_fix(metropolis_weights(build_graph(GraphKind::Ring, nodes, 0)));
  const NetworkPoint z = NetworkPoint::consensus_lift(p, d.widths);
  const NetworkPoint next = dgd_local_step(z, m, 0.01, d);
  CHECK(concat_dist(next, z) <= 1e-14 * concat_norm(z));
  // The gradient is exactly zero there, so a run stops immediately.
  RunConfig cfg;
  cfg.mu = 0.01;
  cfg.rho = 100.0;
  cfg.tol_grad = 1e-12;
  const IterateTrace trace = run(Engine::DgdLocal, z, cfg, m, d);
  CHECK(trace.status == TerminalStatus::GradToleranceMet);
  CHECK(trace.iters == 0);
  CHECK(trace.records.size() == 1);
}

TEST_CASE("identity mixing decouples the nodes") {
  Rng rng(2);
  const Setup s = ring_setup(rng);
  const MixingMatrix eye = MixingMatrix::from_weights(DenseMatrix::identity(4));
  const NetworkPoint z = random_network(rng, s.dims);
  const double mu = 0.005;
  const NetworkPoint stepped = dgd_local_step(z, eye, mu, s.d);
  for (int j = 0; j < 4; ++j) {
    const FactorPair node{z.copies[static_cast<std::size_t>(j)],
                          z.locals[static_cast<std::size_t>(j)]};
    const FactorPair expect = gd_central_step(node, mu, s.d.block(j));
    CHECK(max_abs(stepped.copies[static_cast<std::size_t>(j)] - expect.u) == 0.0);
    CHECK(max_abs(stepped.locals[static_cast<std::size_t>(j)] - expect.v) == 0.0);
  }
}

TEST_CASE("distributed step equals the gradient step on the network objective") {
  Rng rng(3);
  const Setup s = ring_setup(rng);
  const double mu = 0.003;
  const GDWeights w = to_gd_weights(s.mixing, mu);
  const NetworkPoint z = random_network(rng, s.dims);
  const NetworkPoint a = dgd_local_step(z, s.mixing, mu, s.d);
  const NetworkPoint b = gd_g_step(z, w, mu, s.d);
  CHECK(concat_dist(a, b) <= 1e-12 * concat_norm(a));
}

TEST_CASE("equivalence check over many iterations") {
  Rng rng(4);
  const Setup s = ring_setup(rng);
  const NetworkPoint z0 = init_in_ball(s.dims, 3.0, 77);
  const double mu = 1e-3;
  CHECK(equivalence_check(z0, s.mixing, mu, s.d, 200) <= 1e-12);

  // From the exact origin both recursions compute identical arithmetic.
  const NetworkPoint zero = NetworkPoint::zeros(s.dims);
  CHECK(equivalence_check(zero, s.mixing, mu, s.d, 1) == 0.0);

  // Negative control: breaking the unit row sums breaks the equivalence.
  const MixingMatrix broken = MixingMatrix::unchecked(0.9 * s.mixing.weights());
  CHECK(equivalence_check(z0, broken, mu, s.d, 200) > 1e-3);
}

TEST_CASE("gradient step fixed points and the zero state") {
  Rng rng(5);
  const Setup s = ring_setup(rng);
  const double mu = 0.002;
  const GDWeights w = to_gd_weights(s.mixing, mu);
  const NetworkPoint zero = NetworkPoint::zeros(s.dims);
  // The origin is a critical point: the data-term gradients vanish because
  // both factors are zero, and the penalty sees equal copies.
  const NetworkPoint stepped = gd_g_step(zero, w, mu, s.d);
  CHECK(concat_norm(stepped) == 0.0);
}

TEST_CASE("central engine basics") {
  Rng rng(6);
  const int rows = 5, cols = 6, rank = 2;
  const FactorPair p{random_matrix(rng, rows, rank), random_matrix(rng, cols, rank)};
  const DenseMatrix y = matmul_nt(p.u, p.v);
  const FactorPair stepped = gd_central_step(p, 0.01, y);
  CHECK(max_abs(stepped.u - p.u) == 0.0);
  CHECK(max_abs(stepped.v - p.v) == 0.0);

  // f is nonincreasing under a stepsize below the full denominator bound.
  const DenseMatrix y2 = random_matrix(rng, rows, cols);
  FactorPair it{random_matrix(rng, rows, rank), random_matrix(rng, cols, rank)};
  const double radius = std::sqrt(frob_norm_sq(it.u) + frob_norm_sq(it.v)) + frob_norm(y2);
  const std::vector<double> whole{frob_norm(y2)};
  const double mu = 0.9 * stepsize_mf(radius, 0.0, whole);
  double prev = f_value(it, y2);
  for (int k = 0; k < 100; ++k) {
    it = gd_central_step(it, mu, y2);
    const double cur = f_value(it, y2);
    CHECK(cur <= prev * (1.0 + 1e-12) + 1e-12);
    prev = cur;
  }
}

TEST_CASE("single-node degeneration is bitwise identical to the central engine") {
  Rng rng(7);
  const int rows = 4, cols = 5, rank = 2;
  const DataPartition d = DataPartition::even_split(random_matrix(rng, rows, cols), 1);
  const MixingMatrix single = MixingMatrix::from_weights(DenseMatrix::identity(1));
  const NetDims dims{1, rows, rank, d.widths};
  NetworkPoint z = random_network(rng, dims);
  FactorPair p{z.copies[0], z.locals[0]};
  const double mu = 0.004;
  for (int k = 0; k < 100; ++k) {
    z = dgd_local_step(z, single, mu, d);
    p = gd_central_step(p, mu, d.y);
  }
  CHECK(max_abs(z.copies[0] - p.u) == 0.0);
  CHECK(max_abs(z.locals[0] - p.v) == 0.0);

  // Full runs of the two engines also agree record for record.
  RunConfig cfg;
  cfg.mu = mu;
  cfg.rho = 50.0;
  cfg.tol_grad = 1e-8;
  cfg.max_iters = 200;
  const NetworkPoint z0 = random_network(rng, dims);
  const IterateTrace net = run(Engine::DgdLocal, z0, cfg, single, d);
  const IterateTrace central = run(Engine::Central, z0, cfg, single, d);
  REQUIRE(net.records.size() == central.records.size());
  for (std::size_t k = 0; k < net.records.size(); ++k) {
    CHECK(net.records[k].f_central == central.records[k].f_central);
    CHECK(net.records[k].g_value == central.records[k].g_value);
    CHECK(net.records[k].grad_norm == central.records[k].grad_norm);
    CHECK(net.records[k].z_norm == central.records[k].z_norm);
  }
}

TEST_CASE("fixed points of the distributed step are critical points") {
  Rng rng(8);
  const Setup s = ring_setup(rng);
  const double mu = 0.002;
  const GDWeights w = to_gd_weights(s.mixing, mu);
  const NetworkPoint z = random_network(rng, s.dims);
  const double grad_norm = concat_norm(grad_g(z, w, s.d));
  const double move = concat_dist(dgd_local_step(z, s.mixing, mu, s.d), z);
  // The step displacement is exactly mu * grad, so the two characterizations
  // agree at tolerance.
  CHECK(std::abs(move - mu * grad_norm) <= 1e-10 * (1.0 + mu * grad_norm));
  CHECK(grad_norm > 1e-10);  // a random point is not critical
}

TEST_CASE("runs descend and are deterministic") {
  Rng rng(9);
  const InstanceSpec spec{6, 8, 1, 4, GraphKind::Ring, 0.0, true, 22};
  const Instance inst = gen_instance(spec);
  const MixingMatrix m = lazy_fix(metropolis_weights(build_graph(GraphKind::Ring, 4, 22)));
  const NetDims dims{4, 6, 1, inst.partition.widths};

  RunConfig cfg;
  cfg.rho = std::sqrt(4.0 * nuclear_norm(inst.y));
  const auto norms = inst.partition.block_norms();
  cfg.mu = 0.99 * stepsize_mf(cfg.rho, omega(m), norms);
  cfg.tol_grad = 1e-9 * (1.0 + frob_norm(inst.y));
  cfg.max_iters = 200000;

  const NetworkPoint z0 = init_in_ball(dims, cfg.rho, 555);
  const IterateTrace trace = run(Engine::DgdLocal, z0, cfg, m, inst.partition);
  CHECK(trace.g_nonincreasing(1e-12));
  CHECK(trace.status == TerminalStatus::GradToleranceMet);
  CHECK(trace.final_record().consensus_err <= 1e-6);
  CHECK(trace.final_record().opt_gap <= 1e-4 * frob_norm_sq(inst.y));

  const IterateTrace again = run(Engine::DgdLocal, z0, cfg, m, inst.partition);
  REQUIRE(again.records.size() == trace.records.size());
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    CHECK(trace.records[k].g_value == again.records[k].g_value);
    CHECK(trace.records[k].grad_norm == again.records[k].grad_norm);
    CHECK(trace.records[k].z_norm == again.records[k].z_norm);
  }
}

TEST_CASE("descent with the generic stepsize rule") {
  Rng rng(10);
  const Setup s = ring_setup(rng);
  const double radius = 3.0;
  const auto norms = s.d.block_norms();
  double l_emp = 0.0;
  for (double bn : norms) l_emp = std::max(l_emp, local_bounds(radius, bn).l2);
  const double mu = 0.99 * stepsize_generic(l_emp, omega(s.mixing));
  const GDWeights w = to_gd_weights(s.mixing, mu);
  NetworkPoint z = init_in_ball(s.dims, radius * 0.8, 31);
  double prev = g_value(z, w, s.d);
  for (int k = 0; k < 300; ++k) {
    z = dgd_local_step(z, s.mixing, mu, s.d);
    const double cur = g_value(z, w, s.d);
    CHECK(cur <= prev + 1e-12 * (1.0 + std::abs(prev)));
    prev = cur;
  }
}

TEST_CASE("ball monitoring records exits without stopping by default") {
  Rng rng(11);
  const Setup s = ring_setup(rng);
  RunConfig cfg;
  cfg.mu = 1e-4;
  cfg.rho = 1e-6;  // everything is outside this ball
  cfg.tol_grad = 1e-15;
  cfg.max_iters = 5;
  const NetworkPoint z0 = random_network(rng, s.dims);
  const IterateTrace trace = run(Engine::DgdLocal, z0, cfg, s.mixing, s.d);
  CHECK(trace.left_ball_ever);
  CHECK(trace.status == TerminalStatus::MaxIters);
  for (const auto& rec : trace.records) {
    CHECK(rec.in_ball == (rec.z_norm < cfg.rho));
  }

  RunConfig halt = cfg;
  halt.halt_on_leave = true;
  const IterateTrace halted = run(Engine::DgdLocal, z0, halt, s.mixing, s.d);
  CHECK(halted.status == TerminalStatus::LeftBall);
  CHECK(halted.iters == 0);
}

TEST_CASE("trace serialization formats") {
  Rng rng(12);
  const Setup s = ring_setup(rng);
  RunConfig cfg;
  cfg.mu = 1e-4;
  cfg.rho = 10.0;
  cfg.tol_grad = 1e-12;
  cfg.max_iters = 3;
  const IterateTrace trace = run(Engine::DgdLocal, random_network(rng, s.dims), cfg, s.mixing, s.d);

  std::ostringstream csv;
  write_trace_csv(csv, trace);
  const std::string text = csv.str();
  CHECK(text.rfind("iter,f_central,g_value,grad_norm,consensus_err,opt_gap,z_norm,in_ball\n", 0) ==
        0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4);

  const std::string summary = summary_json(trace);
  CHECK(summary.find("\"status\"") != std::string::npos);
  CHECK(summary.find("\"iters\"") != std::string::npos);
  CHECK(summary.find("\"final_f\"") != std::string::npos);
  CHECK(summary.find("\"final_consensus_err\"") != std::string::npos);
  CHECK(summary.find("\"final_opt_gap\"") != std::string::npos);
  CHECK(summary.find("\"left_ball_ever\"") != std::string::npos);
}
