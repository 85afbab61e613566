#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dgdmf/geometry.hpp"
#include "dgdmf/rng.hpp"
#include "dgdmf/svd.hpp"
#include "support/oracles.hpp"

using namespace dgdmf;

namespace {

DenseMatrix random_matrix(Rng& rng, int rows, int cols) {
  DenseMatrix a(rows, cols);
  for (double& v : a.values()) v = rng.gaussian();
  return a;
}

}  // namespace

TEST_CASE("consensus error") {
  Rng rng(1);
  const DenseMatrix u = random_matrix(rng, 3, 2);
  NetworkPoint same;
  same.copies = {u, u, u};
  same.locals = {random_matrix(rng, 2, 2), random_matrix(rng, 2, 2), random_matrix(rng, 2, 2)};
  CHECK(consensus_error(same) <= 1e-15 * frob_norm(u));

  const DenseMatrix err = random_matrix(rng, 3, 2);
  NetworkPoint two;
  two.copies = {u + err, u};
  two.locals = {random_matrix(rng, 2, 2), random_matrix(rng, 2, 2)};
  CHECK(consensus_error(two) == doctest::Approx(0.5 * frob_norm(err)).epsilon(1e-12));

  NetworkPoint single;
  single.copies = {u};
  single.locals = {random_matrix(rng, 4, 2)};
  CHECK(consensus_error(single) == 0.0);
}

TEST_CASE("optimality gap") {
  Rng rng(2);
  const FactorPair p{random_matrix(rng, 4, 2), random_matrix(rng, 5, 2)};
  const DenseMatrix y = matmul_nt(p.u, p.v);
  CHECK(opt_gap(p, y) == 0.0);

  const FactorPair zero{DenseMatrix(2, 1), DenseMatrix(2, 1)};
  const DenseMatrix rank1{{2.0, 0.0}, {0.0, 0.0}};
  CHECK(opt_gap(zero, rank1) == doctest::Approx(4.0).epsilon(1e-12));

  // Best rank-1 fit of diag(2, 1) leaves exactly the smaller value behind.
  const FactorPair top{DenseMatrix{{std::sqrt(2.0)}, {0.0}}, DenseMatrix{{std::sqrt(2.0)}, {0.0}}};
  const DenseMatrix diag{{2.0, 0.0}, {0.0, 1.0}};
  CHECK(opt_gap(top, diag) == 0.0);
}

TEST_CASE("smallest quadratic-form eigenvalue on explicit spectra") {
  const auto diag_form = [](std::span<const double> v) {
    return 1.0 * v[0] * v[0] - 2.0 * v[1] * v[1];
  };
  const EigEstimate est = min_quadform_eig(diag_form, 2, 500, 7);
  CHECK(est.converged);
  CHECK(est.lambda_min == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(std::abs(est.witness[1]) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(est.witness[1] >= 0.0);  // sign convention

  const auto positive_form = [](std::span<const double> v) {
    return 1.0 * v[0] * v[0] + 2.0 * v[1] * v[1];
  };
  const EigEstimate pos = min_quadform_eig(positive_form, 2, 500, 7);
  CHECK(pos.lambda_min == doctest::Approx(1.0).epsilon(1e-9));

  // The origin of a scalar factorization problem: the form is -4 u v, with
  // smallest eigenvalue -2 attained at (1, 1)/sqrt(2).
  const FactorPair origin{DenseMatrix(1, 1), DenseMatrix(1, 1)};
  const DenseMatrix y{{1.0}};
  const auto origin_form = [&](std::span<const double> v) {
    return quadform_f(origin, FactorPair{DenseMatrix{{v[0]}}, DenseMatrix{{v[1]}}}, y);
  };
  const EigEstimate saddle = min_quadform_eig(origin_form, 2, 500, 7);
  CHECK(saddle.lambda_min == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(saddle.witness[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(saddle.witness[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("eigenvalue estimates upper-bound the dense oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(rng.next_u64() % 29);
    DenseMatrix h(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        const double v = rng.gaussian();
        h(i, j) = v;
        h(j, i) = v;
      }
    }
    const auto form = [&](std::span<const double> v) {
      double acc = 0.0;
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          acc += v[static_cast<std::size_t>(i)] * h(i, j) * v[static_cast<std::size_t>(j)];
        }
      }
      return acc;
    };
    const EigEstimate est = min_quadform_eig(form, dim, 3000, 1000 + trial);
    const auto eig = oracles::symmetric_eigenvalues(h);
    const double exact = eig.front();
    CHECK(est.lambda_min >= exact - 1e-12 * (1.0 + std::abs(exact)));
    CHECK(est.lambda_min - exact <= 1e-6 * (1.0 + std::abs(exact)));
    // The reported value is the Rayleigh quotient of the witness.
    CHECK(std::abs(form(est.witness) - est.lambda_min) <= 1e-8 * (1.0 + std::abs(est.lambda_min)));
  }
}

TEST_CASE("polarization-assembled Hessian matches the quadratic form") {
  Rng rng(4);
  const int rows = 2, cols = 3, rank = 1;
  const DenseMatrix y = random_matrix(rng, rows, cols);
  const FactorPair p{random_matrix(rng, rows, rank), random_matrix(rng, cols, rank)};
  const int dim = (rows + cols) * rank;
  const auto form = [&](std::span<const double> v) {
    std::vector<double> x(v.begin(), v.end());
    return quadform_f(p, oracles::unpack_pair(x, rows, cols, rank), y);
  };
  const DenseMatrix h = oracles::hessian_from_quadform(form, dim);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double& x : v) x = rng.gaussian();
    double via_h = 0.0;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        via_h += v[static_cast<std::size_t>(i)] * h(i, j) * v[static_cast<std::size_t>(j)];
      }
    }
    CHECK(form(v) == doctest::Approx(via_h).epsilon(1e-10));
  }
}

TEST_CASE("classification of the origin, a global minimum, and a generic point") {
  Rng rng(5);
  const DenseMatrix y = random_matrix(rng, 4, 5);

  const FactorPair origin{DenseMatrix(4, 2), DenseMatrix(5, 2)};
  const CriticalVerdict saddle = classify_critical(origin, y);
  CHECK(saddle.kind == CriticalKind::StrictSaddle);
  CHECK(saddle.min_quadform < 0.0);
  REQUIRE(saddle.witness.has_value());
  // The witness reproduces the reported curvature.
  const double witness_form = quadform_f(origin, *saddle.witness, y);
  CHECK(witness_form == doctest::Approx(saddle.min_quadform).epsilon(1e-8));
  // At the origin the smallest eigenvalue is -2 sigma_1(Y).
  CHECK(saddle.min_quadform ==
        doctest::Approx(-2.0 * singular_values(y).front()).epsilon(1e-7));

  const FactorPair factors{random_matrix(rng, 4, 2), random_matrix(rng, 5, 2)};
  const DenseMatrix y_fit = matmul_nt(factors.u, factors.v);
  const CriticalVerdict minimum = classify_critical(factors, y_fit);
  CHECK(minimum.kind == CriticalKind::GlobalMin);

  const CriticalVerdict generic = classify_critical(factors, y);
  CHECK(generic.kind == CriticalKind::NotCritical);
  CHECK(generic.grad_norm > 1e-6);
}

TEST_CASE("factor balancing") {
  const FactorPair scalar{DenseMatrix{{2.0}}, DenseMatrix{{0.5}}};
  const FactorPair balanced = balance_factors(scalar);
  CHECK(balanced.u(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(balanced.v(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const FactorPair p{random_matrix(rng, 5, 2), random_matrix(rng, 7, 2)};
    const FactorPair b = balance_factors(p);
    const DenseMatrix product = matmul_nt(p.u, p.v);
    CHECK(frob_norm(matmul_nt(b.u, b.v) - product) <= 1e-10 * frob_norm(product));
    const DenseMatrix gram_diff = matmul_tn(b.u, b.u) - matmul_tn(b.v, b.v);
    CHECK(max_abs(gram_diff) <= 1e-8);
  }

  // Balancing is idempotent on its invariants.
  const FactorPair p{random_matrix(rng, 5, 2), random_matrix(rng, 6, 2)};
  const FactorPair once = balance_factors(p);
  const FactorPair twice = balance_factors(once);
  CHECK(frob_norm(matmul_nt(twice.u, twice.v) - matmul_nt(once.u, once.v)) <=
        1e-10 * frob_norm(matmul_nt(once.u, once.v)));
  CHECK(max_abs(matmul_tn(twice.u, twice.u) - matmul_tn(twice.v, twice.v)) <= 1e-8);

  // Degenerate products are rejected.
  DenseMatrix u_rank1(3, 2);
  u_rank1(0, 0) = 1.0;
  const FactorPair degenerate{u_rank1, random_matrix(rng, 4, 2)};
  CHECK_THROWS_AS(balance_factors(degenerate), DomainError);
}

TEST_CASE("lifting directions onto the network") {
  Rng rng(7);
  const int rows = 3, rank = 2;
  const std::vector<int> widths{2, 2, 1};
  const DenseMatrix qx(rows, rank);
  std::vector<DenseMatrix> qy{random_matrix(rng, 2, rank), random_matrix(rng, 2, rank),
                              random_matrix(rng, 1, rank)};
  const NetworkPoint lifted = lift_direction(qx, qy);
  CHECK(lifted.node_count() == 3);
  for (const auto& c : lifted.copies) {
    CHECK(frob_norm(c) == 0.0);
  }

  // Single-node lift is plain packaging.
  const DenseMatrix qx1 = random_matrix(rng, rows, rank);
  const NetworkPoint single = lift_direction(qx1, {random_matrix(rng, 4, rank)});
  CHECK(single.node_count() == 1);
  CHECK(max_abs(single.copies[0] - qx1) == 0.0);
}

TEST_CASE("lifted saddle witness carries its curvature to the network objective") {
  Rng rng(8);
  const DenseMatrix y = random_matrix(rng, 4, 6);
  const DataPartition d = DataPartition::even_split(y, 3);
  const GDWeights w =
      to_gd_weights(metropolis_weights(build_graph(GraphKind::Ring, 3, 0)), 0.01);

  const FactorPair origin{DenseMatrix(4, 2), DenseMatrix(6, 2)};
  const CriticalVerdict verdict = classify_critical(origin, y);
  REQUIRE(verdict.kind == CriticalKind::StrictSaddle);
  REQUIRE(verdict.witness.has_value());

  const NetworkPoint z = NetworkPoint::consensus_lift(origin, d.widths);
  const NetworkPoint q =
      lift_direction(verdict.witness->u, split_rows(verdict.witness->v, d.widths));
  const double network_form = quadform_g(z, q, w, d);
  const double central_form = quadform_f(origin, *verdict.witness, y);
  CHECK(central_form < 0.0);
  CHECK(network_form == doctest::Approx(central_form).epsilon(1e-10));
}

TEST_CASE("symmetric gradient identity") {
  const double residual =
      symmetric_gradient_residual(DenseMatrix{{1.0}}, DenseMatrix{{2.0}}, DenseMatrix{{0.0}});
  CHECK(residual == 0.0);

  Rng rng(9);
  CHECK(symmetric_gradient_residual(DenseMatrix(3, 2), random_matrix(rng, 4, 2),
                                    random_matrix(rng, 3, 4)) == 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix u = random_matrix(rng, 4, 2);
    const DenseMatrix vj = random_matrix(rng, 3, 2);
    const DenseMatrix yj = random_matrix(rng, 4, 3);
    CHECK(symmetric_gradient_residual(u, vj, yj) <= 1e-10);
  }
}
