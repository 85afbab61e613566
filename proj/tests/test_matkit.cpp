#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "dgdmf/matrix.hpp"
#include "dgdmf/rng.hpp"
#include "dgdmf/svd.hpp"

using namespace dgdmf;

namespace {

DenseMatrix random_matrix(Rng& rng, int rows, int cols) {
  DenseMatrix a(rows, cols);
  for (double& v : a.values()) v = rng.gaussian();
  return a;
}

}  // namespace

TEST_CASE("matmul basics") {
  const DenseMatrix a{{1.0, 2.0}, {3.0, 4.0}};
  const DenseMatrix prod = matmul(DenseMatrix::identity(2), a);
  CHECK(prod(0, 0) == 1.0);
  CHECK(prod(0, 1) == 2.0);
  CHECK(prod(1, 0) == 3.0);
  CHECK(prod(1, 1) == 4.0);

  const DenseMatrix row{{1.0, 2.0}};
  const DenseMatrix col{{3.0}, {4.0}};
  const DenseMatrix scalar = matmul(row, col);
  CHECK(scalar.rows() == 1);
  CHECK(scalar.cols() == 1);
  CHECK(scalar(0, 0) == 11.0);

  CHECK_THROWS_AS(matmul(DenseMatrix(2, 3), DenseMatrix(4, 2)), DimensionError);
}

TEST_CASE("matmul transposed variants agree with explicit transposes") {
  Rng rng(11);
  const DenseMatrix a = random_matrix(rng, 4, 3);
  const DenseMatrix b = random_matrix(rng, 5, 3);
  const DenseMatrix c = random_matrix(rng, 4, 5);
  CHECK(frob_norm(matmul_nt(a, b) - matmul(a, transpose(b))) < 1e-14);
  CHECK(frob_norm(matmul_tn(a, c) - matmul(transpose(a), c)) < 1e-14);
}

TEST_CASE("frobenius norm") {
  CHECK(frob_norm(DenseMatrix{{3.0, 4.0}}) == 5.0);
  CHECK(frob_norm(DenseMatrix(3, 2)) == 0.0);
  CHECK(frob_norm(DenseMatrix::identity(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("matrix entries must be finite") {
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), DomainError);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {1.0, 2.0}), DimensionError);
}

TEST_CASE("reduced svd of an already diagonal matrix") {
  const SvdResult svd = reduced_svd(DenseMatrix{{2.0, 0.0}, {0.0, 0.0}});
  REQUIRE(svd.rank() == 1);
  CHECK(svd.singular_values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(svd.left(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(svd.left(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(svd.right(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(svd.right(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("reduced svd of the identity") {
  const SvdResult svd = reduced_svd(DenseMatrix::identity(2));
  REQUIRE(svd.rank() == 2);
  CHECK(svd.singular_values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(svd.singular_values[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("reduced svd reconstructs random matrices") {
  Rng rng(5);
  const DenseMatrix a = random_matrix(rng, 6, 4);
  const SvdResult svd = reduced_svd(a);
  CHECK(frob_norm(svd.reconstruct() - a) <= 1e-10 * frob_norm(a));
}

TEST_CASE("svd factors have orthonormal columns and sorted values") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng.next_u64() % 7);
    const int cols = 2 + static_cast<int>(rng.next_u64() % 7);
    const DenseMatrix a = random_matrix(rng, rows, cols);
    const SvdResult svd = reduced_svd(a);
    const DenseMatrix ptp = matmul_tn(svd.left, svd.left);
    const DenseMatrix qtq = matmul_tn(svd.right, svd.right);
    CHECK(max_abs(ptp - DenseMatrix::identity(svd.rank())) < 1e-10);
    CHECK(max_abs(qtq - DenseMatrix::identity(svd.rank())) < 1e-10);
    for (int i = 1; i < svd.rank(); ++i) {
      CHECK(svd.singular_values[static_cast<std::size_t>(i - 1)] >=
            svd.singular_values[static_cast<std::size_t>(i)]);
    }
    CHECK(frob_norm(svd.reconstruct() - a) <= 1e-10 * (1.0 + frob_norm(a)));
    // Sign convention: leading nonzero of each left vector is nonnegative.
    for (int j = 0; j < svd.rank(); ++j) {
      for (int i = 0; i < svd.left.rows(); ++i) {
        if (svd.left(i, j) != 0.0) {
          CHECK(svd.left(i, j) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("product norm is submultiplicative on random samples") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const DenseMatrix a = random_matrix(rng, 3 + static_cast<int>(rng.next_u64() % 4), 4);
    const DenseMatrix b = random_matrix(rng, 4, 2 + static_cast<int>(rng.next_u64() % 5));
    CHECK(frob_norm(matmul(a, b)) <= frob_norm(a) * frob_norm(b) * (1.0 + 1e-12));
  }
}

TEST_CASE("matmul associativity on random triples") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = random_matrix(rng, 3, 4);
    const DenseMatrix b = random_matrix(rng, 4, 5);
    const DenseMatrix c = random_matrix(rng, 5, 2);
    const DenseMatrix left = matmul(matmul(a, b), c);
    const DenseMatrix right = matmul(a, matmul(b, c));
    CHECK(frob_norm(left - right) <= 1e-10 * (1.0 + frob_norm(left)));
  }
}

TEST_CASE("matrix text format round trip is exact") {
  Rng rng(41);
  DenseMatrix a = random_matrix(rng, 5, 3);
  a(0, 0) = 1.0 / 3.0;
  a(1, 2) = -2.7182818284590452e-15;
  std::stringstream stream;
  write_matrix(stream, a);
  const DenseMatrix b = read_matrix(stream);
  REQUIRE(b.rows() == a.rows());
  REQUIRE(b.cols() == a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      CHECK(a(i, j) == b(i, j));
    }
  }
}

TEST_CASE("rank-r residual matches the tail of the spectrum") {
  Rng rng(43);
  const DenseMatrix a = random_matrix(rng, 6, 5);
  const auto sigma = singular_values(a);
  REQUIRE(sigma.size() == 5);
  double tail = 0.0;
  for (std::size_t i = 2; i < sigma.size(); ++i) tail += sigma[i] * sigma[i];
  CHECK(rank_r_residual_sq(a, 2) == doctest::Approx(tail).epsilon(1e-12));
  double total = 0.0;
  for (double s : sigma) total += s;
  CHECK(nuclear_norm(a) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("stacking and splitting invert each other") {
  Rng rng(47);
  const DenseMatrix a = random_matrix(rng, 6, 7);
  const std::vector<int> widths{3, 1, 3};
  const auto blocks = split_cols(a, widths);
  const DenseMatrix back = hstack(blocks);
  CHECK(max_abs(back - a) == 0.0);
  const std::vector<int> heights{2, 4};
  const auto rows = split_rows(a, heights);
  CHECK(max_abs(vstack(rows) - a) == 0.0);
}
