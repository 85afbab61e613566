#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

#include "dgdmf/errors.hpp"

namespace dgdmf {

/// Dense real matrix with row-major storage. Entries are required to stay
/// finite; constructors that accept data validate this, kernel operations
/// preserve it for desk-scale inputs.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols);
  DenseMatrix(int rows, int cols, std::vector<double> values);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double operator()(int i, int j) const { return values_[index(i, j)]; }
  double& operator()(int i, int j) { return values_[index(i, j)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

/// A * B. Throws DimensionError unless A.cols == B.rows.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// A * B^T without forming the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
/// A^T * B without forming the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

/// a += s * b, in place.
void add_scaled(DenseMatrix& a, double s, const DenseMatrix& b);

double frob_norm(const DenseMatrix& a);
double frob_norm_sq(const DenseMatrix& a);
/// Frobenius inner product sum_ij a_ij b_ij.
double frob_dot(const DenseMatrix& a, const DenseMatrix& b);
double max_abs(const DenseMatrix& a);

/// Vertical / horizontal concatenation and the matching row/column splits.
DenseMatrix vstack(std::span<const DenseMatrix> parts);
DenseMatrix hstack(std::span<const DenseMatrix> parts);
std::vector<DenseMatrix> split_rows(const DenseMatrix& a, std::span<const int> heights);
std::vector<DenseMatrix> split_cols(const DenseMatrix& a, std::span<const int> widths);

// Matrix text format, shared repo-wide: first line "rows cols", then one
// line per row of space-separated decimal values. Values are written with
// 17 significant digits so a round trip reproduces them exactly.
void write_matrix(std::ostream& out, const DenseMatrix& a);
DenseMatrix read_matrix(std::istream& in);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& a);
DenseMatrix load_matrix(const std::filesystem::path& path);

}  // namespace dgdmf
