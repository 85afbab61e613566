#include "dgdmf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace dgdmf {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DomainError("DenseMatrix: entries must be finite");
    }
  }
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " do not match");
  }
}

}  // namespace

DenseMatrix::DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw DimensionError("DenseMatrix: negative dimensions");
  }
  values_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 0 || cols < 0) {
    throw DimensionError("DenseMatrix: negative dimensions");
  }
  if (values_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionError("DenseMatrix: value count does not equal rows*cols");
  }
  require_finite(values_);
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
  values_.reserve(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != cols_) {
      throw DimensionError("DenseMatrix: ragged initializer");
    }
    values_.insert(values_.end(), row.begin(), row.end());
  }
  require_finite(values_);
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix eye(n, n);
  for (int i = 0; i < n; ++i) {
    eye(i, i) = 1.0;
  }
  return eye;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " do not match");
  }
  DenseMatrix c(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* pc = c.values().data();
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < k; ++l) {
      const double aval = pa[static_cast<std::size_t>(i) * k + l];
      if (aval == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(l) * m;
      double* crow = pc + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) {
        crow[j] += aval * brow[j];
      }
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions do not match");
  }
  DenseMatrix c(a.rows(), b.rows());
  const int n = a.rows(), k = a.cols(), m = b.rows();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* pc = c.values().data();
  for (int i = 0; i < n; ++i) {
    const double* arow = pa + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < m; ++j) {
      const double* brow = pb + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += arow[l] * brow[l];
      }
      pc[static_cast<std::size_t>(i) * m + j] = acc;
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner dimensions do not match");
  }
  DenseMatrix c(a.cols(), b.cols());
  const int n = a.cols(), k = a.rows(), m = b.cols();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* pc = c.values().data();
  for (int l = 0; l < k; ++l) {
    const double* arow = pa + static_cast<std::size_t>(l) * n;
    const double* brow = pb + static_cast<std::size_t>(l) * m;
    for (int i = 0; i < n; ++i) {
      const double aval = arow[i];
      if (aval == 0.0) continue;
      double* crow = pc + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) {
        crow[j] += aval * brow[j];
      }
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      t(j, i) = a(i, j);
    }
  }
  return t;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "operator+");
  DenseMatrix c = a;
  double* pc = c.values().data();
  const double* pb = b.values().data();
  for (std::size_t i = 0; i < c.values().size(); ++i) {
    pc[i] += pb[i];
  }
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "operator-");
  DenseMatrix c = a;
  double* pc = c.values().data();
  const double* pb = b.values().data();
  for (std::size_t i = 0; i < c.values().size(); ++i) {
    pc[i] -= pb[i];
  }
  return c;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.values()) {
    v *= s;
  }
  return c;
}

void add_scaled(DenseMatrix& a, double s, const DenseMatrix& b) {
  require_same_shape(a, b, "add_scaled");
  double* pa = a.values().data();
  const double* pb = b.values().data();
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    pa[i] += s * pb[i];
  }
}

double frob_norm_sq(const DenseMatrix& a) {
  double acc = 0.0;
  for (double v : a.values()) {
    acc += v * v;
  }
  return acc;
}

double frob_norm(const DenseMatrix& a) { return std::sqrt(frob_norm_sq(a)); }

double frob_dot(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "frob_dot");
  double acc = 0.0;
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    acc += pa[i] * pb[i];
  }
  return acc;
}

double max_abs(const DenseMatrix& a) {
  double best = 0.0;
  for (double v : a.values()) {
    best = std::max(best, std::abs(v));
  }
  return best;
}

DenseMatrix vstack(std::span<const DenseMatrix> parts) {
  if (parts.empty()) {
    throw DimensionError("vstack: no parts");
  }
  const int cols = parts.front().cols();
  int rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("vstack: column counts differ");
    }
    rows += p.rows();
  }
  DenseMatrix out(rows, cols);
  int offset = 0;
  for (const auto& p : parts) {
    std::copy(p.values().begin(), p.values().end(),
              out.values().begin() + static_cast<std::size_t>(offset) * cols);
    offset += p.rows();
  }
  return out;
}

DenseMatrix hstack(std::span<const DenseMatrix> parts) {
  if (parts.empty()) {
    throw DimensionError("hstack: no parts");
  }
  const int rows = parts.front().rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("hstack: row counts differ");
    }
    cols += p.cols();
  }
  DenseMatrix out(rows, cols);
  int offset = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < p.cols(); ++j) {
        out(i, offset + j) = p(i, j);
      }
    }
    offset += p.cols();
  }
  return out;
}

std::vector<DenseMatrix> split_rows(const DenseMatrix& a, std::span<const int> heights) {
  int total = 0;
  for (int h : heights) {
    if (h <= 0) throw DimensionError("split_rows: nonpositive block height");
    total += h;
  }
  if (total != a.rows()) {
    throw DimensionError("split_rows: heights do not sum to row count");
  }
  std::vector<DenseMatrix> parts;
  parts.reserve(heights.size());
  int offset = 0;
  for (int h : heights) {
    DenseMatrix block(h, a.cols());
    std::copy_n(a.values().begin() + static_cast<std::size_t>(offset) * a.cols(),
                static_cast<std::size_t>(h) * a.cols(), block.values().begin());
    parts.push_back(std::move(block));
    offset += h;
  }
  return parts;
}

std::vector<DenseMatrix> split_cols(const DenseMatrix& a, std::span<const int> widths) {
  int total = 0;
  for (int w : widths) {
    if (w <= 0) throw DimensionError("split_cols: nonpositive block width");
    total += w;
  }
  if (total != a.cols()) {
    throw DimensionError("split_cols: widths do not sum to column count");
  }
  std::vector<DenseMatrix> parts;
  parts.reserve(widths.size());
  int offset = 0;
  for (int w : widths) {
    DenseMatrix block(a.rows(), w);
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < w; ++j) {
        block(i, j) = a(i, offset + j);
      }
    }
    parts.push_back(std::move(block));
    offset += w;
  }
  return parts;
}

void write_matrix(std::ostream& out, const DenseMatrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  char buf[64];
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
      out << buf;
      out << (j + 1 == a.cols() ? '\n' : ' ');
    }
  }
}

DenseMatrix read_matrix(std::istream& in) {
  int rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw DomainError("read_matrix: bad header");
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); ++i) {
    double v;
    if (!(in >> v)) {
      throw DomainError("read_matrix: truncated data");
    }
    values.push_back(v);
  }
  return DenseMatrix(rows, cols, std::move(values));
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& a) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("save_matrix: cannot open " + path.string());
  }
  write_matrix(out, a);
  if (!out) {
    throw ConfigError("save_matrix: write failed for " + path.string());
  }
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("load_matrix: cannot open " + path.string());
  }
  return read_matrix(in);
}

}  // namespace dgdmf
