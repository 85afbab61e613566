#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dgdmf/matrix.hpp"

namespace dgdmf {

/// Undirected simple graph on nodes 0..node_count-1. Edges are stored as
/// (i, j) with i < j, sorted and unique. Serialized files use 1-based ids.
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> degrees() const;
};

enum class GraphKind { Ring, Star, Complete, Erdos };

GraphKind parse_graph_kind(const std::string& name);
std::string graph_kind_name(GraphKind kind);

/// Deterministic graph for a fixed (kind, node_count, seed). Erdos-Renyi
/// graphs resample with an incremented sub-seed until connected, capped at
/// 1000 attempts.
Graph build_graph(GraphKind kind, int node_count, std::uint64_t seed, double edge_prob = 0.0);

bool is_connected(const Graph& g);

void save_graph(const std::filesystem::path& path, const Graph& g);
Graph load_graph(const std::filesystem::path& path);

/// Symmetric nonnegative weight matrix with unit row sums. Off-diagonal
/// support is the neighbor structure of the originating graph.
class MixingMatrix {
 public:
  /// Single-node network; the only 1x1 mixing matrix.
  MixingMatrix() : wtilde_(DenseMatrix::identity(1)) {}

  /// Validates symmetry (1e-15), nonnegativity, and unit row sums (1e-12).
  static MixingMatrix from_weights(DenseMatrix wtilde);
  /// Skips validation; for negative-control experiments that deliberately
  /// break the row-sum assumption.
  static MixingMatrix unchecked(DenseMatrix wtilde);

  int size() const { return wtilde_.rows(); }
  double operator()(int i, int j) const { return wtilde_(i, j); }
  const DenseMatrix& weights() const { return wtilde_; }

 private:
  explicit MixingMatrix(DenseMatrix wtilde) : wtilde_(std::move(wtilde)) {}
  DenseMatrix wtilde_;
};

/// Metropolis-Hastings weights: edge (i,j) gets 1/(1+max(deg_i,deg_j)),
/// diagonal absorbs the remainder so each row sums to one. Requires a
/// connected graph.
MixingMatrix metropolis_weights(const Graph& g);

/// (W + I)/2. Halves every off-diagonal row sum, so the result always has
/// diagonal entries above 1/2.
MixingMatrix lazy_fix(const MixingMatrix& m);

/// Largest off-diagonal row sum, max_j sum_{i != j} w_ji.
double omega(const MixingMatrix& m);

/// Gradient-descent weights w_ji = wtilde_ji / (4 mu) off-diagonal, zero on
/// the diagonal.
struct GDWeights {
  int size = 0;
  DenseMatrix w;
  double mu = 0.0;
};

GDWeights to_gd_weights(const MixingMatrix& m, double mu);

/// Connectivity of the support graph {(i,j) : wtilde_ij > 0, i != j}.
bool is_connected(const MixingMatrix& m);

}  // namespace dgdmf
