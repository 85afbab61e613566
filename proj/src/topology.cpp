#include "dgdmf/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>

#include "dgdmf/rng.hpp"

namespace dgdmf {

namespace {

bool reachable_all(int node_count, const std::vector<std::vector<int>>& adjacency) {
  if (node_count <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(node_count), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int visited = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adjacency[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++visited;
        queue.push_back(v);
      }
    }
  }
  return visited == node_count;
}

std::vector<std::vector<int>> adjacency_of(const Graph& g) {
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(g.node_count));
  for (const auto& [i, j] : g.edges) {
    adjacency[static_cast<std::size_t>(i)].push_back(j);
    adjacency[static_cast<std::size_t>(j)].push_back(i);
  }
  return adjacency;
}

Graph finalize(int node_count, std::set<std::pair<int, int>> edge_set) {
  Graph g;
  g.node_count = node_count;
  g.edges.assign(edge_set.begin(), edge_set.end());
  return g;
}

}  // namespace

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(node_count), 0);
  for (const auto& [i, j] : edges) {
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  return deg;
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "ring") return GraphKind::Ring;
  if (name == "star") return GraphKind::Star;
  if (name == "complete") return GraphKind::Complete;
  if (name == "erdos") return GraphKind::Erdos;
  throw DomainError("unknown topology kind: " + name);
}

std::string graph_kind_name(GraphKind kind) {
  switch (kind) {
    case GraphKind::Ring: return "ring";
    case GraphKind::Star: return "star";
    case GraphKind::Complete: return "complete";
    case GraphKind::Erdos: return "erdos";
  }
  return "?";
}

Graph build_graph(GraphKind kind, int node_count, std::uint64_t seed, double edge_prob) {
  if (node_count < 2) {
    throw DomainError("build_graph: need at least 2 nodes");
  }
  std::set<std::pair<int, int>> edges;
  switch (kind) {
    case GraphKind::Ring:
      for (int i = 0; i < node_count; ++i) {
        const int j = (i + 1) % node_count;
        edges.insert({std::min(i, j), std::max(i, j)});
      }
      return finalize(node_count, std::move(edges));
    case GraphKind::Star:
      for (int i = 1; i < node_count; ++i) {
        edges.insert({0, i});
      }
      return finalize(node_count, std::move(edges));
    case GraphKind::Complete:
      for (int i = 0; i < node_count; ++i) {
        for (int j = i + 1; j < node_count; ++j) {
          edges.insert({i, j});
        }
      }
      return finalize(node_count, std::move(edges));
    case GraphKind::Erdos: {
      if (!(edge_prob > 0.0 && edge_prob <= 1.0)) {
        throw DomainError("build_graph: erdos edge probability must be in (0, 1]");
      }
      for (int attempt = 0; attempt < 1000; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt));
        edges.clear();
        for (int i = 0; i < node_count; ++i) {
          for (int j = i + 1; j < node_count; ++j) {
            if (rng.uniform() < edge_prob) {
              edges.insert({i, j});
            }
          }
        }
        Graph g = finalize(node_count, edges);
        if (is_connected(g)) {
          return g;
        }
      }
      throw NumericalError("build_graph: no connected Erdos-Renyi sample within 1000 attempts");
    }
  }
  throw DomainError("build_graph: unknown kind");
}

bool is_connected(const Graph& g) { return reachable_all(g.node_count, adjacency_of(g)); }

void save_graph(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("save_graph: cannot open " + path.string());
  }
  out << g.node_count << '\n';
  for (const auto& [i, j] : g.edges) {
    out << (i + 1) << ' ' << (j + 1) << '\n';
  }
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("load_graph: cannot open " + path.string());
  }
  int node_count = 0;
  if (!(in >> node_count) || node_count < 1) {
    throw ConfigError("load_graph: bad node count");
  }
  std::set<std::pair<int, int>> edges;
  int i = 0, j = 0;
  while (in >> i >> j) {
    if (i < 1 || j < 1 || i > node_count || j > node_count || i == j) {
      throw ConfigError("load_graph: bad edge");
    }
    edges.insert({std::min(i, j) - 1, std::max(i, j) - 1});
  }
  return finalize(node_count, std::move(edges));
}

MixingMatrix MixingMatrix::from_weights(DenseMatrix wtilde) {
  if (wtilde.rows() != wtilde.cols() || wtilde.rows() < 1) {
    throw DimensionError("MixingMatrix: weights must be square and nonempty");
  }
  const int n = wtilde.rows();
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = wtilde(i, j);
      if (w < 0.0) {
        throw DomainError("MixingMatrix: negative weight");
      }
      if (std::abs(w - wtilde(j, i)) > 1e-15) {
        throw DomainError("MixingMatrix: weights not symmetric");
      }
      row_sum += w;
    }
    if (std::abs(row_sum - 1.0) > 1e-12) {
      throw DomainError("MixingMatrix: row " + std::to_string(i + 1) + " sums to " +
                        std::to_string(row_sum) + ", not 1");
    }
  }
  return MixingMatrix(std::move(wtilde));
}

MixingMatrix MixingMatrix::unchecked(DenseMatrix wtilde) {
  if (wtilde.rows() != wtilde.cols() || wtilde.rows() < 1) {
    throw DimensionError("MixingMatrix: weights must be square and nonempty");
  }
  return MixingMatrix(std::move(wtilde));
}

MixingMatrix metropolis_weights(const Graph& g) {
  if (!is_connected(g)) {
    throw DomainError("metropolis_weights: graph is not connected");
  }
  const auto deg = g.degrees();
  DenseMatrix w(g.node_count, g.node_count);
  for (const auto& [i, j] : g.edges) {
    const double wij = 1.0 / (1.0 + std::max(deg[static_cast<std::size_t>(i)],
                                             deg[static_cast<std::size_t>(j)]));
    w(i, j) = wij;
    w(j, i) = wij;
  }
  for (int i = 0; i < g.node_count; ++i) {
    double off = 0.0;
    for (int j = 0; j < g.node_count; ++j) {
      if (j != i) off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return MixingMatrix::from_weights(std::move(w));
}

MixingMatrix lazy_fix(const MixingMatrix& m) {
  const int n = m.size();
  DenseMatrix w(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      w(i, j) = 0.5 * m(i, j) + (i == j ? 0.5 : 0.0);
    }
  }
  return MixingMatrix::from_weights(std::move(w));
}

double omega(const MixingMatrix& m) {
  double best = 0.0;
  for (int i = 0; i < m.size(); ++i) {
    double off = 0.0;
    for (int j = 0; j < m.size(); ++j) {
      if (j != i) off += m(i, j);
    }
    best = std::max(best, off);
  }
  return best;
}

GDWeights to_gd_weights(const MixingMatrix& m, double mu) {
  if (!(mu > 0.0)) {
    throw DomainError("to_gd_weights: stepsize must be positive");
  }
  const int n = m.size();
  GDWeights out;
  out.size = n;
  out.mu = mu;
  out.w = DenseMatrix(n, n);
  const double scale = 4.0 * mu;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.w(i, j) = (i == j) ? 0.0 : m(i, j) / scale;
    }
  }
  return out;
}

bool is_connected(const MixingMatrix& m) {
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.size(); ++i) {
    for (int j = i + 1; j < m.size(); ++j) {
      if (m(i, j) > 0.0) {
        adjacency[static_cast<std::size_t>(i)].push_back(j);
        adjacency[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return reachable_all(m.size(), adjacency);
}

}  // namespace dgdmf
