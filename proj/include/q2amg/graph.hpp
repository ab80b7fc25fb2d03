#ifndef Q2AMG_GRAPH_HPP
#define Q2AMG_GRAPH_HPP

#include <algorithm>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "q2amg/sparse.hpp"

namespace q2amg {

/// Undirected adjacency built from the union pattern of A and A^T.
struct Graph {
  int n = 0;
  std::vector<int> offsets{0};
  std::vector<int> adjacency;

  [[nodiscard]] std::span<const int> neighbors(int v) const {
    return {adjacency.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  [[nodiscard]] int degree(int v) const { return offsets[v + 1] - offsets[v]; }
};

/// Exact zeros are not edges; self loops are dropped.
inline Graph graph_from_matrix(const SparseMatrix& a) {
  detail::require(a.n_rows == a.n_cols, "graph_from_matrix: matrix not square");
  const int n = a.n_rows;
  std::vector<std::vector<int>> nb(n);
  for (int i = 0; i < n; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int j = cols[k];
      if (j == i || vals[k] == 0.0) continue;
      nb[i].push_back(j);
      nb[j].push_back(i);
    }
  }
  Graph g;
  g.n = n;
  g.offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& v = nb[i];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    g.offsets[i + 1] = g.offsets[i] + static_cast<int>(v.size());
  }
  g.adjacency.reserve(g.offsets[n]);
  for (auto& v : nb) g.adjacency.insert(g.adjacency.end(), v.begin(), v.end());
  return g;
}

struct VertexDistance {
  int vertex;
  int distance;
};

/// Reusable BFS scratch space; keeps distance marks between calls and clears
/// only the touched entries.
class BfsWorkspace {
public:
  explicit BfsWorkspace(int n = 0) : dist_(n, -1) {}

  /// Vertices within max_dist of source in BFS order (nondecreasing distance).
  const std::vector<VertexDistance>& run(const Graph& g, int source, int max_dist) {
    detail::require(source >= 0 && source < g.n, "bfs_distances: invalid source vertex");
    detail::require(max_dist >= 0, "bfs_distances: negative max_dist");
    if (static_cast<int>(dist_.size()) < g.n) dist_.assign(g.n, -1);
    for (const auto& vd : out_) dist_[vd.vertex] = -1;
    out_.clear();
    dist_[source] = 0;
    out_.push_back({source, 0});
    for (std::size_t head = 0; head < out_.size(); ++head) {
      const auto [v, d] = out_[head];
      if (d == max_dist) continue;
      for (int w : g.neighbors(v)) {
        if (dist_[w] >= 0) continue;
        dist_[w] = d + 1;
        out_.push_back({w, d + 1});
      }
    }
    return out_;
  }

  /// Distance recorded by the last run, or -1 when beyond max_dist.
  [[nodiscard]] int distance(int v) const { return dist_[v]; }

private:
  std::vector<int> dist_;
  std::vector<VertexDistance> out_;
};

inline std::vector<VertexDistance> bfs_distances(const Graph& g, int source, int max_dist) {
  BfsWorkspace ws(g.n);
  return ws.run(g, source, max_dist);
}

struct Permutation {
  std::vector<int> forward;  // forward[new] = old
  std::vector<int> inverse;  // inverse[old] = new

  static Permutation identity(int n) {
    Permutation p;
    p.forward.resize(n);
    for (int i = 0; i < n; ++i) p.forward[i] = i;
    p.inverse = p.forward;
    return p;
  }
};

inline Permutation rcm_ordering(const SparseMatrix& a) {
  detail::require(a.n_rows == a.n_cols, "rcm_ordering: matrix not square");
  const Graph g = graph_from_matrix(a);
  const int n = g.n;
  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> nb;
  while (static_cast<int>(order.size()) < n) {
    int start = -1;
    for (int v = 0; v < n; ++v)
      if (!visited[v] && (start < 0 || g.degree(v) < g.degree(start))) start = v;
    const std::size_t first = order.size();
    std::size_t head = first;
    visited[start] = 1;
    order.push_back(start);
    for (; head < order.size(); ++head) {
      const int v = order[head];
      nb.clear();
      for (int w : g.neighbors(v))
        if (!visited[w]) nb.push_back(w);
      std::sort(nb.begin(), nb.end(), [&](int x, int y) {
        return g.degree(x) != g.degree(y) ? g.degree(x) < g.degree(y) : x < y;
      });
      for (int w : nb) {
        visited[w] = 1;
        order.push_back(w);
      }
    }
    // reverse each component in place so isolated vertices keep their index
    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
  }
  Permutation p;
  p.forward = std::move(order);
  p.inverse.assign(n, 0);
  for (int k = 0; k < n; ++k) p.inverse[p.forward[k]] = k;
  return p;
}

}  // namespace q2amg

#endif  // Q2AMG_GRAPH_HPP
