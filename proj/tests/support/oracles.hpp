#ifndef Q2AMG_TESTS_ORACLES_HPP
#define Q2AMG_TESTS_ORACLES_HPP

// Straightforward dense reference computations and random instances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "q2amg/q2amg.hpp"

namespace oracle {

using q2amg::SparseMatrix;
using Dense = std::vector<std::vector<double>>;

inline Dense dense(const SparseMatrix& a) {
  Dense d(a.n_rows, std::vector<double>(a.n_cols, 0.0));
  for (int i = 0; i < a.n_rows; ++i) {
    auto c = a.row_cols(i);
    auto v = a.row_vals(i);
    for (std::size_t k = 0; k < c.size(); ++k) d[i][c[k]] += v[k];
  }
  return d;
}

inline Dense product(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
  Dense c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

inline Dense transposed(const Dense& a) {
  if (a.empty()) return {};
  Dense t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline double max_abs(const Dense& a) {
  double m = 0.0;
  for (const auto& r : a)
    for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

inline double max_diff(const Dense& a, const Dense& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

/// Random sparse matrix with roughly `density` of the entries set.
inline SparseMatrix random_sparse(int rows, int cols, double density, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pick(0.0, 1.0);
  std::vector<q2amg::Triplet> t;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (pick(rng) < density) t.push_back({i, j, u(rng)});
  return q2amg::from_triplets(rows, cols, std::move(t));
}

/// All-pairs graph distances (Floyd-Warshall); unreachable pairs hold INT_MAX/4.
inline std::vector<std::vector<int>> all_pairs(const q2amg::Graph& g) {
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(g.n, std::vector<int>(g.n, inf));
  for (int v = 0; v < g.n; ++v) {
    d[v][v] = 0;
    for (int w : g.neighbors(v)) d[v][w] = 1;
  }
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

/// Path graph 0 - 1 - ... - (n-1) as a 1D Laplacian.
inline SparseMatrix path_laplacian(int n) {
  std::vector<q2amg::Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return q2amg::from_triplets(n, n, std::move(t));
}

/// 5-point Laplacian on an nx x ny grid, lexicographic.
inline SparseMatrix grid_laplacian(int nx, int ny) {
  std::vector<q2amg::Triplet> t;
  auto id = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      t.push_back({id(i, j), id(i, j), 4.0});
      if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
      if (i + 1 < nx) t.push_back({id(i, j), id(i + 1, j), -1.0});
      if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
      if (j + 1 < ny) t.push_back({id(i, j), id(i, j + 1), -1.0});
    }
  return q2amg::from_triplets(nx * ny, nx * ny, std::move(t));
}

inline std::vector<q2amg::Point> line_coords(int n) {
  std::vector<q2amg::Point> p;
  for (int i = 0; i < n; ++i) p.push_back({static_cast<double>(i), 0.0});
  return p;
}

inline q2amg::Mesh cavity_mesh(int m) {
  q2amg::ProblemSpec s;
  s.refinement = m;
  return q2amg::build_mesh(s);
}

inline q2amg::SaddleSystem cavity_stokes(int m) {
  q2amg::ProblemSpec s;
  s.refinement = m;
  const auto mesh = q2amg::build_mesh(s);
  return q2amg::assemble_stokes(mesh, q2amg::default_boundary_conditions(mesh, s));
}

}  // namespace oracle

#endif  // Q2AMG_TESTS_ORACLES_HPP
