#ifndef Q2AMG_COARSEN_HPP
#define Q2AMG_COARSEN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "q2amg/graph.hpp"
#include "q2amg/matrix_market.hpp"
#include "q2amg/sparse.hpp"

namespace q2amg {

enum class Lumping {
  PreserveRowSums,  // dropped entries are added to the diagonal
  ZeroRowSums       // diagonal reset so that every filtered row sums to zero
};

struct CoarsenParams {
  double tau1 = 0.06;
  double tau2 = std::sqrt(1.5e-3);
  double omega_g = 0.8;
  double omega_o = 0.5;
  double extra_h2_threshold = 2.6;
  double extra_o_threshold = -0.2;
  Lumping lumping = Lumping::PreserveRowSums;
  bool extra_points = true;
};

struct FilterResult {
  SparseMatrix matrix;
  int zero_diagonal_warnings = 0;
};

/// Drops off-diagonal z_ij with |z_ij| <= tau * sqrt(|z_ii z_jj|) and lumps them.
inline FilterResult filter_matrix(const SparseMatrix& z, double tau, Lumping lumping = Lumping::PreserveRowSums) {
  detail::require(z.n_rows == z.n_cols, "filter: matrix not square");
  const Vector d = diagonal(z);
  FilterResult out;
  SparseMatrix& m = out.matrix;
  m = SparseMatrix(z.n_rows, z.n_cols);
  for (int i = 0; i < z.n_rows; ++i) {
    auto cols = z.row_cols(i);
    auto vals = z.row_vals(i);
    double dropped = 0.0;
    int diag_pos = -1;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int j = cols[k];
      const double v = vals[k];
      if (j == i) {
        diag_pos = static_cast<int>(m.values.size());
        m.col_indices.push_back(j);
        m.values.push_back(v);
        continue;
      }
      if (v == 0.0) continue;
      double thresh = tau * std::sqrt(std::abs(d[i] * d[j]));
      if (d[i] == 0.0 || d[j] == 0.0) {
        ++out.zero_diagonal_warnings;
        thresh = 0.0;
      }
      if (std::abs(v) <= thresh) {
        dropped += v;
        continue;
      }
      m.col_indices.push_back(j);
      m.values.push_back(v);
    }
    if (diag_pos < 0) {
      // insert a diagonal slot to receive lumped values
      auto pos = std::lower_bound(m.col_indices.begin() + m.row_offsets[i], m.col_indices.end(), i);
      const auto off = pos - m.col_indices.begin();
      m.col_indices.insert(pos, i);
      m.values.insert(m.values.begin() + off, 0.0);
      diag_pos = static_cast<int>(off);
    }
    if (lumping == Lumping::PreserveRowSums) {
      m.values[diag_pos] += dropped;
    } else {
      double s = 0.0;
      for (std::size_t k = m.row_offsets[i]; k < m.values.size(); ++k) s += m.values[k];
      m.values[diag_pos] -= s;
    }
    m.row_offsets[i + 1] = static_cast<int>(m.values.size());
  }
  return out;
}

struct AuxBlocks {
  SparseMatrix A_v_nodal;  // filtered x-component velocity block
  SparseMatrix A_p;        // filtered B B^T
  double tau1 = 0.0;
  int zero_diagonal_warnings = 0;
};

/// `A` is the velocity block (2n x 2n, x components first), `B` the divergence block.
inline AuxBlocks form_aux_blocks(const SparseMatrix& A, const SparseMatrix& B, double tau1,
                                 Lumping lumping = Lumping::PreserveRowSums) {
  detail::require(A.n_rows == A.n_cols && A.n_rows % 2 == 0 && B.n_cols == A.n_rows,
                  "form_aux_blocks: block shapes inconsistent");
  const int n = A.n_rows / 2;
  AuxBlocks aux;
  aux.tau1 = tau1;
  auto p = filter_matrix(prune(multiply(B, transpose(B))), tau1, lumping);
  auto v = filter_matrix(submatrix(A, 0, n, 0, n), tau1, lumping);
  aux.A_p = std::move(p.matrix);
  aux.A_v_nodal = std::move(v.matrix);
  aux.zero_diagonal_warnings = p.zero_diagonal_warnings + v.zero_diagonal_warnings;
  return aux;
}

struct CfSplitting {
  int n = 0;
  std::vector<char> is_c;
  std::vector<int> C;                // ascending vertex ids
  std::vector<std::vector<int>> S;   // coarse vertices within distance 3 (C rows: itself)
  std::vector<int> coarse_index;     // vertex -> pattern column, -1 for F
  std::vector<int> initial_C;        // C before extra-point augmentation
  std::vector<int> extra_C;          // vertices promoted by the extra-point pass

  [[nodiscard]] bool is_f(int v) const { return !is_c[v]; }
};

struct HeuristicState {
  std::vector<double> h1;  // harmonic average of Euclidean distances to nearby C
  std::vector<double> h2;  // average graph distance to the members of S
};

inline double euclid(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double coordinate_diameter(std::span<const Point> coords) {
  if (coords.empty()) return 0.0;
  double x0 = coords[0].x, x1 = x0, y0 = coords[0].y, y1 = y0;
  for (const auto& p : coords) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  return std::hypot(x1 - x0, y1 - y0);
}

inline HeuristicState initial_heuristics(std::span<const Point> coords) {
  double diam = coordinate_diameter(coords);
  if (diam == 0.0) diam = 1.0;
  return {std::vector<double>(coords.size(), 1e4 * diam), std::vector<double>(coords.size(), 0.0)};
}

/// Harmonic pair update of h1 with the Euclidean distance e.
inline double harmonic_update(double h1, double e) {
  if (e == 0.0) return 0.0;
  return 2.0 * h1 * e / (h1 + e);
}

/// Running mean of graph distances after S_j grew to `s_size` members.
inline double mean_update(double h2, int s_size, int dist) { return (h2 * (s_size - 1) + dist) / s_size; }

namespace detail {

// Working state of the greedy splitting; status: 0 unmarked, 1 C, 2 F.
struct SplitState {
  const Graph& g;
  std::span<const Point> coords;
  std::vector<char> status;
  std::vector<std::vector<int>> S;
  HeuristicState h;
  BfsWorkspace ws;
  int classified = 0;

  SplitState(const Graph& graph, std::span<const Point> x)
      : g(graph), coords(x), status(graph.n, 0), S(graph.n), h(initial_heuristics(x)), ws(graph.n) {}

  // Makes k a C-point; returns the distance-4 ring for candidate bookkeeping.
  std::vector<int> promote(int k) {
    std::vector<int> ring4;
    const auto& reach = ws.run(g, k, 4);
    if (status[k] == 0) ++classified;
    status[k] = 1;
    S[k] = {k};
    for (const auto& [j, d] : reach) {
      if (j == k) continue;
      if (d <= 3 && status[j] != 1) {
        if (status[j] == 0) ++classified;
        status[j] = 2;
        S[j].push_back(k);
        std::sort(S[j].begin(), S[j].end());
      }
      if (d == 4 && status[j] == 0) ring4.push_back(j);
    }
    // heuristics over the distance-4 ball
    for (const auto& [j, d] : reach) {
      h.h1[j] = harmonic_update(h.h1[j], euclid(coords[j], coords[k]));
      if (j != k && d <= 3 && status[j] == 2)
        h.h2[j] = mean_update(h.h2[j], static_cast<int>(S[j].size()), d);
    }
    return ring4;
  }
};

inline double cosine_at(const Point& xj, const Point& a, const Point& b) {
  const double ax = a.x - xj.x, ay = a.y - xj.y, bx = b.x - xj.x, by = b.y - xj.y;
  const double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
  if (na == 0.0 || nb == 0.0) return 1.0;
  return (ax * bx + ay * by) / (na * nb);
}

inline void run_extra_points(SplitState& st, const CoarsenParams& params, std::vector<int>& promoted) {
  const int n = st.g.n;
  for (int t = 1; t <= 2; ++t) {
    std::vector<int> cand;
    for (int j = 0; j < n; ++j)
      if (st.status[j] == 2 && static_cast<int>(st.S[j].size()) == t) cand.push_back(j);
    if (cand.empty()) continue;
    double h1max = 0.0, h2max = 0.0;
    for (int j : cand) {
      h1max = std::max(h1max, st.h.h1[j]);
      h2max = std::max(h2max, st.h.h2[j]);
    }
    if (h1max == 0.0 || h2max == 0.0) continue;
    std::vector<double> score(n, 0.0), o(n, 1.0);
    for (int j : cand) {
      double hj = -(params.omega_g * st.h.h2[j] / h2max + (1.0 - params.omega_g) * st.h.h1[j] / h1max);
      if (t == 2) {
        o[j] = cosine_at(st.coords[j], st.coords[st.S[j][0]], st.coords[st.S[j][1]]);
        hj = -(params.omega_o * o[j] - (1.0 - params.omega_o) * hj);
      }
      score[j] = hj;
    }
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return score[a] < score[b]; });
    for (int k : cand) {
      // the heuristics may have changed since sorting: re-check eligibility
      if (st.status[k] != 2 || static_cast<int>(st.S[k].size()) != t) continue;
      if (!(st.h.h2[k] >= params.extra_h2_threshold && o[k] > params.extra_o_threshold)) continue;
      st.promote(k);
      promoted.push_back(k);
    }
  }
}

inline CfSplitting finish_splitting(const SplitState& st, std::vector<int> initial_c, std::vector<int> extra) {
  CfSplitting cf;
  cf.n = st.g.n;
  cf.is_c.assign(cf.n, 0);
  cf.coarse_index.assign(cf.n, -1);
  for (int v = 0; v < cf.n; ++v)
    if (st.status[v] == 1) {
      cf.is_c[v] = 1;
      cf.coarse_index[v] = static_cast<int>(cf.C.size());
      cf.C.push_back(v);
    }
  cf.S = st.S;
  std::sort(initial_c.begin(), initial_c.end());
  cf.initial_C = std::move(initial_c);
  cf.extra_C = std::move(extra);
  return cf;
}

}  // namespace detail

struct PressureCoarsening {
  CfSplitting splitting;
  HeuristicState heuristics;
};

/// Greedy distance-4 C/F splitting of the graph of `A_p`, followed by the
/// extra distance-3 C-point pass when enabled.
inline PressureCoarsening find_coarse_pressures(const SparseMatrix& A_p, std::span<const Point> coords,
                                                const CoarsenParams& params = {}) {
  detail::require(A_p.n_rows == A_p.n_cols, "find_coarse_pressures: matrix not square");
  detail::require(static_cast<int>(coords.size()) == A_p.n_rows, "find_coarse_pressures: coordinate count mismatch");
  const Graph g = graph_from_matrix(A_p);
  detail::SplitState st(g, coords);
  const int n = g.n;
  std::set<int> cand;
  std::vector<int> c_order;
  int next_unmarked = 0;
  int k = n > 0 ? 0 : -1;
  while (k >= 0) {
    c_order.push_back(k);
    for (int j : st.promote(k)) cand.insert(j);
    k = -1;
    double best = std::numeric_limits<double>::infinity();
    for (auto it = cand.begin(); it != cand.end();) {
      if (st.status[*it] != 0) {
        it = cand.erase(it);
        continue;
      }
      if (st.h.h1[*it] < best) {
        best = st.h.h1[*it];
        k = *it;
      }
      ++it;
    }
    if (k < 0) {
      while (next_unmarked < n && st.status[next_unmarked] != 0) ++next_unmarked;
      if (next_unmarked < n) k = next_unmarked;
    }
  }
  std::vector<int> extra;
  if (params.extra_points) detail::run_extra_points(st, params, extra);
  return {detail::finish_splitting(st, c_order, extra), st.h};
}

/// Extra-point pass applied to an existing splitting; exposed for testing and
/// for callers that build the initial splitting themselves.
inline CfSplitting find_extra_dist3_cpoints(const SparseMatrix& A_p, const CfSplitting& splitting,
                                            HeuristicState& state, std::span<const Point> coords,
                                            const CoarsenParams& params = {}) {
  const Graph g = graph_from_matrix(A_p);
  detail::SplitState st(g, coords);
  st.h = state;
  for (int v = 0; v < g.n; ++v) {
    st.status[v] = splitting.is_c[v] ? 1 : 2;
    st.S[v] = splitting.S[v];
  }
  st.classified = g.n;
  std::vector<int> extra;
  detail::run_extra_points(st, params, extra);
  state = st.h;
  auto initial = splitting.initial_C.empty() ? splitting.C : splitting.initial_C;
  auto extra_all = splitting.extra_C;
  extra_all.insert(extra_all.end(), extra.begin(), extra.end());
  return detail::finish_splitting(st, initial, extra_all);
}

/// Binary n x |C| pattern: row i holds the columns of S_i.
inline SparseMatrix pressure_pattern(const CfSplitting& cf) {
  std::vector<Triplet> t;
  for (int i = 0; i < cf.n; ++i) {
    if (cf.is_c[i]) {
      t.push_back({i, cf.coarse_index[i], 1.0});
      continue;
    }
    if (cf.S[i].empty()) throw Error("uncovered fine vertex " + std::to_string(i));
    for (int c : cf.S[i]) t.push_back({i, cf.coarse_index[c], 1.0});
  }
  return from_triplets(cf.n, static_cast<int>(cf.C.size()), std::move(t));
}

/// Pressure C-points plus mid-points (C-bar set), as ascending vertex ids.
inline std::vector<int> find_pressure_midpoints(const CfSplitting& cf, std::span<const Point> coords,
                                                const CoarsenParams& params = {}) {
  const int n = cf.n;
  std::vector<char> cbar(cf.is_c.begin(), cf.is_c.end());
  std::vector<std::vector<int>> cover(n);
  for (int j = 0; j < n; ++j)
    if (!cf.is_c[j])
      for (int c : cf.S[j]) cover[c].push_back(j);
  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (!cf.is_c[i] && !cf.S[i].empty()) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cf.S[a].size() > cf.S[b].size(); });
  std::set<std::vector<int>> seen;
  std::vector<int> bi;
  for (int i : order) {
    const auto& si = cf.S[i];
    if (!seen.insert(si).second) continue;
    Point target{0.0, 0.0};
    for (int c : si) target.x += coords[c].x, target.y += coords[c].y;
    target.x /= static_cast<double>(si.size());
    target.y /= static_cast<double>(si.size());
    bi.clear();
    for (int j : cover[si[0]])
      if (std::includes(cf.S[j].begin(), cf.S[j].end(), si.begin(), si.end())) bi.push_back(j);
    double x0 = coords[bi[0]].x, x1 = x0, y0 = coords[bi[0]].y, y1 = y0;
    int m = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j : bi) {
      x0 = std::min(x0, coords[j].x), x1 = std::max(x1, coords[j].x);
      y0 = std::min(y0, coords[j].y), y1 = std::max(y1, coords[j].y);
      const double e = euclid(coords[j], target);
      if (e < best) best = e, m = j;
    }
    const double ti = std::sqrt((x1 - x0) + (y1 - y0));
    double nearest = std::numeric_limits<double>::infinity();
    for (int j : bi)
      if (cbar[j]) nearest = std::min(nearest, euclid(coords[j], coords[m]));
    if (nearest >= params.tau2 * ti) cbar[m] = 1;
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (cbar[v]) out.push_back(v);
  return out;
}

/// Scalar velocity C-set: co-located partners of the C-bar pressures, then any
/// active velocity node farther than distance 3 from all of them is promoted
/// (ascending order). `active[v] == 0` marks nodes excluded from coarsening.
inline std::vector<int> find_velocity_cpoints(const CfSplitting& cf, std::span<const Point> coords_p,
                                              std::span<const int> colocation, const SparseMatrix& A_v_nodal,
                                              std::span<const char> active, const CoarsenParams& params = {}) {
  const int nv = A_v_nodal.n_rows;
  std::vector<char> is_c(nv, 0);
  for (int p : find_pressure_midpoints(cf, coords_p, params)) {
    const int v = colocation[p];
    if (v >= 0 && active[v]) is_c[v] = 1;
  }
  const Graph g = graph_from_matrix(A_v_nodal);
  std::vector<char> covered(nv, 0);
  BfsWorkspace ws(nv);
  for (int v = 0; v < nv; ++v)
    if (is_c[v])
      for (const auto& vd : ws.run(g, v, 3)) covered[vd.vertex] = 1;
  for (int v = 0; v < nv; ++v) {
    if (!active[v] || covered[v]) continue;
    is_c[v] = 1;
    for (const auto& vd : ws.run(g, v, 3)) covered[vd.vertex] = 1;
  }
  std::vector<int> out;
  for (int v = 0; v < nv; ++v)
    if (is_c[v]) out.push_back(v);
  return out;
}

/// Scalar nodal pattern (n x |C_v|): coarse nodes inject, other active nodes
/// take every coarse node within distance 3. Inactive nodes get empty rows.
inline SparseMatrix velocity_nodal_pattern(const SparseMatrix& A_v_nodal, std::span<const int> cv,
                                           std::span<const char> active) {
  detail::require(!cv.empty(), "velocity_pattern: empty coarse set");
  const int nv = A_v_nodal.n_rows;
  const Graph g = graph_from_matrix(A_v_nodal);
  std::vector<int> cidx(nv, -1);
  for (std::size_t k = 0; k < cv.size(); ++k) cidx[cv[k]] = static_cast<int>(k);
  std::vector<Triplet> t;
  BfsWorkspace ws(nv);
  for (std::size_t k = 0; k < cv.size(); ++k)
    for (const auto& [v, d] : ws.run(g, cv[k], 3))
      if (cidx[v] < 0 && active[v]) t.push_back({v, static_cast<int>(k), 1.0});
  for (std::size_t k = 0; k < cv.size(); ++k) t.push_back({cv[k], static_cast<int>(k), 1.0});
  SparseMatrix n = from_triplets(nv, static_cast<int>(cv.size()), std::move(t));
  for (int v = 0; v < nv; ++v)
    if (active[v] && n.row_nnz(v) == 0) throw Error("velocity_pattern: fine velocity " + std::to_string(v) + " has no coarse neighbour");
  return n;
}

/// Component-wise expansion of the nodal pattern (x block, then y block).
inline SparseMatrix velocity_pattern(const SparseMatrix& A_v_nodal, std::span<const int> cv,
                                     std::span<const char> active) {
  return block_diagonal(velocity_nodal_pattern(A_v_nodal, cv, active), 2);
}

}  // namespace q2amg

#endif  // Q2AMG_COARSEN_HPP
