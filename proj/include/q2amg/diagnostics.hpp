#ifndef Q2AMG_DIAGNOSTICS_HPP
#define Q2AMG_DIAGNOSTICS_HPP

#include <cmath>
#include <vector>

#include "q2amg/dense.hpp"
#include "q2amg/hierarchy.hpp"
#include "q2amg/sparse.hpp"

namespace q2amg {

// ------------------------------------------------ staggered 1D model

/// n pressures at x = i + 1/2 and n - 1 interior velocities at x = j + 1 on
/// (0, n); velocities vanish at both ends.
struct Mac1dSystem {
  int n = 0;
  SparseMatrix B_t;  // n x (n-1) discrete gradient, column j = e_{j+1} - e_j
  SparseMatrix full; // [[I, B_t^T], [-B_t, 0]]
  std::vector<double> x_p, x_v;
};

inline Mac1dSystem build_mac1d(int n) {
  detail::require(n >= 4, "build_mac1d: n must be at least 4");
  Mac1dSystem m;
  m.n = n;
  std::vector<Triplet> t;
  for (int j = 0; j < n - 1; ++j) {
    t.push_back({j, j, -1.0});
    t.push_back({j + 1, j, 1.0});
  }
  m.B_t = from_triplets(n, n - 1, t);
  const SparseMatrix b = transpose(m.B_t);
  m.full = block_2x2(identity(n - 1), b, scaled(m.B_t, -1.0), SparseMatrix(), n - 1, n);
  for (int i = 0; i < n; ++i) m.x_p.push_back(i + 0.5);
  for (int j = 0; j < n - 1; ++j) m.x_v.push_back(j + 1.0);
  return m;
}

enum class VelocityPlacement {
  CoLocated,  // coarse velocities at the interior coarse-pressure positions
  MidPoint    // coarse velocities halfway between consecutive coarse pressures
};

struct MacSchur {
  DenseMatrix S;      // P_p^T B P_v (P_v^T P_v)^{-1} P_v^T B^T P_p, scaled by (H/h)^2
  DenseMatrix S_hat;  // P_p^T B P_v P_v^T B^T P_p, scaled by (H/h)^2
  DenseMatrix P_p, P_v;
  std::vector<double> coarse_x_p, coarse_x_v;
};

namespace detail {

// Piecewise linear interpolation from sorted coarse positions. Outside the
// coarse range: inject the nearest value, or interpolate towards a zero
// Dirichlet value at `left` / `right` when given.
inline DenseMatrix linear_interpolation(const std::vector<double>& fine, const std::vector<double>& coarse,
                                        const double* left, const double* right) {
  const int nf = static_cast<int>(fine.size()), nc = static_cast<int>(coarse.size());
  DenseMatrix p(nf, nc);
  for (int i = 0; i < nf; ++i) {
    const double x = fine[i];
    int k = 0;
    while (k < nc && coarse[k] < x) ++k;
    if (k < nc && coarse[k] == x) {
      p(i, k) = 1.0;
    } else if (k == 0) {
      p(i, 0) = left ? (x - *left) / (coarse[0] - *left) : 1.0;
    } else if (k == nc) {
      p(i, nc - 1) = right ? (*right - x) / (*right - coarse[nc - 1]) : 1.0;
    } else {
      const double a = coarse[k - 1], b = coarse[k];
      p(i, k - 1) = (b - x) / (b - a);
      p(i, k) = (x - a) / (b - a);
    }
  }
  return p;
}

}  // namespace detail

/// Coarse pressures are the even fine pressures (factor-2 coarsening).
inline MacSchur projected_mac_schur(const Mac1dSystem& sys, VelocityPlacement placement) {
  const int n = sys.n;
  if (n % 2 != 1 || n < 5) throw Error("projected_mac_schur: n must be odd and >= 5 for factor-2 coarsening");
  MacSchur out;
  for (int i = 0; i < n; i += 2) out.coarse_x_p.push_back(sys.x_p[i]);
  const auto& cp = out.coarse_x_p;
  if (placement == VelocityPlacement::CoLocated)
    out.coarse_x_v.assign(cp.begin() + 1, cp.end() - 1);
  else
    for (std::size_t k = 0; k + 1 < cp.size(); ++k) out.coarse_x_v.push_back(0.5 * (cp[k] + cp[k + 1]));
  const double left = 0.0, right = static_cast<double>(n);
  out.P_p = detail::linear_interpolation(sys.x_p, cp, nullptr, nullptr);
  out.P_v = detail::linear_interpolation(sys.x_v, out.coarse_x_v, &left, &right);

  const DenseMatrix bt = DenseMatrix::from_sparse(sys.B_t);
  const DenseMatrix g = out.P_p.transposed() * bt * out.P_v;  // projected gradient
  const DenseMatrix gt = g.transposed();
  const double scale = 4.0;  // (H/h)^2
  out.S_hat = g * gt;
  const DenseLU mass(out.P_v.transposed() * out.P_v);
  DenseMatrix minv_gt(gt.rows, gt.cols);
  for (int c = 0; c < gt.cols; ++c) {
    Vector col(gt.rows);
    for (int r = 0; r < gt.rows; ++r) col[r] = gt(r, c);
    mass.solve_in_place(col);
    for (int r = 0; r < gt.rows; ++r) minv_gt(r, c) = col[r];
  }
  out.S = g * minv_gt;
  for (double& v : out.S_hat.data) v *= scale;
  for (double& v : out.S.data) v *= scale;
  // symmetrize round-off
  for (int i = 0; i < out.S.rows; ++i)
    for (int j = i + 1; j < out.S.cols; ++j) out.S(i, j) = out.S(j, i) = 0.5 * (out.S(i, j) + out.S(j, i));
  return out;
}

inline int sign_changes(std::span<const double> v, double rel_tol = 1e-10) {
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  int changes = 0, last = 0;
  for (double x : v) {
    if (std::abs(x) <= rel_tol * vmax) continue;
    const int s = x > 0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

/// Eigenvector of the second-smallest eigenvalue of a Laplacian-like matrix
/// whose kernel contains the constant; the eigenproblem is posed on the
/// complement of the constant so a multiple zero eigenvalue has a definite answer.
inline Vector second_eigenvector(const DenseMatrix& s) {
  const int n = s.rows;
  double shift = 1.0;
  for (int i = 0; i < n; ++i) shift += std::abs(s(i, i));
  DenseMatrix t = s;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t(i, j) += shift / n;
  const SymmetricEigen e = symmetric_eigen(t);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = e.vectors(i, 0);
  return v;
}

// ------------------------------------------------------ inf-sup probe

struct InfSupLevel {
  int level = 0;
  int rows = 0;  // pressure rows of the scaled divergence
  int cols = 0;
  double sigma_min = 0.0;
};

struct InfSupReport {
  std::vector<InfSupLevel> levels;
  std::vector<Vector> lumped_p, lumped_v;
};

inline Vector lump_abs(const SparseMatrix& m) {
  Vector d(m.n_rows, 0.0);
  for (int i = 0; i < m.n_rows; ++i)
    for (double v : m.row_vals(i)) d[i] += std::abs(v);
  return d;
}

/// Smallest nonzero singular value of lump(|M_p|)^{-1/2} B lump(|M_v|)^{-1/2} on
/// every level, with the masses carried down by the stored block transfers.
inline InfSupReport infsup_estimate(const Hierarchy& h, const SparseMatrix& M_v, const SparseMatrix& M_p,
                                    double zero_tol = 1e-10) {
  InfSupReport rep;
  SparseMatrix mv = M_v, mp = M_p;
  for (int l = 0; l < h.n_levels(); ++l) {
    const Level& lv = h.levels[l];
    detail::require(mv.n_rows == lv.n_v && mp.n_rows == lv.n_p, "infsup: mass matrix size mismatch on level " +
                                                                    std::to_string(l));
    const Vector dv = lump_abs(mv), dp = lump_abs(mp);
    for (double d : dv)
      if (!(d > 0.0)) throw Error("infsup: nonpositive lumped velocity mass on level " + std::to_string(l));
    for (double d : dp)
      if (!(d > 0.0)) throw Error("infsup: nonpositive lumped pressure mass on level " + std::to_string(l));
    SparseMatrix bt = submatrix(lv.A, lv.n_v, lv.A.n_rows, 0, lv.n_v);
    for (int i = 0; i < bt.n_rows; ++i) {
      auto cols = bt.row_cols(i);
      auto vals = bt.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) vals[k] /= std::sqrt(dp[i] * dv[cols[k]]);
    }
    const double s = smallest_nonzero_singular_value(DenseMatrix::from_sparse(bt), zero_tol);
    rep.levels.push_back({l, bt.n_rows, bt.n_cols, s});
    rep.lumped_p.push_back(dp);
    rep.lumped_v.push_back(dv);
    if (l + 1 < h.n_levels()) {
      mv = triple_product(lv.R_v, mv, lv.P_v);
      mp = triple_product(lv.R_p, mp, lv.P_p);
    }
  }
  return rep;
}

}  // namespace q2amg

#endif  // Q2AMG_DIAGNOSTICS_HPP
