#ifndef Q2AMG_ASSEMBLY_HPP
#define Q2AMG_ASSEMBLY_HPP

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "q2amg/mesh.hpp"
#include "q2amg/sparse.hpp"

namespace q2amg {

/// Two-by-two block saddle-point system [[A, B^T], [B, 0]] with velocities
/// ordered x-components first, then y-components, then pressures.
struct SaddleSystem {
  SparseMatrix A;              // 2 n_q2 x 2 n_q2
  SparseMatrix B;              // n_q1 x 2 n_q2
  Vector f_u;
  Vector f_p;
  std::vector<int> colocation;     // pressure node -> velocity node
  std::vector<char> dirichlet;     // per velocity dof (length 2 n_q2)
  bool pressure_nullspace = false;

  [[nodiscard]] int n_v() const { return A.n_rows; }
  [[nodiscard]] int n_p() const { return B.n_rows; }
  [[nodiscard]] int n_total() const { return n_v() + n_p(); }
  [[nodiscard]] int n_scalar() const { return A.n_rows / 2; }

  [[nodiscard]] SparseMatrix full_operator() const {
    return block_2x2(A, transpose(B), B, SparseMatrix(), n_v(), n_p());
  }
  [[nodiscard]] Vector full_rhs() const {
    Vector b(f_u);
    b.insert(b.end(), f_p.begin(), f_p.end());
    return b;
  }
};

namespace detail {

struct Quadrature {
  std::array<double, 3> pts{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  std::array<double, 3> wts{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
};

// local Q2 node k sits at lattice offsets (a, b) in {0,1,2}^2
inline constexpr std::array<std::array<int, 2>, 9> q2_local = {
    {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 0}, {2, 1}, {1, 2}, {0, 1}, {1, 1}}};

inline void lagrange2(double s, double* v, double* dv) {
  v[0] = 0.5 * s * (s - 1.0);
  v[1] = 1.0 - s * s;
  v[2] = 0.5 * s * (s + 1.0);
  dv[0] = s - 0.5;
  dv[1] = -2.0 * s;
  dv[2] = s + 0.5;
}

inline void lagrange1(double s, double* v, double* dv) {
  v[0] = 0.5 * (1.0 - s);
  v[1] = 0.5 * (1.0 + s);
  dv[0] = -0.5;
  dv[1] = 0.5;
}

// Basis data at one quadrature point of one element (physical gradients).
struct PointData {
  std::array<double, 9> phi{}, dphidx{}, dphidy{};
  std::array<double, 4> psi{};
  double weight = 0.0;  // quadrature weight * |J|
};

inline PointData evaluate(const std::array<Point, 4>& corners, double s, double t, double w) {
  PointData pd;
  double ls[3], dls[3], lt[3], dlt[3];
  lagrange2(s, ls, dls);
  lagrange2(t, lt, dlt);
  double ms[2], dms[2], mt[2], dmt[2];
  lagrange1(s, ms, dms);
  lagrange1(t, mt, dmt);
  static constexpr std::array<std::array<int, 2>, 4> q1_local = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  // bilinear geometry map
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  for (int k = 0; k < 4; ++k) {
    const int a = q1_local[k][0], b = q1_local[k][1];
    const double ds = dms[a] * mt[b], dt = ms[a] * dmt[b];
    j11 += corners[k].x * ds;
    j12 += corners[k].x * dt;
    j21 += corners[k].y * ds;
    j22 += corners[k].y * dt;
    pd.psi[k] = ms[a] * mt[b];
  }
  const double det = j11 * j22 - j12 * j21;
  if (!(det > 0.0)) throw Error("element with nonpositive Jacobian");
  pd.weight = w * det;
  for (int k = 0; k < 9; ++k) {
    const int a = q2_local[k][0], b = q2_local[k][1];
    pd.phi[k] = ls[a] * lt[b];
    const double ds = dls[a] * lt[b], dt = ls[a] * dlt[b];
    pd.dphidx[k] = (j22 * ds - j21 * dt) / det;
    pd.dphidy[k] = (-j12 * ds + j11 * dt) / det;
  }
  return pd;
}

template <class F>
void for_each_quadrature_point(const Mesh& mesh, int e, F&& f) {
  static const Quadrature q;
  const auto& el = mesh.q2_elements[e];
  const std::array<Point, 4> corners{mesh.q2_coords[el[0]], mesh.q2_coords[el[1]], mesh.q2_coords[el[2]],
                                     mesh.q2_coords[el[3]]};
  for (int qj = 0; qj < 3; ++qj)
    for (int qi = 0; qi < 3; ++qi) f(evaluate(corners, q.pts[qi], q.pts[qj], q.wts[qi] * q.wts[qj]));
}

struct RawBlocks {
  SparseMatrix a_scalar;  // n_q2 x n_q2 (stiffness, or nu*stiffness + convection)
  SparseMatrix bx, by;    // n_q1 x n_q2
};

// Element loops; convection uses the velocity field `u` (length 2 n_q2) when non-empty.
inline RawBlocks assemble_raw(const Mesh& mesh, double nu, std::span<const double> u) {
  const int nq2 = mesh.n_q2(), nq1 = mesh.n_q1();
  const bool convect = !u.empty();
  std::vector<Triplet> ta, tbx, tby;
  ta.reserve(mesh.q2_elements.size() * 81);
  tbx.reserve(mesh.q2_elements.size() * 36);
  tby.reserve(mesh.q2_elements.size() * 36);
  for (std::size_t e = 0; e < mesh.q2_elements.size(); ++e) {
    const auto& el = mesh.q2_elements[e];
    const auto& ep = mesh.q1_elements[e];
    double ae[9][9] = {};
    double bxe[4][9] = {}, bye[4][9] = {};
    for_each_quadrature_point(mesh, static_cast<int>(e), [&](const PointData& pd) {
      double ux = 0.0, uy = 0.0;
      if (convect)
        for (int k = 0; k < 9; ++k) {
          ux += u[el[k]] * pd.phi[k];
          uy += u[nq2 + el[k]] * pd.phi[k];
        }
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
          double v = nu * (pd.dphidx[i] * pd.dphidx[j] + pd.dphidy[i] * pd.dphidy[j]);
          if (convect) v += (ux * pd.dphidx[j] + uy * pd.dphidy[j]) * pd.phi[i];
          ae[i][j] += v * pd.weight;
        }
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 9; ++j) {
          bxe[i][j] += pd.psi[i] * pd.dphidx[j] * pd.weight;
          bye[i][j] += pd.psi[i] * pd.dphidy[j] * pd.weight;
        }
    });
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) ta.push_back({el[i], el[j], ae[i][j]});
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 9; ++j) {
        tbx.push_back({ep[i], el[j], bxe[i][j]});
        tby.push_back({ep[i], el[j], bye[i][j]});
      }
  }
  return {from_triplets(nq2, nq2, std::move(ta)), from_triplets(nq1, nq2, std::move(tbx)),
          from_triplets(nq1, nq2, std::move(tby))};
}

// Imposes Dirichlet data: constrained rows/columns of A become a unit diagonal,
// their couplings are moved to the right-hand sides; B loses the constrained columns.
inline SaddleSystem apply_dirichlet(const Mesh& mesh, const BoundaryCondition& bc, const RawBlocks& raw) {
  const int nq2 = mesh.n_q2(), nq1 = mesh.n_q1();
  detail::require(static_cast<int>(bc.dirichlet.size()) == nq2, "boundary condition size mismatch");
  SaddleSystem sys;
  sys.colocation = mesh.q1_to_q2;
  sys.pressure_nullspace = !mesh.has_neumann();
  sys.dirichlet.assign(2 * nq2, 0);
  Vector w(2 * nq2, 0.0);
  for (int i = 0; i < nq2; ++i)
    if (bc.dirichlet[i]) {
      sys.dirichlet[i] = sys.dirichlet[nq2 + i] = 1;
      w[i] = bc.wx[i];
      w[nq2 + i] = bc.wy[i];
    }
  sys.f_u.assign(2 * nq2, 0.0);
  sys.f_p.assign(nq1, 0.0);

  std::vector<Triplet> ta;
  ta.reserve(2 * raw.a_scalar.nnz());
  for (int c = 0; c < 2; ++c) {
    const int off = c * nq2;
    for (int i = 0; i < nq2; ++i) {
      const int gi = off + i;
      if (sys.dirichlet[gi]) {
        ta.push_back({gi, gi, 1.0});
        sys.f_u[gi] = w[gi];
        continue;
      }
      auto cols = raw.a_scalar.row_cols(i);
      auto vals = raw.a_scalar.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const int gj = off + cols[k];
        if (sys.dirichlet[gj]) sys.f_u[gi] -= vals[k] * w[gj];
        else ta.push_back({gi, gj, vals[k]});
      }
    }
  }
  sys.A = from_triplets(2 * nq2, 2 * nq2, std::move(ta));

  std::vector<Triplet> tb;
  tb.reserve(raw.bx.nnz() + raw.by.nnz());
  for (int c = 0; c < 2; ++c) {
    const SparseMatrix& blk = c == 0 ? raw.bx : raw.by;
    const int off = c * nq2;
    for (int i = 0; i < nq1; ++i) {
      auto cols = blk.row_cols(i);
      auto vals = blk.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const int gj = off + cols[k];
        if (sys.dirichlet[gj]) sys.f_p[i] -= vals[k] * w[gj];
        else tb.push_back({i, gj, vals[k]});
      }
    }
  }
  sys.B = from_triplets(nq1, 2 * nq2, std::move(tb));
  return sys;
}

}  // namespace detail

/// Scalar Q2 Laplacian stiffness matrix without boundary treatment.
inline SparseMatrix assemble_stiffness(const Mesh& mesh) { return detail::assemble_raw(mesh, 1.0, {}).a_scalar; }

/// Scalar convection matrix K(i, j) = int (u . grad phi_j) phi_i without boundary treatment.
inline SparseMatrix assemble_convection(const Mesh& mesh, std::span<const double> u) {
  detail::require(static_cast<int>(u.size()) == 2 * mesh.n_q2(), "convection: velocity length mismatch");
  return detail::assemble_raw(mesh, 0.0, u).a_scalar;
}

inline SaddleSystem assemble_stokes(const Mesh& mesh, const BoundaryCondition& bc) {
  return detail::apply_dirichlet(mesh, bc, detail::assemble_raw(mesh, 1.0, {}));
}

/// A = nu * A_S + diag(K, K) on unconstrained rows.
inline SaddleSystem assemble_oseen(const Mesh& mesh, const BoundaryCondition& bc, double nu,
                                   std::span<const double> u_current) {
  detail::require(static_cast<int>(u_current.size()) == 2 * mesh.n_q2(), "oseen: velocity length mismatch");
  return detail::apply_dirichlet(mesh, bc, detail::assemble_raw(mesh, nu, u_current));
}

struct MassMatrices {
  SparseMatrix velocity;         // 2 n_q2, block duplicated
  SparseMatrix velocity_scalar;  // n_q2
  SparseMatrix pressure;         // n_q1
};

inline MassMatrices assemble_mass_matrices(const Mesh& mesh) {
  std::vector<Triplet> tv, tp;
  for (std::size_t e = 0; e < mesh.q2_elements.size(); ++e) {
    const auto& el = mesh.q2_elements[e];
    const auto& ep = mesh.q1_elements[e];
    double mv[9][9] = {}, mp[4][4] = {};
    detail::for_each_quadrature_point(mesh, static_cast<int>(e), [&](const detail::PointData& pd) {
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) mv[i][j] += pd.phi[i] * pd.phi[j] * pd.weight;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) mp[i][j] += pd.psi[i] * pd.psi[j] * pd.weight;
    });
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) tv.push_back({el[i], el[j], mv[i][j]});
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) tp.push_back({ep[i], ep[j], mp[i][j]});
  }
  MassMatrices m;
  m.velocity_scalar = from_triplets(mesh.n_q2(), mesh.n_q2(), std::move(tv));
  m.velocity = block_diagonal(m.velocity_scalar, 2);
  m.pressure = from_triplets(mesh.n_q1(), mesh.n_q1(), std::move(tp));
  return m;
}

}  // namespace q2amg

#endif  // Q2AMG_ASSEMBLY_HPP
