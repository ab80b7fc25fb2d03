#ifndef Q2AMG_SMOOTHERS_HPP
#define Q2AMG_SMOOTHERS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "q2amg/dense.hpp"
#include "q2amg/graph.hpp"
#include "q2amg/sparse.hpp"

namespace q2amg {

/// Forward Gauss-Seidel sweeps in ascending index order.
inline void gauss_seidel(const SparseMatrix& a, std::span<double> x, std::span<const double> b, int sweeps) {
  detail::require(a.n_rows == a.n_cols && static_cast<int>(x.size()) == a.n_rows, "gauss_seidel: size mismatch");
  for (int s = 0; s < sweeps; ++s)
    for (int i = 0; i < a.n_rows; ++i) {
      double diag = 0.0, sum = b[i];
      for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
        const int j = a.col_indices[k];
        if (j == i) diag = a.values[k];
        else sum -= a.values[k] * x[j];
      }
      if (diag == 0.0) throw Error("gauss_seidel: zero diagonal in row " + std::to_string(i));
      x[i] = sum / diag;
    }
}

/// Relaxation applied to the full saddle operator of one level.
class Smoother {
public:
  virtual ~Smoother() = default;
  virtual void smooth(const SparseMatrix& k, std::span<double> x, std::span<const double> b, int sweeps) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

// ---------------------------------------------------------------- Vanka

struct VankaBlocks {
  std::vector<std::vector<int>> blocks;  // sorted dof lists; pressure blocks first
  std::vector<DenseLU> factors;
  int n_pressure_blocks = 0;
  double omega = 0.5;
};

/// One block per pressure dof (its B-row velocity columns plus the pressure),
/// plus singleton blocks for velocity dofs no pressure block touches.
inline VankaBlocks build_vanka_blocks(const SparseMatrix& k, int n_v, double omega = 0.5) {
  detail::require(k.n_rows == k.n_cols && n_v <= k.n_rows, "vanka: bad block sizes");
  const int n_p = k.n_rows - n_v;
  VankaBlocks vb;
  vb.omega = omega;
  std::vector<char> covered(n_v, 0);
  for (int i = 0; i < n_p; ++i) {
    std::vector<int> t;
    for (int c : k.row_cols(n_v + i))
      if (c < n_v) {
        t.push_back(c);
        covered[c] = 1;
      }
    t.push_back(n_v + i);
    vb.blocks.push_back(std::move(t));
  }
  vb.n_pressure_blocks = n_p;
  for (int v = 0; v < n_v; ++v)
    if (!covered[v]) vb.blocks.push_back({v});
  vb.factors.reserve(vb.blocks.size());
  std::vector<int> local(k.n_rows, -1);
  for (std::size_t b = 0; b < vb.blocks.size(); ++b) {
    const auto& t = vb.blocks[b];
    const int sz = static_cast<int>(t.size());
    for (int q = 0; q < sz; ++q) local[t[q]] = q;
    DenseMatrix m(sz, sz);
    for (int q = 0; q < sz; ++q) {
      auto cols = k.row_cols(t[q]);
      auto vals = k.row_vals(t[q]);
      for (std::size_t e = 0; e < cols.size(); ++e)
        if (local[cols[e]] >= 0) m(q, local[cols[e]]) = vals[e];
    }
    for (int q = 0; q < sz; ++q) local[t[q]] = -1;
    try {
      vb.factors.emplace_back(std::move(m));
    } catch (const Error&) {
      if (static_cast<int>(b) < n_p)
        throw Error("vanka: singular local block for pressure " + std::to_string(b));
      throw Error("vanka: singular local block for velocity " + std::to_string(t[0]));
    }
  }
  return vb;
}

/// Multiplicative pass over all blocks with the current iterate.
inline void vanka_sweep(const SparseMatrix& k, const VankaBlocks& vb, std::span<double> x, std::span<const double> b) {
  std::vector<double> r;
  for (std::size_t blk = 0; blk < vb.blocks.size(); ++blk) {
    const auto& t = vb.blocks[blk];
    r.resize(t.size());
    for (std::size_t q = 0; q < t.size(); ++q) {
      const int i = t[q];
      double s = b[i];
      for (int e = k.row_offsets[i]; e < k.row_offsets[i + 1]; ++e) s -= k.values[e] * x[k.col_indices[e]];
      r[q] = s;
    }
    vb.factors[blk].solve_in_place(r);
    for (std::size_t q = 0; q < t.size(); ++q) x[t[q]] += vb.omega * r[q];
  }
}

class VankaSmoother final : public Smoother {
public:
  VankaSmoother(const SparseMatrix& k, int n_v, double omega) : blocks_(build_vanka_blocks(k, n_v, omega)) {}
  void smooth(const SparseMatrix& k, std::span<double> x, std::span<const double> b, int sweeps) const override {
    for (int s = 0; s < sweeps; ++s) vanka_sweep(k, blocks_, x, b);
  }
  [[nodiscard]] std::string name() const override { return "vanka"; }
  [[nodiscard]] const VankaBlocks& blocks() const { return blocks_; }

private:
  VankaBlocks blocks_;
};

// ------------------------------------------------------- Braess-Sarazin

enum class BsDiagonal { AbsRowSum, Diagonal };

struct BraessSarazinData {
  int n_v = 0;
  Vector D;
  SparseMatrix B, Bt;
  SparseMatrix S;  // B D^{-1} B^T
  double omega = 0.666;
  int inner_sweeps = 5;
};

inline BraessSarazinData build_braess_sarazin(const SparseMatrix& k, int n_v, double omega = 0.666,
                                              int inner_sweeps = 5, BsDiagonal kind = BsDiagonal::AbsRowSum) {
  BraessSarazinData d;
  d.n_v = n_v;
  d.omega = omega;
  d.inner_sweeps = inner_sweeps;
  const SparseMatrix a = submatrix(k, 0, n_v, 0, n_v);
  d.B = submatrix(k, n_v, k.n_rows, 0, n_v);
  d.Bt = submatrix(k, 0, n_v, n_v, k.n_cols);
  d.D.assign(n_v, 0.0);
  for (int i = 0; i < n_v; ++i) {
    if (kind == BsDiagonal::AbsRowSum)
      for (double v : a.row_vals(i)) d.D[i] += std::abs(v);
    else
      d.D[i] = a.at(i, i);
    if (!(d.D[i] > 0.0)) throw Error("braess-sarazin: nonpositive diagonal scaling in row " + std::to_string(i));
  }
  SparseMatrix dinv_bt = d.Bt;
  for (int i = 0; i < n_v; ++i)
    for (double& v : dinv_bt.row_vals(i)) v /= d.D[i];
  d.S = multiply(d.B, dinv_bt);
  return d;
}

/// x += [[D/omega, B^T], [B, 0]]^{-1} (b - K x) with the Schur system
/// omega S q = B y - r_p solved approximately by Gauss-Seidel from zero.
inline void braess_sarazin_step(const SparseMatrix& k, const BraessSarazinData& d, std::span<double> x,
                                std::span<const double> b) {
  const int n_v = d.n_v, n_p = k.n_rows - n_v;
  const Vector r = residual(k, x, b);
  Vector y(n_v);
  for (int i = 0; i < n_v; ++i) y[i] = d.omega * r[i] / d.D[i];
  Vector rhs = multiply(d.B, y);
  for (int i = 0; i < n_p; ++i) rhs[i] = (rhs[i] - r[n_v + i]) / d.omega;
  Vector q(n_p, 0.0);
  if (n_p > 0) gauss_seidel(d.S, q, rhs, d.inner_sweeps);
  const Vector btq = multiply(d.Bt, q);
  for (int i = 0; i < n_v; ++i) x[i] += y[i] - d.omega * btq[i] / d.D[i];
  for (int i = 0; i < n_p; ++i) x[n_v + i] += q[i];
}

class BraessSarazinSmoother final : public Smoother {
public:
  BraessSarazinSmoother(const SparseMatrix& k, int n_v, double omega, int inner)
      : data_(build_braess_sarazin(k, n_v, omega, inner)) {}
  void smooth(const SparseMatrix& k, std::span<double> x, std::span<const double> b, int sweeps) const override {
    for (int s = 0; s < sweeps; ++s) braess_sarazin_step(k, data_, x, b);
  }
  [[nodiscard]] std::string name() const override { return "braess-sarazin"; }
  [[nodiscard]] const BraessSarazinData& data() const { return data_; }

private:
  BraessSarazinData data_;
};

// ------------------------------------------------------------------ ILU

struct IluFactors {
  Permutation perm;
  SparseMatrix lu;      // strict lower part: L (unit diagonal implied); rest: U
  std::vector<int> diag_pos;
  int pivot_replacements = 0;
  int fill_level = 1;
};

/// Level-of-fill pattern of a (already permuted) matrix, diagonal included at level 0.
inline SparseMatrix ilu_symbolic(const SparseMatrix& a, int level) {
  const int n = a.n_rows;
  std::vector<std::vector<std::pair<int, int>>> upper(n);  // per row: (col > i, level)
  std::vector<Triplet> t;
  std::map<int, int> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int c : a.row_cols(i)) row[c] = 0;
    row[i] = 0;
    for (auto it = row.begin(); it != row.end() && it->first < i; ++it) {
      const int kk = it->first, lik = it->second;
      for (const auto& [j, lkj] : upper[kk]) {
        const int lev = lik + lkj + 1;
        if (lev > level) continue;
        auto f = row.find(j);
        if (f == row.end()) row.emplace(j, lev);
        else f->second = std::min(f->second, lev);
      }
    }
    for (const auto& [j, lev] : row) {
      t.push_back({i, j, 0.0});
      if (j > i) upper[i].emplace_back(j, lev);
    }
  }
  return from_triplets(n, n, std::move(t));
}

inline IluFactors ilu_factor(const SparseMatrix& a, int level = 1, bool rcm = true) {
  detail::require(a.n_rows == a.n_cols, "ilu: matrix not square");
  const int n = a.n_rows;
  IluFactors f;
  f.fill_level = level;
  f.perm = rcm ? rcm_ordering(a) : Permutation::identity(n);
  const SparseMatrix pa = permute_symmetric(a, f.perm.forward);
  f.lu = ilu_symbolic(pa, level);
  // scatter values
  for (int i = 0; i < n; ++i) {
    auto cols = pa.row_cols(i);
    auto vals = pa.row_vals(i);
    for (std::size_t e = 0; e < cols.size(); ++e) f.lu.values[f.lu.find(i, cols[e])] = vals[e];
  }
  f.diag_pos.resize(n);
  for (int i = 0; i < n; ++i) f.diag_pos[i] = f.lu.find(i, i);
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r0 = f.lu.row_offsets[i], r1 = f.lu.row_offsets[i + 1];
    double row_max = 0.0;
    for (int e = r0; e < r1; ++e) {
      pos[f.lu.col_indices[e]] = e;
      row_max = std::max(row_max, std::abs(f.lu.values[e]));
    }
    for (int e = r0; e < r1; ++e) {
      const int kk = f.lu.col_indices[e];
      if (kk >= i) break;
      const double lik = f.lu.values[e] / f.lu.values[f.diag_pos[kk]];
      f.lu.values[e] = lik;
      for (int q = f.diag_pos[kk] + 1; q < f.lu.row_offsets[kk + 1]; ++q) {
        const int j = f.lu.col_indices[q];
        if (pos[j] >= 0) f.lu.values[pos[j]] -= lik * f.lu.values[q];
      }
    }
    double& piv = f.lu.values[f.diag_pos[i]];
    if (piv == 0.0) {
      piv = 1e-8 * (row_max > 0.0 ? row_max : 1.0);
      ++f.pivot_replacements;
    }
    for (int e = r0; e < r1; ++e) pos[f.lu.col_indices[e]] = -1;
  }
  return f;
}

inline Vector ilu_apply(const IluFactors& f, std::span<const double> r) {
  const int n = f.lu.n_rows;
  Vector y(n);
  for (int i = 0; i < n; ++i) y[i] = r[f.perm.forward[i]];
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int e = f.lu.row_offsets[i]; e < f.diag_pos[i]; ++e) s -= f.lu.values[e] * y[f.lu.col_indices[e]];
    y[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int e = f.diag_pos[i] + 1; e < f.lu.row_offsets[i + 1]; ++e) s -= f.lu.values[e] * y[f.lu.col_indices[e]];
    y[i] = s / f.lu.values[f.diag_pos[i]];
  }
  Vector z(n);
  for (int i = 0; i < n; ++i) z[f.perm.forward[i]] = y[i];
  return z;
}

class IluSmoother final : public Smoother {
public:
  IluSmoother(const SparseMatrix& k, int level, bool rcm) : f_(ilu_factor(k, level, rcm)) {}
  void smooth(const SparseMatrix& k, std::span<double> x, std::span<const double> b, int sweeps) const override {
    for (int s = 0; s < sweeps; ++s) {
      const Vector z = ilu_apply(f_, residual(k, x, b));
      for (std::size_t i = 0; i < z.size(); ++i) x[i] += z[i];
    }
  }
  [[nodiscard]] std::string name() const override { return "ilu" + std::to_string(f_.fill_level); }
  [[nodiscard]] const IluFactors& factors() const { return f_; }

private:
  IluFactors f_;
};

}  // namespace q2amg

#endif  // Q2AMG_SMOOTHERS_HPP
