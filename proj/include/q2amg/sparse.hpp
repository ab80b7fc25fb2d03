#ifndef Q2AMG_SPARSE_HPP
#define Q2AMG_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace q2amg {

/// Library-wide error type. Every failure surfaced by q2amg derives from it.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row sparse matrix in canonical form: column indices strictly
/// increasing inside every row. Explicit zeros may be stored (structural
/// entries from assembly); `prune` removes them.
struct SparseMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_offsets{0};
  std::vector<int> col_indices;
  std::vector<double> values;

  SparseMatrix() = default;
  SparseMatrix(int rows, int cols)
      : n_rows(rows), n_cols(cols), row_offsets(static_cast<std::size_t>(rows) + 1, 0) {}

  [[nodiscard]] std::size_t nnz() const { return values.size(); }

  [[nodiscard]] std::span<const int> row_cols(int i) const {
    return {col_indices.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }
  [[nodiscard]] std::span<const double> row_vals(int i) const {
    return {values.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }
  [[nodiscard]] std::span<double> row_vals(int i) {
    return {values.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }
  [[nodiscard]] int row_nnz(int i) const { return row_offsets[i + 1] - row_offsets[i]; }

  /// Stored value at (i, j), zero when the entry is not in the pattern.
  [[nodiscard]] double at(int i, int j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values[row_offsets[i] + static_cast<int>(it - cols.begin())];
  }

  /// Position of (i, j) in `values`, or -1.
  [[nodiscard]] int find(int i, int j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return -1;
    return row_offsets[i] + static_cast<int>(it - cols.begin());
  }
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

}  // namespace detail

/// Builds a canonical matrix from unordered triplets; duplicates are summed and
/// zero-valued triplets are kept as structural entries.
inline SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> trips) {
  for (const auto& t : trips)
    detail::require(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols,
                    "from_triplets: index out of range");
  std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_indices.reserve(trips.size());
  m.values.reserve(trips.size());
  std::size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    while (k < trips.size() && trips[k].row == i) {
      const int j = trips[k].col;
      double v = 0.0;
      while (k < trips.size() && trips[k].row == i && trips[k].col == j) v += trips[k++].value;
      m.col_indices.push_back(j);
      m.values.push_back(v);
    }
    m.row_offsets[i + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

inline SparseMatrix identity(int n) {
  SparseMatrix m(n, n);
  m.col_indices.resize(n);
  m.values.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    m.col_indices[i] = i;
    m.row_offsets[i + 1] = i + 1;
  }
  return m;
}

/// Sparse matrix built from a row-major dense array, keeping nonzeros only.
inline SparseMatrix from_dense(int rows, int cols, std::span<const double> dense) {
  detail::require(dense.size() == static_cast<std::size_t>(rows) * cols, "from_dense: size mismatch");
  SparseMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = dense[static_cast<std::size_t>(i) * cols + j];
      if (v != 0.0) {
        m.col_indices.push_back(j);
        m.values.push_back(v);
      }
    }
    m.row_offsets[i + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

inline std::vector<double> to_dense(const SparseMatrix& a) {
  std::vector<double> d(static_cast<std::size_t>(a.n_rows) * a.n_cols, 0.0);
  for (int i = 0; i < a.n_rows; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) d[static_cast<std::size_t>(i) * a.n_cols + cols[k]] += vals[k];
  }
  return d;
}

/// Removes stored entries with |value| <= tol. tol = 0 removes exact zeros only.
inline SparseMatrix prune(const SparseMatrix& a, double tol = 0.0) {
  SparseMatrix m(a.n_rows, a.n_cols);
  m.col_indices.reserve(a.nnz());
  m.values.reserve(a.nnz());
  for (int i = 0; i < a.n_rows; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (std::abs(vals[k]) > tol || (tol == 0.0 && vals[k] != 0.0)) {
        m.col_indices.push_back(cols[k]);
        m.values.push_back(vals[k]);
      }
    }
    m.row_offsets[i + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

inline SparseMatrix transpose(const SparseMatrix& a) {
  SparseMatrix t(a.n_cols, a.n_rows);
  std::vector<int> count(static_cast<std::size_t>(a.n_cols) + 1, 0);
  for (int c : a.col_indices) ++count[c + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  t.row_offsets = count;
  t.col_indices.resize(a.nnz());
  t.values.resize(a.nnz());
  std::vector<int> next(count.begin(), count.end() - 1);
  for (int i = 0; i < a.n_rows; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int pos = next[cols[k]]++;
      t.col_indices[pos] = i;
      t.values[pos] = vals[k];
    }
  }
  return t;
}

/// y = A x
inline void multiply(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  detail::require(static_cast<int>(x.size()) == a.n_cols && static_cast<int>(y.size()) == a.n_rows,
                  "spmv: dimension mismatch");
  for (int i = 0; i < a.n_rows; ++i) {
    double s = 0.0;
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) s += a.values[k] * x[a.col_indices[k]];
    y[i] = s;
  }
}

inline Vector multiply(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.n_rows);
  multiply(a, x, y);
  return y;
}

/// r = b - A x
inline Vector residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
  detail::require(static_cast<int>(b.size()) == a.n_rows, "residual: dimension mismatch");
  Vector r = multiply(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

/// Gustavson sparse-sparse product; output canonical, structural zeros kept.
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  detail::require(a.n_cols == b.n_rows, "spgemm: dimension mismatch (" + std::to_string(a.n_rows) + "x" +
                                            std::to_string(a.n_cols) + " * " + std::to_string(b.n_rows) +
                                            "x" + std::to_string(b.n_cols) + ")");
  SparseMatrix c(a.n_rows, b.n_cols);
  std::vector<int> marker(b.n_cols, -1);
  std::vector<double> acc(b.n_cols, 0.0);
  std::vector<int> cols;
  for (int i = 0; i < a.n_rows; ++i) {
    cols.clear();
    for (int ka = a.row_offsets[i]; ka < a.row_offsets[i + 1]; ++ka) {
      const int k = a.col_indices[ka];
      const double av = a.values[ka];
      for (int kb = b.row_offsets[k]; kb < b.row_offsets[k + 1]; ++kb) {
        const int j = b.col_indices[kb];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          cols.push_back(j);
        }
        acc[j] += av * b.values[kb];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (int j : cols) {
      c.col_indices.push_back(j);
      c.values.push_back(acc[j]);
    }
    c.row_offsets[i + 1] = static_cast<int>(c.values.size());
  }
  return c;
}

/// Exact R*A*P with exact zeros removed.
inline SparseMatrix triple_product(const SparseMatrix& r, const SparseMatrix& a, const SparseMatrix& p) {
  detail::require(r.n_cols == a.n_rows && a.n_cols == p.n_rows,
                  "triple_product: dimension mismatch");
  return prune(multiply(multiply(r, a), p), 0.0);
}

/// alpha*A + beta*B over the union pattern.
inline SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0) {
  detail::require(a.n_rows == b.n_rows && a.n_cols == b.n_cols, "add: dimension mismatch");
  SparseMatrix c(a.n_rows, a.n_cols);
  c.col_indices.reserve(a.nnz() + b.nnz());
  c.values.reserve(a.nnz() + b.nnz());
  for (int i = 0; i < a.n_rows; ++i) {
    int ka = a.row_offsets[i], kb = b.row_offsets[i];
    const int ea = a.row_offsets[i + 1], eb = b.row_offsets[i + 1];
    while (ka < ea || kb < eb) {
      const int ja = ka < ea ? a.col_indices[ka] : a.n_cols;
      const int jb = kb < eb ? b.col_indices[kb] : b.n_cols;
      if (ja < jb) {
        c.col_indices.push_back(ja);
        c.values.push_back(alpha * a.values[ka++]);
      } else if (jb < ja) {
        c.col_indices.push_back(jb);
        c.values.push_back(beta * b.values[kb++]);
      } else {
        c.col_indices.push_back(ja);
        c.values.push_back(alpha * a.values[ka++] + beta * b.values[kb++]);
      }
    }
    c.row_offsets[i + 1] = static_cast<int>(c.values.size());
  }
  return c;
}

inline SparseMatrix scaled(SparseMatrix a, double s) {
  for (double& v : a.values) v *= s;
  return a;
}

inline Vector diagonal(const SparseMatrix& a) {
  const int n = std::min(a.n_rows, a.n_cols);
  Vector d(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = a.at(i, i);
  return d;
}

/// Rows [r0, r1) x columns [c0, c1), re-indexed from zero.
inline SparseMatrix submatrix(const SparseMatrix& a, int r0, int r1, int c0, int c1) {
  detail::require(0 <= r0 && r0 <= r1 && r1 <= a.n_rows && 0 <= c0 && c0 <= c1 && c1 <= a.n_cols,
                  "submatrix: range out of bounds");
  SparseMatrix m(r1 - r0, c1 - c0);
  for (int i = r0; i < r1; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    auto lo = std::lower_bound(cols.begin(), cols.end(), c0);
    for (auto it = lo; it != cols.end() && *it < c1; ++it) {
      m.col_indices.push_back(*it - c0);
      m.values.push_back(vals[it - cols.begin()]);
    }
    m.row_offsets[i - r0 + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

/// Rows/columns selected by index lists (both sorted ascending is not required).
inline SparseMatrix select(const SparseMatrix& a, std::span<const int> rows, std::span<const int> cols) {
  std::vector<int> col_map(a.n_cols, -1);
  for (std::size_t k = 0; k < cols.size(); ++k) col_map[cols[k]] = static_cast<int>(k);
  std::vector<Triplet> trips;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto rc = a.row_cols(rows[r]);
    auto rv = a.row_vals(rows[r]);
    for (std::size_t k = 0; k < rc.size(); ++k)
      if (col_map[rc[k]] >= 0) trips.push_back({static_cast<int>(r), col_map[rc[k]], rv[k]});
  }
  return from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()), std::move(trips));
}

/// [[A11, A12], [A21, A22]]; empty (0x0) blocks are treated as zero.
inline SparseMatrix block_2x2(const SparseMatrix& a11, const SparseMatrix& a12, const SparseMatrix& a21,
                              const SparseMatrix& a22, int n1, int n2) {
  auto ok = [](const SparseMatrix& m, int r, int c) {
    return (m.n_rows == 0 && m.n_cols == 0) || (m.n_rows == r && m.n_cols == c);
  };
  detail::require(ok(a11, n1, n1) && ok(a12, n1, n2) && ok(a21, n2, n1) && ok(a22, n2, n2),
                  "block_2x2: block dimension mismatch");
  SparseMatrix m(n1 + n2, n1 + n2);
  auto append_row = [&](const SparseMatrix& blk, int i, int col_shift) {
    if (blk.n_rows == 0) return;
    auto cols = blk.row_cols(i);
    auto vals = blk.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      m.col_indices.push_back(cols[k] + col_shift);
      m.values.push_back(vals[k]);
    }
  };
  for (int i = 0; i < n1; ++i) {
    append_row(a11, i, 0);
    append_row(a12, i, n1);
    m.row_offsets[i + 1] = static_cast<int>(m.values.size());
  }
  for (int i = 0; i < n2; ++i) {
    append_row(a21, i, 0);
    append_row(a22, i, n1);
    m.row_offsets[n1 + i + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

/// Block-diagonal matrix diag(A, A, ..., A) with `copies` copies.
inline SparseMatrix block_diagonal(const SparseMatrix& a, int copies) {
  SparseMatrix m(a.n_rows * copies, a.n_cols * copies);
  m.col_indices.reserve(a.nnz() * copies);
  m.values.reserve(a.nnz() * copies);
  for (int c = 0; c < copies; ++c) {
    for (int i = 0; i < a.n_rows; ++i) {
      auto cols = a.row_cols(i);
      auto vals = a.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        m.col_indices.push_back(cols[k] + c * a.n_cols);
        m.values.push_back(vals[k]);
      }
      m.row_offsets[c * a.n_rows + i + 1] = static_cast<int>(m.values.size());
    }
  }
  return m;
}

/// Symmetric permutation B = A(perm, perm), perm[new] = old.
inline SparseMatrix permute_symmetric(const SparseMatrix& a, std::span<const int> perm) {
  detail::require(a.n_rows == a.n_cols && static_cast<int>(perm.size()) == a.n_rows,
                  "permute_symmetric: size mismatch");
  std::vector<int> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = static_cast<int>(k);
  SparseMatrix m(a.n_rows, a.n_cols);
  std::vector<std::pair<int, double>> row;
  for (int inew = 0; inew < a.n_rows; ++inew) {
    const int iold = perm[inew];
    row.clear();
    auto cols = a.row_cols(iold);
    auto vals = a.row_vals(iold);
    for (std::size_t k = 0; k < cols.size(); ++k) row.emplace_back(inv[cols[k]], vals[k]);
    std::sort(row.begin(), row.end());
    for (auto [j, v] : row) {
      m.col_indices.push_back(j);
      m.values.push_back(v);
    }
    m.row_offsets[inew + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

inline double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

inline double frobenius_norm(const SparseMatrix& a) {
  double s = 0.0;
  for (double v : a.values) s += v * v;
  return std::sqrt(s);
}

/// Lower/upper bandwidth max |i - j| over stored nonzero entries.
inline int bandwidth(const SparseMatrix& a) {
  int bw = 0;
  for (int i = 0; i < a.n_rows; ++i)
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
      if (a.values[k] != 0.0) bw = std::max(bw, std::abs(i - a.col_indices[k]));
  return bw;
}

inline Vector row_sums(const SparseMatrix& a) {
  Vector s(a.n_rows, 0.0);
  for (int i = 0; i < a.n_rows; ++i)
    for (double v : a.row_vals(i)) s[i] += v;
  return s;
}

// ---- small dense-vector helpers used across modules ----

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace q2amg

#endif  // Q2AMG_SPARSE_HPP
