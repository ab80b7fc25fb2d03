#ifndef Q2AMG_DENSE_HPP
#define Q2AMG_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "q2amg/sparse.hpp"

namespace q2amg {

/// Row-major dense matrix for desk-scale fallbacks.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  static DenseMatrix from_sparse(const SparseMatrix& a) {
    DenseMatrix d(a.n_rows, a.n_cols);
    d.data = to_dense(a);
    return d;
  }

  static DenseMatrix identity(int n) {
    DenseMatrix d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = 1.0;
    return d;
  }

  [[nodiscard]] DenseMatrix transposed() const {
    DenseMatrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.cols == b.rows, "dense multiply: dimension mismatch");
  DenseMatrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vector operator*(const DenseMatrix& a, std::span<const double> x) {
  Vector y(a.rows, 0.0);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) y[i] += a(i, j) * x[j];
  return y;
}

/// LU with partial pivoting, stored in place (unit lower part below diagonal).
class DenseLU {
public:
  DenseLU() = default;
  explicit DenseLU(DenseMatrix a) : lu_(std::move(a)), piv_(lu_.rows) {
    detail::require(lu_.rows == lu_.cols, "dense LU: matrix not square");
    const int n = lu_.rows;
    std::iota(piv_.begin(), piv_.end(), 0);
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(lu_(k, k));
      for (int i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      if (best == 0.0) throw Error("dense LU: singular matrix (zero pivot in column " + std::to_string(k) + ")");
      if (p != k) {
        for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(piv_[k], piv_[p]);
      }
      const double inv = 1.0 / lu_(k, k);
      for (int i = k + 1; i < n; ++i) {
        const double l = lu_(i, k) * inv;
        lu_(i, k) = l;
        if (l == 0.0) continue;
        for (int j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  [[nodiscard]] int size() const { return lu_.rows; }

  void solve_in_place(std::span<double> b) const {
    const int n = lu_.rows;
    tmp_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) tmp_[i] = b[piv_[i]];
    for (int i = 0; i < n; ++i) {
      double s = tmp_[i];
      for (int j = 0; j < i; ++j) s -= lu_(i, j) * tmp_[j];
      tmp_[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = tmp_[i];
      for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * tmp_[j];
      tmp_[i] = s / lu_(i, i);
    }
    std::copy(tmp_.begin(), tmp_.end(), b.begin());
  }

  [[nodiscard]] Vector solve(std::span<const double> b) const {
    Vector x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }

private:
  DenseMatrix lu_;
  std::vector<int> piv_;
  mutable std::vector<double> tmp_;
};

struct SymmetricEigen {
  Vector values;         // ascending
  DenseMatrix vectors;   // column k pairs with values[k]
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
inline SymmetricEigen symmetric_eigen(const DenseMatrix& input, double tol = 1e-14, int max_sweeps = 100) {
  detail::require(input.rows == input.cols, "symmetric_eigen: matrix not square");
  const int n = input.rows;
  DenseMatrix a = input;
  DenseMatrix v = DenseMatrix::identity(n);
  double total = 0.0;
  for (double x : a.data) total += x * x;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= tol * tol * total || off == 0.0) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), DenseMatrix(n, n)};
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

namespace detail {

// Householder reflector for x (length len, stride 1): returns beta, overwrites x
// with v (v[0] = 1 implicit scaling) and yields alpha = resulting leading entry.
inline double householder(double* x, int len, double& alpha) {
  double sigma = 0.0;
  for (int i = 1; i < len; ++i) sigma += x[i] * x[i];
  const double x0 = x[0];
  if (sigma == 0.0) {
    alpha = x0;
    x[0] = 1.0;
    return 0.0;
  }
  const double mu = std::sqrt(x0 * x0 + sigma);
  const double v0 = x0 <= 0 ? x0 - mu : -sigma / (x0 + mu);
  alpha = mu;
  const double beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
  for (int i = 1; i < len; ++i) x[i] /= v0;
  x[0] = 1.0;
  return beta;
}

// Number of eigenvalues < x of the symmetric tridiagonal with zero diagonal and
// off-diagonal `off` (Sturm sequence).
inline int sturm_count(const std::vector<double>& off2, double x) {
  const double tiny = std::numeric_limits<double>::min();
  int count = 0;
  double q = -x;
  if (q < 0) ++count;
  for (std::size_t i = 0; i < off2.size(); ++i) {
    if (q == 0.0) q = tiny;
    q = -x - off2[i] / q;
    if (q < 0) ++count;
  }
  return count;
}

}  // namespace detail

/// All singular values (descending) via Householder QR, Golub-Kahan
/// bidiagonalization and bisection on the associated tridiagonal.
inline Vector singular_values(const DenseMatrix& a_in) {
  const bool wide = a_in.rows < a_in.cols;
  const int m = wide ? a_in.cols : a_in.rows;
  const int n = wide ? a_in.rows : a_in.cols;
  if (n == 0) return {};
  // column-major copy of the tall orientation
  std::vector<double> a(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < a_in.rows; ++i)
    for (int j = 0; j < a_in.cols; ++j) {
      const int r = wide ? j : i, c = wide ? i : j;
      a[static_cast<std::size_t>(c) * m + r] = a_in(i, j);
    }
  auto col = [&](int c) { return a.data() + static_cast<std::size_t>(c) * m; };

  // QR: reduce to n x n upper triangular R
  for (int k = 0; k < n; ++k) {
    double alpha = 0.0;
    double* ck = col(k) + k;
    const double beta = detail::householder(ck, m - k, alpha);
    if (beta != 0.0) {
      for (int j = k + 1; j < n; ++j) {
        double* cj = col(j) + k;
        double s = 0.0;
        for (int i = 0; i < m - k; ++i) s += ck[i] * cj[i];
        s *= beta;
        for (int i = 0; i < m - k; ++i) cj[i] -= s * ck[i];
      }
    }
    ck[0] = alpha;
  }
  // row-major R
  DenseMatrix r(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) r(i, j) = col(j)[i];
  a.clear();
  a.shrink_to_fit();

  // Golub-Kahan bidiagonalization of R (dense Householder from both sides)
  std::vector<double> d(n, 0.0), e(n > 1 ? n - 1 : 0, 0.0);
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) {
    // left reflector on column k, rows k..n-1
    for (int i = k; i < n; ++i) v[i - k] = r(i, k);
    double alpha = 0.0;
    double beta = detail::householder(v.data(), n - k, alpha);
    d[k] = alpha;
    if (beta != 0.0) {
      for (int j = k + 1; j < n; ++j) {
        double s = 0.0;
        for (int i = k; i < n; ++i) s += v[i - k] * r(i, j);
        s *= beta;
        for (int i = k; i < n; ++i) r(i, j) -= s * v[i - k];
      }
    }
    if (k + 1 >= n) break;
    // right reflector on row k, columns k+1..n-1
    for (int j = k + 1; j < n; ++j) v[j - k - 1] = r(k, j);
    beta = detail::householder(v.data(), n - k - 1, alpha);
    e[k] = alpha;
    if (beta != 0.0) {
      for (int i = k + 1; i < n; ++i) {
        double s = 0.0;
        for (int j = k + 1; j < n; ++j) s += r(i, j) * v[j - k - 1];
        s *= beta;
        for (int j = k + 1; j < n; ++j) r(i, j) -= s * v[j - k - 1];
      }
    }
  }

  // Tridiagonal [0 d0; d0 0 e0; e0 0 d1; ...] has eigenvalues +-sigma.
  std::vector<double> off2;
  off2.reserve(2 * n - 1);
  double bound = 0.0;
  for (int k = 0; k < n; ++k) {
    off2.push_back(d[k] * d[k]);
    bound = std::max(bound, std::abs(d[k]) + (k < n - 1 ? std::abs(e[k]) : 0.0) + (k > 0 ? std::abs(e[k - 1]) : 0.0));
    if (k < n - 1) off2.push_back(e[k] * e[k]);
  }
  Vector sigma(n, 0.0);
  if (bound == 0.0) return sigma;
  bound *= 1.0 + 1e-12;
  // sigma sorted descending: sigma[k] is the (n-k)-th smallest nonnegative eigenvalue
  for (int k = 0; k < n; ++k) {
    const int target = n - k;  // want x with #(sigma < x) crossing target-1 -> target
    double lo = 0.0, hi = bound;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi || hi - lo <= 4e-16 * bound) break;
      const int below = detail::sturm_count(off2, mid) - n;
      if (below >= target) hi = mid;
      else lo = mid;
    }
    sigma[k] = 0.5 * (lo + hi);
  }
  return sigma;
}

/// Smallest singular value exceeding zero_tol * sigma_max.
inline double smallest_nonzero_singular_value(const DenseMatrix& a, double zero_tol = 1e-10) {
  const Vector s = singular_values(a);
  if (s.empty() || s.front() == 0.0) throw Error("numerically zero matrix");
  const double cut = zero_tol * s.front();
  double best = -1.0;
  for (double x : s)
    if (x > cut) best = x;
  if (best < 0.0) throw Error("numerically zero matrix");
  return best;
}

}  // namespace q2amg

#endif  // Q2AMG_DENSE_HPP
