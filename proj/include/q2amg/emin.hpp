#ifndef Q2AMG_EMIN_HPP
#define Q2AMG_EMIN_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "q2amg/sparse.hpp"

namespace q2amg {

enum class EminNorm {
  ANorm,      // chi = A (A symmetric positive (semi)definite)
  NormalNorm  // chi = A^T A
};

struct EminProblem {
  SparseMatrix A;
  SparseMatrix pattern;  // binary n_fine x n_coarse
  EminNorm norm = EminNorm::ANorm;
  int iterations = 1;
};

/// Pattern entries scaled so that every row sums to one. Empty rows are an
/// error unless `allow_empty_rows` (rows excluded from interpolation).
inline SparseMatrix initial_prolongator(const SparseMatrix& pattern, bool allow_empty_rows = false) {
  SparseMatrix p = pattern;
  for (int i = 0; i < p.n_rows; ++i) {
    const int nz = p.row_nnz(i);
    if (nz == 0) {
      if (!allow_empty_rows) throw Error("initial_prolongator: empty pattern row " + std::to_string(i));
      continue;
    }
    for (double& v : p.row_vals(i)) v = 1.0 / nz;
  }
  return p;
}

namespace detail {

// Values of M restricted to the pattern of N (missing entries read as zero).
inline SparseMatrix mask_to_pattern(const SparseMatrix& m, const SparseMatrix& pattern) {
  SparseMatrix out = pattern;
  for (int i = 0; i < pattern.n_rows; ++i) {
    auto pc = pattern.row_cols(i);
    auto ov = out.row_vals(i);
    auto mc = m.row_cols(i);
    auto mv = m.row_vals(i);
    std::size_t k = 0;
    for (std::size_t q = 0; q < pc.size(); ++q) {
      while (k < mc.size() && mc[k] < pc[q]) ++k;
      ov[q] = (k < mc.size() && mc[k] == pc[q]) ? mv[k] : 0.0;
    }
  }
  return out;
}

// Removes the row mean over the pattern entries: keeps (P + D) 1 = P 1.
inline void project_rows(SparseMatrix& g) {
  for (int i = 0; i < g.n_rows; ++i) {
    auto v = g.row_vals(i);
    if (v.empty()) continue;
    double s = 0.0;
    for (double x : v) s += x;
    s /= static_cast<double>(v.size());
    for (double& x : v) x -= s;
  }
}

inline double frob_dot(const SparseMatrix& a, const SparseMatrix& b) {
  // a and b share one pattern
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s;
}

}  // namespace detail

/// Energy sum_j ||P_j||_chi^2 = trace(P^T chi P).
inline double emin_energy(const SparseMatrix& A, const SparseMatrix& P, EminNorm norm) {
  const SparseMatrix ap = multiply(A, P);
  if (norm == EminNorm::NormalNorm) return frobenius_norm(ap) * frobenius_norm(ap);
  double s = 0.0;
  for (int i = 0; i < P.n_rows; ++i) {
    auto pc = P.row_cols(i);
    auto pv = P.row_vals(i);
    auto ac = ap.row_cols(i);
    auto av = ap.row_vals(i);
    std::size_t k = 0;
    for (std::size_t q = 0; q < pc.size(); ++q) {
      while (k < ac.size() && ac[k] < pc[q]) ++k;
      if (k < ac.size() && ac[k] == pc[q]) s += pv[q] * av[k];
    }
  }
  return s;
}

/// Projected conjugate-gradient descent on the energy over the pattern with
/// row sums held fixed. `observer` (optional) sees every iterate.
inline SparseMatrix emin_iterate(const EminProblem& prob, const SparseMatrix& P0,
                                 const std::function<void(int, const SparseMatrix&)>& observer = {}) {
  const SparseMatrix& A = prob.A;
  detail::require(A.n_rows == A.n_cols && A.n_cols == P0.n_rows, "emin: dimension mismatch");
  SparseMatrix P = detail::mask_to_pattern(P0, prob.pattern);
  const bool normal = prob.norm == EminNorm::NormalNorm;
  const SparseMatrix At = normal ? transpose(A) : SparseMatrix();
  auto chi_apply = [&](const SparseMatrix& x) {
    const SparseMatrix ax = multiply(A, x);
    return normal ? multiply(At, ax) : ax;
  };
  SparseMatrix D;
  double rr_old = 0.0;
  for (int it = 0; it < prob.iterations; ++it) {
    SparseMatrix R = detail::mask_to_pattern(chi_apply(P), prob.pattern);
    for (double& v : R.values) v = -v;
    detail::project_rows(R);
    const double rr = detail::frob_dot(R, R);
    if (rr == 0.0) break;
    if (it == 0) {
      D = R;
    } else {
      const double beta = rr / rr_old;
      for (std::size_t k = 0; k < D.values.size(); ++k) D.values[k] = R.values[k] + beta * D.values[k];
    }
    rr_old = rr;
    double dad = 0.0;
    const double dd = detail::frob_dot(D, D);
    if (normal) {
      const double f = frobenius_norm(multiply(A, D));
      dad = f * f;
    } else {
      dad = detail::frob_dot(D, detail::mask_to_pattern(multiply(A, D), prob.pattern));
      // round-off level curvature means D lies in the kernel of A
      if (dad < -1e-10 * dd * max_abs(A) || std::isnan(dad)) throw Error("norm matrix not SPD on pattern space");
    }
    if (dad <= 1e-14 * dd * (normal ? max_abs(A) * max_abs(A) : max_abs(A))) break;
    const double alpha = detail::frob_dot(R, D) / dad;
    for (std::size_t k = 0; k < P.values.size(); ++k) P.values[k] += alpha * D.values[k];
    if (observer) observer(it + 1, P);
  }
  return P;
}

/// Restriction with pattern(P)^T minimizing row energies in the A A^T norm:
/// R^T is obtained by emin_iterate with A^T in the normal-equations norm.
inline SparseMatrix emin_restriction(const SparseMatrix& A, const SparseMatrix& P, int iterations,
                                     bool allow_empty_rows = false) {
  SparseMatrix pattern = P;
  for (double& v : pattern.values) v = 1.0;
  EminProblem prob{transpose(A), pattern, EminNorm::NormalNorm, iterations};
  return transpose(emin_iterate(prob, initial_prolongator(pattern, allow_empty_rows)));
}

}  // namespace q2amg

#endif  // Q2AMG_EMIN_HPP
