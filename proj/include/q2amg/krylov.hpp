#ifndef Q2AMG_KRYLOV_HPP
#define Q2AMG_KRYLOV_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "q2amg/sparse.hpp"

namespace q2amg {

/// out = Op(in)
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

inline LinearOperator matrix_operator(const SparseMatrix& a) {
  return [&a](std::span<const double> in, std::span<double> out) { multiply(a, in, out); };
}

struct GmresOptions {
  double rel_tol = 1e-6;
  int max_iter = 200;
  int restart = 0;  // 0: full GMRES
};

struct GmresResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // relative (preconditioned-space) residual estimates, starting at iteration 0
  double true_relative_residual = 0.0;
  double orthogonality_error = 0.0;  // max |V^T V - I| over the last Arnoldi basis
};

/// Right-preconditioned GMRES with modified Gram-Schmidt and Givens rotations.
/// An empty preconditioner means the identity.
inline GmresResult gmres(const LinearOperator& op, const LinearOperator& prec, std::span<const double> b,
                         std::span<const double> x0, const GmresOptions& opt = {}) {
  detail::require(opt.rel_tol > 0.0, "gmres: rel_tol must be positive");
  const int n = static_cast<int>(b.size());
  detail::require(static_cast<int>(x0.size()) == n, "gmres: x0 size mismatch");
  GmresResult res;
  res.x.assign(x0.begin(), x0.end());
  const double bnorm = norm2(b);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Vector r(n), w(n), z(n);
  auto true_residual = [&]() {
    op(res.x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(r);
  };
  double beta = true_residual();
  res.history.push_back(beta / scale);
  if (beta / scale <= opt.rel_tol) {
    res.converged = true;
    res.true_relative_residual = beta / scale;
    return res;
  }
  const int m_max = opt.restart > 0 ? opt.restart : opt.max_iter;
  while (res.iterations < opt.max_iter) {
    const int m = std::min(m_max, opt.max_iter - res.iterations);
    std::vector<Vector> V(1, Vector(n));
    for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::vector<Vector> H;  // column j has j+2 entries
    std::vector<double> cs, sn, g{beta};
    int j = 0;
    bool breakdown = false;
    for (; j < m; ++j) {
      if (prec) prec(V[j], z);
      else z = V[j];
      op(z, w);
      Vector h(j + 2, 0.0);
      // modified Gram-Schmidt, repeated once to keep V orthonormal near convergence
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const double c = dot(w, V[i]);
          h[i] += c;
          axpy(-c, V[i], w);
        }
      h[j + 1] = norm2(w);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      const double hn = h[j + 1];
      const double denom = std::hypot(h[j], hn);
      const double c = denom == 0.0 ? 1.0 : h[j] / denom;
      const double s = denom == 0.0 ? 0.0 : hn / denom;
      cs.push_back(c);
      sn.push_back(s);
      h[j] = c * h[j] + s * hn;
      h[j + 1] = 0.0;
      g.push_back(-s * g[j]);
      g[j] = c * g[j];
      H.push_back(std::move(h));
      ++res.iterations;
      res.history.push_back(std::abs(g[j + 1]) / scale);
      if (hn <= 1e-14 * scale) {
        breakdown = true;
        ++j;
        break;
      }
      Vector vnext(n);
      for (int i = 0; i < n; ++i) vnext[i] = w[i] / hn;
      V.push_back(std::move(vnext));
      if (std::abs(g[j + 1]) / scale <= opt.rel_tol) {
        ++j;
        break;
      }
    }
    // y = H^{-1} g, x += M^{-1} V y
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int q = i + 1; q < j; ++q) s -= H[q][i] * y[q];
      y[i] = H[i][i] == 0.0 ? 0.0 : s / H[i][i];
    }
    Vector u(n, 0.0);
    for (int i = 0; i < j; ++i) axpy(y[i], V[i], u);
    if (prec) prec(u, z);
    else z = u;
    axpy(1.0, z, res.x);

    double orth = 0.0;
    const int nb = static_cast<int>(V.size());
    if (nb <= 400)
      for (int a = 0; a < nb; ++a)
        for (int c = a; c < nb; ++c) orth = std::max(orth, std::abs(dot(V[a], V[c]) - (a == c ? 1.0 : 0.0)));
    res.orthogonality_error = std::max(res.orthogonality_error, orth);

    beta = true_residual();
    res.true_relative_residual = beta / scale;
    if (beta / scale <= opt.rel_tol) {
      res.converged = true;
      return res;
    }
    if (breakdown && beta / scale > opt.rel_tol && j == 0) break;
  }
  return res;
}

}  // namespace q2amg

#endif  // Q2AMG_KRYLOV_HPP
