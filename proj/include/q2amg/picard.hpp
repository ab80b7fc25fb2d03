#ifndef Q2AMG_PICARD_HPP
#define Q2AMG_PICARD_HPP

#include <functional>
#include <string>
#include <vector>

#include "q2amg/assembly.hpp"
#include "q2amg/banded_lu.hpp"

namespace q2amg {

/// Solves the full saddle system; returns the stacked (u, p) vector.
using LinearSolver = std::function<Vector(const SaddleSystem&)>;

/// Banded direct solve of [[A, B^T], [B, 0]] x = [f_u; f_p]. For enclosed
/// flow the first pressure is pinned to zero.
inline Vector direct_solve(const SaddleSystem& sys) {
  SparseMatrix k = sys.full_operator();
  Vector rhs = sys.full_rhs();
  if (sys.pressure_nullspace && sys.n_p() > 0) {
    const int pin = sys.n_v();
    std::vector<Triplet> trips;
    trips.reserve(k.nnz());
    for (int i = 0; i < k.n_rows; ++i) {
      if (i == pin) continue;
      auto cols = k.row_cols(i);
      auto vals = k.row_vals(i);
      for (std::size_t c = 0; c < cols.size(); ++c)
        if (cols[c] != pin) trips.push_back({i, cols[c], vals[c]});
    }
    trips.push_back({pin, pin, 1.0});
    k = from_triplets(k.n_rows, k.n_cols, std::move(trips));
    rhs[pin] = 0.0;
  }
  return BandedLU(k).solve(rhs);
}

struct PicardResult {
  SaddleSystem system;  // last assembled linearization
  Vector solution;
  std::vector<double> history;  // nonlinear residual 2-norms
};

class PicardError : public Error {
public:
  PicardError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  [[nodiscard]] const std::vector<double>& history() const { return history_; }

private:
  std::vector<double> history_;
};

/// Picard iteration for steady Navier-Stokes, started from the Stokes solution
/// with the same viscosity. The residual of iterate x_k is measured against the
/// system linearized at x_k.
inline PicardResult picard_solve(const Mesh& mesh, const BoundaryCondition& bc, double nu,
                                 const LinearSolver& solver = direct_solve, double nl_tol = 1e-8,
                                 int max_picard = 50) {
  detail::require(nl_tol > 0.0, "picard: tolerance must be positive");
  const int nv = 2 * mesh.n_q2();
  Vector x = solver(assemble_oseen(mesh, bc, nu, Vector(nv, 0.0)));
  std::vector<double> history;
  for (int it = 0;; ++it) {
    std::span<const double> u(x.data(), nv);
    SaddleSystem sys = assemble_oseen(mesh, bc, nu, u);
    const double res = norm2(residual(sys.full_operator(), x, sys.full_rhs()));
    history.push_back(res);
    if (res < nl_tol) return {std::move(sys), std::move(x), std::move(history)};
    if (it >= max_picard)
      throw PicardError("picard: no convergence after " + std::to_string(max_picard) + " iterations", history);
    x = solver(sys);
  }
}

}  // namespace q2amg

#endif  // Q2AMG_PICARD_HPP
