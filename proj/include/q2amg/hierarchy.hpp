#ifndef Q2AMG_HIERARCHY_HPP
#define Q2AMG_HIERARCHY_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "q2amg/assembly.hpp"
#include "q2amg/banded_lu.hpp"
#include "q2amg/coarsen.hpp"
#include "q2amg/emin.hpp"
#include "q2amg/krylov.hpp"
#include "q2amg/smoothers.hpp"

namespace q2amg {

enum class SmootherKind { Vanka, BraessSarazin, Ilu };

inline std::string to_string(SmootherKind k) {
  switch (k) {
    case SmootherKind::Vanka: return "vanka";
    case SmootherKind::BraessSarazin: return "bs";
    case SmootherKind::Ilu: return "ilu";
  }
  return "?";
}

struct HierarchyParams {
  CoarsenParams coarsen;
  int emin_iterations = 1;
  bool petrov_galerkin = false;  // true: normal-norm EMIN for P and an EMIN restriction
  int coarse_threshold = 250;
  int max_levels = 10;

  SmootherKind smoother = SmootherKind::Vanka;
  int pre_sweeps = 1;
  int post_sweeps = 1;
  double vanka_omega = 0.5;
  double bs_omega = 0.666;
  int bs_inner_sweeps = 5;
  int ilu_level = 1;
  bool ilu_rcm = true;
  int coarse_vanka_sweeps = 20;
  double coarse_vanka_omega = 0.5;
};

/// Fine-level input of the setup: the full operator with its block sizes,
/// scalar velocity node coordinates and the pressure-to-velocity co-location.
struct LevelInput {
  SparseMatrix A;  // (n_v + n_p) square, n_v = 2 * coords_v.size()
  int n_v = 0;
  std::vector<Point> coords_v;
  std::vector<Point> coords_p;
  std::vector<int> colocation;  // -1 when a pressure has no usable velocity partner
  bool pressure_nullspace = false;
};

inline LevelInput level_input(const SaddleSystem& sys, const Mesh& mesh) {
  return {sys.full_operator(), sys.n_v(), mesh.q2_coords, mesh.q1_coords, sys.colocation, sys.pressure_nullspace};
}

struct Level {
  SparseMatrix A;
  int n_v = 0, n_p = 0;
  std::vector<Point> coords_v, coords_p;
  std::vector<int> colocation;
  std::vector<char> active_v;  // scalar velocity nodes taking part in coarsening

  // transfers to the next level (empty on the coarsest)
  SparseMatrix P, R;
  SparseMatrix P_v, P_p, R_v, R_p;
  std::vector<int> coarse_pressures;   // fine pressure ids kept
  std::vector<int> coarse_velocities;  // fine scalar velocity node ids kept
  std::vector<int> initial_pressures;  // C before extra points
  int extra_pressures = 0;
  int midpoint_velocities = 0;
  int filter_warnings = 0;
  SparseMatrix A_p_filtered;  // kept for diagnostics

  std::shared_ptr<const Smoother> smoother;

  [[nodiscard]] int n_total() const { return n_v + n_p; }
  [[nodiscard]] int n_scalar() const { return n_v / 2; }
};

struct Hierarchy {
  std::vector<Level> levels;
  HierarchyParams params;
  bool pressure_nullspace = false;
  std::shared_ptr<const VankaBlocks> coarse_vanka;
  std::shared_ptr<const BandedLU> coarse_lu;
  std::vector<std::string> warnings;

  [[nodiscard]] int n_levels() const { return static_cast<int>(levels.size()); }
};

inline std::size_t count_nonzeros(const SparseMatrix& a) {
  std::size_t c = 0;
  for (double v : a.values)
    if (v != 0.0) ++c;
  return c;
}

inline double operator_complexity(const Hierarchy& h) {
  if (h.levels.empty()) return 0.0;
  double total = 0.0;
  for (const auto& l : h.levels) total += static_cast<double>(count_nonzeros(l.A));
  return total / static_cast<double>(count_nonzeros(h.levels[0].A));
}

/// Injection of coordinates onto the kept vertices.
inline std::vector<Point> project_coordinates(std::span<const Point> coords, std::span<const int> kept) {
  std::vector<Point> out;
  out.reserve(kept.size());
  for (int v : kept) out.push_back(coords[v]);
  return out;
}

namespace detail {

inline std::vector<char> active_velocity_nodes(const SparseMatrix& k, int n_v) {
  const int n = n_v / 2;
  std::vector<char> active(n, 0);
  for (int c = 0; c < 2; ++c)
    for (int v = 0; v < n; ++v) {
      const int i = c * n + v;
      auto cols = k.row_cols(i);
      auto vals = k.row_vals(i);
      for (std::size_t e = 0; e < cols.size(); ++e)
        if (cols[e] != i && vals[e] != 0.0) active[v] = 1;
    }
  return active;
}

inline std::shared_ptr<const Smoother> make_smoother(const SparseMatrix& k, int n_v, const HierarchyParams& p) {
  switch (p.smoother) {
    case SmootherKind::Vanka: return std::make_shared<VankaSmoother>(k, n_v, p.vanka_omega);
    case SmootherKind::BraessSarazin:
      return std::make_shared<BraessSarazinSmoother>(k, n_v, p.bs_omega, p.bs_inner_sweeps);
    case SmootherKind::Ilu: return std::make_shared<IluSmoother>(k, p.ilu_level, p.ilu_rcm);
  }
  throw Error("unknown smoother");
}

// Builds the transfers of `lvl` and returns the next level (without smoother),
// or nullopt on stagnation.
inline std::optional<Level> coarsen_level(Level& lvl, const HierarchyParams& params, std::vector<std::string>& warnings) {
  const int nv = lvl.n_v, ns = lvl.n_scalar();
  const SparseMatrix a = submatrix(lvl.A, 0, nv, 0, nv);
  const SparseMatrix b = submatrix(lvl.A, nv, lvl.A.n_rows, 0, nv);
  const AuxBlocks aux = form_aux_blocks(a, b, params.coarsen.tau1, params.coarsen.lumping);
  lvl.filter_warnings = aux.zero_diagonal_warnings;
  if (aux.zero_diagonal_warnings > 0)
    warnings.push_back("filter: " + std::to_string(aux.zero_diagonal_warnings) +
                       " entries kept because of a zero diagonal");

  const PressureCoarsening pc = find_coarse_pressures(aux.A_p, lvl.coords_p, params.coarsen);
  const CfSplitting& cf = pc.splitting;
  if (static_cast<int>(cf.C.size()) >= lvl.n_p) return std::nullopt;

  const EminNorm norm = params.petrov_galerkin ? EminNorm::NormalNorm : EminNorm::ANorm;
  // Lumping can leave the filtered matrix indefinite; keep the feasible start then.
  auto smooth_transfer = [&](const SparseMatrix& a, const SparseMatrix& pattern, const SparseMatrix& p0,
                             const char* what) {
    try {
      return emin_iterate({a, pattern, norm, params.emin_iterations}, p0);
    } catch (const Error& e) {
      warnings.push_back(std::string("emin (") + what + "): " + e.what() + ", initial prolongator kept");
      return p0;
    }
  };
  const SparseMatrix np = pressure_pattern(cf);
  lvl.P_p = smooth_transfer(aux.A_p, np, initial_prolongator(np), "pressure");

  std::vector<int> cv = find_velocity_cpoints(cf, lvl.coords_p, lvl.colocation, aux.A_v_nodal, lvl.active_v,
                                              params.coarsen);
  if (cv.empty() || static_cast<int>(cv.size()) >= ns) return std::nullopt;
  const SparseMatrix nvp = velocity_nodal_pattern(aux.A_v_nodal, cv, lvl.active_v);
  const SparseMatrix pv_nodal = smooth_transfer(aux.A_v_nodal, nvp, initial_prolongator(nvp, true), "velocity");
  lvl.P_v = block_diagonal(pv_nodal, 2);

  if (params.petrov_galerkin) {
    lvl.R_p = emin_restriction(aux.A_p, lvl.P_p, params.emin_iterations);
    lvl.R_v = block_diagonal(emin_restriction(aux.A_v_nodal, pv_nodal, params.emin_iterations, true), 2);
  } else {
    lvl.R_p = transpose(lvl.P_p);
    lvl.R_v = transpose(lvl.P_v);
  }
  const int cnv = lvl.P_v.n_cols, cnp = lvl.P_p.n_cols;
  {
    // block-diagonal assembly of the rectangular transfers
    std::vector<Triplet> tp, tr;
    for (int i = 0; i < nv; ++i) {
      auto c = lvl.P_v.row_cols(i);
      auto v = lvl.P_v.row_vals(i);
      for (std::size_t e = 0; e < c.size(); ++e) tp.push_back({i, c[e], v[e]});
    }
    for (int i = 0; i < lvl.n_p; ++i) {
      auto c = lvl.P_p.row_cols(i);
      auto v = lvl.P_p.row_vals(i);
      for (std::size_t e = 0; e < c.size(); ++e) tp.push_back({nv + i, cnv + c[e], v[e]});
    }
    for (int i = 0; i < cnv; ++i) {
      auto c = lvl.R_v.row_cols(i);
      auto v = lvl.R_v.row_vals(i);
      for (std::size_t e = 0; e < c.size(); ++e) tr.push_back({i, c[e], v[e]});
    }
    for (int i = 0; i < cnp; ++i) {
      auto c = lvl.R_p.row_cols(i);
      auto v = lvl.R_p.row_vals(i);
      for (std::size_t e = 0; e < c.size(); ++e) tr.push_back({cnv + i, nv + c[e], v[e]});
    }
    lvl.P = from_triplets(lvl.n_total(), cnv + cnp, std::move(tp));
    lvl.R = from_triplets(cnv + cnp, lvl.n_total(), std::move(tr));
  }

  lvl.coarse_pressures = cf.C;
  lvl.coarse_velocities = cv;
  lvl.initial_pressures = cf.initial_C;
  lvl.extra_pressures = static_cast<int>(cf.extra_C.size());
  lvl.A_p_filtered = aux.A_p;
  lvl.midpoint_velocities = static_cast<int>(find_pressure_midpoints(cf, lvl.coords_p, params.coarsen).size() - cf.C.size());

  Level next;
  next.A = triple_product(lvl.R, lvl.A, lvl.P);
  next.n_v = cnv;
  next.n_p = cnp;
  next.coords_v = project_coordinates(lvl.coords_v, cv);
  next.coords_p = project_coordinates(lvl.coords_p, cf.C);
  std::vector<int> vidx(ns, -1);
  for (std::size_t k = 0; k < cv.size(); ++k) vidx[cv[k]] = static_cast<int>(k);
  next.colocation.resize(cf.C.size());
  for (std::size_t k = 0; k < cf.C.size(); ++k) {
    const int v = lvl.colocation[cf.C[k]];
    next.colocation[k] = v >= 0 ? vidx[v] : -1;
  }
  next.active_v = active_velocity_nodes(next.A, next.n_v);
  if (next.n_total() >= lvl.n_total()) return std::nullopt;
  return next;
}

}  // namespace detail

inline Hierarchy setup_hierarchy(const LevelInput& in, const HierarchyParams& params = {}) {
  detail::require(in.A.n_rows == in.A.n_cols, "setup_hierarchy: operator not square");
  detail::require(in.n_v == 2 * static_cast<int>(in.coords_v.size()), "setup_hierarchy: velocity coordinate count");
  detail::require(in.A.n_rows - in.n_v == static_cast<int>(in.coords_p.size()),
                  "setup_hierarchy: pressure coordinate count");
  Hierarchy h;
  h.params = params;
  h.pressure_nullspace = in.pressure_nullspace;
  Level l0;
  l0.A = in.A;
  l0.n_v = in.n_v;
  l0.n_p = in.A.n_rows - in.n_v;
  l0.coords_v = in.coords_v;
  l0.coords_p = in.coords_p;
  l0.colocation = in.colocation;
  l0.active_v = detail::active_velocity_nodes(l0.A, l0.n_v);
  h.levels.push_back(std::move(l0));
  while (static_cast<int>(h.levels.size()) < params.max_levels && h.levels.back().n_total() > params.coarse_threshold) {
    auto next = detail::coarsen_level(h.levels.back(), params, h.warnings);
    if (!next) {
      h.warnings.push_back("coarsening stagnated on level " + std::to_string(h.levels.size() - 1));
      Level& l = h.levels.back();
      l.P = l.R = l.P_v = l.P_p = l.R_v = l.R_p = SparseMatrix();
      break;
    }
    h.levels.push_back(std::move(*next));
  }
  for (std::size_t k = 0; k + 1 < h.levels.size(); ++k)
    h.levels[k].smoother = detail::make_smoother(h.levels[k].A, h.levels[k].n_v, params);
  const Level& c = h.levels.back();
  if (h.pressure_nullspace)
    h.coarse_vanka = std::make_shared<VankaBlocks>(build_vanka_blocks(c.A, c.n_v, params.coarse_vanka_omega));
  else
    h.coarse_lu = std::make_shared<BandedLU>(c.A);
  return h;
}

inline Hierarchy setup_hierarchy(const SaddleSystem& sys, const Mesh& mesh, const HierarchyParams& params = {}) {
  return setup_hierarchy(level_input(sys, mesh), params);
}

namespace detail {

inline void coarse_solve(const Hierarchy& h, std::span<double> x, std::span<const double> b) {
  const Level& c = h.levels.back();
  if (h.coarse_lu) {
    const Vector s = h.coarse_lu->solve(b);
    std::copy(s.begin(), s.end(), x.begin());
    return;
  }
  for (int s = 0; s < h.params.coarse_vanka_sweeps; ++s) vanka_sweep(c.A, *h.coarse_vanka, x, b);
}

inline void vcycle(const Hierarchy& h, int l, std::span<double> x, std::span<const double> b) {
  if (l == h.n_levels() - 1) {
    coarse_solve(h, x, b);
    return;
  }
  const Level& lv = h.levels[l];
  lv.smoother->smooth(lv.A, x, b, h.params.pre_sweeps);
  const Vector r = residual(lv.A, x, b);
  const Vector rc = multiply(lv.R, r);
  Vector ec(rc.size(), 0.0);
  vcycle(h, l + 1, ec, rc);
  const Vector e = multiply(lv.P, ec);
  axpy(1.0, e, x);
  lv.smoother->smooth(lv.A, x, b, h.params.post_sweeps);
}

}  // namespace detail

/// One V-cycle from x0; returns the new iterate.
inline Vector vcycle_apply(const Hierarchy& h, std::span<const double> b, std::span<const double> x0) {
  detail::require(!h.levels.empty(), "vcycle: empty hierarchy");
  detail::require(static_cast<int>(b.size()) == h.levels[0].n_total() && b.size() == x0.size(),
                  "vcycle: vector size mismatch");
  Vector x(x0.begin(), x0.end());
  detail::vcycle(h, 0, x, b);
  return x;
}

/// The V-cycle (zero initial guess) as a preconditioner.
inline LinearOperator vcycle_preconditioner(const Hierarchy& h) {
  return [&h](std::span<const double> r, std::span<double> z) {
    std::fill(z.begin(), z.end(), 0.0);
    detail::vcycle(h, 0, z, r);
  };
}

}  // namespace q2amg

#endif  // Q2AMG_HIERARCHY_HPP
