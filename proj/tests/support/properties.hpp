#ifndef Q2AMG_TESTS_PROPERTIES_HPP
#define Q2AMG_TESTS_PROPERTIES_HPP

// Property checks shared by the unit suite and the acceptance runner. Each
// returns a list of failure descriptions; empty means the property holds.

#include <string>
#include <vector>

#include "support/oracles.hpp"

namespace props {

using Failures = std::vector<std::string>;

struct PressureGraph {
  std::string name;
  q2amg::SparseMatrix A_p;
  std::vector<q2amg::Point> coords;
};

/// Filtered pressure graphs of every coarsened level of a few generated problems.
inline std::vector<PressureGraph> generated_pressure_graphs(std::size_t max_vertices = 1700) {
  std::vector<PressureGraph> out;
  struct Case {
    q2amg::Domain d;
    int m;
    double length;
  };
  const std::vector<Case> cases{{q2amg::Domain::LidCavity, 4, 5},   {q2amg::Domain::LidCavity, 8, 5},
                                {q2amg::Domain::LidCavity, 16, 5},  {q2amg::Domain::LidCavity, 32, 5},
                                {q2amg::Domain::LidCavity, 40, 5},  {q2amg::Domain::BackwardStep, 8, 5},
                                {q2amg::Domain::BackwardStep, 16, 5}, {q2amg::Domain::Obstacle, 8, 8}};
  for (const auto& c : cases) {
    q2amg::ProblemSpec s;
    s.domain = c.d;
    s.refinement = c.m;
    s.channel_length = c.length;
    const auto mesh = q2amg::build_mesh(s);
    const auto sys = q2amg::assemble_stokes(mesh, q2amg::default_boundary_conditions(mesh, s));
    const auto h = q2amg::setup_hierarchy(sys, mesh);
    for (int l = 0; l + 1 < h.n_levels(); ++l) {
      const auto& lv = h.levels[l];
      if (static_cast<std::size_t>(lv.n_p) > max_vertices) continue;
      out.push_back({to_string(c.d) + " m=" + std::to_string(c.m) + " level " + std::to_string(l), lv.A_p_filtered,
                     lv.coords_p});
    }
  }
  return out;
}

/// Distance invariants of the pressure splitting against a BFS oracle.
inline Failures cf_distance_failures(const PressureGraph& pg) {
  Failures f;
  const auto pc = q2amg::find_coarse_pressures(pg.A_p, pg.coords);
  const auto& cf = pc.splitting;
  const auto g = q2amg::graph_from_matrix(pg.A_p);
  const int n = g.n;
  std::vector<char> initial(n, 0);
  for (int c : cf.initial_C) initial[c] = 1;
  std::vector<char> covered(n, 0);
  for (int c : cf.initial_C) {
    for (const auto& vd : q2amg::bfs_distances(g, c, 3)) {
      covered[vd.vertex] = 1;
      if (vd.vertex != c && initial[vd.vertex])
        f.push_back(pg.name + ": initial C points " + std::to_string(c) + " and " + std::to_string(vd.vertex) +
                    " at distance " + std::to_string(vd.distance));
    }
  }
  for (int v = 0; v < n; ++v)
    if (!covered[v]) f.push_back(pg.name + ": vertex " + std::to_string(v) + " farther than 3 from the initial C set");
  // final set: pairwise distance >= 3 and exact S sets
  std::vector<std::vector<int>> expect(n);
  for (int c : cf.C)
    for (const auto& vd : q2amg::bfs_distances(g, c, 3)) {
      if (vd.vertex != c && cf.is_c[vd.vertex] && vd.distance < 3)
        f.push_back(pg.name + ": C points " + std::to_string(c) + " and " + std::to_string(vd.vertex) +
                    " closer than 3 after augmentation");
      expect[vd.vertex].push_back(c);
    }
  for (int v = 0; v < n; ++v) {
    if (cf.is_c[v]) continue;
    auto s = cf.S[v];
    std::sort(s.begin(), s.end());
    std::sort(expect[v].begin(), expect[v].end());
    if (s != expect[v]) f.push_back(pg.name + ": S set of vertex " + std::to_string(v) + " differs from BFS");
    if (s.empty()) f.push_back(pg.name + ": uncovered fine vertex " + std::to_string(v));
  }
  return f;
}

/// P 1 = 1 per component on every level (inactive velocity rows stay empty).
inline Failures prolongator_constraint_failures(const q2amg::Hierarchy& h, const std::string& name) {
  Failures f;
  for (int l = 0; l + 1 < h.n_levels(); ++l) {
    const auto& lv = h.levels[l];
    const auto sp = q2amg::row_sums(lv.P_p);
    for (int i = 0; i < lv.n_p; ++i)
      if (std::abs(sp[i] - 1.0) > 1e-12)
        f.push_back(name + " level " + std::to_string(l) + ": pressure row " + std::to_string(i) + " sums to " +
                    std::to_string(sp[i]));
    const int ns = lv.n_scalar(), cs = lv.P_v.n_cols / 2;
    for (int comp = 0; comp < 2; ++comp)
      for (int v = 0; v < ns; ++v) {
        const int i = comp * ns + v;
        double s = 0.0;
        auto c = lv.P_v.row_cols(i);
        auto val = lv.P_v.row_vals(i);
        for (std::size_t k = 0; k < c.size(); ++k) {
          if (c[k] / cs != comp) f.push_back(name + ": velocity row " + std::to_string(i) + " mixes components");
          s += val[k];
        }
        const double want = lv.active_v[v] ? 1.0 : 0.0;
        if (std::abs(s - want) > 1e-12)
          f.push_back(name + " level " + std::to_string(l) + ": velocity row " + std::to_string(i) + " sums to " +
                      std::to_string(s));
      }
  }
  return f;
}

/// Energy never increases over EMIN iterations in the A-norm and the row
/// sums stay fixed.
inline Failures emin_monotonicity_failures(const q2amg::SparseMatrix& a, const q2amg::SparseMatrix& pattern,
                                           int iterations, const std::string& name) {
  Failures f;
  const auto p0 = q2amg::initial_prolongator(pattern, true);
  double last = q2amg::emin_energy(a, p0, q2amg::EminNorm::ANorm);
  const auto want = q2amg::row_sums(p0);
  q2amg::emin_iterate({a, pattern, q2amg::EminNorm::ANorm, iterations}, p0, [&](int it, const q2amg::SparseMatrix& p) {
    const double e = q2amg::emin_energy(a, p, q2amg::EminNorm::ANorm);
    if (e > last * (1.0 + 1e-12) + 1e-15)
      f.push_back(name + ": energy rose at iteration " + std::to_string(it));
    last = e;
    const auto rs = q2amg::row_sums(p);
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (std::abs(rs[i] - want[i]) > 1e-12) {
        f.push_back(name + ": row sum drift at iteration " + std::to_string(it));
        break;
      }
  });
  return f;
}

inline Failures emin_property_failures() {
  Failures f;
  for (int m : {8, 16}) {
    const auto sys = oracle::cavity_stokes(m);
    const auto mesh = oracle::cavity_mesh(m);
    const auto aux = q2amg::form_aux_blocks(sys.A, sys.B, 0.06);
    const auto pc = q2amg::find_coarse_pressures(aux.A_p, mesh.q1_coords);
    const auto tag = "cavity m=" + std::to_string(m);
    for (auto& s : emin_monotonicity_failures(aux.A_p, q2amg::pressure_pattern(pc.splitting), 6, tag + " pressure"))
      f.push_back(s);
    const auto active = q2amg::detail::active_velocity_nodes(sys.full_operator(), sys.n_v());
    const auto cv = q2amg::find_velocity_cpoints(pc.splitting, mesh.q1_coords, sys.colocation, aux.A_v_nodal, active);
    for (auto& s : emin_monotonicity_failures(aux.A_v_nodal, q2amg::velocity_nodal_pattern(aux.A_v_nodal, cv, active),
                                              6, tag + " velocity"))
      f.push_back(s);
  }
  return f;
}

/// Patch tests on the raw (boundary-free) operators of every domain.
inline Failures fem_patch_failures() {
  Failures f;
  struct Case {
    q2amg::Domain d;
    int m;
    double length;
  };
  for (const Case& c : {Case{q2amg::Domain::LidCavity, 4, 5}, Case{q2amg::Domain::LidCavity, 8, 5},
                        Case{q2amg::Domain::BackwardStep, 4, 5}, Case{q2amg::Domain::Obstacle, 8, 8}}) {
    q2amg::ProblemSpec s;
    s.domain = c.d;
    s.refinement = c.m;
    s.channel_length = c.length;
    const auto mesh = q2amg::build_mesh(s);
    const std::string name = to_string(c.d) + " m=" + std::to_string(c.m);
    const auto raw = q2amg::detail::assemble_raw(mesh, 1.0, {});
    const int n = mesh.n_q2();
    q2amg::Vector ux(n), uy(n), ones(n, 1.0);
    for (int i = 0; i < n; ++i) {
      ux[i] = mesh.q2_coords[i].x;
      uy[i] = -mesh.q2_coords[i].y;
    }
    const auto bu = q2amg::multiply(raw.bx, ux);
    const auto bv = q2amg::multiply(raw.by, uy);
    for (int i = 0; i < mesh.n_q1(); ++i)
      if (std::abs(bu[i] + bv[i]) > 1e-12) {
        f.push_back(name + ": divergence-free field has B u = " + std::to_string(bu[i] + bv[i]) + " at row " +
                    std::to_string(i));
        break;
      }
    if (q2amg::norm_inf(q2amg::multiply(raw.a_scalar, ones)) > 1e-12)
      f.push_back(name + ": stiffness does not annihilate constants");
    const q2amg::Vector pones(mesh.n_q1(), 1.0);
    const auto btx = q2amg::multiply(q2amg::transpose(raw.bx), pones);
    const auto bty = q2amg::multiply(q2amg::transpose(raw.by), pones);
    for (int i = 0; i < n; ++i)
      if (mesh.tags[i] == q2amg::NodeTag::Interior && (std::abs(btx[i]) > 1e-12 || std::abs(bty[i]) > 1e-12)) {
        f.push_back(name + ": B^T 1 nonzero at interior node " + std::to_string(i));
        break;
      }
    const double area = static_cast<double>(mesh.q2_elements.size()) * s.h() * s.h();
    const auto mm = q2amg::assemble_mass_matrices(mesh);
    double sp = 0.0, sv = 0.0;
    for (double v : q2amg::row_sums(mm.pressure)) sp += v;
    for (double v : q2amg::row_sums(mm.velocity_scalar)) sv += v;
    if (std::abs(sp - area) > 1e-12 * std::max(1.0, area)) f.push_back(name + ": pressure mass total " + std::to_string(sp));
    if (std::abs(sv - area) > 1e-12 * std::max(1.0, area)) f.push_back(name + ": velocity mass total " + std::to_string(sv));
  }
  return f;
}

/// Sparse kernels against naive dense products on random instances up to 50 x 50.
inline Failures sparse_kernel_failures(unsigned seed = 7, int trials = 20) {
  Failures f;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> dens(0.05, 0.4), u(-1.0, 1.0);
  auto check = [&](const char* what, const oracle::Dense& got, const oracle::Dense& want) {
    const double scale = std::max(1.0, oracle::max_abs(want));
    if (oracle::max_diff(got, want) > 1e-13 * scale) f.push_back(std::string(what) + " disagrees with dense oracle");
  };
  for (int t = 0; t < trials; ++t) {
    const int n = dim(rng), m = dim(rng), k = dim(rng);
    const auto a = oracle::random_sparse(n, m, dens(rng), rng);
    const auto b = oracle::random_sparse(m, k, dens(rng), rng);
    const auto sq = oracle::random_sparse(m, m, dens(rng), rng);
    const auto c = oracle::random_sparse(n, m, dens(rng), rng);
    const auto da = oracle::dense(a), db = oracle::dense(b), dsq = oracle::dense(sq), dc = oracle::dense(c);
    check("spgemm", oracle::dense(q2amg::multiply(a, b)), oracle::product(da, db));
    check("transpose", oracle::dense(q2amg::transpose(a)), oracle::transposed(da));
    check("triple product", oracle::dense(q2amg::triple_product(a, sq, q2amg::transpose(a))),
          oracle::product(oracle::product(da, dsq), oracle::transposed(da)));
    auto sum = da;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) sum[i][j] = 2.0 * da[i][j] - 0.5 * dc[i][j];
    check("add", oracle::dense(q2amg::add(a, c, 2.0, -0.5)), sum);
    q2amg::Vector x(m);
    for (double& v : x) v = u(rng);
    const auto y = q2amg::multiply(a, x);
    oracle::Dense got(n, std::vector<double>(1)), want(n, std::vector<double>(1, 0.0));
    for (int i = 0; i < n; ++i) {
      got[i][0] = y[i];
      for (int j = 0; j < m; ++j) want[i][0] += da[i][j] * x[j];
    }
    check("spmv", got, want);
    const auto tt = q2amg::transpose(q2amg::transpose(a));
    if (tt.row_offsets != a.row_offsets || tt.col_indices != a.col_indices || tt.values != a.values)
      f.push_back("transpose twice is not the identity");
  }
  return f;
}

}  // namespace props

#endif  // Q2AMG_TESTS_PROPERTIES_HPP
