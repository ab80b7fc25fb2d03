#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "support/oracles.hpp"

using namespace q2amg;

namespace {

int find_node(const std::vector<Point>& pts, double x, double y) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].x == x && pts[i].y == y) return static_cast<int>(i);
  return -1;
}

SparseMatrix raw_divergence(const Mesh& mesh) {
  const auto raw = detail::assemble_raw(mesh, 1.0, {});
  std::vector<Triplet> t;
  for (int i = 0; i < mesh.n_q1(); ++i)
    for (int k = 0; k < 2; ++k) {
      const auto& blk = k == 0 ? raw.bx : raw.by;
      auto c = blk.row_cols(i);
      auto v = blk.row_vals(i);
      for (std::size_t e = 0; e < c.size(); ++e) t.push_back({i, c[e] + k * mesh.n_q2(), v[e]});
    }
  return from_triplets(mesh.n_q1(), 2 * mesh.n_q2(), std::move(t));
}

}  // namespace

TEST(Mesh, SingleElementNodeCounts) {
  const auto mesh = oracle::cavity_mesh(1);
  EXPECT_EQ(mesh.n_q2(), 9);
  EXPECT_EQ(mesh.n_q1(), 4);
}

TEST(Mesh, CavityDofCounts) {
  const std::map<int, int> want{{8, 659}, {16, 2467}, {32, 9539}, {64, 37507}};
  for (auto [m, total] : want) {
    const auto mesh = oracle::cavity_mesh(m);
    EXPECT_EQ(2 * mesh.n_q2() + mesh.n_q1(), total) << "m=" << m;
  }
  const auto mesh = oracle::cavity_mesh(8);
  EXPECT_EQ(2 * mesh.n_q2(), 578);
  EXPECT_EQ(mesh.n_q1(), 81);
}

TEST(Mesh, PressureNodesCoincideWithVelocityNodes) {
  for (Domain d : {Domain::LidCavity, Domain::BackwardStep, Domain::Obstacle}) {
    ProblemSpec s;
    s.domain = d;
    s.refinement = 8;
    if (d == Domain::Obstacle) s.channel_length = 8.0;
    const auto mesh = build_mesh(s);
    ASSERT_EQ(static_cast<int>(mesh.q1_to_q2.size()), mesh.n_q1());
    for (int p = 0; p < mesh.n_q1(); ++p) {
      EXPECT_EQ(mesh.q1_coords[p].x, mesh.q2_coords[mesh.q1_to_q2[p]].x);
      EXPECT_EQ(mesh.q1_coords[p].y, mesh.q2_coords[mesh.q1_to_q2[p]].y);
    }
  }
}

TEST(Mesh, ElementsAreCounterclockwise) {
  ProblemSpec s;
  s.domain = Domain::BackwardStep;
  s.refinement = 4;
  const auto mesh = build_mesh(s);
  for (const auto& el : mesh.q2_elements) {
    const auto& a = mesh.q2_coords[el[0]];
    const auto& b = mesh.q2_coords[el[1]];
    const auto& c = mesh.q2_coords[el[2]];
    EXPECT_GT((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x), 0.0);
  }
}

TEST(Mesh, MisalignedObstacleThrows) {
  ProblemSpec s;
  s.domain = Domain::Obstacle;
  s.channel_length = 8.0;
  s.refinement = 8;
  s.obstacle = {1.8, 2.2, -0.25, 0.25};
  EXPECT_THROW(build_mesh(s), Error);
}

TEST(Assembly, ElementStiffnessRowSumsVanish) {
  const auto a = assemble_stiffness(oracle::cavity_mesh(1));
  for (double r : row_sums(a)) EXPECT_NEAR(r, 0.0, 1e-14);
}

TEST(Assembly, ConstantPressureInNullSpaceOfEnclosedCavity) {
  const auto sys = oracle::cavity_stokes(8);
  ASSERT_TRUE(sys.pressure_nullspace);
  const auto bt1 = multiply(transpose(sys.B), Vector(sys.n_p(), 1.0));
  for (int i = 0; i < sys.n_v(); ++i)
    if (!sys.dirichlet[i]) EXPECT_NEAR(bt1[i], 0.0, 1e-13);
}

TEST(Assembly, CavityVelocityBlockIsSpd) {
  const auto sys = oracle::cavity_stokes(4);
  const auto a = DenseMatrix::from_sparse(sys.A);
  const auto e = symmetric_eigen(a);
  Eigen::MatrixXd ea(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) ea(i, j) = a(i, j);
  const double oracle_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ea).eigenvalues()[0];
  EXPECT_GT(e.values[0], 0.0);
  EXPECT_NEAR(e.values[0], oracle_min, 1e-12);
}

TEST(Assembly, StokesOperatorSymmetric) {
  const auto sys = oracle::cavity_stokes(8);
  const double scale = max_abs(sys.A);
  EXPECT_LE(max_abs(add(sys.A, transpose(sys.A), 1.0, -1.0)), 1e-14 * scale);
  const auto k = sys.full_operator();
  EXPECT_LE(max_abs(add(k, transpose(k), 1.0, -1.0)), 1e-14 * max_abs(k));
}

TEST(Assembly, DivergenceFreeLinearFieldPatchTest) {
  for (Domain d : {Domain::LidCavity, Domain::BackwardStep}) {
    ProblemSpec s;
    s.domain = d;
    s.refinement = 4;
    const auto mesh = build_mesh(s);
    Vector u(2 * mesh.n_q2());
    for (int i = 0; i < mesh.n_q2(); ++i) {
      u[i] = mesh.q2_coords[i].x;
      u[mesh.n_q2() + i] = -mesh.q2_coords[i].y;
    }
    for (double v : multiply(raw_divergence(mesh), u)) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Oseen, ZeroVelocityGivesScaledStokes) {
  const auto mesh = oracle::cavity_mesh(4);
  ProblemSpec s;
  s.refinement = 4;
  const auto bc = default_boundary_conditions(mesh, s);
  const auto stokes = assemble_stokes(mesh, bc);
  const auto oseen = assemble_oseen(mesh, bc, 0.25, Vector(2 * mesh.n_q2(), 0.0));
  // Dirichlet rows keep a unit diagonal, so compare interior rows only
  const auto diff = to_dense(add(oseen.A, stokes.A, 1.0, -0.25));
  for (int i = 0; i < oseen.n_v(); ++i)
    if (!oseen.dirichlet[i])
      for (int j = 0; j < oseen.n_v(); ++j) EXPECT_NEAR(diff[static_cast<std::size_t>(i) * oseen.n_v() + j], 0.0, 1e-15);
  EXPECT_EQ(oseen.B.values, stokes.B.values);
}

TEST(Oseen, ConstantWindConvectionRowsSumToZero) {
  const auto mesh = oracle::cavity_mesh(4);
  Vector u(2 * mesh.n_q2(), 0.0);
  std::fill(u.begin(), u.begin() + mesh.n_q2(), 1.0);
  const auto k = assemble_convection(mesh, u);
  const auto r = row_sums(k);
  for (int i = 0; i < mesh.n_q2(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-14);
}

TEST(Oseen, ConvergedCavityConvectionIsNonsymmetric) {
  const auto mesh = oracle::cavity_mesh(4);
  ProblemSpec s;
  s.refinement = 4;
  const auto res = picard_solve(mesh, default_boundary_conditions(mesh, s), 0.01);
  const auto k = assemble_convection(mesh, std::span<const double>(res.solution.data(), 2 * mesh.n_q2()));
  EXPECT_GT(frobenius_norm(add(k, transpose(k), 1.0, -1.0)), 0.0);
}

TEST(MassMatrices, RowSumsGiveDomainArea) {
  const auto m = assemble_mass_matrices(oracle::cavity_mesh(8));
  double sp = 0, sv = 0;
  for (double r : row_sums(m.pressure)) sp += r;
  for (double r : row_sums(m.velocity_scalar)) sv += r;
  EXPECT_NEAR(sp, 4.0, 1e-13);
  EXPECT_NEAR(sv, 4.0, 1e-13);
}

TEST(MassMatrices, UnitElementPressureMass) {
  // m = 2 cavity elements are unit squares; the corner node touches only one
  const auto mesh = oracle::cavity_mesh(2);
  const auto m = assemble_mass_matrices(mesh).pressure;
  const int c = find_node(mesh.q1_coords, -1, -1);
  const int right = find_node(mesh.q1_coords, 0, -1);
  const int up = find_node(mesh.q1_coords, -1, 0);
  const int diag = find_node(mesh.q1_coords, 0, 0);
  EXPECT_NEAR(m.at(c, c), 4.0 / 36.0, 1e-15);
  EXPECT_NEAR(m.at(c, right), 2.0 / 36.0, 1e-15);
  EXPECT_NEAR(m.at(c, up), 2.0 / 36.0, 1e-15);
  EXPECT_NEAR(m.at(c, diag), 1.0 / 36.0, 1e-15);
}

TEST(Picard, LargeViscosityConvergesQuickly) {
  const auto mesh = oracle::cavity_mesh(4);
  ProblemSpec s;
  s.refinement = 4;
  const auto res = picard_solve(mesh, default_boundary_conditions(mesh, s), 1e6);
  EXPECT_LE(res.history.size(), 3u);  // residual check of step 0 plus at most 2 updates
}

TEST(Picard, CavityResidualDecreasesAndSolutionIsDivergenceFree) {
  const auto mesh = oracle::cavity_mesh(8);
  ProblemSpec s;
  s.refinement = 8;
  const auto res = picard_solve(mesh, default_boundary_conditions(mesh, s), 0.01);
  ASSERT_LT(res.history.back(), 1e-8);
  for (std::size_t k = 3; k < res.history.size(); ++k) EXPECT_LT(res.history[k], res.history[k - 1]) << k;
  const Vector u(res.solution.begin(), res.solution.begin() + 2 * mesh.n_q2());
  EXPECT_LT(norm2(multiply(raw_divergence(mesh), u)) / norm2(u), 1e-8);
}

TEST(Picard, IterationLimitThrowsWithHistory) {
  const auto mesh = oracle::cavity_mesh(4);
  ProblemSpec s;
  s.refinement = 4;
  try {
    picard_solve(mesh, default_boundary_conditions(mesh, s), 0.01, direct_solve, 1e-8, 1);
    FAIL() << "expected PicardError";
  } catch (const PicardError& e) {
    EXPECT_EQ(e.history().size(), 2u);
  }
}
