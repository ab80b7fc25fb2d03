#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "support/oracles.hpp"

using namespace q2amg;

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) m(i, j) = a(i, j);
  return m;
}

DenseMatrix random_dense(int r, int c, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(r, c);
  for (double& v : a.data) v = u(rng);
  return a;
}

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / "q2amg_tests";
  std::filesystem::create_directories(d);
  return d / name;
}

}  // namespace

TEST(SparseMatrix, FromTripletsSumsDuplicatesAndSortsColumns) {
  const auto a = from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 1, 0.0}});
  EXPECT_EQ(a.row_cols(0)[0], 0);
  EXPECT_DOUBLE_EQ(a.at(0, 2), 1.5);
  EXPECT_EQ(a.nnz(), 3u);  // explicit zero kept until prune
  EXPECT_EQ(prune(a).nnz(), 2u);
}

TEST(TripleProduct, IdentityTransfersReturnTheMatrix) {
  std::mt19937 rng(1);
  const auto a = prune(oracle::random_sparse(3, 3, 0.7, rng));
  const auto r = triple_product(identity(3), a, identity(3));
  EXPECT_EQ(r.col_indices, a.col_indices);
  EXPECT_EQ(r.values, a.values);
}

TEST(TripleProduct, SummationExample) {
  const auto r = from_dense(1, 2, std::vector<double>{1, 1});
  const auto p = from_dense(2, 1, std::vector<double>{1, 1});
  const auto c = triple_product(r, identity(2), p);
  ASSERT_EQ(c.n_rows, 1);
  EXPECT_DOUBLE_EQ(c.at(0, 0), 2.0);
}

TEST(TripleProduct, RandomGalerkinMatchesDense) {
  std::mt19937 rng(3);
  const auto a = oracle::random_sparse(10, 10, 0.4, rng);
  const auto p = oracle::random_sparse(10, 4, 0.5, rng);
  const auto c = triple_product(transpose(p), a, p);
  const auto want = oracle::product(oracle::product(oracle::transposed(oracle::dense(p)), oracle::dense(a)), oracle::dense(p));
  EXPECT_LE(oracle::max_diff(oracle::dense(c), want), 1e-14 * std::max(1.0, oracle::max_abs(want)));
}

TEST(TripleProduct, DimensionMismatchThrows) {
  EXPECT_THROW(triple_product(identity(2), identity(3), identity(3)), Error);
}

TEST(SparseKernels, RandomTwentyByTwentyAgainstEigen) {
  std::mt19937 rng(11);
  const auto a = oracle::random_sparse(20, 20, 0.3, rng);
  const auto b = oracle::random_sparse(20, 20, 0.3, rng);
  const auto ea = to_eigen(DenseMatrix::from_sparse(a)), eb = to_eigen(DenseMatrix::from_sparse(b));
  const auto ab = to_eigen(DenseMatrix::from_sparse(multiply(a, b)));
  EXPECT_LE((ab - ea * eb).cwiseAbs().maxCoeff(), 1e-12 * (ea * eb).cwiseAbs().maxCoeff());
  const auto at = to_eigen(DenseMatrix::from_sparse(transpose(a)));
  EXPECT_EQ((at - ea.transpose()).cwiseAbs().maxCoeff(), 0.0);
  Vector x(20);
  for (int i = 0; i < 20; ++i) x[i] = std::sin(i + 1.0);
  const auto y = multiply(a, x);
  const Eigen::VectorXd ey = ea * Eigen::Map<const Eigen::VectorXd>(x.data(), 20);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(y[i], ey[i], 1e-12 * ey.cwiseAbs().maxCoeff());
}

TEST(DenseLU, MatchesEigenOnRandomSystem) {
  std::mt19937 rng(5);
  const auto a = random_dense(20, 20, rng);
  Vector b(20);
  for (int i = 0; i < 20; ++i) b[i] = i - 7.5;
  const auto x = DenseLU(a).solve(b);
  const Eigen::VectorXd want = to_eigen(a).partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 20));
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(x[i], want[i], 1e-12 * want.cwiseAbs().maxCoeff());
}

TEST(DenseLU, SingularMatrixThrows) {
  DenseMatrix a(2, 2);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 2;
  a(1, 1) = 4;
  EXPECT_THROW(DenseLU{a}, Error);
}

TEST(SymmetricEigen, MatchesEigenOnRandomSymmetric) {
  std::mt19937 rng(9);
  auto a = random_dense(20, 20, rng);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < i; ++j) a(i, j) = a(j, i);
  const auto e = symmetric_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(e.values[i], es.eigenvalues()[i], 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
  // A v = lambda v for every returned pair
  for (int k = 0; k < 20; ++k) {
    Vector v(20);
    for (int i = 0; i < 20; ++i) v[i] = e.vectors(i, k);
    const auto av = a * v;
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(av[i], e.values[k] * v[i], 1e-11);
  }
}

TEST(SingularValues, DiagonalExample) {
  DenseMatrix a(3, 3);
  a(0, 0) = 2;
  a(1, 1) = 1;
  EXPECT_NEAR(smallest_nonzero_singular_value(a), 1.0, 1e-14);
}

TEST(SingularValues, Identity) {
  DenseMatrix a(5, 5);
  for (int i = 0; i < 5; ++i) a(i, i) = 1.0;
  EXPECT_NEAR(smallest_nonzero_singular_value(a), 1.0, 1e-14);
}

TEST(SingularValues, RandomWideMatrixMatchesEigen) {
  std::mt19937 rng(21);
  const auto a = random_dense(8, 12, rng);
  const auto s = singular_values(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  ASSERT_EQ(s.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(s[i], svd.singularValues()[i], 1e-10);
  EXPECT_NEAR(smallest_nonzero_singular_value(a), svd.singularValues()[7], 1e-10);
}

TEST(SingularValues, ZeroMatrixThrows) {
  EXPECT_THROW(smallest_nonzero_singular_value(DenseMatrix(3, 2)), Error);
}

TEST(Bfs, PathGraphRadiusOne) {
  const auto g = graph_from_matrix(oracle::path_laplacian(5));
  auto r = bfs_distances(g, 2, 1);
  std::map<int, int> got;
  for (auto [v, d] : r) got[v] = d;
  EXPECT_EQ(got, (std::map<int, int>{{1, 1}, {2, 0}, {3, 1}}));
}

TEST(Bfs, PathGraphRadiusFour) {
  const auto g = graph_from_matrix(oracle::path_laplacian(9));
  std::map<int, int> got;
  for (auto [v, d] : bfs_distances(g, 0, 4)) got[v] = d;
  ASSERT_EQ(got.size(), 5u);
  for (int v = 0; v <= 4; ++v) EXPECT_EQ(got[v], v);
}

TEST(Bfs, GridCenterMatchesFloydWarshall) {
  const auto g = graph_from_matrix(oracle::grid_laplacian(5, 5));
  const auto all = oracle::all_pairs(g);
  std::map<int, int> got;
  for (auto [v, d] : bfs_distances(g, 12, 3)) got[v] = d;
  for (int v = 0; v < 25; ++v) {
    if (all[12][v] <= 3) EXPECT_EQ(got.at(v), all[12][v]);
    else EXPECT_FALSE(got.count(v));
  }
}

TEST(Bfs, InvalidVertexThrows) {
  const auto g = graph_from_matrix(oracle::path_laplacian(3));
  EXPECT_THROW(bfs_distances(g, 5, 1), Error);
}

TEST(Bfs, RandomGraphsAgreeWithAllPairs) {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> size(1, 30);
  std::uniform_real_distribution<double> dens(0.02, 0.3);
  for (int t = 0; t < 40; ++t) {
    const int n = size(rng);
    const auto a = oracle::random_sparse(n, n, dens(rng), rng);
    const auto g = graph_from_matrix(a);
    const auto all = oracle::all_pairs(g);
    for (int s = 0; s < n; ++s) {
      std::vector<int> d(n, -1);
      for (auto [v, dist] : bfs_distances(g, s, n)) d[v] = dist;
      for (int v = 0; v < n; ++v) EXPECT_EQ(d[v], all[s][v] > n ? -1 : all[s][v]);
    }
  }
}

TEST(Graph, SymmetrizedWithoutSelfLoops) {
  const auto a = from_triplets(3, 3, {{0, 0, 1.0}, {0, 2, 1.0}, {1, 1, 1.0}});
  const auto g = graph_from_matrix(a);
  EXPECT_EQ(g.degree(0), 1);
  EXPECT_EQ(g.degree(2), 1);
  EXPECT_EQ(g.neighbors(2)[0], 0);
  EXPECT_EQ(g.degree(1), 0);
}

TEST(Rcm, IdentityGivesIdentityPermutation) {
  const auto p = rcm_ordering(identity(4));
  EXPECT_EQ(p.forward, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Rcm, PathGraphIsReversedBfs) {
  const auto p = rcm_ordering(oracle::path_laplacian(3));
  EXPECT_EQ(p.forward, (std::vector<int>{2, 1, 0}));
  for (int i = 0; i < 3; ++i) EXPECT_EQ(p.inverse[p.forward[i]], i);
}

TEST(Rcm, GridBandwidthDoesNotGrow) {
  for (int n : {4, 7, 12}) {
    const auto a = oracle::grid_laplacian(n, n);
    const auto p = rcm_ordering(a);
    EXPECT_LE(bandwidth(permute_symmetric(a, p.forward)), bandwidth(a));
  }
}

TEST(Rcm, EmptyMatrix) { EXPECT_TRUE(rcm_ordering(SparseMatrix(0, 0)).forward.empty()); }

TEST(BandedLU, SolvesCavitySaddleSystem) {
  const auto sys = oracle::cavity_stokes(4);
  auto k = sys.full_operator();
  // pin the first pressure to remove the constant null space
  const int p0 = sys.n_v();
  std::vector<Triplet> t;
  for (int i = 0; i < k.n_rows; ++i) {
    auto c = k.row_cols(i);
    auto v = k.row_vals(i);
    for (std::size_t e = 0; e < c.size(); ++e)
      if (i != p0 && c[e] != p0) t.push_back({i, c[e], v[e]});
  }
  t.push_back({p0, p0, 1.0});
  k = from_triplets(k.n_rows, k.n_cols, t);
  Vector x(k.n_rows);
  for (int i = 0; i < k.n_rows; ++i) x[i] = std::cos(0.3 * i);
  const auto b = multiply(k, x);
  const auto y = BandedLU(k).solve(b);
  for (int i = 0; i < k.n_rows; ++i) EXPECT_NEAR(y[i], x[i], 1e-9);
}

TEST(MatrixMarket, IdentityRoundTrip) {
  const auto path = scratch("identity.mtx").string();
  write_matrix_market(path, identity(3));
  const auto a = read_matrix_market(path);
  EXPECT_EQ(a.row_offsets, identity(3).row_offsets);
  EXPECT_EQ(a.col_indices, identity(3).col_indices);
  EXPECT_EQ(a.values, identity(3).values);
}

TEST(MatrixMarket, ValuesRoundTripExactly) {
  std::mt19937 rng(2);
  const auto a = oracle::random_sparse(7, 5, 0.5, rng);
  const auto path = scratch("random.mtx").string();
  write_matrix_market(path, a);
  const auto b = read_matrix_market(path);
  EXPECT_EQ(b.values, a.values);
  EXPECT_EQ(b.col_indices, a.col_indices);
}

TEST(MatrixMarket, OneBasedIndicesOnDisk) {
  const auto path = scratch("one_based.mtx").string();
  {
    std::ofstream f(path);
    f << "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 1\n2 1 3.5\n";
  }
  const auto a = read_matrix_market(path);
  EXPECT_DOUBLE_EQ(a.at(1, 0), 3.5);
}

TEST(MatrixMarket, EntryCountMismatchReportsLine) {
  const auto path = scratch("short.mtx").string();
  {
    std::ofstream f(path);
    f << "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n";
  }
  try {
    read_matrix_market(path);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(MatrixMarket, MalformedHeaderThrows) {
  const auto path = scratch("bad.mtx").string();
  {
    std::ofstream f(path);
    f << "not a banner\n";
  }
  EXPECT_THROW(read_matrix_market(path), ParseError);
}

TEST(MatrixMarket, VectorRoundTrip) {
  const Vector v{1.0 / 3.0, -2.5e-17, 4.0};
  const auto path = scratch("v.vec").string();
  write_vector(path, v);
  EXPECT_EQ(read_vector(path), v);
}
