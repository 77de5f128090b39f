#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vef/error.hpp"
#include "vef/sparse.hpp"

using namespace vef;

namespace {

// 1D Dirichlet Laplacian (tridiagonal 2, -1) with an optional convection skew.
CsrMatrix tridiag(int n, double skew = 0.0) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0);
    if (i > 0) t.emplace_back(i, i - 1, -1.0 - skew);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0 + skew);
  }
  return csr_from_triplets(n, n, t);
}

CsrMatrix random_sparse(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> col(0, n - 1);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 6.0 + u(gen));
    for (int k = 0; k < 4; ++k) t.emplace_back(i, col(gen), u(gen));
  }
  return csr_from_triplets(n, n, t);
}

Vec ones(int n) { return Vec::Ones(n); }

}  // namespace

TEST(Csr, TripletsSumDuplicates) {
  const CsrMatrix A = csr_from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 0, 4.0}});
  EXPECT_EQ(A.coeff(0, 0), 3.0);
  EXPECT_EQ(A.coeff(1, 0), 4.0);
  EXPECT_EQ(A.nonZeros(), 2);
}

TEST(Csr, BlockAssemblyMatchesDense) {
  const CsrMatrix A = tridiag(3), B = csr_from_dense(Mat::Constant(3, 2, 1.5));
  const CsrMatrix C = csr_from_dense(Mat::Constant(2, 3, -2.0)), D = csr_identity(2);
  const Mat K = Mat(csr_block2x2(A, B, C, D));
  ASSERT_EQ(K.rows(), 5);
  EXPECT_EQ(K.block(0, 0, 3, 3), Mat(A));
  EXPECT_EQ(K.block(0, 3, 3, 2), Mat(B));
  EXPECT_EQ(K.block(3, 0, 2, 3), Mat(C));
  EXPECT_EQ(K.block(3, 3, 2, 2), Mat(D));
}

TEST(SparseLU, SolvesRandomSystems) {
  for (unsigned seed = 1; seed <= 3; ++seed) {
    const CsrMatrix A = random_sparse(300, seed);
    const Vec x = Vec::LinSpaced(300, -1.0, 2.0);
    const Vec b = A * x;
    const SparseLU lu(A);
    EXPECT_LT((lu.solve(b) - x).norm() / x.norm(), 1e-12);
  }
}

TEST(SparseLU, SingularMatrixThrows) {
  std::vector<Triplet> t{{0, 0, 1.0}, {1, 0, 2.0}, {2, 2, 1.0}};
  EXPECT_THROW(SparseLU(csr_from_triplets(3, 3, t)), SingularMatrixError);
}

TEST(BiCGStab, AgreesWithDirectSolve) {
  const CsrMatrix A = tridiag(200, 0.3);
  const Vec b = ones(200);
  const Vec ref = SparseLU(A).solve(b);
  Vec x = Vec::Zero(200);
  const LinearOperator identity = [](const Vec& r, Vec& z) { z = r; };
  const SolveStats st = bicgstab(as_operator(A), identity, b, x, 1e-10, 2000);
  EXPECT_TRUE(st.converged);
  EXPECT_LE(st.rel_residual, 1e-10);
  EXPECT_LT((x - ref).norm() / ref.norm(), 1e-7);
}

TEST(BiCGStab, ExactPreconditionerConvergesInOneIteration) {
  const CsrMatrix A = random_sparse(100, 9);
  const auto lu = std::make_shared<SparseLU>(A);
  const LinearOperator prec = [lu](const Vec& r, Vec& z) { z = lu->solve(r); };
  Vec x = Vec::Zero(100);
  const SolveStats st = bicgstab(as_operator(A), prec, ones(100), x, 1e-10, 50);
  EXPECT_TRUE(st.converged);
  EXPECT_LE(st.iterations, 1);
}

TEST(BiCGStab, ZeroRightHandSide) {
  const CsrMatrix A = tridiag(10);
  Vec x = Vec::Zero(10);
  const LinearOperator identity = [](const Vec& r, Vec& z) { z = r; };
  const SolveStats st = bicgstab(as_operator(A), identity, Vec::Zero(10), x, 1e-10, 10);
  EXPECT_TRUE(st.converged);
  EXPECT_EQ(x.norm(), 0.0);
}

TEST(Smoothers, ReduceTheResidualOnDiagonallyDominantSystems) {
  const CsrMatrix A = random_sparse(80, 4);
  const Vec b = ones(80);
  const double r1 = (b - A * jacobi_apply(A, b, 1)).norm();
  const double r5 = (b - A * jacobi_apply(A, b, 5)).norm();
  const double g1 = (b - A * gauss_seidel_apply(A, b, 1)).norm();
  const double s1 = (b - A * gauss_seidel_apply(A, b, 1, true)).norm();
  EXPECT_LT(r1, b.norm());
  EXPECT_LT(r5, r1);
  EXPECT_LT(g1, b.norm());
  EXPECT_LT(s1, g1);
}

TEST(Smoothers, ZeroDiagonalNamesTheRow) {
  std::vector<Triplet> t{{0, 0, 1.0}, {1, 0, 1.0}, {2, 2, 1.0}};
  const CsrMatrix A = csr_from_triplets(3, 3, t);
  try {
    jacobi_apply(A, ones(3), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
}

TEST(GeneralizedEig, DiscreteLaplacianSpectrum) {
  // Eigenvalues of tridiag(2,-1) are 2 - 2cos(kπ/(n+1)).
  const int n = 60;
  const auto pairs = generalized_eig_smallest(tridiag(n), csr_identity(n), 4);
  ASSERT_EQ(pairs.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    const double exact = 2.0 - 2.0 * std::cos((k + 1) * std::numbers::pi / (n + 1));
    EXPECT_NEAR(pairs[k].value, exact, 1e-9);
    const Vec r = tridiag(n) * pairs[k].vector - pairs[k].value * pairs[k].vector;
    EXPECT_LT(r.norm() / pairs[k].vector.norm(), 1e-6);
  }
}

TEST(MatrixMarket, HeaderAndEntryCount) {
  std::ostringstream os;
  write_matrix_market(tridiag(4), os);
  std::istringstream is(os.str());
  std::string banner;
  std::getline(is, banner);
  EXPECT_EQ(banner.rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  std::string line;
  while (std::getline(is, line) && line[0] == '%') {
  }
  std::istringstream dims(line);
  int r, c, nnz;
  dims >> r >> c >> nnz;
  EXPECT_EQ(r, 4);
  EXPECT_EQ(nnz, 10);
}
