#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vef/basis.hpp"
#include "vef/error.hpp"
#include "vef/quadrature.hpp"

using namespace vef;

namespace {

double integrate_monomial(const QuadRule1D& r, int k) {
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
  return s;
}

}  // namespace

TEST(GaussLegendre, ExactToDegree2nMinus1) {
  for (int n = 1; n <= 10; ++n) {
    const auto r = gauss_legendre(n);
    ASSERT_EQ(r.size(), n);
    for (int k = 0; k <= 2 * n - 1; ++k)
      EXPECT_NEAR(integrate_monomial(r, k), 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    // First degree the rule misses, by exactly (n!)^4 / ((2n+1) ((2n)!)^2) on [0,1].
    const double expected = std::pow(std::tgamma(n + 1.0), 4) /
                            ((2 * n + 1) * std::pow(std::tgamma(2 * n + 1.0), 2));
    EXPECT_NEAR(1.0 / (2 * n + 1) - integrate_monomial(r, 2 * n), expected, 1e-6 * expected + 1e-15);
  }
}

TEST(GaussLobatto, IncludesEndpointsAndExactness) {
  for (int n = 2; n <= 10; ++n) {
    const auto r = gauss_lobatto(n);
    EXPECT_DOUBLE_EQ(r.points.front(), 0.0);
    EXPECT_DOUBLE_EQ(r.points.back(), 1.0);
    for (int k = 0; k <= 2 * n - 3; ++k)
      EXPECT_NEAR(integrate_monomial(r, k), 1.0 / (k + 1), 1e-14);
  }
}

TEST(TensorRule, OrderingAndProductIntegrals) {
  const auto r = tensor_rule(gauss_legendre(3), gauss_lobatto(4));
  ASSERT_EQ(r.size(), 12);
  EXPECT_DOUBLE_EQ(r.points[1].x(), gauss_legendre(3).points[1]);
  EXPECT_DOUBLE_EQ(r.points[3].y(), gauss_lobatto(4).points[1]);
  double s = 0.0;
  for (int k = 0; k < r.size(); ++k)
    s += r.weights[k] * std::pow(r.points[k].x(), 4) * std::pow(r.points[k].y(), 3);
  EXPECT_NEAR(s, 1.0 / 20.0, 1e-14);
}

TEST(LevelSymmetric, KnownFirstCosines) {
  // Standard tabulated values.
  EXPECT_NEAR(level_symmetric_mu1(4), 0.3500212, 1e-7);
  EXPECT_NEAR(level_symmetric_mu1(6), 0.2666355, 1e-7);
  EXPECT_NEAR(level_symmetric_mu1(8), 0.2182179, 1e-7);
  EXPECT_NEAR(level_symmetric_mu1(12), 0.1672126, 1e-7);
  EXPECT_THROW(level_symmetric(5), ArgumentError);
}

class LevelSymmetricMoments : public ::testing::TestWithParam<int> {};

TEST_P(LevelSymmetricMoments, IntegratesLowMomentsExactly) {
  const int N = GetParam();
  const auto q = level_symmetric(N);
  EXPECT_EQ(q.size(), N * (N + 2));
  double w = 0.0;
  Vec3 first = Vec3::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (int d = 0; d < q.size(); ++d) {
    EXPECT_NEAR(q.dirs[d].norm(), 1.0, 1e-6);
    EXPECT_GT(q.weights[d], 0.0);
    w += q.weights[d];
    first += q.weights[d] * q.dirs[d];
    second += q.weights[d] * q.dirs[d] * q.dirs[d].transpose();
  }
  const double fourpi = 4.0 * std::numbers::pi;
  EXPECT_NEAR(w, fourpi, 1e-12);
  EXPECT_LT(first.norm(), 1e-12);
  EXPECT_LT((second - fourpi / 3.0 * Eigen::Matrix3d::Identity()).norm(), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Orders, LevelSymmetricMoments, ::testing::Values(2, 4, 6, 8, 12));

TEST(Basis1D, LagrangeIsNodalAndPartitionsUnity) {
  for (auto fam : {NodeFamily::GaussLegendre, NodeFamily::GaussLobatto})
    for (int p = fam == NodeFamily::GaussLobatto ? 1 : 0; p <= 5; ++p) {
      const auto b = Basis1D::lagrange(p, fam);
      std::vector<double> v(b.size()), d(b.size());
      for (int i = 0; i < b.size(); ++i) {
        b.eval(b.nodes()[i], v.data());
        for (int j = 0; j < b.size(); ++j) EXPECT_NEAR(v[j], i == j ? 1.0 : 0.0, 1e-12);
      }
      b.eval(0.37, v.data(), d.data());
      double sv = 0.0, sd = 0.0;
      for (int j = 0; j < b.size(); ++j) sv += v[j], sd += d[j];
      EXPECT_NEAR(sv, 1.0, 1e-12);
      EXPECT_NEAR(sd, 0.0, 1e-10);
    }
}

TEST(Basis1D, BernsteinNonnegativeAndIntegralsEqual) {
  for (int p = 0; p <= 6; ++p) {
    const auto b = Basis1D::bernstein(p);
    const auto r = gauss_legendre(p + 1);
    std::vector<double> v(b.size()), m(b.size(), 0.0);
    for (int k = 0; k < r.size(); ++k) {
      b.eval(r.points[k], v.data());
      for (int j = 0; j < b.size(); ++j) {
        EXPECT_GE(v[j], 0.0);
        m[j] += r.weights[k] * v[j];
      }
    }
    for (int j = 0; j < b.size(); ++j) EXPECT_NEAR(m[j], 1.0 / (p + 1), 1e-14);
  }
}

TEST(Basis1D, DerivativesMatchFiniteDifferences) {
  const double h = 1e-6, x = 0.43;
  for (const auto& b : {Basis1D::bernstein(4), Basis1D::lagrange(4, NodeFamily::GaussLobatto)}) {
    std::vector<double> vp(5), vm(5), v(5), d(5), dd(5), dp(5), dm(5);
    b.eval(x, v.data(), d.data(), dd.data());
    b.eval(x + h, vp.data(), dp.data());
    b.eval(x - h, vm.data(), dm.data());
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(d[j], (vp[j] - vm[j]) / (2 * h), 1e-7);
      EXPECT_NEAR(dd[j], (dp[j] - dm[j]) / (2 * h), 1e-5);
    }
  }
}

TEST(TensorBasis, GradientLayout) {
  const TensorBasis t(Basis1D::bernstein(2), Basis1D::bernstein(1));
  ASSERT_EQ(t.size(), 6);
  std::vector<double> v(6), g(12), vx(6);
  const Vec2 r(0.3, 0.6);
  t.eval_grad(r, v.data(), g.data());
  const double h = 1e-6;
  t.eval(r + Vec2(h, 0), vx.data());
  std::vector<double> vm(6);
  t.eval(r - Vec2(h, 0), vm.data());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(g[2 * i], (vx[i] - vm[i]) / (2 * h), 1e-8);
}
