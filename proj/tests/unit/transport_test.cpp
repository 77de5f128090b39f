#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "vef/crooked_pipe.hpp"
#include "vef/error.hpp"
#include "vef/mms.hpp"
#include "vef/transport.hpp"

using namespace vef;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

TransportProblem uniform_problem(const Mesh& m, double st, double ss, double q) {
  TransportProblem p;
  p.sigma_t.assign(m.num_elements(), st);
  p.sigma_s.assign(m.num_elements(), ss);
  p.q_iso.assign(m.num_elements(), q);
  return p;
}

}  // namespace

TEST(SweepPlan, OrthogonalMeshNeedsNoLagging) {
  const Mesh m = build_cartesian_mesh(6, 5, 0, 1, 0, 1, 1);
  const auto quad = level_symmetric(4);
  const SweepPlan plan = build_sweep_plan(m, quad);
  EXPECT_EQ(plan.total_lagged(), 0);
  // Every element appears once and after its upwind neighbours.
  for (int d = 0; d < quad.size(); ++d) {
    std::vector<int> pos(m.num_elements(), -1);
    for (size_t i = 0; i < plan.order[d].size(); ++i) pos[plan.order[d][i]] = static_cast<int>(i);
    for (int e = 0; e < m.num_elements(); ++e) ASSERT_GE(pos[e], 0);
    const Vec2 om(quad.dirs[d][0], quad.dirs[d][1]);
    for (int f = 0; f < m.num_faces(); ++f) {
      const Face& face = m.face(f);
      if (!face.interior()) continue;
      const double on = om.dot(m.face_geometry(f, 0.5).n);
      if (on > 0) EXPECT_LT(pos[face.elem[0]], pos[face.elem[1]]);
      if (on < 0) EXPECT_LT(pos[face.elem[1]], pos[face.elem[0]]);
    }
  }
}

TEST(Sweep, ReproducesConstantEquilibrium) {
  // ψ = ψb everywhere when the source replaces absorption and the inflow is ψb.
  const Mesh m = mms_mesh(4);
  const double psib = 0.7, st = 2.0, ss = 1.5;
  TransportProblem prob = uniform_problem(m, st, ss, (st - ss) * psib);
  prob.inflow = [psib](int, const Vec2&, const Vec3&) { return psib; };
  const FeSpace space = FeSpace::Y(m, 2, ScalarFamily::Bernstein);
  const TransportSolver ts(space, level_symmetric(4), prob);
  const GridFunction phi = l2_project(space, [&](const Vec2&) { return kFourPi * psib; });
  // Curved faces can be lagged; they read the previous iterate, which is already at equilibrium.
  AngularFluxSet prev;
  prev.psi = Mat::Constant(space.ndofs(), level_symmetric(4).size(), psib);
  const AngularFluxSet psi = ts.sweep(ts.scattering_source(phi), &prev);
  EXPECT_LT((psi.psi.array() - psib).abs().maxCoeff(), 1e-11);
}

TEST(Sweep, ExactForLinearSolutions) {
  // ψ_d(x) = a + b·x lies in the DG space for p >= 1.
  const Mesh m = build_cartesian_mesh(5, 4, 0, 1, 0, 1, 1);
  const double st = 1.3, a = 2.0;
  const Vec2 b(0.4, -0.3);
  TransportProblem prob = uniform_problem(m, st, 0.0, 0.0);
  prob.source = [&](int, const Vec2& x, const Vec3& om) {
    return Vec2(om[0], om[1]).dot(b) + st * (a + b.dot(x));
  };
  prob.inflow = [&](int, const Vec2& x, const Vec3&) { return a + b.dot(x); };
  for (int p : {1, 2}) {
    const FeSpace space = FeSpace::Y(m, p, ScalarFamily::Bernstein);
    const TransportSolver ts(space, level_symmetric(6), prob);
    const AngularFluxSet psi = ts.sweep(Vec::Zero(space.ndofs()));
    for (int d = 0; d < psi.num_directions(); ++d) {
      const GridFunction g(space, psi.psi.col(d));
      for (int e = 0; e < m.num_elements(); e += 3) {
        const Vec2 r(0.3, 0.8);
        EXPECT_NEAR(eval_scalar(g, e, r), a + b.dot(m.map(e, r)), 1e-12);
      }
    }
  }
}

TEST(Sweep, PerElementBalanceOnCurvedMesh) {
  const Mesh m = apply_sine_distortion(build_cartesian_mesh(8, 8, 0, 1, 0, 1, 3), 0.05);
  TransportProblem prob = uniform_problem(m, 3.0, 2.0, 0.4);
  prob.inflow = [](int, const Vec2& x, const Vec3& om) { return 1.0 + x.x() * om[1] * om[1]; };
  for (int p : {1, 2, 3}) {
    const FeSpace space = FeSpace::Y(m, p, ScalarFamily::Bernstein);
    const TransportSolver ts(space, level_symmetric(4), prob, {.fixup = false});
    const GridFunction phi0 =
        l2_project(space, [](const Vec2& x) { return 1.0 + x.x() * x.y(); });
    const Vec scat = ts.scattering_source(phi0);
    const AngularFluxSet psi = ts.sweep(scat);
    EXPECT_LE(ts.balance_residuals(psi, scat).cwiseAbs().maxCoeff(), 1e-10) << "p=" << p;
  }
}

TEST(Sweep, FixupCountsAndPositivity) {
  // Thick walls next to a thin pipe produce negative DG coefficients without the fixup.
  const Mesh m = crooked_pipe_mesh(0);
  const TransportProblem prob = crooked_pipe_problem(m);
  const FeSpace space = FeSpace::Y(m, 1, ScalarFamily::Bernstein);
  const auto quad = level_symmetric(4);
  const TransportSolver raw(space, quad, prob, {.fixup = false});
  const TransportSolver fixed(space, quad, prob, {.fixup = true});
  const Vec zero = Vec::Zero(space.ndofs());
  SweepStats sr, sf;
  const AngularFluxSet a = raw.sweep(zero, nullptr, &sr);
  const AngularFluxSet b = fixed.sweep(zero, nullptr, &sf);
  EXPECT_EQ(sr.fixups, 0);
  EXPECT_LT(a.psi.minCoeff(), 0.0);
  EXPECT_GT(sf.fixups, 0);
  EXPECT_GE(b.psi.minCoeff(), 0.0);
  EXPECT_EQ(sf.cells, static_cast<long>(m.num_elements()) * quad.size());
}

TEST(Fixup, PreservesPositiveElementIntegrals) {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> u(-0.5, 1.0), w(0.05, 0.3);
  int exercised = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 4 + trial % 13;
    Vec c(n), m(n);
    for (int i = 0; i < n; ++i) c[i] = u(gen), m[i] = w(gen);
    const double before = m.dot(c);
    const bool neg = c.minCoeff() < 0.0;
    Vec fixedc = c;
    EXPECT_EQ(clip_rebalance_fixup(fixedc, m), neg);
    EXPECT_GE(fixedc.minCoeff(), 0.0);
    if (!neg) {
      EXPECT_EQ(fixedc, c);
    } else if (before > 0.0) {
      EXPECT_NEAR(m.dot(fixedc), before, 1e-12 * std::max(1.0, std::abs(before)));
      ++exercised;
    } else {
      EXPECT_TRUE((fixedc.array() == 1e-14).all());
    }
  }
  EXPECT_GT(exercised, 100);
}

TEST(Moments, IsotropicFluxGivesZeroCurrent) {
  const Mesh m = build_cartesian_mesh(2, 2, 0, 1, 0, 1, 1);
  const FeSpace space = FeSpace::Y(m, 1, ScalarFamily::Bernstein);
  const auto quad = level_symmetric(8);
  const TransportSolver ts(space, quad, uniform_problem(m, 1.0, 0.0, 0.0));
  AngularFluxSet psi{&space, Mat::Constant(space.ndofs(), quad.size(), 2.0)};
  const GridFunction phi = ts.scalar_moment(psi);
  EXPECT_LT((phi.coef.array() - 2.0 * kFourPi).abs().maxCoeff(), 1e-12);
  const auto [jx, jy] = ts.current_moments(psi);
  EXPECT_LT(jx.coef.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(jy.coef.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TransportProblem, ValidateRejectsBadData) {
  const Mesh m = build_cartesian_mesh(2, 2, 0, 1, 0, 1, 1);
  TransportProblem p = uniform_problem(m, 1.0, 2.0, 0.0);
  EXPECT_THROW(p.validate(m), Error);
  p.sigma_s.assign(4, 0.5);
  p.sigma_t.resize(3);
  EXPECT_THROW(p.validate(m), Error);
}
