#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "vef/error.hpp"
#include "vef/fe_space.hpp"
#include "vef/mms.hpp"
#include "vef/quadrature.hpp"

using namespace vef;

namespace {

Vec random_vec(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

// One cubic element with every non-corner control point jiggled.
Mesh random_curved_element(unsigned seed) {
  const Mesh base = build_cartesian_mesh(1, 1, 0.0, 1.0, 0.0, 1.0, 3);
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-0.06, 0.06);
  auto pts = base.points();
  for (size_t i = 0; i < pts.size(); ++i) {
    const bool corner = (pts[i].x() == 0.0 || pts[i].x() == 1.0) &&
                        (pts[i].y() == 0.0 || pts[i].y() == 1.0);
    if (!corner) pts[i] += Vec2(u(gen), u(gen));
  }
  Mesh m = base.with_points(pts);
  m.check_tangling();
  return m;
}

std::vector<Vec2> sample_points(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<Vec2> r;
  for (int i = 0; i < n; ++i) r.emplace_back(u(gen), u(gen));
  return r;
}

}  // namespace

TEST(FeSpace, DofCounts) {
  const int nx = 4, ny = 3, ne = nx * ny;
  const int nedges = nx * (ny + 1) + ny * (nx + 1), ninterior = nx * (ny - 1) + ny * (nx - 1);
  const Mesh m = build_cartesian_mesh(nx, ny, 0, 1, 0, 1, 1);
  for (int p = 0; p <= 3; ++p) {
    EXPECT_EQ(FeSpace::Y(m, p).ndofs(), ne * (p + 1) * (p + 1));
    EXPECT_EQ(FeSpace::RT(m, p).ndofs(), nedges * (p + 1) + ne * 2 * p * (p + 1));
    EXPECT_EQ(FeSpace::BrokenRT(m, p).ndofs(), ne * 2 * (p + 1) * (p + 2));
    EXPECT_EQ(FeSpace::Lambda(m, p).ndofs(), ninterior * (p + 1));
  }
  for (int p = 1; p <= 3; ++p)
    EXPECT_EQ(FeSpace::W(m, p).ndofs(), 2 * (nx * p + 1) * (ny * p + 1));
}

TEST(RtBasis, PartnerIsAnInvolutionAcrossComponents) {
  for (int p = 0; p <= 3; ++p) {
    const RtBasis b(p);
    for (int i = 0; i < b.size(); ++i) {
      const int j = b.partner(i);
      EXPECT_EQ(b.partner(j), i);
      EXPECT_NE(b.component(i), b.component(j));
    }
  }
}

TEST(RtBasis, EdgeDofsCarryTheNormalTrace) {
  // Only an edge's own dofs have a nonzero normal component on that edge.
  const int p = 2;
  const RtBasis b(p);
  std::vector<double> vals(2 * b.size());
  for (int edge = 0; edge < 4; ++edge) {
    const Vec2 ref = Mesh::edge_ref(edge, 0.37);
    b.eval(ref, vals.data());
    const int comp = (edge == 0 || edge == 2) ? 1 : 0;
    const auto& own = b.edge_dofs(edge);
    for (int i = 0; i < b.size(); ++i) {
      const bool mine = std::find(own.begin(), own.end(), i) != own.end();
      if (!mine) EXPECT_NEAR(vals[2 * i + comp], 0.0, 1e-13) << "edge " << edge << " dof " << i;
    }
  }
}

TEST(Piola, BhatIsTraceFree) {
  const Mesh m = random_curved_element(7);
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const Vec2& r : sample_points(200, 3)) {
    const ElementGeometry g = m.geometry(0, r);
    const Mat2 B = piola_bhat(g, Vec2(u(gen), u(gen)));
    EXPECT_LE(std::abs(B.trace()), 1e-13);
  }
}

TEST(Piola, BhatVanishesOnAffineElements) {
  for (int order : {1, 2, 3}) {
    const Mesh m = build_cartesian_mesh(2, 2, -1.0, 2.0, 0.0, 0.5, order);
    for (int e = 0; e < m.num_elements(); ++e)
      for (const Vec2& r : sample_points(10, e)) {
        const ElementGeometry g = m.geometry(e, r);
        EXPECT_LE(piola_bhat(g, Vec2(1.3, -0.7)).cwiseAbs().maxCoeff(), 1e-13);
      }
  }
}

TEST(Piola, RtGradientMatchesFiniteDifferences) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Mesh m = random_curved_element(seed);
    for (int p = 0; p <= 3; ++p) {
      const FeSpace V = FeSpace::RT(m, p);
      const GridFunction v(V, random_vec(V.ndofs(), seed + 10 * p));
      const double h = 1e-6;
      for (const Vec2& r : sample_points(8, seed * 31 + p)) {
        const Mat2 grad = eval_rt_grad(v, 0, r);
        Mat2 dref;
        dref.col(0) = (eval_rt(v, 0, r + Vec2(h, 0)) - eval_rt(v, 0, r - Vec2(h, 0))) / (2 * h);
        dref.col(1) = (eval_rt(v, 0, r + Vec2(0, h)) - eval_rt(v, 0, r - Vec2(0, h))) / (2 * h);
        const Mat2 fd = dref * m.geometry(0, r).Finv;
        EXPECT_LE((grad - fd).norm(), 1e-6 * std::max(1.0, fd.norm()))
            << "seed " << seed << " p " << p;
      }
    }
  }
}

TEST(Piola, DivergenceEqualsGradientTrace) {
  const Mesh m = random_curved_element(5);
  for (int p = 0; p <= 3; ++p) {
    const FeSpace V = FeSpace::RT(m, p);
    const GridFunction v(V, random_vec(V.ndofs(), 40 + p));
    for (const Vec2& r : sample_points(25, p))
      EXPECT_LE(std::abs(eval_rt_grad(v, 0, r).trace() - eval_rt_div(v, 0, r)), 1e-10);
  }
}

TEST(Piola, DivergenceTheoremOnCurvedElement) {
  // ∫ div v = ∮ v·n for the Piola-mapped field.
  const Mesh m = random_curved_element(9);
  const int p = 2;
  const FeSpace V = FeSpace::RT(m, p);
  const GridFunction v(V, random_vec(V.ndofs(), 99));
  const double vol = integrate(
      m, [&](int e, const Vec2& r, const ElementGeometry&) { return eval_rt_div(v, e, r); }, 10);
  const QuadRule1D q = gauss_legendre(12);
  double flux = 0.0;
  for (int f = 0; f < m.num_faces(); ++f)
    for (int k = 0; k < q.size(); ++k) {
      const FaceGeometry fg = m.face_geometry(f, q.points[k]);
      flux += q.weights[k] * fg.weight * eval_rt(v, 0, m.face_ref(f, 0, q.points[k])).dot(fg.n);
    }
  EXPECT_NEAR(vol, flux, 1e-11);
}

TEST(RtSpace, NormalComponentIsContinuous) {
  const Mesh m = mms_mesh(3);
  const FeSpace V = FeSpace::RT(m, 2);
  const GridFunction v(V, random_vec(V.ndofs(), 4));
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& face = m.face(f);
    if (!face.interior()) continue;
    for (double s : {0.1, 0.5, 0.8}) {
      const Vec2 n = m.face_geometry(f, s).n;
      const double a = eval_rt(v, face.elem[0], m.face_ref(f, 0, s)).dot(n);
      const double b = eval_rt(v, face.elem[1], m.face_ref(f, 1, s)).dot(n);
      EXPECT_NEAR(a, b, 1e-11);
    }
  }
}

TEST(WSpace, IsContinuousAcrossFaces) {
  const Mesh m = mms_mesh(3);
  const FeSpace W = FeSpace::W(m, 2);
  const GridFunction w(W, random_vec(W.ndofs(), 8));
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& face = m.face(f);
    if (!face.interior()) continue;
    const Vec2 a = eval_vector_h1(w, face.elem[0], m.face_ref(f, 0, 0.3));
    const Vec2 b = eval_vector_h1(w, face.elem[1], m.face_ref(f, 1, 0.3));
    EXPECT_LT((a - b).norm(), 1e-12);
  }
}

TEST(L2Project, ReproducesPolynomialsInTheSpace) {
  const Mesh m = build_cartesian_mesh(3, 2, 0, 1, 0, 1, 1);
  for (int p = 0; p <= 3; ++p) {
    auto f = [p](const Vec2& x) { return std::pow(x.x(), p) * std::pow(x.y(), p) - (p > 0 ? 0.5 * x.x() : 0.0); };
    const FeSpace Y = FeSpace::Y(m, p);
    const GridFunction g = l2_project(Y, f);
    for (int e = 0; e < m.num_elements(); ++e)
      for (const Vec2& r : sample_points(5, e))
        EXPECT_NEAR(eval_scalar(g, e, r), f(m.map(e, r)), 1e-12) << "p=" << p;
  }
}

TEST(GridFunctionIo, RoundTripAndDescriptorCheck) {
  const Mesh m = build_cartesian_mesh(2, 2, 0, 1, 0, 1, 1);
  const FeSpace Y = FeSpace::Y(m, 2), Y1 = FeSpace::Y(m, 1);
  const GridFunction g(Y, random_vec(Y.ndofs(), 1));
  std::stringstream ss;
  save_grid_function(g, ss);
  const std::string text = ss.str();
  std::istringstream in(text);
  EXPECT_EQ(load_grid_function(Y, in).coef, g.coef);
  std::istringstream wrong(text);
  EXPECT_THROW(load_grid_function(Y1, wrong), Error);
}
