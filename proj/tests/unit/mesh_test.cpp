#include <gtest/gtest.h>

#include <sstream>

#include "vef/error.hpp"
#include "vef/mesh.hpp"
#include "vef/mms.hpp"

using namespace vef;

TEST(CartesianMesh, CountsAreaAndTags) {
  const Mesh m = build_cartesian_mesh(5, 3, 0.0, 2.0, -1.0, 0.5, 2);
  EXPECT_EQ(m.num_elements(), 15);
  EXPECT_EQ(m.num_faces(), 5 * 4 + 3 * 6);
  EXPECT_EQ(m.num_interior_faces(), 5 * 2 + 3 * 4);
  EXPECT_NEAR(m.area(), 3.0, 1e-13);
  int count[5] = {0, 0, 0, 0, 0};
  for (const Face& f : m.faces())
    if (!f.interior()) ++count[f.tag];
  EXPECT_EQ(count[1], 5);
  EXPECT_EQ(count[2], 3);
  EXPECT_EQ(count[3], 5);
  EXPECT_EQ(count[4], 3);
  EXPECT_EQ(count[0], 0);
}

TEST(CartesianMesh, RejectsBadInput) {
  EXPECT_THROW(build_cartesian_mesh(0, 3, 0, 1, 0, 1, 1), ArgumentError);
  EXPECT_THROW(build_cartesian_mesh(2, 2, 1, 0, 0, 1, 1), ArgumentError);
  EXPECT_THROW(build_cartesian_mesh(2, 2, 0, 1, 0, 1, 0), ArgumentError);
}

TEST(Mesh, FaceNormalsPointFromFirstToSecondElement) {
  const Mesh m = apply_sine_distortion(build_cartesian_mesh(6, 6, 0, 1, 0, 1, 3), 0.04);
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& face = m.face(f);
    for (double s : {0.2, 0.5, 0.9}) {
      const FaceGeometry g = m.face_geometry(f, s);
      EXPECT_NEAR(g.n.norm(), 1.0, 1e-13);
      EXPECT_NEAR(g.n.dot(g.tau), 0.0, 1e-13);
      const Vec2 c0 = m.centroid(face.elem[0]);
      EXPECT_GT((g.x - c0).dot(g.n), 0.0);
      if (face.interior()) {
        // Both sides see the same physical point.
        const Vec2 x0 = m.map(face.elem[0], m.face_ref(f, 0, s));
        const Vec2 x1 = m.map(face.elem[1], m.face_ref(f, 1, s));
        EXPECT_LT((x0 - x1).norm(), 1e-13);
      }
    }
  }
}

TEST(Mesh, GeometryMatchesFiniteDifferences) {
  const Mesh m = apply_sine_distortion(build_cartesian_mesh(3, 3, 0, 1, 0, 1, 3), 0.05);
  const Vec2 r(0.31, 0.72);
  const double h = 1e-6;
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementGeometry g = m.geometry(e, r);
    const Vec2 dxi = (m.map(e, r + Vec2(h, 0)) - m.map(e, r - Vec2(h, 0))) / (2 * h);
    const Vec2 deta = (m.map(e, r + Vec2(0, h)) - m.map(e, r - Vec2(0, h))) / (2 * h);
    EXPECT_LT((g.F.col(0) - dxi).norm(), 1e-8);
    EXPECT_LT((g.F.col(1) - deta).norm(), 1e-8);
    EXPECT_NEAR(g.J, g.F.determinant(), 1e-14);
    EXPECT_LT((g.Finv * g.F - Mat2::Identity()).norm(), 1e-12);
    const ElementGeometry gp = m.geometry(e, r + Vec2(h, 0)), gm = m.geometry(e, r - Vec2(h, 0));
    const Vec2 xixi = (gp.F.col(0) - gm.F.col(0)) / (2 * h);
    EXPECT_NEAR(g.H(0, 0), xixi.x(), 1e-6);
    EXPECT_NEAR(g.H(1, 0), xixi.y(), 1e-6);
  }
}

TEST(Mesh, DistortionsKeepTheDomain) {
  // Boundary control points stay on the boundary lines in both cases.
  EXPECT_NEAR(mms_mesh(6).area(), 1.0, 1e-12);
  EXPECT_NEAR(apply_sine_distortion(build_cartesian_mesh(8, 8, 0, 1, 0, 1, 3), 0.07).area(), 1.0,
              1e-12);
}

TEST(Mesh, LargeSineAmplitudeTangles) {
  const Mesh base = build_cartesian_mesh(16, 16, 0, 1, 0, 1, 3);
  EXPECT_NO_THROW(apply_sine_distortion(base, 0.05).check_tangling());
  EXPECT_THROW(apply_sine_distortion(base, 0.3).check_tangling(), GeometryError);
}

TEST(MeshIo, RoundTripIsExact) {
  const Mesh m = mms_mesh(3);
  std::stringstream ss;
  write_mesh(m, ss);
  const Mesh r = read_mesh(ss);
  ASSERT_EQ(r.num_points(), m.num_points());
  ASSERT_EQ(r.num_elements(), m.num_elements());
  for (int i = 0; i < m.num_points(); ++i) EXPECT_EQ(r.points()[i], m.points()[i]);
  for (int f = 0; f < m.num_faces(); ++f) {
    EXPECT_EQ(r.face(f).elem, m.face(f).elem);
    EXPECT_EQ(r.face(f).tag, m.face(f).tag);
  }
}

TEST(MeshIo, ErrorsCarryLineNumbers) {
  std::istringstream bad_node("vefmesh 1 1 4 1 0\n0 0\n1 0\n0 1\n1 1\n0 1 2 7\n");
  try {
    read_mesh(bad_node);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6);
    EXPECT_NE(std::string(e.what()).find("node id 7"), std::string::npos);
  }
  std::istringstream bad_header("notamesh 1\n");
  EXPECT_THROW(read_mesh(bad_header), ParseError);
}
