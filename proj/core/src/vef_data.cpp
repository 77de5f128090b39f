#include "vef/vef_data.hpp"

#include <cmath>
#include <sstream>

#include "vef/error.hpp"

namespace vef {

QuadLayout default_layout(int p, int mesh_order) {
  const int n = p + 2 + mesh_order;
  return {n, n};
}

VefData VefData::constant(const Mesh& mesh, QuadLayout layout, const Mat2& E, double Eb) {
  VefData v;
  v.mesh = &mesh;
  v.layout = layout;
  v.E.assign(static_cast<size_t>(mesh.num_elements()) * v.nq_vol2(), E);
  v.En.resize(static_cast<size_t>(mesh.num_faces()) * layout.nq_face);
  v.Eb.assign(v.En.size(), 0.0);
  const QuadRule1D r = gauss_legendre(layout.nq_face);
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int q = 0; q < r.size(); ++q) {
      const size_t k = static_cast<size_t>(f) * layout.nq_face + q;
      v.En[k] = E * mesh.face_geometry(f, r.points[q]).n;
      if (!mesh.face(f).interior()) v.Eb[k] = Eb;
    }
  return v;
}

VefData VefData::diffusion_mode(const Mesh& mesh, QuadLayout layout) {
  VefData v = constant(mesh, layout, Mat2::Identity() / 3.0, 0.5);
  v.diffusion = true;
  return v;
}

namespace {

[[noreturn]] void closure_fail(const char* where, int id, const Vec2& x, double den) {
  std::ostringstream os;
  os << "nonpositive angular flux sum " << den << " at " << where << ' ' << id << " point ("
     << x[0] << ", " << x[1] << ")";
  throw ClosureError(os.str());
}

}  // namespace

VefData compute_vef_data(const AngularFluxSet& psi, const AngularQuadrature& quad,
                         QuadLayout layout) {
  const FeSpace& Y = *psi.space;
  const Mesh& mesh = Y.mesh();
  const int nd = quad.size();
  if (psi.num_directions() != nd) throw ArgumentError("compute_vef_data: direction count mismatch");
  const TensorBasis& b = Y.scalar_basis();
  const int nb = b.size();

  Vec w(nd), wxx(nd), wxy(nd), wyy(nd);
  for (int d = 0; d < nd; ++d) {
    const Vec3& o = quad.dirs[d];
    w[d] = quad.weights[d];
    wxx[d] = w[d] * o[0] * o[0];
    wxy[d] = w[d] * o[0] * o[1];
    wyy[d] = w[d] * o[1] * o[1];
  }

  VefData v;
  v.mesh = &mesh;
  v.layout = layout;
  const QuadRule2D qv = tensor_gauss(layout.nq_vol);
  const QuadRule1D qf = gauss_legendre(layout.nq_face);
  Mat Bv(qv.size(), nb);
  std::vector<double> tmp(nb);
  for (int q = 0; q < qv.size(); ++q) {
    b.eval(qv.points[q], tmp.data());
    Bv.row(q) = Eigen::Map<const Vec>(tmp.data(), nb).transpose();
  }

  v.E.resize(static_cast<size_t>(mesh.num_elements()) * qv.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Mat vals = Bv * psi.psi.middleRows(static_cast<Eigen::Index>(e) * nb, nb);
    const Vec den = vals * w, xx = vals * wxx, xy = vals * wxy, yy = vals * wyy;
    for (int q = 0; q < qv.size(); ++q) {
      if (!(den[q] > 0.0)) closure_fail("element", e, mesh.map(e, qv.points[q]), den[q]);
      Mat2 E;
      E << xx[q], xy[q], xy[q], yy[q];
      v.E[static_cast<size_t>(e) * qv.size() + q] = E / den[q];
    }
  }

  v.En.resize(static_cast<size_t>(mesh.num_faces()) * qf.size());
  v.Eb.assign(v.En.size(), 0.0);
  Mat Bf(qf.size(), nb);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    std::vector<Vec2> normals(qf.size());
    for (int q = 0; q < qf.size(); ++q) normals[q] = mesh.face_geometry(f, qf.points[q]).n;
    const int nsides = fc.interior() ? 2 : 1;
    std::vector<Vec2> acc(qf.size(), Vec2::Zero());
    for (int side = 0; side < nsides; ++side) {
      const int e = fc.elem[side];
      for (int q = 0; q < qf.size(); ++q) {
        b.eval(mesh.face_ref(f, side, qf.points[q]), tmp.data());
        Bf.row(q) = Eigen::Map<const Vec>(tmp.data(), nb).transpose();
      }
      const Mat vals = Bf * psi.psi.middleRows(static_cast<Eigen::Index>(e) * nb, nb);
      const Vec den = vals * w, xx = vals * wxx, xy = vals * wxy, yy = vals * wyy;
      for (int q = 0; q < qf.size(); ++q) {
        if (!(den[q] > 0.0)) closure_fail("face", f, mesh.face_geometry(f, qf.points[q]).x, den[q]);
        Mat2 E;
        E << xx[q], xy[q], xy[q], yy[q];
        acc[q] += E * normals[q] / den[q] / nsides;
        if (!fc.interior()) {
          double num = 0.0;
          for (int d = 0; d < nd; ++d) {
            const double on = quad.dirs[d][0] * normals[q][0] + quad.dirs[d][1] * normals[q][1];
            num += w[d] * std::abs(on) * vals(q, d);
          }
          v.Eb[static_cast<size_t>(f) * qf.size() + q] = num / den[q];
        }
      }
    }
    for (int q = 0; q < qf.size(); ++q) v.En[static_cast<size_t>(f) * qf.size() + q] = acc[q];
  }
  return v;
}

}  // namespace vef
