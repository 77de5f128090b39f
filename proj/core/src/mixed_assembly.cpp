#include "vef/mixed_assembly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "vef/error.hpp"

namespace vef {

std::string to_string(VefKind k) {
  switch (k) {
    case VefKind::H1: return "h1";
    case VefKind::RT: return "rt";
    case VefKind::HRT: return "hrt";
  }
  return "?";
}

VefKind parse_vef_kind(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "h1") return VefKind::H1;
  if (t == "rt") return VefKind::RT;
  if (t == "hrt") return VefKind::HRT;
  throw ArgumentError("unknown discretization kind '" + std::string(s) + "'");
}

void vector_shapes(const FeSpace& V, const ElementGeometry& g, const Vec2& ref, bool with_grad,
                   VectorShapes& out) {
  if (V.kind() == SpaceKind::W) {
    const TensorBasis& b = V.scalar_basis();
    const int n = b.size();
    std::vector<double> v(n), gr(2 * n);
    b.eval_grad(ref, v.data(), gr.data());
    out.vals.setZero(2 * n, 2);
    out.div.resize(2 * n);
    if (with_grad) out.grad.assign(2 * n, Mat2::Zero());
    const Mat2 FinvT = g.Finv.transpose();
    for (int a = 0; a < n; ++a) {
      const Vec2 dx = FinvT * Vec2(gr[2 * a], gr[2 * a + 1]);
      out.vals(a, 0) = v[a];
      out.vals(n + a, 1) = v[a];
      out.div[a] = dx[0];
      out.div[n + a] = dx[1];
      if (with_grad) {
        out.grad[a].row(0) = dx.transpose();
        out.grad[n + a].row(1) = dx.transpose();
      }
    }
    return;
  }
  if (!V.is_rt()) throw ArgumentError("vector_shapes: space must be W, RT or broken RT");
  const RtBasis& rb = V.rt_basis();
  const int n = rb.size();
  std::vector<double> v(2 * n), dv(n), gr(4 * n);
  rb.eval(ref, v.data(), dv.data(), with_grad ? gr.data() : nullptr);
  out.vals.resize(n, 2);
  out.div.resize(n);
  if (with_grad) out.grad.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 vh(v[2 * i], v[2 * i + 1]);
    out.vals.row(i) = (g.F * vh / g.J).transpose();
    out.div[i] = dv[i] / g.J;
    if (with_grad) {
      Mat2 gh;
      gh << gr[4 * i], gr[4 * i + 1], gr[4 * i + 2], gr[4 * i + 3];
      out.grad[i] = piola_grad(g, vh, gh);
    }
  }
}

namespace {

void check_spaces(const FeSpace& Y, const FeSpace& V) {
  if (Y.kind() != SpaceKind::Y) throw ArgumentError("scalar space must be a DG space");
  if (!(V.kind() == SpaceKind::W || V.is_rt()))
    throw ArgumentError("current space must be W, RT or broken RT");
  if (&Y.mesh() != &V.mesh()) throw ArgumentError("spaces live on different meshes");
}

void check_vef(const FeSpace& Y, const VefData& vef) {
  if (vef.mesh != &Y.mesh()) throw AssemblyError("VEF data built on a different mesh");
  const Mesh& m = Y.mesh();
  if (vef.E.size() != static_cast<size_t>(m.num_elements()) * vef.nq_vol2() ||
      vef.En.size() != static_cast<size_t>(m.num_faces()) * vef.layout.nq_face)
    throw AssemblyError("VEF data tables do not match the quadrature layout");
}

Vec scalar_vals(const TensorBasis& b, const Vec2& ref) {
  Vec u(b.size());
  b.eval(ref, u.data());
  return u;
}

}  // namespace

ElementBlocks element_blocks(const FeSpace& Y, const FeSpace& V, int e, const Materials& mat,
                             const VefData& vef, const VefSources* src, bool boundary_term) {
  const Mesh& mesh = Y.mesh();
  const int nv = V.local_size();
  const int ny = Y.local_size();
  ElementBlocks b;
  b.A.setZero(nv, nv);
  b.G.setZero(nv, ny);
  b.D.setZero(ny, nv);
  b.Ma.setZero(ny, ny);
  b.g.setZero(nv);
  b.f.setZero(ny);
  const double st = mat.sigma_t[e];
  const double sa = mat.sigma_a[e];

  const QuadRule2D qv = tensor_gauss(vef.layout.nq_vol);
  VectorShapes sh;
  for (int q = 0; q < qv.size(); ++q) {
    const Vec2& ref = qv.points[q];
    const ElementGeometry g = mesh.geometry(e, ref);
    const double wJ = qv.weights[q] * g.J;
    vector_shapes(V, g, ref, true, sh);
    const Vec u = scalar_vals(Y.scalar_basis(), ref);
    const Mat2& E = vef.E_at(e, q);
    b.A.noalias() += (st * wJ) * sh.vals * sh.vals.transpose();
    b.Ma.noalias() += (sa * wJ) * u * u.transpose();
    b.D.noalias() += wJ * u * sh.div.transpose();
    Vec gE(nv);
    for (int i = 0; i < nv; ++i) gE[i] = (sh.grad[i].array() * E.array()).sum();
    b.G.noalias() -= wJ * gE * u.transpose();
    if (src) {
      if (src->Q0 || src->Q1) {
        const Vec2 x = mesh.map(e, ref);
        if (src->Q0) b.f += (wJ * src->Q0(e, x)) * u;
        if (src->Q1) b.g += wJ * sh.vals * src->Q1(e, x);
      }
    }
  }

  if (!boundary_term && !(src && src->Jin)) return b;
  const QuadRule1D qf = gauss_legendre(vef.layout.nq_face);
  for (int edge = 0; edge < 4; ++edge) {
    const int f = mesh.element_face(e, edge);
    if (mesh.face(f).interior()) continue;
    for (int q = 0; q < qf.size(); ++q) {
      const double s = qf.points[q];
      const FaceGeometry fg = mesh.face_geometry(f, s);
      const Vec2 ref = mesh.face_ref(f, 0, s);
      const ElementGeometry g = mesh.geometry(e, ref);
      vector_shapes(V, g, ref, false, sh);
      const double Eb = vef.Eb_at(f, q);
      if (!(Eb > 0.0)) {
        std::ostringstream os;
        os << "boundary factor " << Eb << " at face " << f << " point " << q;
        throw AssemblyError(os.str());
      }
      const Vec vEn = sh.vals * vef.En_at(f, q);
      const double ds = qf.weights[q] * fg.weight;
      if (boundary_term) b.A.noalias() += (ds / Eb) * vEn * (sh.vals * fg.n).transpose();
      if (src && src->Jin) b.g += (2.0 * ds / Eb * src->Jin(f, fg.x, fg.n)) * vEn;
    }
  }
  return b;
}

namespace {

void scatter(std::vector<Triplet>& t, const Mat& M, std::span<const int> rd,
             std::span<const double> rs, std::span<const int> cd, std::span<const double> cs) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) t.emplace_back(rd[i], cd[j], rs[i] * cs[j] * M(i, j));
}

std::vector<double> unit_signs(size_t n) { return std::vector<double>(n, 1.0); }

struct Assembled {
  std::vector<Triplet> A, G, D, Ma;
  Vec g, f;
  std::vector<Mat> A_elem;
  std::vector<char> boundary_elem;
};

Assembled assemble_all(const FeSpace& Y, const FeSpace& V, const Materials& mat,
                       const VefData& vef, const VefSources* src, bool boundary_term) {
  check_spaces(Y, V);
  check_vef(Y, vef);
  const Mesh& mesh = Y.mesh();
  if (static_cast<int>(mat.sigma_t.size()) != mesh.num_elements() ||
      static_cast<int>(mat.sigma_a.size()) != mesh.num_elements())
    throw ArgumentError("material arrays must have one entry per element");
  Assembled out;
  out.g.setZero(V.ndofs());
  out.f.setZero(Y.ndofs());
  out.A_elem.resize(mesh.num_elements());
  out.boundary_elem.assign(mesh.num_elements(), 0);
  const auto ys = unit_signs(Y.local_size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementBlocks b = element_blocks(Y, V, e, mat, vef, src, boundary_term);
    const auto vd = V.dofs(e);
    const auto vs = V.signs(e);
    const auto yd = Y.dofs(e);
    scatter(out.A, b.A, vd, vs, vd, vs);
    scatter(out.G, b.G, vd, vs, yd, ys);
    scatter(out.D, b.D, yd, ys, vd, vs);
    scatter(out.Ma, b.Ma, yd, ys, yd, ys);
    for (int i = 0; i < b.g.size(); ++i) out.g[vd[i]] += vs[i] * b.g[i];
    for (int i = 0; i < b.f.size(); ++i) out.f[yd[i]] += b.f[i];
    Mat Ae = b.A;
    for (int i = 0; i < Ae.rows(); ++i)
      for (int j = 0; j < Ae.cols(); ++j) Ae(i, j) *= vs[i] * vs[j];
    out.A_elem[e] = std::move(Ae);
    if (boundary_term)
      for (int edge = 0; edge < 4; ++edge)
        if (!mesh.face(mesh.element_face(e, edge)).interior()) out.boundary_elem[e] = 1;
  }
  return out;
}

void add_face_G(const FeSpace& Y, const FeSpace& V, const VefData& vef, std::vector<Triplet>& t) {
  if (!V.is_rt()) return;
  const Mesh& mesh = Y.mesh();
  const QuadRule1D qf = gauss_legendre(vef.layout.nq_face);
  const auto ys = unit_signs(Y.local_size());
  VectorShapes sh;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.interior()) continue;
    Mat local[2][2];
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) local[a][c].setZero(V.local_size(), Y.local_size());
    for (int q = 0; q < qf.size(); ++q) {
      const double s = qf.points[q];
      const double ds = qf.weights[q] * mesh.face_geometry(f, s).weight;
      const Vec2& m = vef.En_at(f, q);
      Vec vm[2], u[2];
      for (int a = 0; a < 2; ++a) {
        const Vec2 ref = mesh.face_ref(f, a, s);
        vector_shapes(V, mesh.geometry(fc.elem[a], ref), ref, false, sh);
        vm[a] = sh.vals * m;
        u[a] = scalar_vals(Y.scalar_basis(), ref);
      }
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
          local[a][c].noalias() += ((a == 0 ? 0.5 : -0.5) * ds) * vm[a] * u[c].transpose();
    }
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c)
        scatter(t, local[a][c], V.dofs(fc.elem[a]), V.signs(fc.elem[a]), Y.dofs(fc.elem[c]), ys);
  }
}

}  // namespace

CsrMatrix assemble_A(const FeSpace& V, const Materials& mat, const VefData& vef,
                     bool boundary_term) {
  const FeSpace Y0 = FeSpace::Y(V.mesh(), 0);
  const Assembled a = assemble_all(Y0, V, mat, vef, nullptr, boundary_term);
  return csr_from_triplets(V.ndofs(), V.ndofs(), a.A);
}

CsrMatrix assemble_Ma(const FeSpace& Y, const Materials& mat, const VefData& vef) {
  check_vef(Y, vef);
  const Mesh& mesh = Y.mesh();
  const QuadRule2D qv = tensor_gauss(vef.layout.nq_vol);
  std::vector<Triplet> t;
  const auto ys = unit_signs(Y.local_size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    Mat M = Mat::Zero(Y.local_size(), Y.local_size());
    for (int q = 0; q < qv.size(); ++q) {
      const Vec u = scalar_vals(Y.scalar_basis(), qv.points[q]);
      M.noalias() += (qv.weights[q] * mesh.geometry(e, qv.points[q]).J) * u * u.transpose();
    }
    scatter(t, mat.sigma_a[e] * M, Y.dofs(e), ys, Y.dofs(e), ys);
  }
  return csr_from_triplets(Y.ndofs(), Y.ndofs(), t);
}

CsrMatrix assemble_D(const FeSpace& Y, const FeSpace& V, const VefData& vef) {
  Materials zero{std::vector<double>(Y.mesh().num_elements(), 0.0),
                 std::vector<double>(Y.mesh().num_elements(), 0.0)};
  const Assembled a = assemble_all(Y, V, zero, vef, nullptr, false);
  return csr_from_triplets(Y.ndofs(), V.ndofs(), a.D);
}

CsrMatrix assemble_G(const FeSpace& Y, const FeSpace& V, const VefData& vef) {
  Materials zero{std::vector<double>(Y.mesh().num_elements(), 0.0),
                 std::vector<double>(Y.mesh().num_elements(), 0.0)};
  Assembled a = assemble_all(Y, V, zero, vef, nullptr, false);
  add_face_G(Y, V, vef, a.G);
  return csr_from_triplets(V.ndofs(), Y.ndofs(), a.G);
}

CsrMatrix assemble_G_faces(const FeSpace& Y, const FeSpace& V, const VefData& vef) {
  check_spaces(Y, V);
  check_vef(Y, vef);
  std::vector<Triplet> t;
  add_face_G(Y, V, vef, t);
  return csr_from_triplets(V.ndofs(), Y.ndofs(), t);
}

void assemble_rhs(const FeSpace& Y, const FeSpace& V, const VefData& vef, const VefSources& src,
                  Vec& g, Vec& f) {
  Materials zero{std::vector<double>(Y.mesh().num_elements(), 0.0),
                 std::vector<double>(Y.mesh().num_elements(), 0.0)};
  Assembled a = assemble_all(Y, V, zero, vef, &src, false);
  g = std::move(a.g);
  f = std::move(a.f);
}

CsrMatrix VefBlockSystem::full() const { return csr_block2x2(A, G, D, Ma); }

Vec VefBlockSystem::rhs() const {
  Vec r(g.size() + f.size());
  r << g, f;
  return r;
}

VefBlockSystem assemble_vef_system(VefKind kind, const FeSpace& Y, const FeSpace& V,
                                   const Materials& mat, const VefData& vef,
                                   const VefSources& src, bool boundary_term) {
  if (kind == VefKind::H1 && V.kind() != SpaceKind::W)
    throw ArgumentError("H1 discretization needs a W space");
  if (kind != VefKind::H1 && !V.is_rt()) throw ArgumentError("RT discretizations need an RT space");
  Assembled a = assemble_all(Y, V, mat, vef, &src, boundary_term);
  add_face_G(Y, V, vef, a.G);
  VefBlockSystem s;
  s.kind = kind;
  s.Y = &Y;
  s.V = &V;
  s.A = csr_from_triplets(V.ndofs(), V.ndofs(), a.A);
  s.G = csr_from_triplets(V.ndofs(), Y.ndofs(), a.G);
  s.D = csr_from_triplets(Y.ndofs(), V.ndofs(), a.D);
  s.Ma = csr_from_triplets(Y.ndofs(), Y.ndofs(), a.Ma);
  s.g = std::move(a.g);
  s.f = std::move(a.f);
  s.A_elem = std::move(a.A_elem);
  s.boundary_elem = std::move(a.boundary_elem);
  return s;
}

}  // namespace vef
