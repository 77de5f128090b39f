#include "vef/fe_space.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "vef/error.hpp"
#include "vef/quadrature.hpp"

namespace vef {

std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::Y: return "Y";
    case SpaceKind::V: return "V";
    case SpaceKind::W: return "W";
    case SpaceKind::RT: return "RT";
    case SpaceKind::BrokenRT: return "brokenRT";
    case SpaceKind::Lambda: return "Lambda";
  }
  return "?";
}

// ---------------------------------------------------------------- RtBasis

RtBasis::RtBasis(int p)
    : p_(p),
      gll_(Basis1D::lagrange(p + 1, NodeFamily::GaussLobatto)),
      gl_(Basis1D::lagrange(p, NodeFamily::GaussLegendre)) {
  const int n1 = component_size();
  for (int j = 0; j <= p; ++j) {
    edge_dofs_[3].push_back(0 + (p + 2) * j);
    edge_dofs_[1].push_back(p + 1 + (p + 2) * j);
  }
  for (int i = 0; i <= p; ++i) {
    edge_dofs_[0].push_back(n1 + i);
    edge_dofs_[2].push_back(n1 + i + (p + 1) * (p + 1));
  }
  for (int j = 0; j <= p; ++j)
    for (int i = 1; i <= p; ++i) interior_dofs_.push_back(i + (p + 2) * j);
  for (int j = 1; j <= p; ++j)
    for (int i = 0; i <= p; ++i) interior_dofs_.push_back(n1 + i + (p + 1) * j);
}

int RtBasis::partner(int k) const {
  // Same position in the other component's block. Both blocks have (p+1)(p+2) entries,
  // so the off-diagonal component sub-blocks are square and lump onto their diagonal.
  const int n1 = component_size();
  return k < n1 ? k + n1 : k - n1;
}

void RtBasis::eval(const Vec2& ref, double* vals, double* div, double* grad) const {
  const int p = p_;
  double ax[16], dax[16], ay[16], day[16];  // GLL in ξ and η
  double bx[16], dbx[16], by[16], dby[16];  // GL in ξ and η
  gll_.eval(ref[0], ax, dax);
  gll_.eval(ref[1], ay, day);
  gl_.eval(ref[0], bx, dbx);
  gl_.eval(ref[1], by, dby);
  const int n1 = component_size();
  for (int j = 0; j <= p; ++j)
    for (int i = 0; i <= p + 1; ++i) {
      const int k = i + (p + 2) * j;
      vals[2 * k] = ax[i] * by[j];
      vals[2 * k + 1] = 0.0;
      if (div) div[k] = dax[i] * by[j];
      if (grad) {
        grad[4 * k + 0] = dax[i] * by[j];
        grad[4 * k + 1] = ax[i] * dby[j];
        grad[4 * k + 2] = 0.0;
        grad[4 * k + 3] = 0.0;
      }
    }
  for (int j = 0; j <= p + 1; ++j)
    for (int i = 0; i <= p; ++i) {
      const int k = n1 + i + (p + 1) * j;
      vals[2 * k] = 0.0;
      vals[2 * k + 1] = bx[i] * ay[j];
      if (div) div[k] = bx[i] * day[j];
      if (grad) {
        grad[4 * k + 0] = 0.0;
        grad[4 * k + 1] = 0.0;
        grad[4 * k + 2] = dbx[i] * ay[j];
        grad[4 * k + 3] = bx[i] * day[j];
      }
    }
}

// ---------------------------------------------------------------- FeSpace

FeSpace FeSpace::Y(const Mesh& mesh, int p, ScalarFamily family) {
  if (p < 0) throw ArgumentError("Y_p needs p >= 0");
  FeSpace s(mesh, SpaceKind::Y, p);
  s.family_ = family;
  Basis1D b = family == ScalarFamily::Bernstein ? Basis1D::bernstein(p)
              : family == ScalarFamily::GaussLegendre
                  ? Basis1D::lagrange(p, NodeFamily::GaussLegendre)
                  : Basis1D::lagrange(p, NodeFamily::GaussLobatto);
  s.scalar_ = TensorBasis(b, b);
  s.local_size_ = (p + 1) * (p + 1);
  const int ne = mesh.num_elements();
  s.ndofs_ = ne * s.local_size_;
  s.offsets_.resize(ne + 1);
  s.dofs_.resize(s.ndofs_);
  s.signs_.assign(s.ndofs_, 1.0);
  for (int e = 0; e <= ne; ++e) s.offsets_[e] = e * s.local_size_;
  for (int i = 0; i < s.ndofs_; ++i) s.dofs_[i] = i;
  return s;
}

FeSpace FeSpace::V(const Mesh& mesh, int p) {
  if (p < 1) throw ArgumentError("V_p needs p >= 1");
  FeSpace s(mesh, SpaceKind::V, p);
  s.build_c0();
  return s;
}

FeSpace FeSpace::W(const Mesh& mesh, int p) {
  if (p < 1) throw ArgumentError("W_p needs p >= 1");
  FeSpace s(mesh, SpaceKind::W, p);
  s.build_c0();
  return s;
}

FeSpace FeSpace::RT(const Mesh& mesh, int p) {
  if (p < 0) throw ArgumentError("RT_p needs p >= 0");
  FeSpace s(mesh, SpaceKind::RT, p);
  s.build_rt(false);
  return s;
}

FeSpace FeSpace::BrokenRT(const Mesh& mesh, int p) {
  if (p < 0) throw ArgumentError("brokenRT_p needs p >= 0");
  FeSpace s(mesh, SpaceKind::BrokenRT, p);
  s.build_rt(true);
  return s;
}

FeSpace FeSpace::Lambda(const Mesh& mesh, int p) {
  if (p < 0) throw ArgumentError("Lambda_p needs p >= 0");
  FeSpace s(mesh, SpaceKind::Lambda, p);
  s.family_ = ScalarFamily::GaussLegendre;
  Basis1D b = Basis1D::lagrange(p, NodeFamily::GaussLegendre);
  s.scalar_ = TensorBasis(b, Basis1D::bernstein(0));
  s.local_size_ = p + 1;
  const int nf = mesh.num_faces();
  s.offsets_.assign(nf + 1, 0);
  for (int f = 0; f < nf; ++f) {
    const int ii = mesh.interior_index(f);
    s.offsets_[f + 1] = s.offsets_[f];
    if (ii < 0) continue;
    for (int k = 0; k <= p; ++k) {
      s.dofs_.push_back(ii * (p + 1) + k);
      s.signs_.push_back(1.0);
    }
    s.offsets_[f + 1] += p + 1;
  }
  s.ndofs_ = mesh.num_interior_faces() * (p + 1);
  return s;
}

FeSpace build_dof_map(const Mesh& mesh, SpaceKind kind, int p) {
  switch (kind) {
    case SpaceKind::Y: return FeSpace::Y(mesh, p);
    case SpaceKind::V: return FeSpace::V(mesh, p);
    case SpaceKind::W: return FeSpace::W(mesh, p);
    case SpaceKind::RT: return FeSpace::RT(mesh, p);
    case SpaceKind::BrokenRT: return FeSpace::BrokenRT(mesh, p);
    case SpaceKind::Lambda: return FeSpace::Lambda(mesh, p);
  }
  throw ArgumentError("unknown space kind");
}

void FeSpace::build_c0() {
  const Mesh& mesh = *mesh_;
  const int p = p_, m = mesh.order();
  Basis1D b = Basis1D::lagrange(p, NodeFamily::GaussLobatto);
  scalar_ = TensorBasis(b, b);
  family_ = ScalarFamily::GaussLobatto;
  const int n = p + 1;
  const int ne = mesh.num_elements();

  // Vertices are numbered by the mesh corner control points, then edges, then interiors.
  std::map<int, int> vertex_ids;
  for (int e = 0; e < ne; ++e) {
    auto nodes = mesh.element_nodes(e);
    for (int c : {0, m, m * (m + 1), m * (m + 1) + m}) vertex_ids.try_emplace(nodes[c], 0);
  }
  int nv = 0;
  for (auto& [pt, id] : vertex_ids) id = nv++;
  const int edge_base = nv;
  const int interior_base = edge_base + mesh.num_faces() * (p - 1);
  const int nscalar = interior_base + ne * (p - 1) * (p - 1);

  std::vector<int> scalar_dofs(static_cast<size_t>(ne) * n * n);
  for (int e = 0; e < ne; ++e) {
    auto nodes = mesh.element_nodes(e);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int g;
        const bool ci = (i == 0 || i == p), cj = (j == 0 || j == p);
        if (ci && cj) {
          const int mi = (i == 0) ? 0 : m, mj = (j == 0) ? 0 : m;
          g = vertex_ids.at(nodes[mi + (m + 1) * mj]);
        } else if (ci || cj) {
          int edge, k;
          if (j == 0) { edge = 0; k = i - 1; }
          else if (i == p) { edge = 1; k = j - 1; }
          else if (j == p) { edge = 2; k = i - 1; }
          else { edge = 3; k = j - 1; }
          const int f = mesh.element_face(e, edge);
          const int side = mesh.face_side(f, e);
          if (side == 1 && mesh.face(f).flip) k = p - 2 - k;
          g = edge_base + f * (p - 1) + k;
        } else {
          g = interior_base + e * (p - 1) * (p - 1) + (i - 1) + (p - 1) * (j - 1);
        }
        scalar_dofs[static_cast<size_t>(e) * n * n + i + n * j] = g;
      }
  }
  const int ncomp = kind_ == SpaceKind::W ? 2 : 1;
  local_size_ = ncomp * n * n;
  ndofs_ = ncomp * nscalar;
  offsets_.resize(ne + 1);
  dofs_.resize(static_cast<size_t>(ne) * local_size_);
  signs_.assign(dofs_.size(), 1.0);
  for (int e = 0; e <= ne; ++e) offsets_[e] = e * local_size_;
  for (int e = 0; e < ne; ++e)
    for (int c = 0; c < ncomp; ++c)
      for (int a = 0; a < n * n; ++a)
        dofs_[static_cast<size_t>(e) * local_size_ + c * n * n + a] =
            c * nscalar + scalar_dofs[static_cast<size_t>(e) * n * n + a];
}

void FeSpace::build_rt(bool broken) {
  const Mesh& mesh = *mesh_;
  const int p = p_;
  rt_ = std::make_shared<RtBasis>(p);
  const RtBasis& rb = *rt_;
  local_size_ = rb.size();
  const int ne = mesh.num_elements();
  offsets_.resize(ne + 1);
  for (int e = 0; e <= ne; ++e) offsets_[e] = e * local_size_;
  dofs_.assign(static_cast<size_t>(ne) * local_size_, -1);
  signs_.assign(dofs_.size(), 1.0);
  if (broken) {
    ndofs_ = ne * local_size_;
    for (int i = 0; i < ndofs_; ++i) dofs_[i] = i;
    return;
  }
  const int nint = static_cast<int>(rb.interior_dofs().size());
  const int face_base = 0;
  const int interior_base = mesh.num_faces() * (p + 1);
  ndofs_ = interior_base + ne * nint;
  for (int e = 0; e < ne; ++e) {
    const size_t off = static_cast<size_t>(e) * local_size_;
    for (int edge = 0; edge < 4; ++edge) {
      const int f = mesh.element_face(e, edge);
      const int side = mesh.face_side(f, e);
      const bool rev = side == 1 && mesh.face(f).flip;
      const double sgn = RtBasis::ref_normal_sign(edge) * (side == 0 ? 1.0 : -1.0);
      const auto& ed = rb.edge_dofs(edge);
      for (int k = 0; k <= p; ++k) {
        const int kf = rev ? p - k : k;
        dofs_[off + ed[k]] = face_base + f * (p + 1) + kf;
        signs_[off + ed[k]] = sgn;
      }
    }
    for (int r = 0; r < nint; ++r) dofs_[off + rb.interior_dofs()[r]] = interior_base + e * nint + r;
  }
}

std::string FeSpace::descriptor() const {
  std::string fam = family_ == ScalarFamily::Bernstein       ? "bernstein"
                    : family_ == ScalarFamily::GaussLegendre ? "gl"
                                                             : "gll";
  return "vefgf 1 " + to_string(kind_) + " " + std::to_string(p_) + " " + fam + " " +
         std::to_string(ndofs_);
}

// ---------------------------------------------------------------- GridFunction

GridFunction::GridFunction(const FeSpace& s, Vec c) : space(&s), coef(std::move(c)) {
  if (coef.size() != s.ndofs()) throw ArgumentError("grid function length does not match space");
}

Vec GridFunction::local(int e) const {
  auto d = space->dofs(e);
  auto s = space->signs(e);
  Vec out(d.size());
  for (size_t i = 0; i < d.size(); ++i) out[i] = s[i] * coef[d[i]];
  return out;
}

namespace {

void require_kind(const GridFunction& gf, std::initializer_list<SpaceKind> kinds, const char* op) {
  for (SpaceKind k : kinds)
    if (gf.space->kind() == k) return;
  throw ArgumentError(std::string(op) + ": unsupported space kind " + to_string(gf.space->kind()));
}

}  // namespace

double eval_scalar(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::Y, SpaceKind::V}, "eval_scalar");
  const TensorBasis& b = gf.space->scalar_basis();
  double v[256];
  b.eval(ref, v);
  const Vec c = gf.local(e);
  double s = 0.0;
  for (int i = 0; i < b.size(); ++i) s += c[i] * v[i];
  return s;
}

Vec2 eval_scalar_grad(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::Y, SpaceKind::V}, "eval_scalar_grad");
  const TensorBasis& b = gf.space->scalar_basis();
  double v[256], g[512];
  b.eval_grad(ref, v, g);
  const Vec c = gf.local(e);
  Vec2 gh = Vec2::Zero();
  for (int i = 0; i < b.size(); ++i) gh += c[i] * Vec2(g[2 * i], g[2 * i + 1]);
  const ElementGeometry geo = gf.space->mesh().geometry(e, ref);
  return geo.Finv.transpose() * gh;
}

Vec2 eval_vector_h1(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::W}, "eval_vector_h1");
  const TensorBasis& b = gf.space->scalar_basis();
  double v[256];
  b.eval(ref, v);
  const Vec c = gf.local(e);
  const int n = b.size();
  Vec2 out = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    out[0] += c[i] * v[i];
    out[1] += c[n + i] * v[i];
  }
  return out;
}

Mat2 eval_vector_h1_grad(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::W}, "eval_vector_h1_grad");
  const TensorBasis& b = gf.space->scalar_basis();
  double v[256], g[512];
  b.eval_grad(ref, v, g);
  const Vec c = gf.local(e);
  const int n = b.size();
  Mat2 gh = Mat2::Zero();
  for (int i = 0; i < n; ++i)
    for (int comp = 0; comp < 2; ++comp) {
      gh(comp, 0) += c[comp * n + i] * g[2 * i];
      gh(comp, 1) += c[comp * n + i] * g[2 * i + 1];
    }
  const ElementGeometry geo = gf.space->mesh().geometry(e, ref);
  return gh * geo.Finv;
}

namespace {

void rt_local(const GridFunction& gf, int e, const Vec2& ref, Vec2& vhat, Mat2& ghat, double& dhat) {
  const RtBasis& rb = gf.space->rt_basis();
  const int n = rb.size();
  std::vector<double> vals(2 * n), div(n), grad(4 * n);
  rb.eval(ref, vals.data(), div.data(), grad.data());
  const Vec c = gf.local(e);
  vhat.setZero();
  ghat.setZero();
  dhat = 0.0;
  for (int i = 0; i < n; ++i) {
    vhat += c[i] * Vec2(vals[2 * i], vals[2 * i + 1]);
    ghat(0, 0) += c[i] * grad[4 * i];
    ghat(0, 1) += c[i] * grad[4 * i + 1];
    ghat(1, 0) += c[i] * grad[4 * i + 2];
    ghat(1, 1) += c[i] * grad[4 * i + 3];
    dhat += c[i] * div[i];
  }
}

}  // namespace

Mat2 piola_bhat(const ElementGeometry& g, const Vec2& v) {
  const Mat23& H = g.H;
  Mat2 B;
  B(0, 0) = H(1, 1) * v[0] - H(0, 1) * v[1];
  B(0, 1) = H(1, 2) * v[0] - H(0, 2) * v[1];
  B(1, 0) = -H(1, 0) * v[0] + H(0, 0) * v[1];
  B(1, 1) = -H(1, 1) * v[0] + H(0, 1) * v[1];
  return B;
}

Mat2 piola_grad(const ElementGeometry& g, const Vec2& vhat, const Mat2& grad_hat) {
  const Vec2 v = g.F * vhat / g.J;
  return g.F * (grad_hat - piola_bhat(g, v)) * g.Finv / g.J;
}

Vec2 eval_rt(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::RT, SpaceKind::BrokenRT}, "eval_rt");
  Vec2 vh;
  Mat2 gh;
  double dh;
  rt_local(gf, e, ref, vh, gh, dh);
  const ElementGeometry geo = gf.space->mesh().geometry(e, ref);
  return geo.F * vh / geo.J;
}

Mat2 eval_rt_grad(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::RT, SpaceKind::BrokenRT}, "eval_rt_grad");
  Vec2 vh;
  Mat2 gh;
  double dh;
  rt_local(gf, e, ref, vh, gh, dh);
  return piola_grad(gf.space->mesh().geometry(e, ref), vh, gh);
}

double eval_rt_div(const GridFunction& gf, int e, const Vec2& ref) {
  require_kind(gf, {SpaceKind::RT, SpaceKind::BrokenRT}, "eval_rt_div");
  Vec2 vh;
  Mat2 gh;
  double dh;
  rt_local(gf, e, ref, vh, gh, dh);
  return dh / gf.space->mesh().geometry(e, ref).J;
}

Vec2 eval_vector(const GridFunction& gf, int e, const Vec2& ref) {
  return gf.space->kind() == SpaceKind::W ? eval_vector_h1(gf, e, ref) : eval_rt(gf, e, ref);
}

double integrate(const Mesh& mesh,
                 const std::function<double(int, const Vec2&, const ElementGeometry&)>& f, int nq) {
  const QuadRule2D q = tensor_gauss(nq);
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int k = 0; k < q.size(); ++k) {
      const ElementGeometry g = mesh.geometry(e, q.points[k]);
      s += q.weights[k] * g.J * f(e, q.points[k], g);
    }
  return s;
}

GridFunction l2_project(const FeSpace& Y, const std::function<double(const Vec2&)>& f, int nq) {
  if (Y.kind() != SpaceKind::Y) throw ArgumentError("l2_project: target must be a DG space");
  const Mesh& mesh = Y.mesh();
  if (nq <= 0) nq = Y.degree() + mesh.order() + 2;
  const QuadRule2D q = tensor_gauss(nq);
  const TensorBasis& b = Y.scalar_basis();
  const int n = b.size();
  GridFunction gf(Y);
  Mat M(n, n);
  Vec rhs(n), v(n);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    M.setZero();
    rhs.setZero();
    for (int k = 0; k < q.size(); ++k) {
      const ElementGeometry g = mesh.geometry(e, q.points[k]);
      b.eval(q.points[k], v.data());
      const double w = q.weights[k] * g.J;
      M.noalias() += w * v * v.transpose();
      rhs += w * f(g.x) * v;
    }
    const Vec c = M.llt().solve(rhs);
    auto d = Y.dofs(e);
    for (int i = 0; i < n; ++i) gf.coef[d[i]] = c[i];
  }
  return gf;
}

void save_grid_function(const GridFunction& gf, std::ostream& os) {
  os << gf.space->descriptor() << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < gf.coef.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", gf.coef[i]);
    os << buf << '\n';
  }
}

GridFunction load_grid_function(const FeSpace& space, std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ParseError("missing grid function descriptor", 1);
  if (header != space.descriptor())
    throw ParseError("descriptor '" + header + "' does not match space '" + space.descriptor() + "'", 1);
  GridFunction gf(space);
  for (int i = 0; i < space.ndofs(); ++i)
    if (!(is >> gf.coef[i])) throw ParseError("missing coefficient " + std::to_string(i), i + 2);
  return gf;
}

}  // namespace vef
