#include "vef/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "vef/error.hpp"
#include "vef/quadrature.hpp"

namespace vef {

namespace {

// Corner local indices of edge k in increasing parameter order.
std::array<int, 2> edge_corners(int m, int edge) {
  const int n = m + 1;
  const int c00 = 0, c10 = m, c01 = m * n, c11 = m * n + m;
  switch (edge) {
    case 0: return {c00, c10};
    case 1: return {c10, c11};
    case 2: return {c01, c11};
    default: return {c00, c01};
  }
}

}  // namespace

Mesh::Mesh(int order, std::vector<Vec2> points, std::vector<std::vector<int>> elem_nodes,
           std::vector<BoundaryTag> bdr_tags)
    : order_(order), num_elems_(static_cast<int>(elem_nodes.size())), points_(std::move(points)) {
  if (order < 1) throw ArgumentError("mesh order must be >= 1");
  if (num_elems_ == 0) throw ArgumentError("mesh has no elements");
  const int npe = nodes_per_element();
  elem_nodes_.reserve(static_cast<size_t>(num_elems_) * npe);
  for (int e = 0; e < num_elems_; ++e) {
    if (static_cast<int>(elem_nodes[e].size()) != npe)
      throw ArgumentError("element " + std::to_string(e) + " has wrong node count");
    for (int id : elem_nodes[e]) {
      if (id < 0 || id >= num_points())
        throw ArgumentError("element " + std::to_string(e) + " references missing node " +
                            std::to_string(id));
      elem_nodes_.push_back(id);
    }
  }
  basis_ = Basis1D::lagrange(order_, NodeFamily::GaussLobatto);
  build_faces(bdr_tags);

  for (int e = 0; e < num_elems_; ++e) {
    auto nodes = element_nodes(e);
    for (int a = 0; a < npe; ++a)
      for (int b = a + 1; b < npe; ++b)
        h_ = std::max(h_, (points_[nodes[a]] - points_[nodes[b]]).norm());
  }
  check_tangling();
}

void Mesh::build_faces(const std::vector<BoundaryTag>& bdr_tags) {
  std::map<std::pair<int, int>, int> edge_map;
  elem_faces_.assign(4 * num_elems_, -1);
  const int m = order_;
  for (int e = 0; e < num_elems_; ++e) {
    auto nodes = element_nodes(e);
    for (int k = 0; k < 4; ++k) {
      auto c = edge_corners(m, k);
      const int a = nodes[c[0]], b = nodes[c[1]];
      auto key = std::minmax(a, b);
      auto it = edge_map.find(key);
      if (it == edge_map.end()) {
        Face f;
        f.elem[0] = e;
        f.edge[0] = k;
        edge_map.emplace(key, static_cast<int>(faces_.size()));
        elem_faces_[4 * e + k] = static_cast<int>(faces_.size());
        faces_.push_back(f);
      } else {
        Face& f = faces_[it->second];
        if (f.elem[1] >= 0)
          throw ArgumentError("edge shared by more than two elements at element " +
                              std::to_string(e));
        f.elem[1] = e;
        f.edge[1] = k;
        auto c0 = edge_corners(m, f.edge[0]);
        f.flip = element_nodes(f.elem[0])[c0[0]] != a;
        elem_faces_[4 * e + k] = it->second;
      }
    }
  }
  interior_index_.assign(faces_.size(), -1);
  num_interior_ = 0;
  for (size_t f = 0; f < faces_.size(); ++f)
    if (faces_[f].interior()) interior_index_[f] = num_interior_++;

  if (bdr_tags.empty()) {
    for (Face& f : faces_)
      if (!f.interior()) f.tag = 1;
  } else {
    if (static_cast<int>(bdr_tags.size()) != num_boundary_faces())
      throw ArgumentError("boundary tag count " + std::to_string(bdr_tags.size()) +
                          " does not match boundary face count " +
                          std::to_string(num_boundary_faces()));
    for (const BoundaryTag& t : bdr_tags) {
      if (t.elem < 0 || t.elem >= num_elems_ || t.edge < 0 || t.edge > 3)
        throw ArgumentError("invalid boundary tag entry");
      Face& f = faces_[elem_faces_[4 * t.elem + t.edge]];
      if (f.interior())
        throw ArgumentError("boundary tag on interior edge of element " + std::to_string(t.elem));
      f.tag = t.tag;
    }
  }
}

Vec2 Mesh::edge_ref(int edge, double s) {
  switch (edge) {
    case 0: return {s, 0.0};
    case 1: return {1.0, s};
    case 2: return {s, 1.0};
    default: return {0.0, s};
  }
}

Vec2 Mesh::face_ref(int f, int side, double s) const {
  const Face& fc = faces_[f];
  const double t = (side == 1 && fc.flip) ? 1.0 - s : s;
  return edge_ref(fc.edge[side], t);
}

Vec2 Mesh::map(int e, const Vec2& ref) const {
  const int n = order_ + 1;
  double vx[16], vy[16];
  basis_.eval(ref[0], vx);
  basis_.eval(ref[1], vy);
  auto nodes = element_nodes(e);
  Vec2 x = Vec2::Zero();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) x += vx[i] * vy[j] * points_[nodes[i + n * j]];
  return x;
}

void Mesh::eval_geometry(int e, const Vec2& ref, ElementGeometry& g) const {
  const int n = order_ + 1;
  double vx[16], vy[16], dx[16], dy[16], ddx[16], ddy[16];
  basis_.eval(ref[0], vx, dx, ddx);
  basis_.eval(ref[1], vy, dy, ddy);
  auto nodes = element_nodes(e);
  g.x.setZero();
  g.F.setZero();
  g.H.setZero();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2& p = points_[nodes[i + n * j]];
      g.x += vx[i] * vy[j] * p;
      g.F.col(0) += dx[i] * vy[j] * p;
      g.F.col(1) += vx[i] * dy[j] * p;
      g.H.col(0) += ddx[i] * vy[j] * p;
      g.H.col(1) += dx[i] * dy[j] * p;
      g.H.col(2) += vx[i] * ddy[j] * p;
    }
  g.J = g.F.determinant();
  g.Finv << g.F(1, 1), -g.F(0, 1), -g.F(1, 0), g.F(0, 0);
  g.Finv /= g.J;
}

ElementGeometry Mesh::geometry_unchecked(int e, const Vec2& ref) const {
  ElementGeometry g;
  eval_geometry(e, ref, g);
  return g;
}

ElementGeometry Mesh::geometry(int e, const Vec2& ref) const {
  ElementGeometry g;
  eval_geometry(e, ref, g);
  if (!(g.J > 0.0))
    throw GeometryError("nonpositive Jacobian " + std::to_string(g.J) + " in element " +
                        std::to_string(e));
  return g;
}

FaceGeometry Mesh::face_geometry(int f, double s) const {
  const Face& fc = faces_[f];
  const int e = fc.elem[0], k = fc.edge[0];
  ElementGeometry g;
  eval_geometry(e, edge_ref(k, s), g);
  const Vec2 t = (k == 0 || k == 2) ? Vec2(g.F.col(0)) : Vec2(g.F.col(1));
  const double len = t.norm();
  if (!(len > 0.0)) throw GeometryError("degenerate face " + std::to_string(f));
  FaceGeometry fg;
  fg.x = g.x;
  fg.weight = len;
  // Edges 0 and 1 are traversed counter-clockwise, 2 and 3 clockwise.
  if (k == 0 || k == 1)
    fg.n = Vec2(t[1], -t[0]) / len;
  else
    fg.n = Vec2(-t[1], t[0]) / len;
  fg.tau = Vec2(-fg.n[1], fg.n[0]);
  return fg;
}

Vec2 Mesh::centroid(int e) const {
  const QuadRule2D q = tensor_gauss(order_ + 1);
  Vec2 c = Vec2::Zero();
  double a = 0.0;
  for (int k = 0; k < q.size(); ++k) {
    auto g = geometry_unchecked(e, q.points[k]);
    c += q.weights[k] * g.J * g.x;
    a += q.weights[k] * g.J;
  }
  return c / a;
}

double Mesh::element_area(int e) const {
  const QuadRule2D q = tensor_gauss(order_ + 1);
  double a = 0.0;
  for (int k = 0; k < q.size(); ++k) a += q.weights[k] * geometry_unchecked(e, q.points[k]).J;
  return a;
}

double Mesh::area() const {
  double a = 0.0;
  for (int e = 0; e < num_elems_; ++e) a += element_area(e);
  return a;
}

std::vector<bool> Mesh::boundary_point_mask() const {
  std::vector<bool> mask(points_.size(), false);
  const int n = order_ + 1;
  for (const Face& f : faces_) {
    if (f.interior()) continue;
    auto nodes = element_nodes(f.elem[0]);
    for (int t = 0; t < n; ++t) {
      int i = 0, j = 0;
      switch (f.edge[0]) {
        case 0: i = t; j = 0; break;
        case 1: i = order_; j = t; break;
        case 2: i = t; j = order_; break;
        default: i = 0; j = t; break;
      }
      mask[nodes[i + n * j]] = true;
    }
  }
  return mask;
}

std::vector<BoundaryTag> Mesh::boundary_tags() const {
  std::vector<BoundaryTag> tags;
  for (const Face& f : faces_)
    if (!f.interior()) tags.push_back({f.elem[0], f.edge[0], f.tag});
  return tags;
}

Mesh Mesh::with_points(std::vector<Vec2> pts) const {
  std::vector<std::vector<int>> en(num_elems_);
  for (int e = 0; e < num_elems_; ++e) {
    auto nodes = element_nodes(e);
    en[e].assign(nodes.begin(), nodes.end());
  }
  return Mesh(order_, std::move(pts), std::move(en), boundary_tags());
}

void Mesh::check_tangling() const {
  const QuadRule2D q = tensor_gauss(order_ + 2);
  for (int e = 0; e < num_elems_; ++e)
    for (int k = 0; k < q.size(); ++k) {
      const double J = geometry_unchecked(e, q.points[k]).J;
      if (!(J > 0.0))
        throw GeometryError("tangled element " + std::to_string(e) + ": det F = " +
                            std::to_string(J));
    }
}

Mesh build_cartesian_mesh(int nx, int ny, double x0, double x1, double y0, double y1, int order) {
  if (nx < 1 || ny < 1) throw ArgumentError("cartesian mesh needs nx, ny >= 1");
  if (order < 1) throw ArgumentError("cartesian mesh needs order >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw ArgumentError("cartesian mesh needs a non-empty rectangle");
  const auto gll = gauss_lobatto(order + 1).points;
  const int NX = nx * order + 1, NY = ny * order + 1;
  const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
  std::vector<Vec2> pts(static_cast<size_t>(NX) * NY);
  for (int J = 0; J < NY; ++J)
    for (int I = 0; I < NX; ++I) {
      const int ex = std::min(I / order, nx - 1), ey = std::min(J / order, ny - 1);
      const double x = (I == NX - 1) ? x1 : x0 + (ex + gll[I - ex * order]) * dx;
      const double y = (J == NY - 1) ? y1 : y0 + (ey + gll[J - ey * order]) * dy;
      pts[I + NX * J] = Vec2(x, y);
    }
  std::vector<std::vector<int>> elems;
  std::vector<BoundaryTag> tags;
  elems.reserve(static_cast<size_t>(nx) * ny);
  for (int ey = 0; ey < ny; ++ey)
    for (int ex = 0; ex < nx; ++ex) {
      std::vector<int> nodes;
      for (int j = 0; j <= order; ++j)
        for (int i = 0; i <= order; ++i) nodes.push_back(ex * order + i + NX * (ey * order + j));
      const int e = static_cast<int>(elems.size());
      elems.push_back(std::move(nodes));
      if (ey == 0) tags.push_back({e, 0, 1});
      if (ex == nx - 1) tags.push_back({e, 1, 2});
      if (ey == ny - 1) tags.push_back({e, 2, 3});
      if (ex == 0) tags.push_back({e, 3, 4});
    }
  return Mesh(order, std::move(pts), std::move(elems), std::move(tags));
}

Mesh apply_taylor_green_distortion(const Mesh& mesh, double t_final, int n_steps,
                                   double frame_scale) {
  if (n_steps < 1) throw ArgumentError("taylor-green distortion needs n_steps >= 1");
  std::vector<Vec2> pts = mesh.points();
  const double dt = t_final / n_steps;
  for (Vec2& p : pts) {
    Vec2 X = frame_scale * p;
    for (int s = 0; s < n_steps; ++s) {
      const Vec2 v(std::sin(X[0]) * std::cos(X[1]), -std::cos(X[0]) * std::sin(X[1]));
      X += dt * v;
    }
    p = X / frame_scale;
  }
  return mesh.with_points(std::move(pts));
}

Mesh apply_sine_distortion(const Mesh& mesh, double alpha) {
  std::vector<Vec2> pts = mesh.points();
  const auto bdr = mesh.boundary_point_mask();
  const double tp = 2.0 * std::numbers::pi;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (bdr[i]) continue;
    const double s = alpha * std::sin(tp * pts[i][0]) * std::sin(tp * pts[i][1]);
    pts[i] += Vec2(s, s);
  }
  return mesh.with_points(std::move(pts));
}

}  // namespace vef
