#include "vef/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <set>

#include "vef/error.hpp"
#include "vef/parallel.hpp"

namespace vef {

void TransportProblem::validate(const Mesh& mesh) const {
  const size_t ne = mesh.num_elements();
  if (sigma_t.size() != ne || sigma_s.size() != ne)
    throw ArgumentError("transport problem: cross sections must be given per element");
  if (!q_iso.empty() && q_iso.size() != ne)
    throw ArgumentError("transport problem: q_iso must be given per element");
  for (size_t e = 0; e < ne; ++e)
    if (!(sigma_t[e] >= sigma_s[e] && sigma_s[e] >= 0.0))
      throw ArgumentError("transport problem: need sigma_t >= sigma_s >= 0 in element " +
                          std::to_string(e));
}

int SweepPlan::total_lagged() const {
  int n = 0;
  for (const auto& l : lagged) n += static_cast<int>(l.size());
  return n;
}

bool clip_rebalance_fixup(Vec& c, const Vec& m, double floor_value) {
  if (c.minCoeff() >= 0.0) return false;
  const double total = m.dot(c);
  if (total <= 0.0) {
    c.setConstant(floor_value);
    return true;
  }
  c = c.cwiseMax(0.0);
  c *= total / m.dot(c);
  return true;
}

namespace {

struct DirGraph {
  // adjacency: for each element, upwind neighbors with (edge, weight)
  struct In {
    int from;
    int edge;
    double weight;
    bool lagged;
  };
  std::vector<std::vector<In>> in;
};

// Tarjan's SCC over the graph of unlagged upwind edges (from -> to).
std::vector<int> scc_ids(const DirGraph& g, int& ncomp) {
  const int n = static_cast<int>(g.in.size());
  std::vector<std::vector<int>> out(n);
  for (int v = 0; v < n; ++v)
    for (const auto& e : g.in[v])
      if (!e.lagged) out[e.from].push_back(v);
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on(n, false);
  int counter = 0;
  ncomp = 0;
  std::function<void(int)> strong = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (int w : out[v]) {
      if (index[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) strong(v);
  return comp;
}

}  // namespace

SweepPlan build_sweep_plan(const Mesh& mesh, const AngularQuadrature& quad, int nq_face) {
  if (nq_face <= 0) nq_face = mesh.order() + 2;
  const QuadRule1D r = gauss_legendre(nq_face);
  const int ne = mesh.num_elements();
  const int nd = quad.size();

  // Outward normal times weight at face points, per element edge.
  std::vector<std::vector<Vec2>> nw(4 * ne);
  for (int e = 0; e < ne; ++e)
    for (int k = 0; k < 4; ++k) {
      const int f = mesh.element_face(e, k);
      const double sg = mesh.face_side(f, e) == 0 ? 1.0 : -1.0;
      for (int q = 0; q < r.size(); ++q) {
        const FaceGeometry fg = mesh.face_geometry(f, r.points[q]);
        nw[4 * e + k].push_back(sg * r.weights[q] * fg.weight * fg.n);
      }
    }

  SweepPlan plan;
  plan.order.resize(nd);
  plan.lagged.resize(nd);
  for (int d = 0; d < nd; ++d) {
    const Vec2 om(quad.dirs[d][0], quad.dirs[d][1]);
    DirGraph g;
    g.in.resize(ne);
    for (int e = 0; e < ne; ++e)
      for (int k = 0; k < 4; ++k) {
        const int f = mesh.element_face(e, k);
        const Face& fc = mesh.face(f);
        if (!fc.interior()) continue;
        const int nb = fc.elem[0] == e ? fc.elem[1] : fc.elem[0];
        double w = 0.0, scale = 0.0;
        for (const Vec2& v : nw[4 * e + k]) {
          w += std::max(0.0, -om.dot(v));
          scale += v.norm();
        }
        if (w > 1e-13 * scale) g.in[e].push_back({nb, k, w, false});
      }
    // Break cycles until every strongly connected component is a single element.
    while (true) {
      int ncomp;
      const auto comp = scc_ids(g, ncomp);
      std::vector<int> size(ncomp, 0);
      for (int c : comp) ++size[c];
      bool any = false;
      std::vector<std::pair<double, std::pair<int, int>>> weakest(ncomp, {1e300, {-1, -1}});
      for (int v = 0; v < ne; ++v)
        for (int i = 0; i < static_cast<int>(g.in[v].size()); ++i) {
          const auto& ed = g.in[v][i];
          if (ed.lagged || comp[ed.from] != comp[v] || size[comp[v]] < 2) continue;
          auto& best = weakest[comp[v]];
          if (ed.weight < best.first) best = {ed.weight, {v, i}};
        }
      for (int c = 0; c < ncomp; ++c)
        if (weakest[c].second.first >= 0) {
          auto& ed = g.in[weakest[c].second.first][weakest[c].second.second];
          ed.lagged = true;
          plan.lagged[d].emplace_back(weakest[c].second.first, ed.edge);
          any = true;
        }
      if (!any) break;
    }
    // Kahn's algorithm, smallest element id first.
    std::vector<int> indeg(ne, 0);
    std::vector<std::vector<int>> out(ne);
    for (int v = 0; v < ne; ++v)
      for (const auto& ed : g.in[v])
        if (!ed.lagged) {
          ++indeg[v];
          out[ed.from].push_back(v);
        }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 0; v < ne; ++v)
      if (indeg[v] == 0) ready.push(v);
    while (!ready.empty()) {
      const int v = ready.top();
      ready.pop();
      plan.order[d].push_back(v);
      for (int w : out[v])
        if (--indeg[w] == 0) ready.push(w);
    }
    std::sort(plan.lagged[d].begin(), plan.lagged[d].end());
  }
  return plan;
}

TransportSolver::TransportSolver(const FeSpace& space, const AngularQuadrature& quad,
                                 TransportProblem problem, Options opt)
    : space_(&space), quad_(quad), problem_(std::move(problem)), opt_(opt) {
  if (space.kind() != SpaceKind::Y) throw ArgumentError("transport needs a DG scalar space");
  const Mesh& mesh = space.mesh();
  problem_.validate(mesh);
  if (opt_.threads <= 0) opt_.threads = default_threads();
  const int p = space.degree();
  nq_ = opt_.nq > 0 ? opt_.nq : p + mesh.order() + 1;
  const QuadRule2D qv = tensor_gauss(nq_);
  const QuadRule1D qf = gauss_legendre(nq_);
  face_s_ = qf.points;
  face_w_ = qf.weights;
  const TensorBasis& b = space.scalar_basis();
  const int nb = b.size();
  const int ne = mesh.num_elements();
  elems_.resize(ne);
  std::vector<double> v(nb), gr(2 * nb);
  for (int e = 0; e < ne; ++e) {
    ElemData& ed = elems_[e];
    ed.B.resize(qv.size(), nb);
    ed.wJ.resize(qv.size());
    ed.M = Mat::Zero(nb, nb);
    ed.Gx = Mat::Zero(nb, nb);
    ed.Gy = Mat::Zero(nb, nb);
    for (int q = 0; q < qv.size(); ++q) {
      const ElementGeometry g = mesh.geometry(e, qv.points[q]);
      b.eval_grad(qv.points[q], v.data(), gr.data());
      const double w = qv.weights[q] * g.J;
      ed.wJ[q] = w;
      ed.x.push_back(g.x);
      Eigen::Map<const Vec> vv(v.data(), nb);
      ed.B.row(q) = vv.transpose();
      Vec dx(nb), dy(nb);
      for (int i = 0; i < nb; ++i) {
        const Vec2 gp = g.Finv.transpose() * Vec2(gr[2 * i], gr[2 * i + 1]);
        dx[i] = gp[0];
        dy[i] = gp[1];
      }
      ed.M.noalias() += w * vv * vv.transpose();
      ed.Gx.noalias() += w * dx * vv.transpose();
      ed.Gy.noalias() += w * dy * vv.transpose();
    }
    ed.m = ed.M.rowwise().sum();
    for (int k = 0; k < 4; ++k) {
      EdgeData& eg = ed.edge[k];
      eg.face = mesh.element_face(e, k);
      eg.side = mesh.face_side(eg.face, e);
      const Face& fc = mesh.face(eg.face);
      eg.neighbor = fc.interior() ? fc.elem[1 - eg.side] : -1;
      eg.neighbor_edge = fc.interior() ? fc.edge[1 - eg.side] : -1;
      eg.B.resize(qf.size(), nb);
      const double sg = eg.side == 0 ? 1.0 : -1.0;
      for (int q = 0; q < qf.size(); ++q) {
        const FaceGeometry fg = mesh.face_geometry(eg.face, qf.points[q]);
        b.eval(mesh.face_ref(eg.face, eg.side, qf.points[q]), v.data());
        eg.B.row(q) = Eigen::Map<const Vec>(v.data(), nb).transpose();
        eg.nw.push_back(sg * qf.weights[q] * fg.weight * fg.n);
        eg.x.push_back(fg.x);
      }
    }
  }
  plan_ = build_sweep_plan(mesh, quad_, nq_);
}

Vec TransportSolver::scattering_source(const GridFunction& phi) const {
  const Mesh& mesh = space_->mesh();
  if (&phi.space->mesh() != &mesh) throw ArgumentError("scattering_source: mesh mismatch");
  if (phi.space->kind() != SpaceKind::Y) throw ArgumentError("scattering_source: phi must be DG");
  const QuadRule2D qv = tensor_gauss(nq_);
  const TensorBasis& pb = phi.space->scalar_basis();
  const int nb = space_->local_size();
  Vec out = Vec::Zero(space_->ndofs());
  std::vector<double> v(pb.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double c = problem_.sigma_s[e] / (4.0 * std::numbers::pi);
    if (c == 0.0) continue;
    const Vec loc = phi.local(e);
    const ElemData& ed = elems_[e];
    Vec acc = Vec::Zero(nb);
    for (int q = 0; q < qv.size(); ++q) {
      pb.eval(qv.points[q], v.data());
      double val = 0.0;
      for (int i = 0; i < pb.size(); ++i) val += loc[i] * v[i];
      acc += (c * ed.wJ[q] * val) * ed.B.row(q).transpose();
    }
    out.segment(static_cast<Eigen::Index>(e) * nb, nb) = acc;
  }
  return out;
}

Vec TransportSolver::fixed_source(int e, int d) const {
  const ElemData& ed = elems_[e];
  Vec s = problem_.q(e) * ed.m;
  if (problem_.source) {
    for (int q = 0; q < ed.B.rows(); ++q)
      s += (ed.wJ[q] * problem_.source(e, ed.x[q], quad_.dirs[d])) * ed.B.row(q).transpose();
  }
  return s;
}

void TransportSolver::solve_element(int e, int d, const Vec& scattering, Mat& psi,
                                    SweepStats* stats, Vec* residual_out) const {
  const ElemData& ed = elems_[e];
  const int nb = static_cast<int>(ed.M.rows());
  const Vec3& om3 = quad_.dirs[d];
  const Vec2 om(om3[0], om3[1]);
  Mat K = problem_.sigma_t[e] * ed.M - om[0] * ed.Gx - om[1] * ed.Gy;
  Vec rhs = scattering.segment(static_cast<Eigen::Index>(e) * nb, nb) + fixed_source(e, d);
  for (int k = 0; k < 4; ++k) {
    const EdgeData& eg = ed.edge[k];
    for (int q = 0; q < eg.B.rows(); ++q) {
      const double on = om.dot(eg.nw[q]);
      if (on > 0.0) {
        K.noalias() += on * eg.B.row(q).transpose() * eg.B.row(q);
      } else if (on < 0.0) {
        double up = 0.0;
        if (eg.neighbor >= 0) {
          const EdgeData& nbe = elems_[eg.neighbor].edge[eg.neighbor_edge];
          up = nbe.B.row(q).dot(psi.col(d).segment(static_cast<Eigen::Index>(eg.neighbor) * nb, nb));
        } else if (problem_.inflow) {
          up = problem_.inflow(eg.face, eg.x[q], om3);
        }
        rhs -= (on * up) * eg.B.row(q).transpose();
      }
    }
  }
  auto seg = psi.col(d).segment(static_cast<Eigen::Index>(e) * nb, nb);
  if (residual_out) {
    const Vec c = seg;
    *residual_out = K * c - rhs;
    return;
  }
  Vec c = K.partialPivLu().solve(rhs);
  if (!c.allFinite())
    throw SingularMatrixError("transport: singular local matrix in element " + std::to_string(e));
  bool fixed = false;
  if (opt_.fixup) fixed = clip_rebalance_fixup(c, ed.m);
  seg = c;
  if (stats) {
    ++stats->cells;
    if (fixed) ++stats->fixups;
  }
}

AngularFluxSet TransportSolver::sweep(const Vec& scattering, const AngularFluxSet* prev,
                                      SweepStats* stats) const {
  const int nd = quad_.size();
  AngularFluxSet out;
  out.space = space_;
  if (prev && prev->psi.rows() == space_->ndofs() && prev->psi.cols() == nd)
    out.psi = prev->psi;
  else
    out.psi = Mat::Zero(space_->ndofs(), nd);
  std::vector<SweepStats> per(nd);
  parallel_for(nd, opt_.threads, [&](int d) {
    for (int e : plan_.order[d]) solve_element(e, d, scattering, out.psi, &per[d], nullptr);
  });
  if (stats)
    for (const auto& s : per) {
      stats->cells += s.cells;
      stats->fixups += s.fixups;
    }
  return out;
}

GridFunction TransportSolver::scalar_moment(const AngularFluxSet& psi) const {
  const Eigen::Map<const Vec> w(quad_.weights.data(), quad_.size());
  return GridFunction(*space_, psi.psi * w);
}

std::pair<GridFunction, GridFunction> TransportSolver::current_moments(const AngularFluxSet& psi) const {
  Vec wx(quad_.size()), wy(quad_.size());
  for (int d = 0; d < quad_.size(); ++d) {
    wx[d] = quad_.weights[d] * quad_.dirs[d][0];
    wy[d] = quad_.weights[d] * quad_.dirs[d][1];
  }
  return {GridFunction(*space_, psi.psi * wx), GridFunction(*space_, psi.psi * wy)};
}

Mat TransportSolver::balance_residuals(const AngularFluxSet& psi, const Vec& scattering,
                                       const AngularFluxSet* prev) const {
  const int ne = space_->mesh().num_elements();
  const int nb = space_->local_size();
  Mat R(ne, quad_.size());
  // Replays the sweep's visiting order so each element sees the upwind data it was solved with.
  Mat seen = prev && prev->psi.rows() == psi.psi.rows() && prev->psi.cols() == psi.psi.cols()
                 ? prev->psi
                 : Mat::Zero(psi.psi.rows(), psi.psi.cols());
  Vec r;
  for (int d = 0; d < quad_.size(); ++d)
    for (int e : plan_.order[d]) {
      const auto seg = Eigen::seqN(static_cast<Eigen::Index>(e) * nb, nb);
      seen(seg, d) = psi.psi(seg, d);
      solve_element(e, d, scattering, seen, nullptr, &r);
      R(e, d) = r.sum();
    }
  return R;
}

}  // namespace vef
