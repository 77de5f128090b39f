#include "vef/hybridization.hpp"

#include <Eigen/LU>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "vef/error.hpp"
#include "vef/parallel.hpp"

namespace vef {

void assemble_constraints(const FeSpace& V, const FeSpace& L, const VefData& vef, CsrMatrix& C1,
                          CsrMatrix& C2) {
  if (V.kind() != SpaceKind::BrokenRT || L.kind() != SpaceKind::Lambda)
    throw ArgumentError("constraints need broken RT and Λ spaces");
  const Mesh& mesh = V.mesh();
  const int p = L.degree();
  const RtBasis& rb = V.rt_basis();
  const QuadRule1D gl = gauss_legendre(p + 1);
  const Basis1D lam = Basis1D::lagrange(p, NodeFamily::GaussLegendre);
  const QuadRule1D qf = gauss_legendre(vef.layout.nq_face);

  std::vector<Triplet> t1, t2;
  VectorShapes sh;
  std::vector<double> lv(p + 1);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.interior()) continue;
    const auto ld = L.dofs(f);
    for (int a = 0; a < 2; ++a) {
      const int e = fc.elem[a];
      const int edge = fc.edge[a];
      const auto vd = V.dofs(e);
      const auto& ed = rb.edge_dofs(edge);
      const double sg = RtBasis::ref_normal_sign(edge);
      for (int m = 0; m <= p; ++m) {
        const int k = (a == 1 && fc.flip) ? p - m : m;
        t1.emplace_back(ld[m], vd[ed[k]], sg * gl.weights[m]);
      }
    }
    for (int q = 0; q < qf.size(); ++q) {
      const double s = qf.points[q];
      const double ds = qf.weights[q] * mesh.face_geometry(f, s).weight;
      const Vec2& En = vef.En_at(f, q);
      lam.eval(s, lv.data());
      for (int a = 0; a < 2; ++a) {
        const int e = fc.elem[a];
        const Vec2 ref = mesh.face_ref(f, a, s);
        vector_shapes(V, mesh.geometry(e, ref), ref, false, sh);
        const Vec vm = sh.vals * En;
        const auto vd = V.dofs(e);
        const double sa = a == 0 ? ds : -ds;
        for (int i = 0; i < vm.size(); ++i)
          for (int m = 0; m <= p; ++m)
            if (vm[i] != 0.0) t2.emplace_back(vd[i], ld[m], sa * vm[i] * lv[m]);
      }
    }
  }
  C1 = csr_from_triplets(L.ndofs(), V.ndofs(), t1);
  C2 = csr_from_triplets(V.ndofs(), L.ndofs(), t2);
}

void eliminate_local(HybridSystem& hs) {
  const int ne = hs.num_elements();
  hs.W.resize(ne);
  hs.X.resize(ne);
  hs.Yb.resize(ne);
  hs.Z.resize(ne);
  std::vector<std::string> errors(ne);
  parallel_for(ne, default_threads(), [&](int e) {
    Eigen::FullPivLU<Mat> Alu(hs.A[e]);
    if (!Alu.isInvertible()) {
      errors[e] = "singular current block on element " + std::to_string(e);
      return;
    }
    const Mat Ai = Alu.inverse();
    const Mat AiG = Ai * hs.G[e];
    const Mat DAi = hs.D[e] * Ai;
    Eigen::FullPivLU<Mat> Slu(hs.Ma[e] - hs.D[e] * AiG);
    if (!Slu.isInvertible()) {
      errors[e] = "singular local Schur complement on element " + std::to_string(e);
      return;
    }
    hs.Z[e] = Slu.inverse();
    hs.X[e] = -AiG * hs.Z[e];
    hs.Yb[e] = -hs.Z[e] * DAi;
    hs.W[e] = Ai - hs.X[e] * DAi;
  });
  for (const auto& m : errors)
    if (!m.empty()) throw SingularMatrixError(m);
}

HybridSystem assemble_hybrid_system(const FeSpace& Y, const FeSpace& V, const FeSpace& L,
                                    const Materials& mat, const VefData& vef,
                                    const VefSources& src) {
  if (V.kind() != SpaceKind::BrokenRT) throw ArgumentError("hybrid system needs a broken RT space");
  const Mesh& mesh = Y.mesh();
  const int ne = mesh.num_elements();
  HybridSystem hs;
  hs.Y = &Y;
  hs.V = &V;
  hs.L = &L;
  hs.A.resize(ne);
  hs.G.resize(ne);
  hs.D.resize(ne);
  hs.Ma.resize(ne);
  hs.g.resize(ne);
  hs.f.resize(ne);
  parallel_for(ne, default_threads(), [&](int e) {
    ElementBlocks b = element_blocks(Y, V, e, mat, vef, &src, true);
    hs.A[e] = std::move(b.A);
    hs.G[e] = std::move(b.G);
    hs.D[e] = std::move(b.D);
    hs.Ma[e] = std::move(b.Ma);
    hs.g[e] = std::move(b.g);
    hs.f[e] = std::move(b.f);
  });
  assemble_constraints(V, L, vef, hs.C1, hs.C2);
  eliminate_local(hs);

  // Broken RT dofs are element-contiguous with unit signs, so W is block diagonal.
  std::vector<Triplet> tw;
  Vec r = Vec::Zero(V.ndofs());
  for (int e = 0; e < ne; ++e) {
    const auto vd = V.dofs(e);
    const Mat& W = hs.W[e];
    for (int i = 0; i < W.rows(); ++i)
      for (int j = 0; j < W.cols(); ++j) tw.emplace_back(vd[i], vd[j], W(i, j));
    const Vec le = W * hs.g[e] + hs.X[e] * hs.f[e];
    for (int i = 0; i < le.size(); ++i) r[vd[i]] = le[i];
  }
  const CsrMatrix Wd = csr_from_triplets(V.ndofs(), V.ndofs(), tw);
  CsrMatrix WC2 = Wd * hs.C2;
  hs.H = hs.C1 * WC2;
  hs.H.makeCompressed();
  hs.rhs = hs.C1 * r;
  return hs;
}

MixedSolution solve_hybrid(const HybridSystem& hs, const SolverConfig& cfg,
                           const Vec* lambda_guess) {
  const int nl = static_cast<int>(hs.H.rows());
  Vec lambda = Vec::Zero(nl);
  SolveStats st;
  if (nl > 0) {
    if (cfg.method == SolverConfig::Method::Direct) {
      lambda = SparseLU(hs.H).solve(hs.rhs);
      const double nb = hs.rhs.norm();
      st.rel_residual = nb > 0 ? (hs.rhs - hs.H * lambda).norm() / nb : 0.0;
      st.converged = true;
    } else {
      if (lambda_guess && lambda_guess->size() == nl) lambda = *lambda_guess;
      LinearOperator prec;
      std::shared_ptr<SparseLU> lu;
      if (cfg.hybrid_prec == SolverConfig::HybridPrec::Direct) {
        lu = std::make_shared<SparseLU>(hs.H);
        prec = [lu](const Vec& r, Vec& x) { x = lu->solve(r); };
      } else {
        const int k = std::max(1, cfg.hybrid_sweeps);
        prec = [&hs, k](const Vec& r, Vec& x) { x = gauss_seidel_apply(hs.H, r, k, true); };
      }
      st = bicgstab(as_operator(hs.H), prec, hs.rhs, lambda, cfg.tol, cfg.maxit);
    }
  } else {
    st.converged = true;
  }

  const Vec c2l = hs.C2 * lambda;
  MixedSolution s;
  s.J = GridFunction(*hs.V);
  s.phi = GridFunction(*hs.Y);
  for (int e = 0; e < hs.num_elements(); ++e) {
    const auto vd = hs.V->dofs(e);
    const auto yd = hs.Y->dofs(e);
    Vec rg = hs.g[e];
    for (int i = 0; i < rg.size(); ++i) rg[i] -= c2l[vd[i]];
    const Vec J = hs.W[e] * rg + hs.X[e] * hs.f[e];
    const Vec phi = hs.Yb[e] * rg + hs.Z[e] * hs.f[e];
    for (int i = 0; i < J.size(); ++i) s.J.coef[vd[i]] = J[i];
    for (int i = 0; i < phi.size(); ++i) s.phi.coef[yd[i]] = phi[i];
  }
  s.lambda = std::move(lambda);
  s.stats = st;
  return s;
}

void write_lambda(const FeSpace& L, const Vec& lambda, std::ostream& os) {
  if (lambda.size() != L.ndofs()) throw ArgumentError("write_lambda: size mismatch");
  const Mesh& mesh = L.mesh();
  os << std::setprecision(17);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto d = L.dofs(f);
    if (d.empty()) continue;
    os << f;
    for (int k : d) os << ' ' << lambda[k];
    os << '\n';
  }
}

}  // namespace vef
