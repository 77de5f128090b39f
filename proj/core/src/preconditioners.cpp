#include "vef/preconditioners.hpp"

#include <Eigen/LU>
#include <numeric>
#include <sstream>

#include "vef/error.hpp"

namespace vef {

namespace {

int local_component(const FeSpace& V, int i) {
  if (V.is_rt()) return V.rt_basis().component(i);
  return i < V.local_size() / 2 ? 0 : 1;
}

int local_partner(const FeSpace& V, int i) {
  if (V.is_rt()) return V.rt_basis().partner(i);
  const int n = V.local_size() / 2;
  return i < n ? i + n : i - n;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

LumpedInverse lump_A(const FeSpace& V, const std::vector<Mat>& A_elem,
                     const std::vector<char>& boundary_elem) {
  const int n = V.ndofs();
  std::vector<Triplet> t;
  for (size_t e = 0; e < A_elem.size(); ++e) {
    const Mat& Ae = A_elem[e];
    const auto vd = V.dofs(static_cast<int>(e));
    const bool bdr = !boundary_elem.empty() && boundary_elem[e];
    for (int i = 0; i < Ae.rows(); ++i) {
      if (!bdr) {
        t.emplace_back(vd[i], vd[i], Ae.row(i).sum());
        continue;
      }
      double same = 0.0, other = 0.0;
      const int ci = local_component(V, i);
      for (int j = 0; j < Ae.cols(); ++j)
        (local_component(V, j) == ci ? same : other) += Ae(i, j);
      t.emplace_back(vd[i], vd[i], same);
      t.emplace_back(vd[i], vd[local_partner(V, i)], other);
    }
  }
  const CsrMatrix L = csr_from_triplets(n, n, t);

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i)
    for (CsrMatrix::InnerIterator it(L, i); it; ++it) {
      const int a = find_root(parent, i), b = find_root(parent, it.col());
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find_root(parent, i)].push_back(i);

  std::vector<Triplet> inv;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const int m = static_cast<int>(g.size());
    Mat B = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) B(a, b) = L.coeff(g[a], g[b]);
    Eigen::FullPivLU<Mat> lu(B);
    if (!lu.isInvertible()) {
      std::ostringstream os;
      os << "singular lumped block on dofs";
      for (int d : g) os << ' ' << d;
      throw AssemblyError(os.str());
    }
    const Mat Bi = lu.inverse();
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (Bi(a, b) != 0.0) inv.emplace_back(g[a], g[b], Bi(a, b));
  }
  return {csr_from_triplets(n, n, inv)};
}

CsrMatrix build_lumped_schur(const CsrMatrix& Ma, const CsrMatrix& D, const CsrMatrix& G,
                             const LumpedInverse& Ainv) {
  const CsrMatrix AG = Ainv.inv * G;
  const CsrMatrix DAG = D * AG;
  CsrMatrix S = Ma - DAG;
  S.makeCompressed();
  return S;
}

BlockTriPrec::BlockTriPrec(CsrMatrix D, LinearOperator Ainv, LinearOperator Sinv)
    : D_(std::move(D)), Ainv_(std::move(Ainv)), Sinv_(std::move(Sinv)) {}

void BlockTriPrec::apply(const Vec& r, Vec& x) const {
  const int n1 = nv(), n2 = ny();
  if (r.size() != n1 + n2) throw ArgumentError("block preconditioner: residual size mismatch");
  Vec x1, x2;
  Ainv_(r.head(n1), x1);
  const Vec r2 = r.tail(n2) - D_ * x1;
  Sinv_(r2, x2);
  x.resize(n1 + n2);
  x << x1, x2;
}

LinearOperator BlockTriPrec::as_operator() const {
  return [this](const Vec& r, Vec& x) { apply(r, x); };
}

std::unique_ptr<LumpedBlockPrec> make_lumped_block_prec(const VefBlockSystem& sys,
                                                        const SolverConfig& cfg) {
  auto p = std::make_unique<LumpedBlockPrec>();
  p->lumped = lump_A(sys);
  p->schur = build_lumped_schur(sys.Ma, sys.D, sys.G, p->lumped);

  auto A = std::make_shared<const CsrMatrix>(sys.A);
  LinearOperator Ainv;
  const int ks = std::max(1, cfg.smoother_sweeps);
  if (cfg.smoother == SolverConfig::Smoother::Jacobi)
    Ainv = [A, ks](const Vec& r, Vec& x) { x = jacobi_apply(*A, r, ks); };
  else
    Ainv = [A, ks](const Vec& r, Vec& x) { x = gauss_seidel_apply(*A, r, ks); };

  LinearOperator Sinv;
  if (cfg.schur == SolverConfig::SchurSolve::Direct) {
    p->schur_lu = std::make_shared<SparseLU>(p->schur);
    auto lu = p->schur_lu;
    Sinv = [lu](const Vec& r, Vec& x) { x = lu->solve(r); };
  } else {
    auto S = std::make_shared<const CsrMatrix>(p->schur);
    const int k = std::max(1, cfg.schur_sweeps);
    Sinv = [S, k](const Vec& r, Vec& x) { x = gauss_seidel_apply(*S, r, k); };
  }
  p->prec = std::make_unique<BlockTriPrec>(sys.D, std::move(Ainv), std::move(Sinv));
  return p;
}

std::unique_ptr<BlockTriPrec> make_exact_block_prec(const VefBlockSystem& sys) {
  auto lu = std::make_shared<SparseLU>(sys.A);
  const Mat G = Mat(sys.G);
  Mat AG(G.rows(), G.cols());
  for (Eigen::Index j = 0; j < G.cols(); ++j) AG.col(j) = lu->solve(G.col(j));
  const Mat S = Mat(sys.Ma) - Mat(sys.D) * AG;
  auto slu = std::make_shared<Eigen::FullPivLU<Mat>>(S);
  if (!slu->isInvertible()) throw SingularMatrixError("exact Schur complement is singular", -1);
  LinearOperator Ainv = [lu](const Vec& r, Vec& x) { x = lu->solve(r); };
  LinearOperator Sinv = [slu](const Vec& r, Vec& x) { x = slu->solve(r); };
  return std::make_unique<BlockTriPrec>(sys.D, std::move(Ainv), std::move(Sinv));
}

}  // namespace vef
