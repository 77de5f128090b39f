#include "vef/mixed_solve.hpp"

namespace vef {

MixedSolution solve_mixed(const VefBlockSystem& sys, const SolverConfig& cfg,
                          const MixedSolution* guess) {
  const CsrMatrix K = sys.full();
  const Vec b = sys.rhs();
  const int nv = sys.nv();
  Vec x = Vec::Zero(b.size());
  SolveStats st;
  if (cfg.method == SolverConfig::Method::Direct) {
    x = SparseLU(K).solve(b);
    const double nb = b.norm();
    st.rel_residual = nb > 0 ? (b - K * x).norm() / nb : (K * x).norm();
    st.converged = true;
  } else {
    if (guess && guess->phi.coef.size() == sys.ny() && guess->J.coef.size() == nv)
      x << guess->J.coef, guess->phi.coef;
    const auto prec = make_lumped_block_prec(sys, cfg);
    st = bicgstab(as_operator(K), prec->prec->as_operator(), b, x, cfg.tol, cfg.maxit);
  }
  MixedSolution s;
  s.J = GridFunction(*sys.V, x.head(nv));
  s.phi = GridFunction(*sys.Y, x.tail(sys.ny()));
  s.stats = st;
  return s;
}

}  // namespace vef
