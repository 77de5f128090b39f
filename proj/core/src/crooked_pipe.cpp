#include "vef/crooked_pipe.hpp"

#include <algorithm>
#include <cmath>

#include "vef/error.hpp"
#include "vef/studies.hpp"

namespace vef {

bool crooked_pipe_in_pipe(const Vec2& x) {
  const double ax = x.x(), ay = std::abs(x.y());
  if (ax < 0.0 || ax > 7.0 || ay > 2.0) return false;
  if (ax <= 2.5) return ay <= 0.5;                  // entrance
  if (ax <= 3.0) return ay <= 1.5;                  // rising legs
  if (ax <= 4.0) return ay >= 1.0 && ay <= 1.5;     // upper and lower runs
  if (ax <= 4.5) return ay <= 1.5;                  // falling legs
  return ay <= 0.5;                                 // exit
}

Mesh crooked_pipe_mesh(int refinement, int order) {
  if (refinement < 0 || refinement > 6) throw ArgumentError("crooked pipe refinement must be in [0, 6]");
  const int k = 1 << refinement;
  return build_cartesian_mesh(14 * k, 8 * k, 0.0, 7.0, -2.0, 2.0, order);
}

TransportProblem crooked_pipe_problem(const Mesh& mesh, const CrookedPipeSpec& spec) {
  const int ne = mesh.num_elements();
  TransportProblem prob;
  prob.sigma_t.resize(ne);
  prob.sigma_s.resize(ne);
  prob.q_iso.assign(ne, spec.q);
  for (int e = 0; e < ne; ++e) {
    const double st = crooked_pipe_in_pipe(mesh.centroid(e)) ? spec.sigma_t_pipe : spec.sigma_t_wall;
    prob.sigma_t[e] = st;
    prob.sigma_s[e] = st - spec.sigma_a;
  }
  const double psi_in = spec.inflow;
  prob.inflow = [psi_in](int, const Vec2& x, const Vec3&) {
    return (x.x() < 1e-12 && std::abs(x.y()) <= 0.5 + 1e-12) ? psi_in : 0.0;
  };
  return prob;
}

OuterConfig crooked_pipe_outer(const CrookedPipeConfig& cfg) {
  OuterConfig oc;
  oc.kind = cfg.kind;
  oc.tol = cfg.outer_tol;
  oc.anderson_m = cfg.anderson_m;
  oc.psi0 = cfg.psi0;
  oc.inner.method = SolverConfig::Method::Krylov;
  oc.inner.tol = cfg.inner_tol;
  oc.inner.maxit = cfg.inner_maxit;
  oc.inner.smoother = SolverConfig::Smoother::Jacobi;
  oc.inner.schur = SolverConfig::SchurSolve::Direct;
  oc.inner.hybrid_prec = cfg.hybrid_prec;
  return oc;
}

CrookedPipeResult run_crooked_pipe(const CrookedPipeConfig& cfg, const CrookedPipeSpec& spec) {
  const Mesh mesh = crooked_pipe_mesh(cfg.refinement);
  const TransportProblem prob = crooked_pipe_problem(mesh, spec);
  const VefRunResult res =
      run_vef_fixed_point(mesh, prob, level_symmetric(cfg.sn), cfg.p, crooked_pipe_outer(cfg));
  CrookedPipeResult out;
  out.elements = mesh.num_elements();
  out.trace = res.trace;
  for (const auto& r : res.trace.rows) out.max_inner = std::max<double>(out.max_inner, r.inner_iters);
  if (const auto loc = locate_point(mesh, Vec2(6.75, 0.0)))
    out.pipe_exit_phi = eval_scalar(res.phi, loc->elem, loc->ref);
  return out;
}

}  // namespace vef
