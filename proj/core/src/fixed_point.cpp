#include "vef/fixed_point.hpp"

#include <Eigen/QR>
#include <cmath>
#include <ostream>

#include "vef/error.hpp"

namespace vef {

Vec AndersonAccelerator::update(const Vec& x, const Vec& gx) {
  fallback_ = false;
  if (m_ <= 0) return gx;
  const Vec f = gx - x;
  if (f_prev_.size() == f.size()) {
    dF_.push_back(f - f_prev_);
    dG_.push_back(gx - g_prev_);
    if (static_cast<int>(dF_.size()) > m_) {
      dF_.pop_front();
      dG_.pop_front();
    }
  }
  f_prev_ = f;
  g_prev_ = gx;
  if (dF_.empty()) return gx;

  const int k = static_cast<int>(dF_.size());
  Mat F(f.size(), k), G(f.size(), k);
  for (int j = 0; j < k; ++j) {
    F.col(j) = dF_[j];
    G.col(j) = dG_[j];
  }
  Eigen::ColPivHouseholderQR<Mat> qr(F);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) {
    fallback_ = true;
    return gx;
  }
  const Vec gamma = qr.solve(f);
  return gx - G * gamma;
}

void AndersonAccelerator::reset() {
  f_prev_.resize(0);
  g_prev_.resize(0);
  dF_.clear();
  dG_.clear();
  fallback_ = false;
}

double IterationTrace::mean_inner() const {
  return rows.empty() ? 0.0 : static_cast<double>(total_inner()) / rows.size();
}

int IterationTrace::total_inner() const {
  int s = 0;
  for (const auto& r : rows) s += r.inner_iters;
  return s;
}

double IterationTrace::mean_fixup_fraction() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.fixup_fraction;
  return s / rows.size();
}

void IterationTrace::write_csv(std::ostream& os) const {
  os << "outer,residual,inner_iters,fixup_fraction\n";
  for (const auto& r : rows)
    os << r.outer << ',' << r.residual << ',' << r.inner_iters
       << (r.inner_converged ? "" : "*") << ',' << r.fixup_fraction << '\n';
}

VefSpaces VefSpaces::make(const Mesh& mesh, VefKind kind, int p) {
  if (p < 0) throw ArgumentError("VEF degree must be nonnegative");
  VefSpaces s;
  s.Y = std::make_unique<FeSpace>(FeSpace::Y(mesh, p, ScalarFamily::GaussLegendre));
  switch (kind) {
    case VefKind::H1: s.V = std::make_unique<FeSpace>(FeSpace::W(mesh, p + 1)); break;
    case VefKind::RT: s.V = std::make_unique<FeSpace>(FeSpace::RT(mesh, p)); break;
    case VefKind::HRT:
      s.V = std::make_unique<FeSpace>(FeSpace::BrokenRT(mesh, p));
      s.L = std::make_unique<FeSpace>(FeSpace::Lambda(mesh, p));
      break;
  }
  return s;
}

Materials materials_from(const TransportProblem& prob) {
  Materials m;
  m.sigma_t = prob.sigma_t;
  m.sigma_a.resize(prob.sigma_t.size());
  for (size_t e = 0; e < prob.sigma_t.size(); ++e) m.sigma_a[e] = prob.sigma_a(static_cast<int>(e));
  return m;
}

VefSources sources_from(const TransportProblem& prob, const AngularQuadrature& quad) {
  VefSources s;
  double wsum = 0.0;
  for (double w : quad.weights) wsum += w;
  if (prob.source) {
    s.Q0 = [&prob, &quad, wsum](int e, const Vec2& x) {
      double v = prob.q(e) * wsum;
      for (int d = 0; d < quad.size(); ++d) v += quad.weights[d] * prob.source(e, x, quad.dirs[d]);
      return v;
    };
    s.Q1 = [&prob, &quad](int e, const Vec2& x) {
      Vec2 v = Vec2::Zero();
      for (int d = 0; d < quad.size(); ++d)
        v += quad.weights[d] * prob.source(e, x, quad.dirs[d]) *
             Vec2(quad.dirs[d][0], quad.dirs[d][1]);
      return v;
    };
  } else if (!prob.q_iso.empty()) {
    s.Q0 = [&prob, wsum](int e, const Vec2&) { return prob.q(e) * wsum; };
  }
  if (prob.inflow) {
    s.Jin = [&prob, &quad](int f, const Vec2& x, const Vec2& n) {
      double v = 0.0;
      for (int d = 0; d < quad.size(); ++d) {
        const double on = quad.dirs[d][0] * n[0] + quad.dirs[d][1] * n[1];
        if (on < 0.0) v += quad.weights[d] * on * prob.inflow(f, x, quad.dirs[d]);
      }
      return v;
    };
  }
  return s;
}

MixedSolution solve_vef(VefKind kind, const VefSpaces& sp, const Materials& mat,
                        const VefData& vef, const VefSources& src, const SolverConfig& cfg,
                        const MixedSolution* prev) {
  if (kind == VefKind::HRT) {
    const HybridSystem hs = assemble_hybrid_system(*sp.Y, *sp.V, *sp.L, mat, vef, src);
    return solve_hybrid(hs, cfg, prev ? &prev->lambda : nullptr);
  }
  const VefBlockSystem sys = assemble_vef_system(kind, *sp.Y, *sp.V, mat, vef, src);
  return solve_mixed(sys, cfg, prev);
}

VefRunResult run_vef_fixed_point(const Mesh& mesh, const TransportProblem& prob,
                                 const AngularQuadrature& quad, int p, const OuterConfig& cfg) {
  prob.validate(mesh);
  VefRunResult res;
  res.spaces = VefSpaces::make(mesh, cfg.kind, p);
  const int pt = cfg.psi_degree >= 0 ? cfg.psi_degree : p;
  res.psi_space = std::make_unique<FeSpace>(FeSpace::Y(mesh, pt, ScalarFamily::Bernstein));
  QuadLayout layout = cfg.layout;
  if (layout.nq_vol <= 0 || layout.nq_face <= 0) layout = default_layout(std::max(p, pt), mesh.order());

  TransportSolver::Options topt;
  topt.fixup = cfg.fixup;
  const TransportSolver ts(*res.psi_space, quad, prob, topt);
  const Materials mat = materials_from(ts.problem());
  const VefSources src = sources_from(ts.problem(), quad);

  const FeSpace& Y = *res.spaces.Y;
  GridFunction phi(Y);
  AngularFluxSet prev;
  prev.space = res.psi_space.get();
  prev.psi = Mat::Constant(res.psi_space->ndofs(), quad.size(), cfg.psi0);
  if (cfg.psi0 != 0.0) {
    double wsum = 0.0;
    for (double w : quad.weights) wsum += w;
    phi.coef.setConstant(wsum * cfg.psi0);  // nodal basis: constant coefficients give a constant
  }

  AndersonAccelerator aa(cfg.anderson_m);
  MixedSolution last;
  bool have_last = false;
  for (int k = 1; k <= cfg.max_outers; ++k) {
    SweepStats stats;
    const Vec scat = ts.scattering_source(phi);
    AngularFluxSet psi = ts.sweep(scat, &prev, &stats);
    const VefData vef = compute_vef_data(psi, quad, layout);
    MixedSolution sol = solve_vef(cfg.kind, res.spaces, mat, vef, src, cfg.inner,
                                  (cfg.warm_start && have_last) ? &last : nullptr);

    OuterRecord rec;
    rec.outer = k;
    rec.residual = (sol.phi.coef - phi.coef).lpNorm<Eigen::Infinity>();
    rec.inner_iters = sol.stats.iterations;
    rec.inner_converged = sol.stats.converged;
    rec.fixup_fraction = stats.fixup_fraction();
    res.trace.rows.push_back(rec);

    phi.coef = aa.update(phi.coef, sol.phi.coef);
    prev = std::move(psi);
    last = std::move(sol);
    have_last = true;
    if (rec.residual <= cfg.tol) {
      res.trace.converged = true;
      break;
    }
  }
  res.phi = last.phi;
  res.phi.coef = phi.coef;
  res.J = last.J;
  res.lambda = last.lambda;
  res.psi = std::move(prev);
  return res;
}

}  // namespace vef
