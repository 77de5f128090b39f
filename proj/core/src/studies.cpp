#include "vef/studies.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vef/error.hpp"

namespace vef {

std::optional<PointLocation> locate_point(const Mesh& mesh, const Vec2& x, double tol) {
  const auto& pts = mesh.points();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::max());
    Vec2 hi = -lo;
    for (int id : mesh.element_nodes(e)) {
      lo = lo.cwiseMin(pts[id]);
      hi = hi.cwiseMax(pts[id]);
    }
    // Curved edges can bulge past the control polygon a little.
    const Vec2 pad = 0.25 * (hi - lo) + Vec2::Constant(tol);
    if ((x.array() < (lo - pad).array()).any() || (x.array() > (hi + pad).array()).any()) continue;

    Vec2 ref(0.5, 0.5);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const ElementGeometry g = mesh.geometry_unchecked(e, ref);
      if (!(g.J > 0.0)) break;
      const Vec2 step = g.Finv * (g.x - x);
      ref -= step;
      ref = ref.cwiseMax(-0.5).cwiseMin(1.5);
      if (step.norm() < 1e-14) {
        ok = true;
        break;
      }
    }
    if (!ok) continue;
    if ((ref.array() >= -tol).all() && (ref.array() <= 1.0 + tol).all())
      return PointLocation{e, ref.cwiseMax(0.0).cwiseMin(1.0)};
  }
  return std::nullopt;
}

std::vector<LineoutPoint> sample_lineout_x(const GridFunction& phi, double y0, double x0,
                                           double x1, int npts) {
  if (npts < 2) throw ArgumentError("lineout needs at least two points");
  const Mesh& mesh = phi.space->mesh();
  std::vector<LineoutPoint> out;
  out.reserve(npts);
  for (int i = 0; i < npts; ++i) {
    const double x = x0 + (x1 - x0) * i / (npts - 1);
    const auto loc = locate_point(mesh, Vec2(x, y0), 1e-9);
    if (!loc) throw ArgumentError("lineout point (" + std::to_string(x) + ", " +
                                  std::to_string(y0) + ") is outside the mesh");
    out.push_back({x, eval_scalar(phi, loc->elem, loc->ref)});
  }
  return out;
}

TransportProblem thick_diffusion_problem(const Mesh& mesh, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("eps must lie in (0, 1]");
  const int ne = mesh.num_elements();
  TransportProblem prob;
  prob.sigma_t.assign(ne, 1.0 / eps);
  prob.sigma_s.assign(ne, 1.0 / eps - eps);
  prob.q_iso.assign(ne, eps);
  return prob;
}

std::vector<DiffusionLimitRow> run_diffusion_limit_study(const Mesh& mesh,
                                                         const DiffusionLimitConfig& cfg) {
  const AngularQuadrature quad = level_symmetric(cfg.sn);
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  for (const Vec2& x : mesh.points()) {
    xmin = std::min(xmin, x.x());
    xmax = std::max(xmax, x.x());
  }
  std::vector<DiffusionLimitRow> rows;
  for (double eps : cfg.eps) {
    const TransportProblem prob = thick_diffusion_problem(mesh, eps);
    for (VefKind kind : cfg.kinds) {
      OuterConfig oc = cfg.outer;
      oc.kind = kind;
      const VefRunResult res = run_vef_fixed_point(mesh, prob, quad, cfg.p, oc);
      DiffusionLimitRow row;
      row.kind = kind;
      row.eps = eps;
      row.outers = res.trace.outers();
      row.converged = res.trace.converged;
      row.lineout = sample_lineout_x(res.phi, cfg.lineout_y, xmin, xmax, cfg.lineout_points);
      for (const auto& pt : row.lineout) row.peak = std::max(row.peak, pt.value);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

SolverConfig distortion_solver(VefKind kind, double tol, int maxit) {
  SolverConfig c;
  c.method = SolverConfig::Method::Krylov;
  c.tol = tol;
  c.maxit = maxit;
  if (kind == VefKind::HRT) {
    c.hybrid_prec = SolverConfig::HybridPrec::GaussSeidel;
    c.hybrid_sweeps = 1;
  } else {
    c.smoother = SolverConfig::Smoother::Jacobi;
    c.smoother_sweeps = 1;
    c.schur = SolverConfig::SchurSolve::Direct;
  }
  return c;
}

std::vector<DistortionRow> run_distortion_study(const DistortionConfig& cfg) {
  const AngularQuadrature quad = level_symmetric(cfg.sn);
  const Mesh base = build_cartesian_mesh(cfg.n, cfg.n, 0.0, 1.0, 0.0, 1.0, cfg.mesh_order);
  std::vector<DistortionRow> rows;
  for (int p : cfg.ps) {
    for (double alpha : cfg.alphas) {
      std::optional<Mesh> mesh;
      std::string mesh_note;
      try {
        mesh.emplace(apply_sine_distortion(base, alpha));
        mesh->check_tangling();
      } catch (const GeometryError& e) {
        mesh.reset();
        mesh_note = std::string("tangled: ") + e.what();
      }
      for (VefKind kind : cfg.kinds) {
        DistortionRow row;
        row.p = p;
        row.alpha = alpha;
        row.kind = kind;
        if (!mesh) {
          row.note = mesh_note;
          rows.push_back(row);
          continue;
        }
        OuterConfig oc;
        oc.kind = kind;
        oc.max_outers = 1;
        oc.inner = distortion_solver(kind, cfg.tol, cfg.maxit);
        try {
          const VefRunResult res =
              run_vef_fixed_point(*mesh, thick_diffusion_problem(*mesh, cfg.eps), quad, p, oc);
          row.iterations = res.trace.rows.front().inner_iters;
          row.converged = res.trace.rows.front().inner_converged;
        } catch (const Error& e) {
          row.note = e.what();
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

Mat subcell_means(const GridFunction& u, int m) {
  if (m < 1) throw ArgumentError("sub-cell split must be positive");
  const Mesh& mesh = u.space->mesh();
  const QuadRule2D q = tensor_gauss(u.space->degree() + mesh.order() + 2);
  Mat out(mesh.num_elements(), m * m);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int b = 0; b < m; ++b) {
      for (int a = 0; a < m; ++a) {
        double s = 0.0, area = 0.0;
        for (int k = 0; k < q.size(); ++k) {
          const Vec2 ref((a + q.points[k].x()) / m, (b + q.points[k].y()) / m);
          const double wJ = q.weights[k] * mesh.geometry_unchecked(e, ref).J;
          s += wJ * eval_scalar(u, e, ref);
          area += wJ;
        }
        out(e, a + m * b) = s / area;
      }
    }
  }
  return out;
}

namespace {

// Sub-cell touching local edge `edge` at position t along the edge parameter.
int edge_subcell(int edge, int t, int m) {
  switch (edge) {
    case 0: return t;
    case 1: return (m - 1) + m * t;
    case 2: return t + m * (m - 1);
    default: return m * t;
  }
}

}  // namespace

double sign_alternation_fraction(const Mesh& mesh, const Mat& means, int m) {
  long n = 0, alt = 0;
  auto check = [&](double u, double v) {
    ++n;
    if (u * v < 0.0) ++alt;
  };
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) {
        if (a + 1 < m) check(means(e, a + m * b), means(e, a + 1 + m * b));
        if (b + 1 < m) check(means(e, a + m * b), means(e, a + m * (b + 1)));
      }
  for (const Face& f : mesh.faces()) {
    if (!f.interior()) continue;
    for (int t = 0; t < m; ++t) {
      const int t1 = f.flip ? m - 1 - t : t;
      check(means(f.elem[0], edge_subcell(f.edge[0], t, m)),
            means(f.elem[1], edge_subcell(f.edge[1], t1, m)));
    }
  }
  return n ? static_cast<double>(alt) / n : 0.0;
}

std::vector<EigenStudyResult> run_spurious_eigen_study(const EigenStudyConfig& cfg) {
  if (cfg.nev < 1) throw ArgumentError("nev must be positive");
  const Mesh mesh = build_cartesian_mesh(cfg.n, cfg.n, 0.0, 1.0, 0.0, 1.0, 1);
  const int ne = mesh.num_elements();
  const VefData vef = VefData::diffusion_mode(mesh, default_layout(cfg.p + 1, 1));
  const Materials diff{std::vector<double>(ne, 1.0 / 3.0), std::vector<double>(ne, 0.0)};
  const Materials unit{std::vector<double>(ne, 1.0), std::vector<double>(ne, 1.0)};

  std::vector<EigenStudyResult> out;
  for (VefKind kind : cfg.kinds) {
    if (kind == VefKind::HRT) throw ArgumentError("eigen study: the hybridized kind has no lumped Schur");
    const VefSpaces sp = VefSpaces::make(mesh, kind, cfg.p);
    const VefBlockSystem sys =
        assemble_vef_system(kind, *sp.Y, *sp.V, diff, vef, VefSources{}, false);
    const CsrMatrix S0 = build_lumped_schur(sys.Ma, sys.D, sys.G, lump_A(sys));
    const CsrMatrix St = S0.transpose();
    const CsrMatrix skew = S0 - St;
    EigenStudyResult r;
    r.kind = kind;
    r.asymmetry = skew.norm() / S0.norm();
    const CsrMatrix S = 0.5 * (S0 + St);
    const CsrMatrix M = assemble_Ma(*sp.Y, unit, vef);
    const auto pairs = generalized_eig_smallest(S, M, cfg.nev);
    for (const auto& ep : pairs) {
      EigenMode m;
      m.value = ep.value;
      // The H1 spurious mode oscillates inside each element with near-zero element
      // means, so signs are compared on a (p+1)² sub-cell split.
      const int split = cfg.p + 1;
      m.subcell_means = subcell_means(GridFunction(*sp.Y, ep.vector), split);
      m.sign_alternation = sign_alternation_fraction(mesh, m.subcell_means, split);
      m.checkerboard = m.sign_alternation > cfg.checkerboard_threshold;
      r.modes.push_back(std::move(m));
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

// Global-dof matrix of the single element, densified.
Mat dense(const CsrMatrix& A) { return Mat(A); }

int numerical_rank(const Mat& A) {
  if (A.size() == 0) return 0;
  const Eigen::JacobiSVD<Mat> svd(A);
  const Vec s = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, s.size() ? s[0] : 0.0);
  return static_cast<int>((s.array() > cut).count());
}

// Local shape values/divergences on a grid of interior points, mapped to global dofs.
void sample_vector_space(const FeSpace& V, int npts, Mat& vals, Mat& divs,
                         std::vector<Vec2>& xs) {
  const Mesh& mesh = V.mesh();
  const QuadRule2D q = tensor_gauss(npts);
  const auto d = V.dofs(0);
  const auto sg = V.signs(0);
  vals = Mat::Zero(2 * q.size(), V.ndofs());
  divs = Mat::Zero(q.size(), V.ndofs());
  xs.clear();
  VectorShapes sh;
  for (int k = 0; k < q.size(); ++k) {
    const ElementGeometry g = mesh.geometry(0, q.points[k]);
    xs.push_back(g.x);
    vector_shapes(V, g, q.points[k], false, sh);
    for (int i = 0; i < static_cast<int>(d.size()); ++i) {
      const double s = sg.empty() ? 1.0 : sg[i];
      vals(2 * k, d[i]) += s * sh.vals(i, 0);
      vals(2 * k + 1, d[i]) += s * sh.vals(i, 1);
      divs(k, d[i]) += s * sh.div[i];
    }
  }
}

NullspaceEntry null_entry(const std::string& name, const FeSpace& Y, const FeSpace& V,
                          const VefData& vef) {
  NullspaceEntry r;
  r.pair = name;
  const Mat D = dense(assemble_D(Y, V, vef));
  r.rows = static_cast<int>(D.rows());
  r.cols = static_cast<int>(D.cols());
  r.rank = numerical_rank(D);
  r.dim_null_D = r.cols - r.rank;
  r.dim_null_Dt = r.rows - r.rank;
  Mat vals, divs;
  std::vector<Vec2> xs;
  sample_vector_space(V, V.degree() + 3, vals, divs, xs);
  r.dim_null_div = r.cols - numerical_rank(divs);
  return r;
}

}  // namespace

std::vector<NullspaceEntry> run_nullspace_check() {
  const Mesh mesh = build_cartesian_mesh(1, 1, 0.0, 1.0, 0.0, 1.0, 1);
  const VefData vef = VefData::diffusion_mode(mesh, default_layout(2, 1));
  const FeSpace Y0 = FeSpace::Y(mesh, 0);
  const FeSpace Y1 = FeSpace::Y(mesh, 1);
  const FeSpace W1 = FeSpace::W(mesh, 1);
  const FeSpace RT0 = FeSpace::RT(mesh, 0);
  std::vector<NullspaceEntry> out;

  {
    NullspaceEntry r = null_entry("W1xY0", Y0, W1, vef);
    // Interpolate (x(y-1/2), 0) by least squares on sample values; it lies in W1 exactly.
    Mat vals, divs;
    std::vector<Vec2> xs;
    sample_vector_space(W1, 4, vals, divs, xs);
    Vec f(2 * xs.size());
    for (size_t k = 0; k < xs.size(); ++k) {
      f[2 * k] = xs[k].x() * (xs[k].y() - 0.5);
      f[2 * k + 1] = 0.0;
    }
    const Vec c = vals.colPivHouseholderQr().solve(f);
    const Mat D = dense(assemble_D(Y0, W1, vef));
    r.reference_residual = (D * c).norm() / c.norm() + (vals * c - f).norm();
    out.push_back(r);
  }
  {
    NullspaceEntry r = null_entry("W1xY1", Y1, W1, vef);
    const Mat D = dense(assemble_D(Y1, W1, vef));
    const Eigen::FullPivLU<Mat> lu(D.transpose());
    const Mat K = lu.kernel();  // columns span N(Dᵀ)
    if (r.dim_null_Dt == 0 || K.cols() == 0) {
      r.reference_residual = std::numeric_limits<double>::infinity();
    } else {
      // Best approximation of the reference function from N(Dᵀ), measured on samples.
      const QuadRule2D q = tensor_gauss(5);
      Mat B(q.size(), K.cols());
      Vec f(q.size());
      for (int k = 0; k < q.size(); ++k) {
        const Vec2 x = mesh.map(0, q.points[k]);
        f[k] = 0.25 - 0.5 * x.x() - 0.5 * x.y() + x.x() * x.y();
        for (int j = 0; j < K.cols(); ++j)
          B(k, j) = eval_scalar(GridFunction(Y1, K.col(j)), 0, q.points[k]);
      }
      const Vec a = B.colPivHouseholderQr().solve(f);
      r.reference_residual = (B * a - f).lpNorm<Eigen::Infinity>() / f.lpNorm<Eigen::Infinity>();
    }
    out.push_back(r);
  }
  {
    NullspaceEntry r = null_entry("RT0xY0", Y0, RT0, vef);
    const Mat D = dense(assemble_D(Y0, RT0, vef));
    const Eigen::FullPivLU<Mat> lu(D.transpose());
    r.reference_residual = r.dim_null_Dt == 0 ? 0.0 : (D.transpose() * lu.kernel()).norm();
    out.push_back(r);
  }
  return out;
}

}  // namespace vef
