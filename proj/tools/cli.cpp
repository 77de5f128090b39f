#include "cli.hpp"

#include "third_party/CLI11.hpp"
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "vef/crooked_pipe.hpp"
#include "vef/error.hpp"
#include "vef/mms.hpp"
#include "vef/studies.hpp"

#ifndef VEF_VERSION
#define VEF_VERSION "0.1.0"
#endif

namespace vef::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad flag values detected after CLI11 parsing. The message starts with the flag name.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Run finished but did not converge; outputs are still written.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

int to_int(const std::string& s, const std::string& what) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ArgumentError("bad integer '" + s + "' in " + what);
  return v;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ArgumentError("bad number '" + s + "' in " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<VefKind> parse_kinds(const std::string& s) {
  if (s == "all") return {VefKind::H1, VefKind::RT, VefKind::HRT};
  std::vector<VefKind> out;
  for (const auto& k : split(s, ',')) {
    try {
      out.push_back(parse_vef_kind(k));
    } catch (const Error&) {
      throw UsageError("--kind: expected h1, rt, hrt, a comma list of these, or all; got '" + s +
                       "'");
    }
  }
  return out;
}

// Flags whose values need list parsing report errors under their own name.
template <class F>
auto flag_value(const std::string& flag, F&& parse) {
  try {
    return parse();
  } catch (const ArgumentError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

void check_degrees(const std::vector<int>& ps, const std::vector<VefKind>& kinds) {
  for (int p : ps) {
    if (p < 0 || p > 6) throw UsageError("--p: degree " + std::to_string(p) + " outside 0..6");
    for (VefKind k : kinds)
      if (k == VefKind::H1 && p == 0)
        throw UsageError("--p: the h1 kind needs p >= 1 (W1 x Y0 is not inf-sup stable)");
  }
}

struct Output {
  fs::path dir;

  std::ofstream open(const std::string& name) const {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot write " + (dir / name).string());
    return os;
  }

  void manifest(const std::string& study, json body) const {
    body["study"] = study;
    body["version"] = version_string();
    open(study + "_manifest.json") << body.dump(2) << '\n';
  }
};

void check_sn(int sn) {
  flag_value("--sn", [&] { return level_symmetric(sn).size(); });
}

void set_threads(int threads) {
  if (threads > 0) ::setenv("VEF_THREADS", std::to_string(threads).c_str(), 1);
}

SolverConfig::HybridPrec parse_hybrid_prec(const std::string& s) {
  if (s == "direct") return SolverConfig::HybridPrec::Direct;
  if (s == "gs") return SolverConfig::HybridPrec::GaussSeidel;
  throw UsageError("--hybrid-prec: expected direct or gs, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Subcommands

struct MmsArgs {
  std::string mode = "diffusion", ps = "1..3", kinds = "all", sizes;
  int tg_steps = 300;
};

int cmd_mms(const MmsArgs& a, const Output& out, std::ostream& log) {
  MmsStudyConfig cfg;
  cfg.mode = flag_value("--mode", [&] { return parse_mms_mode(a.mode); });
  cfg.ps = flag_value("--p", [&] { return parse_int_list(a.ps); });
  cfg.kinds = parse_kinds(a.kinds);
  check_degrees(cfg.ps, cfg.kinds);
  if (!a.sizes.empty()) {
    const auto n = flag_value("--sizes", [&] { return parse_int_list(a.sizes); });
    if (n.size() < 2) throw UsageError("--sizes: at least two mesh sizes are needed for a fit");
    for (int v : n)
      if (v < 1) throw UsageError("--sizes: mesh sizes must be positive");
    cfg.sizes.assign(cfg.ps.size(), n);
  }
  cfg.tg_steps = a.tg_steps;

  const MmsStudyResult res = run_mms_study(cfg);
  const std::string stem = "mms_" + to_string(cfg.mode);
  for (int p : cfg.ps) {
    auto os = out.open(stem + "_p" + std::to_string(p) + ".csv");
    os << "kind,p,n,h,err_phi,err_proj,err_J\n";
    for (const auto& r : res.rows)
      if (r.p == p)
        os << to_string(r.kind) << ',' << r.p << ',' << r.n << ',' << fmt(r.h) << ','
           << fmt(r.err_phi) << ',' << fmt(r.err_proj) << ',' << fmt(r.err_J) << '\n';
  }
  {
    auto os = out.open(stem + "_orders.csv");
    os << "kind,p,order_phi,order_proj,order_J\n";
    for (const auto& f : res.fits) {
      os << to_string(f.kind) << ',' << f.p << ',' << fmt(f.phi.order) << ','
         << fmt(f.proj.order) << ',' << fmt(f.J.order) << '\n';
      log << to_string(f.kind) << " p=" << f.p << "  phi " << f.phi.order << "  proj "
          << f.proj.order << "  J " << f.J.order << '\n';
    }
  }
  if (!res.rt_hrt_gaps.empty()) {
    auto os = out.open(stem + "_rt_hrt_gap.csv");
    os << "p,n,gap_phi,gap_J\n";
    for (const auto& g : res.rt_hrt_gaps)
      os << g.p << ',' << g.n << ',' << fmt(g.phi) << ',' << fmt(g.J) << '\n';
  }
  out.manifest(stem, {{"mode", to_string(cfg.mode)},
                      {"p", cfg.ps},
                      {"kinds", a.kinds},
                      {"sizes", a.sizes},
                      {"mesh", "tg:N"},
                      {"tg_steps", cfg.tg_steps}});
  return kOk;
}

struct DiffusionLimitArgs {
  std::string mesh = "cart:8x8", eps = "1e-1,1e-2,1e-3,1e-4", kinds = "all";
  int p = 2, sn = 4, max_outers = 200, lineout_points = 81;
  double tol = 1e-6, lineout_y = 0.5;
};

int cmd_diffusion_limit(const DiffusionLimitArgs& a, const Output& out, std::ostream& log) {
  DiffusionLimitConfig cfg;
  cfg.p = a.p;
  cfg.sn = a.sn;
  cfg.kinds = parse_kinds(a.kinds);
  check_degrees({a.p}, cfg.kinds);
  check_sn(a.sn);
  cfg.eps = flag_value("--eps", [&] { return parse_double_list(a.eps); });
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw UsageError("--eps: values must be positive");
  cfg.outer.tol = a.tol;
  cfg.outer.max_outers = a.max_outers;
  cfg.lineout_y = a.lineout_y;
  cfg.lineout_points = a.lineout_points;
  const Mesh mesh = flag_value("--mesh", [&] { return parse_mesh_spec(a.mesh); });

  const auto rows = run_diffusion_limit_study(mesh, cfg);
  bool all_converged = true;
  {
    auto os = out.open("diffusion_limit.csv");
    os << "kind,eps,outers,converged,peak\n";
    for (const auto& r : rows) {
      os << to_string(r.kind) << ',' << fmt(r.eps) << ',' << r.outers << ',' << r.converged
         << ',' << fmt(r.peak) << '\n';
      log << to_string(r.kind) << " eps=" << r.eps << " outers " << r.outers
          << (r.converged ? "" : " (not converged)") << '\n';
      all_converged = all_converged && r.converged;
    }
  }
  {
    auto os = out.open("diffusion_limit_lineout.csv");
    os << "kind,eps,x,phi\n";
    for (const auto& r : rows)
      for (const auto& pt : r.lineout)
        os << to_string(r.kind) << ',' << fmt(r.eps) << ',' << fmt(pt.x) << ',' << fmt(pt.value)
           << '\n';
  }
  out.manifest("diffusion_limit", {{"mesh", a.mesh},
                                   {"p", a.p},
                                   {"sn", a.sn},
                                   {"eps", cfg.eps},
                                   {"kinds", a.kinds},
                                   {"tol", a.tol},
                                   {"max_outers", a.max_outers}});
  if (!all_converged) throw SolverFailure("some outer iterations did not converge");
  return kOk;
}

struct DistortionArgs {
  std::string alphas = "0,0.025,0.05,0.06,0.07,0.08", ps = "1..3", kinds = "all";
  int n = 16, mesh_order = 3, sn = 4, maxit = 250;
  double eps = 0.1, tol = 1e-6;
};

int cmd_distortion(const DistortionArgs& a, const Output& out, std::ostream& log) {
  DistortionConfig cfg;
  cfg.n = a.n;
  cfg.mesh_order = a.mesh_order;
  cfg.alphas = flag_value("--alpha", [&] { return parse_double_list(a.alphas); });
  cfg.ps = flag_value("--p", [&] { return parse_int_list(a.ps); });
  cfg.kinds = parse_kinds(a.kinds);
  check_degrees(cfg.ps, cfg.kinds);
  check_sn(a.sn);
  cfg.eps = a.eps;
  cfg.sn = a.sn;
  cfg.tol = a.tol;
  cfg.maxit = a.maxit;

  const auto rows = run_distortion_study(cfg);
  auto os = out.open("distortion.csv");
  // "--" marks runs that hit the cap, as in the iteration tables.
  os << "p,alpha,kind,iterations,note\n";
  for (const auto& r : rows) {
    os << r.p << ',' << fmt(r.alpha) << ',' << to_string(r.kind) << ','
       << (r.converged ? std::to_string(r.iterations) : std::string("--")) << ','
       << '"' << r.note << '"' << '\n';
    log << "p=" << r.p << " alpha=" << r.alpha << ' ' << to_string(r.kind) << ' '
        << (r.converged ? std::to_string(r.iterations) : std::string("--")) << '\n';
  }
  out.manifest("distortion", {{"n", a.n},
                              {"mesh_order", a.mesh_order},
                              {"alpha", cfg.alphas},
                              {"p", cfg.ps},
                              {"kinds", a.kinds},
                              {"eps", a.eps},
                              {"sn", a.sn},
                              {"tol", a.tol},
                              {"maxit", a.maxit}});
  return kOk;
}

struct EigenArgs {
  std::string kinds = "h1,rt";
  int n = 16, p = 1, nev = 5;
  double threshold = 0.9;
  bool dump_modes = false;
};

int cmd_eigen(const EigenArgs& a, const Output& out, std::ostream& log) {
  EigenStudyConfig cfg;
  cfg.n = a.n;
  cfg.p = a.p;
  cfg.nev = a.nev;
  cfg.kinds = parse_kinds(a.kinds);
  for (VefKind k : cfg.kinds)
    if (k == VefKind::HRT) throw UsageError("--kind: the eigen study supports h1 and rt only");
  check_degrees({a.p}, cfg.kinds);
  cfg.checkerboard_threshold = a.threshold;

  const auto res = run_spurious_eigen_study(cfg);
  auto os = out.open("eigen.csv");
  os << "kind,index,eigenvalue,over_pi2,sign_alternation,checkerboard\n";
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (const auto& r : res)
    for (size_t i = 0; i < r.modes.size(); ++i) {
      const auto& m = r.modes[i];
      os << to_string(r.kind) << ',' << i << ',' << fmt(m.value) << ',' << fmt(m.value / pi2)
         << ',' << fmt(m.sign_alternation) << ',' << m.checkerboard << '\n';
      log << to_string(r.kind) << " lambda/pi^2 = " << m.value / pi2
          << (m.checkerboard ? "  checkerboard" : "") << '\n';
    }
  if (a.dump_modes) {
    auto ms = out.open("eigen_subcell_means.csv");
    ms << "kind,index,elem,subcell,mean\n";
    for (const auto& r : res)
      for (size_t i = 0; i < r.modes.size(); ++i) {
        const Mat& sm = r.modes[i].subcell_means;
        for (Eigen::Index e = 0; e < sm.rows(); ++e)
          for (Eigen::Index c = 0; c < sm.cols(); ++c)
            ms << to_string(r.kind) << ',' << i << ',' << e << ',' << c << ','
               << fmt(sm(e, c)) << '\n';
      }
  }
  out.manifest("eigen", {{"n", a.n},
                         {"p", a.p},
                         {"nev", a.nev},
                         {"kinds", a.kinds},
                         {"threshold", a.threshold}});
  return kOk;
}

int cmd_nullspace(const Output& out, std::ostream& log) {
  const auto rows = run_nullspace_check();
  auto os = out.open("nullspace.csv");
  os << "pair,rows,cols,rank,dim_null_D,dim_null_Dt,dim_null_div,reference_residual\n";
  for (const auto& r : rows) {
    os << r.pair << ',' << r.rows << ',' << r.cols << ',' << r.rank << ',' << r.dim_null_D
       << ',' << r.dim_null_Dt << ',' << r.dim_null_div << ',' << fmt(r.reference_residual)
       << '\n';
    log << r.pair << ": rank " << r.rank << ", dim N(D) " << r.dim_null_D << ", dim N(D^T) "
        << r.dim_null_Dt << '\n';
  }
  out.manifest("nullspace", {{"mesh", "cart:1x1"}});
  return kOk;
}

struct CrookedPipeArgs {
  std::string kinds = "all", hybrid_prec = "direct";
  int refinement = 0, p = 1, sn = 12, inner_maxit = 100, anderson = 2;
  double tol = 1e-6, inner_tol = 1e-8;
};

int cmd_crooked_pipe(const CrookedPipeArgs& a, const Output& out, std::ostream& log) {
  const auto kinds = parse_kinds(a.kinds);
  check_degrees({a.p}, kinds);
  check_sn(a.sn);
  CrookedPipeConfig base;
  base.refinement = a.refinement;
  base.p = a.p;
  base.sn = a.sn;
  base.outer_tol = a.tol;
  base.inner_tol = a.inner_tol;
  base.inner_maxit = a.inner_maxit;
  base.anderson_m = a.anderson;
  base.hybrid_prec = parse_hybrid_prec(a.hybrid_prec);

  auto summary = out.open("crooked_pipe.csv");
  summary << "kind,elements,outers,converged,mean_inner,max_inner,fixup_fraction,exit_phi\n";
  bool all_converged = true;
  for (VefKind k : kinds) {
    CrookedPipeConfig cfg = base;
    cfg.kind = k;
    const CrookedPipeResult r = run_crooked_pipe(cfg);
    summary << to_string(k) << ',' << r.elements << ',' << r.trace.outers() << ','
            << r.trace.converged << ',' << fmt(r.trace.mean_inner()) << ',' << fmt(r.max_inner)
            << ',' << fmt(r.trace.mean_fixup_fraction()) << ',' << fmt(r.pipe_exit_phi) << '\n';
    auto tr = out.open("crooked_pipe_trace_" + to_string(k) + ".csv");
    r.trace.write_csv(tr);
    log << to_string(k) << ": " << r.elements << " elements, " << r.trace.outers()
        << " outers, mean inner " << r.trace.mean_inner() << ", fixup "
        << r.trace.mean_fixup_fraction() << '\n';
    all_converged = all_converged && r.trace.converged;
  }
  out.manifest("crooked_pipe", {{"mesh", "crooked-pipe:" + std::to_string(a.refinement)},
                                {"p", a.p},
                                {"kinds", a.kinds},
                                {"sn", a.sn},
                                {"tol", a.tol},
                                {"inner_tol", a.inner_tol},
                                {"inner_maxit", a.inner_maxit},
                                {"anderson", a.anderson},
                                {"hybrid_prec", a.hybrid_prec}});
  if (!all_converged) throw SolverFailure("outer iteration did not converge");
  return kOk;
}

struct SolveArgs {
  std::string mesh = "cart:8x8", kind = "rt", method = "krylov", smoother = "jacobi",
              schur = "direct", hybrid_prec = "direct", dump_phi;
  int p = 2, sn = 4, max_outers = 200, anderson = 0, maxit = 250, sweeps = 1;
  double eps = 0.1, tol = 1e-6, inner_tol = 1e-8;
};

int cmd_solve(const SolveArgs& a, const Output& out, std::ostream& log) {
  const auto kinds = parse_kinds(a.kind);
  if (kinds.size() != 1) throw UsageError("--kind: solve takes exactly one of h1, rt, hrt");
  check_degrees({a.p}, kinds);
  if (!(a.eps > 0.0)) throw UsageError("--eps: must be positive");

  OuterConfig cfg;
  cfg.kind = kinds[0];
  cfg.tol = a.tol;
  cfg.max_outers = a.max_outers;
  cfg.anderson_m = a.anderson;
  SolverConfig& in = cfg.inner;
  if (a.method == "direct") in.method = SolverConfig::Method::Direct;
  else if (a.method == "krylov") in.method = SolverConfig::Method::Krylov;
  else throw UsageError("--method: expected direct or krylov");
  if (a.smoother == "jacobi") in.smoother = SolverConfig::Smoother::Jacobi;
  else if (a.smoother == "gs") in.smoother = SolverConfig::Smoother::GaussSeidel;
  else throw UsageError("--smoother: expected jacobi or gs");
  if (a.schur == "direct") in.schur = SolverConfig::SchurSolve::Direct;
  else if (a.schur == "gs") in.schur = SolverConfig::SchurSolve::GaussSeidel;
  else throw UsageError("--schur: expected direct or gs");
  in.hybrid_prec = parse_hybrid_prec(a.hybrid_prec);
  in.smoother_sweeps = in.schur_sweeps = in.hybrid_sweeps = a.sweeps;
  in.tol = a.inner_tol;
  in.maxit = a.maxit;

  const Mesh mesh = flag_value("--mesh", [&] { return parse_mesh_spec(a.mesh); });
  const TransportProblem prob = thick_diffusion_problem(mesh, a.eps);
  check_sn(a.sn);
  const AngularQuadrature quad = level_symmetric(a.sn);
  const VefRunResult res = run_vef_fixed_point(mesh, prob, quad, a.p, cfg);

  auto os = out.open("solve_trace.csv");
  res.trace.write_csv(os);
  if (!a.dump_phi.empty()) {
    fs::create_directories(out.dir);
    std::ofstream ps(out.dir / a.dump_phi);
    if (!ps) throw Error("cannot write " + (out.dir / a.dump_phi).string());
    save_grid_function(res.phi, ps);
  }
  out.manifest("solve", {{"mesh", a.mesh},
                         {"elements", mesh.num_elements()},
                         {"p", a.p},
                         {"kind", a.kind},
                         {"sn", a.sn},
                         {"eps", a.eps},
                         {"tol", a.tol},
                         {"inner_tol", a.inner_tol},
                         {"method", a.method},
                         {"smoother", a.smoother},
                         {"schur", a.schur},
                         {"hybrid_prec", a.hybrid_prec},
                         {"anderson", a.anderson},
                         {"outers", res.trace.outers()},
                         {"converged", res.trace.converged}});
  log << to_string(cfg.kind) << ": " << res.trace.outers() << " outers, mean inner "
      << res.trace.mean_inner() << (res.trace.converged ? "" : " (not converged)") << '\n';
  if (!res.trace.converged) throw SolverFailure("outer iteration did not converge");
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string version_string() { return std::string("vef ") + VEF_VERSION; }

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(item, "'" + s + "'"));
      continue;
    }
    const int lo = to_int(item.substr(0, dots), "'" + s + "'");
    const int hi = to_int(item.substr(dots + 2), "'" + s + "'");
    if (hi < lo) throw ArgumentError("empty range '" + item + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ArgumentError("empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item, "'" + s + "'"));
  if (out.empty()) throw ArgumentError("empty list");
  return out;
}

Mesh parse_mesh_spec(const std::string& spec) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts.empty() ? spec : parts[0];
  auto order_at = [&](size_t i, int def) {
    const int o = parts.size() > i ? to_int(parts[i], "mesh order") : def;
    if (o < 1 || o > 8) throw ArgumentError("mesh order must be in 1..8");
    return o;
  };
  if (kind == "cart" && (parts.size() == 2 || parts.size() == 3)) {
    const auto dims = split(parts[1], 'x');
    if (dims.size() != 2) throw ArgumentError("expected cart:NXxNY, got '" + spec + "'");
    const int nx = to_int(dims[0], "mesh size"), ny = to_int(dims[1], "mesh size");
    if (nx < 1 || ny < 1) throw ArgumentError("mesh sizes must be positive");
    return build_cartesian_mesh(nx, ny, 0.0, 1.0, 0.0, 1.0, order_at(2, 1));
  }
  if (kind == "tg" && parts.size() == 2) {
    const int n = to_int(parts[1], "mesh size");
    if (n < 1) throw ArgumentError("mesh size must be positive");
    return mms_mesh(n);
  }
  if (kind == "sine" && (parts.size() == 3 || parts.size() == 4)) {
    const int n = to_int(parts[1], "mesh size");
    if (n < 1) throw ArgumentError("mesh size must be positive");
    const double alpha = to_double(parts[2], "sine amplitude");
    Mesh m = apply_sine_distortion(
        build_cartesian_mesh(n, n, 0.0, 1.0, 0.0, 1.0, order_at(3, 3)), alpha);
    m.check_tangling();
    return m;
  }
  if (fs::exists(spec)) return read_mesh_file(spec);
  throw ArgumentError("'" + spec +
                      "' is neither a generator (cart:NXxNY, tg:N, sine:N:alpha) nor a file");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-order VEF transport acceleration toolkit", "vef"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  std::string out_dir = ".";
  int threads = 0;
  app.add_option("--out,-o", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (default: VEF_THREADS or 1)")
      ->check(CLI::NonNegativeNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);
  };

  MmsArgs mms;
  auto* s_mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
  s_mms->add_option("--mode", mms.mode, "diffusion | transport_p | transport_p1")
      ->capture_default_str();
  s_mms->add_option("--p", mms.ps, "Degrees, e.g. 2, 1..3 or 1,3")->capture_default_str();
  s_mms->add_option("--kind", mms.kinds, "h1 | rt | hrt | list | all")->capture_default_str();
  s_mms->add_option("--sizes", mms.sizes, "Mesh sizes n (n x n), default per degree");
  s_mms->add_option("--tg-steps", mms.tg_steps, "Taylor-Green advection steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(s_mms);

  DiffusionLimitArgs tdl;
  auto* s_tdl = app.add_subcommand("diffusion-limit", "Thick diffusion limit study");
  s_tdl->add_option("--mesh", tdl.mesh, "Mesh spec")->capture_default_str();
  s_tdl->add_option("--p", tdl.p, "VEF degree")->capture_default_str();
  s_tdl->add_option("--sn", tdl.sn, "Level-symmetric order")->capture_default_str();
  s_tdl->add_option("--eps", tdl.eps, "Comma list of scaling parameters")->capture_default_str();
  s_tdl->add_option("--kind", tdl.kinds, "h1 | rt | hrt | list | all")->capture_default_str();
  s_tdl->add_option("--tol", tdl.tol, "Outer tolerance")->check(CLI::PositiveNumber);
  s_tdl->add_option("--max-outers", tdl.max_outers)->check(CLI::PositiveNumber);
  s_tdl->add_option("--lineout-y", tdl.lineout_y)->capture_default_str();
  s_tdl->add_option("--lineout-points", tdl.lineout_points)->check(CLI::Range(2, 100000));
  add_common(s_tdl);

  DistortionArgs dist;
  auto* s_dist = app.add_subcommand("distortion", "Krylov iterations on sine-distorted meshes");
  s_dist->add_option("--n", dist.n, "Elements per side")->check(CLI::PositiveNumber);
  s_dist->add_option("--mesh-order", dist.mesh_order)->check(CLI::Range(1, 8));
  s_dist->add_option("--alpha", dist.alphas, "Comma list of amplitudes")->capture_default_str();
  s_dist->add_option("--p", dist.ps, "Degrees")->capture_default_str();
  s_dist->add_option("--kind", dist.kinds)->capture_default_str();
  s_dist->add_option("--eps", dist.eps)->check(CLI::PositiveNumber);
  s_dist->add_option("--sn", dist.sn);
  s_dist->add_option("--tol", dist.tol)->check(CLI::PositiveNumber);
  s_dist->add_option("--maxit", dist.maxit)->check(CLI::PositiveNumber);
  add_common(s_dist);

  EigenArgs eig;
  auto* s_eig = app.add_subcommand("eigen", "Smallest eigenpairs of the lumped Schur complement");
  s_eig->add_option("--n", eig.n)->check(CLI::Range(2, 512))->capture_default_str();
  s_eig->add_option("--p", eig.p)->capture_default_str();
  s_eig->add_option("--nev", eig.nev)->check(CLI::Range(1, 64))->capture_default_str();
  s_eig->add_option("--kind", eig.kinds, "h1 | rt | h1,rt")->capture_default_str();
  s_eig->add_option("--threshold", eig.threshold, "Checkerboard sign-alternation threshold")
      ->check(CLI::Range(0.0, 1.0));
  s_eig->add_flag("--dump-modes", eig.dump_modes, "Write sub-cell means of every mode");
  add_common(s_eig);

  auto* s_null = app.add_subcommand("nullspace", "Single-element rank study of D");
  add_common(s_null);

  CrookedPipeArgs cp;
  auto* s_cp = app.add_subcommand("crooked-pipe", "Two-material crooked pipe problem");
  s_cp->add_option("--refinement", cp.refinement, "0 gives 112 elements")
      ->check(CLI::Range(0, 6));
  s_cp->add_option("--p", cp.p)->capture_default_str();
  s_cp->add_option("--kind", cp.kinds)->capture_default_str();
  s_cp->add_option("--sn", cp.sn)->capture_default_str();
  s_cp->add_option("--tol", cp.tol)->check(CLI::PositiveNumber);
  s_cp->add_option("--inner-tol", cp.inner_tol)->check(CLI::PositiveNumber);
  s_cp->add_option("--inner-maxit", cp.inner_maxit)->check(CLI::PositiveNumber);
  s_cp->add_option("--anderson", cp.anderson)->check(CLI::Range(0, 50));
  s_cp->add_option("--hybrid-prec", cp.hybrid_prec, "direct | gs")->capture_default_str();
  add_common(s_cp);

  SolveArgs sv;
  auto* s_solve = app.add_subcommand("solve", "Thick-diffusion problem on one mesh");
  s_solve->add_option("--mesh", sv.mesh, "Mesh spec")->capture_default_str();
  s_solve->add_option("--p", sv.p)->capture_default_str();
  s_solve->add_option("--kind", sv.kind, "h1 | rt | hrt")->capture_default_str();
  s_solve->add_option("--eps", sv.eps)->capture_default_str();
  s_solve->add_option("--sn", sv.sn)->capture_default_str();
  s_solve->add_option("--tol", sv.tol, "Outer tolerance")->check(CLI::PositiveNumber);
  s_solve->add_option("--max-outers", sv.max_outers)->check(CLI::PositiveNumber);
  s_solve->add_option("--anderson", sv.anderson)->check(CLI::Range(0, 50));
  s_solve->add_option("--method", sv.method, "direct | krylov")->capture_default_str();
  s_solve->add_option("--smoother", sv.smoother, "jacobi | gs")->capture_default_str();
  s_solve->add_option("--schur", sv.schur, "direct | gs")->capture_default_str();
  s_solve->add_option("--hybrid-prec", sv.hybrid_prec, "direct | gs")->capture_default_str();
  s_solve->add_option("--sweeps", sv.sweeps, "Smoother sweeps")->check(CLI::PositiveNumber);
  s_solve->add_option("--inner-tol", sv.inner_tol)->check(CLI::PositiveNumber);
  s_solve->add_option("--maxit", sv.maxit, "Krylov iteration cap")->check(CLI::PositiveNumber);
  s_solve->add_option("--dump-phi", sv.dump_phi, "File (under --out) for the scalar flux");
  add_common(s_solve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "vef: " << e.what() << '\n';
    return kUsage;
  }

  set_threads(threads);
  const Output o{out_dir};
  try {
    if (*s_mms) return cmd_mms(mms, o, out);
    if (*s_tdl) return cmd_diffusion_limit(tdl, o, out);
    if (*s_dist) return cmd_distortion(dist, o, out);
    if (*s_eig) return cmd_eigen(eig, o, out);
    if (*s_null) return cmd_nullspace(o, out);
    if (*s_cp) return cmd_crooked_pipe(cp, o, out);
    if (*s_solve) return cmd_solve(sv, o, out);
  } catch (const UsageError& e) {
    err << "vef: " << e.what() << '\n';
    return kUsage;
  } catch (const SolverFailure& e) {
    err << "vef: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "vef: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kUsage;
}

}  // namespace vef::cli
