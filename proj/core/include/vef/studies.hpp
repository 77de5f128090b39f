#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vef/fixed_point.hpp"

namespace vef {

// ---------------------------------------------------------------------------
// Point location and lineouts

/// Element and reference coordinates of a physical point, found by Newton inversion of
/// the element maps. Empty when no element contains x (within tol in reference space).
struct PointLocation {
  int elem = -1;
  Vec2 ref;
};
std::optional<PointLocation> locate_point(const Mesh& mesh, const Vec2& x, double tol = 1e-10);

struct LineoutPoint {
  double x = 0.0;
  double value = 0.0;
};
/// φ sampled at npts evenly spaced points of the horizontal line y = y0 between x0 and x1.
std::vector<LineoutPoint> sample_lineout_x(const GridFunction& phi, double y0, double x0,
                                           double x1, int npts);

// ---------------------------------------------------------------------------
// Thick diffusion limit

/// σ_t = 1/ε, σ_a = ε, isotropic source ε per steradian, vacuum boundaries.
TransportProblem thick_diffusion_problem(const Mesh& mesh, double eps);

struct DiffusionLimitConfig {
  int p = 2;
  int sn = 4;
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<VefKind> kinds{VefKind::H1, VefKind::RT, VefKind::HRT};
  OuterConfig outer{.inner = {.method = SolverConfig::Method::Direct}};
  double lineout_y = 0.5;
  int lineout_points = 81;
};

struct DiffusionLimitRow {
  VefKind kind = VefKind::RT;
  double eps = 0.0;
  int outers = 0;
  bool converged = false;
  double peak = 0.0;  ///< max of the lineout
  std::vector<LineoutPoint> lineout;
};

std::vector<DiffusionLimitRow> run_diffusion_limit_study(const Mesh& mesh,
                                                         const DiffusionLimitConfig& cfg);

// ---------------------------------------------------------------------------
// Krylov iterations on sine-distorted meshes

struct DistortionConfig {
  int n = 16;
  int mesh_order = 3;
  std::vector<double> alphas{0.0, 0.025, 0.05, 0.06, 0.07, 0.08};
  std::vector<int> ps{1, 2, 3};
  std::vector<VefKind> kinds{VefKind::H1, VefKind::RT, VefKind::HRT};
  double eps = 0.1;
  int sn = 4;
  double tol = 1e-6;
  int maxit = 250;
};

struct DistortionRow {
  int p = 0;
  double alpha = 0.0;
  VefKind kind = VefKind::RT;
  int iterations = 0;
  bool converged = false;
  std::string note;  ///< set when the run could not be made (tangled mesh, breakdown)
};

/// Solver settings used per kind: Jacobi(1) on A plus a direct lumped-Schur solve for
/// H1/RT, one symmetric Gauss-Seidel sweep on the reduced matrix for HRT.
SolverConfig distortion_solver(VefKind kind, double tol, int maxit);

std::vector<DistortionRow> run_distortion_study(const DistortionConfig& cfg);

// ---------------------------------------------------------------------------
// Spurious modes of the lumped Schur complement

struct EigenStudyConfig {
  int n = 16;
  int p = 1;
  int nev = 5;
  std::vector<VefKind> kinds{VefKind::H1, VefKind::RT};
  double checkerboard_threshold = 0.9;
};

struct EigenMode {
  double value = 0.0;
  double sign_alternation = 0.0;  ///< fraction of adjacent sub-cell pairs with opposite signs
  bool checkerboard = false;
  Mat subcell_means;              ///< ne × m², sub-cell (a, b) at column a + m b
};

struct EigenStudyResult {
  VefKind kind = VefKind::RT;
  std::vector<EigenMode> modes;  ///< ascending
  double asymmetry = 0.0;        ///< ‖S − Sᵀ‖ / ‖S‖ before symmetrization
};

/// Means of u over an m×m split of each element's reference square.
Mat subcell_means(const GridFunction& u, int m);

/// Fraction of adjacent sub-cell pairs (inside elements and across interior faces) whose
/// means have opposite signs. With m = 1 this compares neighbouring element means.
double sign_alternation_fraction(const Mesh& mesh, const Mat& means, int m);

/// -Δu = λu on the unit square through S̃u = λMu, S̃ the lumped Schur complement of the
/// pure-diffusion system (σ_t = 1/3, no absorption, no boundary term) and M the Y mass.
std::vector<EigenStudyResult> run_spurious_eigen_study(const EigenStudyConfig& cfg);

// ---------------------------------------------------------------------------
// Single-element null spaces of the divergence pairing

struct NullspaceEntry {
  std::string pair;  ///< "W1xY0", "W1xY1", "RT0xY0"
  int rows = 0, cols = 0, rank = 0;
  int dim_null_D = 0;   ///< cols − rank
  int dim_null_Dt = 0;  ///< rows − rank
  /// Distance of a reference function from the relevant null space (see run_nullspace_check).
  double reference_residual = 0.0;
  /// Dimension of N(∇·) on the velocity space, i.e. fields with zero pointwise divergence.
  int dim_null_div = -1;
};

/// On [0,1]²: W1×Y0 reports ‖D c‖ for c interpolating (x(y−1/2), 0); W1×Y1 reports the
/// max distance between the normalized left null vector and 1/4 − x/2 − y/2 + xy;
/// RT0×Y0 reports ‖Dᵀ‖ restricted to its left null space (0 when N(Dᵀ) is trivial).
std::vector<NullspaceEntry> run_nullspace_check();

}  // namespace vef
