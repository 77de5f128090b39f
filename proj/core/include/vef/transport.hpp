#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "vef/fe_space.hpp"
#include "vef/quadrature.hpp"
#include "vef/sparse.hpp"

namespace vef {

struct TransportProblem {
  std::vector<double> sigma_t;  ///< per element, 1/cm
  std::vector<double> sigma_s;  ///< per element, 1/cm
  std::vector<double> q_iso;    ///< per element isotropic source per steradian (empty = 0)
  /// Optional additional source q(elem, x, Ω).
  std::function<double(int, const Vec2&, const Vec3&)> source;
  /// Inflow ψ̄(face, x, Ω) on the boundary; empty means vacuum.
  std::function<double(int, const Vec2&, const Vec3&)> inflow;

  double sigma_a(int e) const { return sigma_t[e] - sigma_s[e]; }
  double q(int e) const { return q_iso.empty() ? 0.0 : q_iso[e]; }
  void validate(const Mesh& mesh) const;
};

/// One DG grid function per direction, stored as the columns of psi.
struct AngularFluxSet {
  const FeSpace* space = nullptr;
  Mat psi;
  int num_directions() const { return static_cast<int>(psi.cols()); }
};

struct SweepPlan {
  std::vector<std::vector<int>> order;                      ///< per direction
  std::vector<std::vector<std::pair<int, int>>> lagged;     ///< per direction (element, local edge)
  int total_lagged() const;
};

/// Upwind dependency ordering per direction. Cycles are broken by lagging, in each
/// strongly connected component, the face with the weakest inflow coupling.
SweepPlan build_sweep_plan(const Mesh& mesh, const AngularQuadrature& quad, int nq_face = 0);

struct SweepStats {
  long cells = 0;    ///< (element, direction) pairs swept
  long fixups = 0;   ///< pairs that needed the positivity fixup
  double fixup_fraction() const { return cells ? static_cast<double>(fixups) / cells : 0.0; }
};

/// Clip negative Bernstein coefficients and rescale to keep Σ m_i c_i, where m_i = ∫ B_i.
/// Returns true when the input was modified.
bool clip_rebalance_fixup(Vec& c, const Vec& m, double floor_value = 1e-14);

/// Upwind DG discrete-ordinates solver on a Bernstein DG space.
class TransportSolver {
 public:
  struct Options {
    bool fixup = true;
    int nq = 0;  ///< 1D Gauss points per direction; 0 picks p + order + 1
    int threads = 0;  ///< 0 uses VEF_THREADS
  };

  TransportSolver(const FeSpace& space, const AngularQuadrature& quad, TransportProblem problem,
                  Options opt);
  TransportSolver(const FeSpace& space, const AngularQuadrature& quad, TransportProblem problem)
      : TransportSolver(space, quad, std::move(problem), Options{}) {}

  const FeSpace& space() const { return *space_; }
  const AngularQuadrature& quadrature() const { return quad_; }
  const TransportProblem& problem() const { return problem_; }
  const SweepPlan& plan() const { return plan_; }

  /// Entries ∫ (σ_s/4π) u φ over Bernstein test functions u, for φ in any DG scalar space.
  Vec scattering_source(const GridFunction& phi) const;

  /// One transport sweep per direction. prev supplies values on lagged faces.
  AngularFluxSet sweep(const Vec& scattering, const AngularFluxSet* prev = nullptr,
                       SweepStats* stats = nullptr) const;

  /// φ = Σ w_d ψ_d in the Bernstein space.
  GridFunction scalar_moment(const AngularFluxSet& psi) const;
  /// (J_x, J_y) = Σ w_d Ω_d ψ_d.
  std::pair<GridFunction, GridFunction> current_moments(const AngularFluxSet& psi) const;

  /// Per element and direction: ∮ Ω·n ψ_up + ∫ σ_t ψ − ∫ source, shape (ne, ndir).
  /// Upwind values on lagged faces come from `prev`, as they did in sweep(); pass the same
  /// set (or null) that was given to the sweep.
  Mat balance_residuals(const AngularFluxSet& psi, const Vec& scattering,
                        const AngularFluxSet* prev = nullptr) const;

  /// ∫ B_i over element e.
  const Vec& basis_integrals(int e) const { return elems_[e].m; }

 private:
  struct EdgeData {
    int face = -1;
    int side = 0;
    int neighbor = -1;
    int neighbor_edge = -1;
    Mat B;                    ///< nqf × nb own trace
    std::vector<Vec2> nw;     ///< outward normal times arc-length quadrature weight
    std::vector<Vec2> x;
  };
  struct ElemData {
    Mat B;        ///< nq × nb
    Vec wJ;
    std::vector<Vec2> x;
    Mat M, Gx, Gy;  ///< mass and ∫ B_j ∂B_i / ∂x, ∂y
    Vec m;          ///< ∫ B_i
    EdgeData edge[4];
  };

  void solve_element(int e, int d, const Vec& scattering, Mat& psi, SweepStats* stats,
                     Vec* residual_out) const;
  Vec fixed_source(int e, int d) const;

  const FeSpace* space_;
  AngularQuadrature quad_;
  TransportProblem problem_;
  Options opt_;
  int nq_;
  std::vector<double> face_s_;
  std::vector<double> face_w_;
  std::vector<ElemData> elems_;
  SweepPlan plan_;
};

}  // namespace vef
