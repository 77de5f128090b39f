#pragma once

#include <deque>
#include <iosfwd>
#include <memory>
#include <vector>

#include "vef/hybridization.hpp"
#include "vef/transport.hpp"

namespace vef {

/// Anderson mixing on the map x → g(x) with a history of at most m differences.
/// m = 0 is the plain fixed-point iteration.
class AndersonAccelerator {
 public:
  explicit AndersonAccelerator(int m) : m_(m) {}
  /// Next iterate from the current iterate x and its image gx.
  Vec update(const Vec& x, const Vec& gx);
  void reset();
  int depth() const { return m_; }
  /// True when the last update fell back to the plain step.
  bool last_fallback() const { return fallback_; }

 private:
  int m_;
  bool fallback_ = false;
  Vec f_prev_, g_prev_;
  std::deque<Vec> dF_, dG_;
};

struct OuterConfig {
  VefKind kind = VefKind::RT;
  double tol = 1e-6;      ///< max-norm of the scalar flux update
  int max_outers = 200;
  int anderson_m = 0;
  SolverConfig inner;
  bool warm_start = true;
  bool fixup = true;
  int psi_degree = -1;    ///< transport degree; negative uses p
  QuadLayout layout{};    ///< zero entries pick default_layout
  double psi0 = 0.0;      ///< uniform initial angular flux; 0 starts from φ = 0
};

struct OuterRecord {
  int outer = 0;
  double residual = 0.0;
  int inner_iters = 0;
  bool inner_converged = true;
  double fixup_fraction = 0.0;
};

struct IterationTrace {
  std::vector<OuterRecord> rows;
  bool converged = false;

  int outers() const { return static_cast<int>(rows.size()); }
  double mean_inner() const;
  int total_inner() const;
  /// Mean over outers of the fraction of swept cells needing the fixup.
  double mean_fixup_fraction() const;
  /// Columns: outer,residual,inner_iters,fixup_fraction.
  void write_csv(std::ostream& os) const;
};

/// Spaces for one VEF discretization; heap-held so grid functions stay valid on move.
struct VefSpaces {
  std::unique_ptr<FeSpace> Y, V, L;
  static VefSpaces make(const Mesh& mesh, VefKind kind, int p);
};

struct VefRunResult {
  VefSpaces spaces;
  std::unique_ptr<FeSpace> psi_space;
  GridFunction phi, J;
  Vec lambda;
  AngularFluxSet psi;
  IterationTrace trace;
};

/// Material arrays as seen by the moment system.
Materials materials_from(const TransportProblem& prob);

/// Q0, Q1 and J_in from the transport source and inflow, summed with the angular quadrature.
VefSources sources_from(const TransportProblem& prob, const AngularQuadrature& quad);

/// Assemble and solve one VEF system of the given kind. prev (if any) warm-starts Krylov.
MixedSolution solve_vef(VefKind kind, const VefSpaces& sp, const Materials& mat,
                        const VefData& vef, const VefSources& src, const SolverConfig& cfg,
                        const MixedSolution* prev = nullptr);

/// Sweep, closure, VEF solve, repeated until the scalar flux settles.
/// Inner non-convergence is recorded in the trace; closure failures propagate.
VefRunResult run_vef_fixed_point(const Mesh& mesh, const TransportProblem& prob,
                                 const AngularQuadrature& quad, int p, const OuterConfig& cfg);

}  // namespace vef
