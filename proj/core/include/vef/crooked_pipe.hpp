#pragma once

#include "vef/fixed_point.hpp"

namespace vef {

/// Two-material pipe problem on [0,7]×[-2,2]. The pipe enters at x = 0 (|y| ≤ 0.5), splits
/// around a central wall block into two legs reaching |y| = 1.5, and leaves at x = 7.
struct CrookedPipeSpec {
  double sigma_t_pipe = 0.2;
  double sigma_t_wall = 200.0;
  double sigma_a = 1e-3;
  double q = 0.1;                                   ///< per steradian
  double inflow = 0.15915494309189535;              ///< 1/2π, isotropic, on the pipe mouth
};

/// True when x lies in the pipe material.
bool crooked_pipe_in_pipe(const Vec2& x);

/// Orthogonal mesh with 0.5/2^refinement cells: 112 elements at refinement 0.
Mesh crooked_pipe_mesh(int refinement, int order = 1);

/// Materials assigned by element centroid.
TransportProblem crooked_pipe_problem(const Mesh& mesh, const CrookedPipeSpec& spec = {});

struct CrookedPipeConfig {
  int refinement = 0;
  int p = 1;
  VefKind kind = VefKind::RT;
  int sn = 12;
  double outer_tol = 1e-6;
  double inner_tol = 1e-8;
  int inner_maxit = 100;
  int anderson_m = 2;
  double psi0 = 1e-4;
  SolverConfig::HybridPrec hybrid_prec = SolverConfig::HybridPrec::Direct;
};

struct CrookedPipeResult {
  int elements = 0;
  IterationTrace trace;
  double max_inner = 0.0;
  double pipe_exit_phi = 0.0;  ///< φ at (6.75, 0)
};

OuterConfig crooked_pipe_outer(const CrookedPipeConfig& cfg);

CrookedPipeResult run_crooked_pipe(const CrookedPipeConfig& cfg, const CrookedPipeSpec& spec = {});

}  // namespace vef
