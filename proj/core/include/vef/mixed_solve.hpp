#pragma once

#include "vef/mixed_assembly.hpp"
#include "vef/preconditioners.hpp"

namespace vef {

struct MixedSolution {
  GridFunction phi;
  GridFunction J;
  Vec lambda;  ///< face multipliers, hybrid solves only
  SolveStats stats;
};

/// Direct LU of the full block matrix, or BiCGStab with the lumped block-triangular
/// preconditioner. guess (if given) seeds the Krylov iteration.
MixedSolution solve_mixed(const VefBlockSystem& sys, const SolverConfig& cfg,
                          const MixedSolution* guess = nullptr);

}  // namespace vef
