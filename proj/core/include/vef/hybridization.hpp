#pragma once

#include <iosfwd>
#include <vector>

#include "vef/mixed_solve.hpp"

namespace vef {

/// Hybridized RT system over broken RT × Y with face multipliers in Λ.
struct HybridSystem {
  const FeSpace* Y = nullptr;
  const FeSpace* V = nullptr;  ///< broken RT
  const FeSpace* L = nullptr;  ///< Λ
  std::vector<Mat> A, G, D, Ma;  ///< per element, unsigned local basis
  std::vector<Vec> g, f;
  CsrMatrix C1;  ///< Λ × brokenRT
  CsrMatrix C2;  ///< brokenRT × Λ
  std::vector<Mat> W, X, Yb, Z;
  CsrMatrix H;
  Vec rhs;

  int num_elements() const { return static_cast<int>(A.size()); }
};

/// C1 imposes normal continuity; C2 carries ⟦v·⟨En⟩⟧λ.
void assemble_constraints(const FeSpace& V, const FeSpace& L, const VefData& vef, CsrMatrix& C1,
                          CsrMatrix& C2);

/// Per-element W, X, Y, Z of the inverse of [[Â, Ĝ], [D̂, Ma]]. Throws naming the element.
void eliminate_local(HybridSystem& hs);

/// Element blocks, constraints, local elimination and the reduced system.
HybridSystem assemble_hybrid_system(const FeSpace& Y, const FeSpace& V, const FeSpace& L,
                                    const Materials& mat, const VefData& vef,
                                    const VefSources& src);

/// Reduced solve for λ followed by element-wise recovery of J and φ.
MixedSolution solve_hybrid(const HybridSystem& hs, const SolverConfig& cfg,
                           const Vec* lambda_guess = nullptr);

/// One line per interior face: face id followed by its p+1 coefficients.
void write_lambda(const FeSpace& L, const Vec& lambda, std::ostream& os);

}  // namespace vef
