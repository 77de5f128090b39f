#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vef/mixed_assembly.hpp"
#include "vef/sparse.hpp"

namespace vef {

/// Inner solver settings shared by the mixed and hybrid solves.
struct SolverConfig {
  enum class Method { Direct, Krylov };
  enum class Smoother { Jacobi, GaussSeidel };
  enum class SchurSolve { Direct, GaussSeidel };
  enum class HybridPrec { Direct, GaussSeidel };

  Method method = Method::Krylov;
  double tol = 1e-8;
  int maxit = 250;
  Smoother smoother = Smoother::Jacobi;
  int smoother_sweeps = 1;
  SchurSolve schur = SchurSolve::Direct;
  int schur_sweeps = 1;
  HybridPrec hybrid_prec = HybridPrec::Direct;
  int hybrid_sweeps = 1;
};

/// Sparse approximate inverse of A: diagonal on interior rows, small coupled blocks where
/// the boundary term ties the two vector components together.
struct LumpedInverse {
  CsrMatrix inv;
};

/// Lumps element matrices (globally oriented local basis). Elements flagged in
/// boundary_elem lump each component sub-block separately into the dof and its partner.
LumpedInverse lump_A(const FeSpace& V, const std::vector<Mat>& A_elem,
                     const std::vector<char>& boundary_elem);
inline LumpedInverse lump_A(const VefBlockSystem& sys) {
  return lump_A(*sys.V, sys.A_elem, sys.boundary_elem);
}

/// S̃ = Ma − D Ã⁻¹ G.
CsrMatrix build_lumped_schur(const CsrMatrix& Ma, const CsrMatrix& D, const CsrMatrix& G,
                             const LumpedInverse& Ainv);

/// Lower block-triangular preconditioner [[Â, 0], [D, Ŝ]]⁻¹ given approximate inverses
/// of A and of the Schur complement.
class BlockTriPrec {
 public:
  BlockTriPrec(CsrMatrix D, LinearOperator Ainv, LinearOperator Sinv);

  void apply(const Vec& r, Vec& x) const;
  LinearOperator as_operator() const;
  int nv() const { return static_cast<int>(D_.cols()); }
  int ny() const { return static_cast<int>(D_.rows()); }

 private:
  CsrMatrix D_;
  LinearOperator Ainv_, Sinv_;
};

/// Smoother on A plus lumped Schur complement solved per cfg.
struct LumpedBlockPrec {
  LumpedInverse lumped;
  CsrMatrix schur;
  std::shared_ptr<SparseLU> schur_lu;
  std::unique_ptr<BlockTriPrec> prec;
};
std::unique_ptr<LumpedBlockPrec> make_lumped_block_prec(const VefBlockSystem& sys,
                                                        const SolverConfig& cfg);

/// Exact sub-solves: LU of A and LU of the dense Schur complement Ma − D A⁻¹ G.
/// Intended for small systems.
std::unique_ptr<BlockTriPrec> make_exact_block_prec(const VefBlockSystem& sys);

}  // namespace vef
