#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vef/dense.hpp"

namespace vef {

/// Compressed sparse row matrix (sorted, unique column indices per row).
using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

CsrMatrix csr_from_triplets(int rows, int cols, const std::vector<Triplet>& t);
CsrMatrix csr_from_dense(const Mat& A, double drop_tol = 0.0);
CsrMatrix csr_identity(int n);
/// [[A, B], [C, D]] with any block allowed to be empty (zero rows/cols taken from neighbors).
CsrMatrix csr_block2x2(const CsrMatrix& A, const CsrMatrix& B, const CsrMatrix& C,
                       const CsrMatrix& D);

/// y = Op(x). y is resized by the operator.
using LinearOperator = std::function<void(const Vec& x, Vec& y)>;

LinearOperator as_operator(const CsrMatrix& A);

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  bool breakdown = false;
};

/// Right-preconditioned BiCGStab. x holds the initial guess on entry.
/// Convergence is declared on the true relative residual ‖b − Ax‖/‖b‖.
SolveStats bicgstab(const LinearOperator& A, const LinearOperator& prec, const Vec& b, Vec& x,
                    double tol, int maxit);

/// Sparse LU with partial pivoting and a fill-reducing column ordering.
class SparseLU {
 public:
  explicit SparseLU(const CsrMatrix& A);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  Vec solve(const Vec& b) const;
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

/// Stationary sweeps from a zero initial guess. Zero diagonal entries throw naming the row.
Vec jacobi_apply(const CsrMatrix& A, const Vec& r, int sweeps);
/// Forward Gauss-Seidel; symmetric adds a backward sweep after each forward sweep.
Vec gauss_seidel_apply(const CsrMatrix& A, const Vec& r, int sweeps, bool symmetric = false);

struct EigenPair {
  double value;
  Vec vector;
};

/// Smallest k eigenpairs of S x = λ M x (S symmetric, M SPD) by shift-invert subspace iteration.
std::vector<EigenPair> generalized_eig_smallest(const CsrMatrix& S, const CsrMatrix& M, int k,
                                                double shift = 0.0, double tol = 1e-8,
                                                int maxit = 500);

void write_matrix_market(const CsrMatrix& A, std::ostream& os);
void write_matrix_market_file(const CsrMatrix& A, const std::string& path);

}  // namespace vef
