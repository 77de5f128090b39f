#include "vef/sparse.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "vef/error.hpp"

namespace vef {

CsrMatrix csr_from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  CsrMatrix A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

CsrMatrix csr_from_dense(const Mat& A, double drop_tol) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (std::abs(A(i, j)) > drop_tol) t.emplace_back(i, j, A(i, j));
  return csr_from_triplets(static_cast<int>(A.rows()), static_cast<int>(A.cols()), t);
}

CsrMatrix csr_identity(int n) {
  CsrMatrix I(n, n);
  I.setIdentity();
  I.makeCompressed();
  return I;
}

CsrMatrix csr_block2x2(const CsrMatrix& A, const CsrMatrix& B, const CsrMatrix& C,
                       const CsrMatrix& D) {
  const int n1 = static_cast<int>(std::max(A.rows(), B.rows()));
  const int n2 = static_cast<int>(std::max(C.rows(), D.rows()));
  const int m1 = static_cast<int>(std::max(A.cols(), C.cols()));
  const int m2 = static_cast<int>(std::max(B.cols(), D.cols()));
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + B.nonZeros() + C.nonZeros() + D.nonZeros());
  auto add = [&t](const CsrMatrix& X, int r0, int c0) {
    for (int i = 0; i < X.outerSize(); ++i)
      for (CsrMatrix::InnerIterator it(X, i); it; ++it) t.emplace_back(r0 + i, c0 + it.col(), it.value());
  };
  add(A, 0, 0);
  add(B, 0, m1);
  add(C, n1, 0);
  add(D, n1, m1);
  return csr_from_triplets(n1 + n2, m1 + m2, t);
}

LinearOperator as_operator(const CsrMatrix& A) {
  return [&A](const Vec& x, Vec& y) { y.noalias() = A * x; };
}

SolveStats bicgstab(const LinearOperator& A, const LinearOperator& prec, const Vec& b, Vec& x,
                    double tol, int maxit) {
  SolveStats st;
  const Eigen::Index n = b.size();
  if (x.size() != n) x = Vec::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    st.converged = true;
    return st;
  }
  auto apply_prec = [&](const Vec& in, Vec& out) {
    if (prec)
      prec(in, out);
    else
      out = in;
  };
  Vec r(n), tmp(n);
  A(x, tmp);
  r = b - tmp;
  st.rel_residual = r.norm() / bnorm;
  if (st.rel_residual <= tol) {
    st.converged = true;
    return st;
  }
  const Vec rhat = r;
  Vec p = Vec::Zero(n), v = Vec::Zero(n), phat(n), s(n), shat(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  auto true_residual = [&]() {
    A(x, tmp);
    return (b - tmp).norm() / bnorm;
  };
  for (int it = 1; it <= maxit; ++it) {
    st.iterations = it;
    const double rho_new = rhat.dot(r);
    if (rho_new == 0.0 || !std::isfinite(rho_new)) {
      st.breakdown = true;
      break;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    apply_prec(p, phat);
    A(phat, v);
    const double rv = rhat.dot(v);
    if (rv == 0.0 || !std::isfinite(rv)) {
      st.breakdown = true;
      break;
    }
    alpha = rho_new / rv;
    s = r - alpha * v;
    if (s.norm() / bnorm <= tol) {
      x += alpha * phat;
      st.rel_residual = true_residual();
      if (st.rel_residual <= tol) {
        st.converged = true;
        return st;
      }
      A(x, tmp);
      r = b - tmp;
      rho = rho_new;
      omega = 1.0;
      p.setZero();
      v.setZero();
      continue;
    }
    apply_prec(s, shat);
    A(shat, t);
    const double tt = t.squaredNorm();
    if (tt == 0.0) {
      x += alpha * phat;
      st.breakdown = true;
      break;
    }
    omega = t.dot(s) / tt;
    x += alpha * phat + omega * shat;
    r = s - omega * t;
    rho = rho_new;
    if (r.norm() / bnorm <= tol) {
      st.rel_residual = true_residual();
      if (st.rel_residual <= tol) {
        st.converged = true;
        return st;
      }
      A(x, tmp);
      r = b - tmp;
    }
    if (omega == 0.0) {
      st.breakdown = true;
      break;
    }
  }
  st.rel_residual = true_residual();
  st.converged = st.rel_residual <= tol;
  return st;
}

namespace {

using ColMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

using ColLU = Eigen::SparseLU<ColMat, Eigen::COLAMDOrdering<int>>;

// Eigen's message ends with the failing column (1-based); surface it in the exception.
[[noreturn]] void report_singular(const ColLU& lu) {
  const std::string msg = lu.lastErrorMessage();
  long row = -1;
  const auto pos = msg.find_last_of(' ');
  if (pos != std::string::npos) {
    try {
      row = std::stol(msg.substr(pos + 1)) - 1;
    } catch (...) {
    }
  }
  throw SingularMatrixError("sparse_lu: singular matrix (" + msg + ")", row);
}

}  // namespace

struct SparseLU::Impl {
  ColLU lu;
};

SparseLU::SparseLU(const CsrMatrix& A) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw ArgumentError("sparse_lu: matrix must be square");
  ColMat C = A;
  C.makeCompressed();
  impl_->lu.analyzePattern(C);
  impl_->lu.factorize(C);
  if (impl_->lu.info() != Eigen::Success) report_singular(impl_->lu);
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

Vec SparseLU::solve(const Vec& b) const {
  if (b.size() != n_) throw ArgumentError("sparse_lu: rhs size mismatch");
  return impl_->lu.solve(b);
}

namespace {

Vec diagonal_of(const CsrMatrix& A) {
  Vec d = Vec::Zero(A.rows());
  for (int i = 0; i < A.outerSize(); ++i)
    for (CsrMatrix::InnerIterator it(A, i); it; ++it)
      if (it.col() == i) d[i] = it.value();
  for (int i = 0; i < d.size(); ++i)
    if (d[i] == 0.0) throw SingularMatrixError("zero diagonal entry in row " + std::to_string(i), i);
  return d;
}

void gs_row(const CsrMatrix& A, const Vec& r, const Vec& d, Vec& z, int i) {
  double s = r[i];
  for (CsrMatrix::InnerIterator it(A, i); it; ++it)
    if (it.col() != i) s -= it.value() * z[it.col()];
  z[i] = s / d[i];
}

}  // namespace

Vec jacobi_apply(const CsrMatrix& A, const Vec& r, int sweeps) {
  const Vec d = diagonal_of(A);
  Vec z = Vec::Zero(r.size());
  for (int k = 0; k < sweeps; ++k) {
    if (k == 0) {
      z = r.cwiseQuotient(d);
      continue;
    }
    const Vec res = r - A * z;
    z += res.cwiseQuotient(d);
  }
  return z;
}

Vec gauss_seidel_apply(const CsrMatrix& A, const Vec& r, int sweeps, bool symmetric) {
  const Vec d = diagonal_of(A);
  const int n = static_cast<int>(r.size());
  Vec z = Vec::Zero(n);
  for (int k = 0; k < sweeps; ++k) {
    for (int i = 0; i < n; ++i) gs_row(A, r, d, z, i);
    if (symmetric)
      for (int i = n - 1; i >= 0; --i) gs_row(A, r, d, z, i);
  }
  return z;
}

std::vector<EigenPair> generalized_eig_smallest(const CsrMatrix& S, const CsrMatrix& M, int k,
                                                double shift, double tol, int maxit) {
  const int n = static_cast<int>(S.rows());
  if (k < 1 || k > n) throw ArgumentError("generalized_eig_smallest: invalid k");
  const int q = std::min(n, std::max(2 * k, k + 8));
  const CsrMatrix K = S - shift * M;
  const SparseLU lu(K);

  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat X(n, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = dist(gen);

  std::vector<EigenPair> out;
  double worst = 0.0;
  for (int it = 0; it < maxit; ++it) {
    Mat Y(n, q);
    for (int j = 0; j < q; ++j) Y.col(j) = lu.solve(M * X.col(j));
    // Orthonormalize for stability of the projected problem.
    Eigen::HouseholderQR<Mat> qr(Y);
    Y = qr.householderQ() * Mat::Identity(n, q);
    const Mat SY = S * Y, MY = M * Y;
    const Mat As = Y.transpose() * SY, Bs = Y.transpose() * MY;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (As + As.transpose()),
                                                     0.5 * (Bs + Bs.transpose()));
    X = Y * es.eigenvectors();
    const Vec lam = es.eigenvalues();
    worst = 0.0;
    out.clear();
    for (int j = 0; j < k; ++j) {
      Vec x = X.col(j);
      x /= x.norm();
      const double res = (S * x - lam[j] * (M * x)).norm();
      worst = std::max(worst, res);
      out.push_back({lam[j], x});
    }
    if (worst <= tol) return out;
  }
  throw ConvergenceError("generalized_eig_smallest: residual " + std::to_string(worst) +
                         " after " + std::to_string(maxit) + " iterations");
}

void write_matrix_market(const CsrMatrix& A, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[64];
  for (int i = 0; i < A.outerSize(); ++i)
    for (CsrMatrix::InnerIterator it(A, i); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, static_cast<int>(it.col()) + 1, it.value());
      os << buf;
    }
}

void write_matrix_market_file(const CsrMatrix& A, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_matrix_market(A, os);
}

}  // namespace vef
