#include "vef/basis.hpp"

#include <cmath>

#include "vef/error.hpp"
#include "vef/quadrature.hpp"

namespace vef {

Basis1D Basis1D::lagrange(std::vector<double> nodes) {
  Basis1D b;
  b.kind_ = Kind::Lagrange;
  b.degree_ = static_cast<int>(nodes.size()) - 1;
  b.nodes_ = std::move(nodes);
  b.denom_.assign(b.nodes_.size(), 1.0);
  for (size_t i = 0; i < b.nodes_.size(); ++i)
    for (size_t j = 0; j < b.nodes_.size(); ++j)
      if (i != j) b.denom_[i] *= b.nodes_[i] - b.nodes_[j];
  return b;
}

Basis1D Basis1D::lagrange(int degree, NodeFamily family) {
  if (degree < 0) throw ArgumentError("Lagrange basis degree must be >= 0");
  if (family == NodeFamily::GaussLegendre) return lagrange(gauss_legendre(degree + 1).points);
  if (degree < 1) throw ArgumentError("Gauss-Lobatto basis needs degree >= 1");
  return lagrange(gauss_lobatto(degree + 1).points);
}

Basis1D Basis1D::bernstein(int degree) {
  if (degree < 0) throw ArgumentError("Bernstein basis degree must be >= 0");
  Basis1D b;
  b.kind_ = Kind::Bernstein;
  b.degree_ = degree;
  // Binomial coefficients.
  b.denom_.assign(degree + 1, 1.0);
  for (int i = 1; i <= degree; ++i) b.denom_[i] = b.denom_[i - 1] * (degree - i + 1) / i;
  return b;
}

void Basis1D::eval(double x, double* v, double* d, double* dd) const {
  const int n = degree_ + 1;
  if (kind_ == Kind::Bernstein) {
    const int p = degree_;
    auto pw = [](double a, int k) { return k <= 0 ? 1.0 : std::pow(a, k); };
    const double y = 1.0 - x;
    for (int i = 0; i < n; ++i) {
      const double c = denom_[i];
      if (v) v[i] = c * pw(x, i) * pw(y, p - i);
      if (d) {
        double s = 0.0;
        if (i >= 1) s += i * pw(x, i - 1) * pw(y, p - i);
        if (p - i >= 1) s -= (p - i) * pw(x, i) * pw(y, p - i - 1);
        d[i] = c * s;
      }
      if (dd) {
        double s = 0.0;
        if (i >= 2) s += i * (i - 1) * pw(x, i - 2) * pw(y, p - i);
        if (i >= 1 && p - i >= 1) s -= 2.0 * i * (p - i) * pw(x, i - 1) * pw(y, p - i - 1);
        if (p - i >= 2) s += (p - i) * (p - i - 1) * pw(x, i) * pw(y, p - i - 2);
        dd[i] = c * s;
      }
    }
    return;
  }
  double diff[32];
  for (int j = 0; j < n; ++j) diff[j] = x - nodes_[j];
  for (int i = 0; i < n; ++i) {
    if (v) {
      double prod = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) prod *= diff[j];
      v[i] = prod / denom_[i];
    }
    if (d) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        double prod = 1.0;
        for (int j = 0; j < n; ++j)
          if (j != i && j != k) prod *= diff[j];
        s += prod;
      }
      d[i] = s / denom_[i];
    }
    if (dd) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        for (int l = 0; l < n; ++l) {
          if (l == i || l == k) continue;
          double prod = 1.0;
          for (int j = 0; j < n; ++j)
            if (j != i && j != k && j != l) prod *= diff[j];
          s += prod;
        }
      }
      dd[i] = s / denom_[i];
    }
  }
}

void TensorBasis::eval(const Vec2& ref, double* v) const {
  double vx[32], vy[32];
  bx_.eval(ref[0], vx);
  by_.eval(ref[1], vy);
  const int nx = bx_.size(), ny = by_.size();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) v[i + nx * j] = vx[i] * vy[j];
}

void TensorBasis::eval_grad(const Vec2& ref, double* v, double* grad) const {
  double vx[32], vy[32], dx[32], dy[32];
  bx_.eval(ref[0], vx, dx);
  by_.eval(ref[1], vy, dy);
  const int nx = bx_.size(), ny = by_.size();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = i + nx * j;
      if (v) v[k] = vx[i] * vy[j];
      grad[2 * k] = dx[i] * vy[j];
      grad[2 * k + 1] = vx[i] * dy[j];
    }
}

}  // namespace vef
