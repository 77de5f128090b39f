#pragma once

#include <vector>

#include "vef/dense.hpp"

namespace vef {

enum class NodeFamily { GaussLegendre, GaussLobatto };

/// One-dimensional polynomial basis on [0,1]: nodal Lagrange or Bernstein.
class Basis1D {
 public:
  enum class Kind { Lagrange, Bernstein };

  static Basis1D lagrange(std::vector<double> nodes);
  static Basis1D lagrange(int degree, NodeFamily family);
  static Basis1D bernstein(int degree);

  Kind kind() const { return kind_; }
  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Values, first and second derivatives at x. Any output pointer may be null.
  void eval(double x, double* v, double* d = nullptr, double* dd = nullptr) const;

 private:
  Kind kind_ = Kind::Lagrange;
  int degree_ = 0;
  std::vector<double> nodes_;
  std::vector<double> denom_;
};

/// Tensor product of two 1D bases. Shape index = i + nx*j.
class TensorBasis {
 public:
  TensorBasis() = default;
  TensorBasis(Basis1D bx, Basis1D by) : bx_(std::move(bx)), by_(std::move(by)) {}

  int size() const { return bx_.size() * by_.size(); }
  int nx() const { return bx_.size(); }
  int ny() const { return by_.size(); }
  const Basis1D& bx() const { return bx_; }
  const Basis1D& by() const { return by_; }

  void eval(const Vec2& ref, double* v) const;
  /// grad is size()×2, row-major per shape function: (d/dξ, d/dη).
  void eval_grad(const Vec2& ref, double* v, double* grad) const;

 private:
  Basis1D bx_ = Basis1D::bernstein(0);
  Basis1D by_ = Basis1D::bernstein(0);
};

}  // namespace vef
