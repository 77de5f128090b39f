#pragma once

#include <vector>

#include "vef/dense.hpp"

namespace vef {

/// 1D rule on [0,1].
struct QuadRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// 2D rule on [0,1]^2. Point k of a tensor rule is (r1[k % n1], r2[k / n1]).
struct QuadRule2D {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

QuadRule1D gauss_legendre(int n);
QuadRule1D gauss_lobatto(int n);
QuadRule2D tensor_rule(const QuadRule1D& r1, const QuadRule1D& r2);
inline QuadRule2D tensor_gauss(int n) { return tensor_rule(gauss_legendre(n), gauss_legendre(n)); }

/// Discrete ordinates set. Directions are unit 3-vectors; weights sum to 4π.
struct AngularQuadrature {
  int order = 0;
  std::vector<Vec3> dirs;
  std::vector<double> weights;
  int size() const { return static_cast<int>(dirs.size()); }
};

/// Level-symmetric S_N for N in {2,4,6,8,12}, all eight octants.
AngularQuadrature level_symmetric(int N);

/// First direction cosine of the level-symmetric set.
double level_symmetric_mu1(int N);

}  // namespace vef
