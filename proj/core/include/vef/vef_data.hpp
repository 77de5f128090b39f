#pragma once

#include <functional>
#include <vector>

#include "vef/quadrature.hpp"
#include "vef/transport.hpp"

namespace vef {

/// Quadrature shared by the closure tables and the VEF assembly:
/// an nq_vol^2 tensor Gauss rule per element and nq_face Gauss points per face.
struct QuadLayout {
  int nq_vol = 0;
  int nq_face = 0;
};

/// Default VEF layout: degree 2p+4 on straight elements, more points on curved ones.
QuadLayout default_layout(int p, int mesh_order);

/// Eddington tensor and boundary factor sampled at assembly quadrature points.
struct VefData {
  const Mesh* mesh = nullptr;
  QuadLayout layout;
  std::vector<Mat2> E;      ///< [e * nq_vol^2 + q]
  std::vector<Vec2> En;     ///< [f * nq_face + q]: ⟨En⟩ on interior faces, En on boundary faces
  std::vector<double> Eb;   ///< [f * nq_face + q], boundary faces only
  bool diffusion = false;

  int nq_vol2() const { return layout.nq_vol * layout.nq_vol; }
  const Mat2& E_at(int e, int q) const { return E[static_cast<size_t>(e) * nq_vol2() + q]; }
  const Vec2& En_at(int f, int q) const { return En[static_cast<size_t>(f) * layout.nq_face + q]; }
  double Eb_at(int f, int q) const { return Eb[static_cast<size_t>(f) * layout.nq_face + q]; }

  /// E = I/3 and E_b = 1/2 everywhere.
  static VefData diffusion_mode(const Mesh& mesh, QuadLayout layout);
  /// Spatially constant tensor and boundary factor.
  static VefData constant(const Mesh& mesh, QuadLayout layout, const Mat2& E, double Eb);
};

/// Pointwise angular ratios from the discrete angular flux. Throws ClosureError when
/// Σ w ψ ≤ 0 at any evaluation point.
VefData compute_vef_data(const AngularFluxSet& psi, const AngularQuadrature& quad,
                         QuadLayout layout);

}  // namespace vef
