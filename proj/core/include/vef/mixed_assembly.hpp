#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vef/fe_space.hpp"
#include "vef/sparse.hpp"
#include "vef/vef_data.hpp"

namespace vef {

enum class VefKind { H1, RT, HRT };

std::string to_string(VefKind k);
/// Accepts "h1", "rt", "hrt" (case-insensitive).
VefKind parse_vef_kind(std::string_view s);

/// Per-element cross sections seen by the moment system.
struct Materials {
  std::vector<double> sigma_t;
  std::vector<double> sigma_a;
};

/// Moment sources Q0 = ∫q dΩ and Q1 = ∫Ωq dΩ (x-y block), and the inflow partial current
/// J_in = ∫_{Ω·n<0} (Ω·n) ψ̄ dΩ, which is nonpositive. Empty callables mean zero.
struct VefSources {
  std::function<double(int e, const Vec2& x)> Q0;
  std::function<Vec2(int e, const Vec2& x)> Q1;
  std::function<double(int f, const Vec2& x, const Vec2& n)> Jin;
};

/// Physical values, divergences and (optionally) gradients of every local vector shape
/// function at one point. Local ordering and orientation follow the reference basis.
struct VectorShapes {
  Mat vals;                  ///< n × 2
  Vec div;                   ///< n
  std::vector<Mat2> grad;    ///< n, (∇v)_ij = ∂v_i/∂x_j
};
void vector_shapes(const FeSpace& V, const ElementGeometry& g, const Vec2& ref, bool with_grad,
                   VectorShapes& out);

/// Dense element blocks in the unsigned local basis. G holds only volume terms.
struct ElementBlocks {
  Mat A, G, D, Ma;
  Vec g, f;
};
ElementBlocks element_blocks(const FeSpace& Y, const FeSpace& V, int e, const Materials& mat,
                             const VefData& vef, const VefSources* src,
                             bool boundary_term = true);

CsrMatrix assemble_A(const FeSpace& V, const Materials& mat, const VefData& vef,
                     bool boundary_term = true);
CsrMatrix assemble_Ma(const FeSpace& Y, const Materials& mat, const VefData& vef);
CsrMatrix assemble_D(const FeSpace& Y, const FeSpace& V, const VefData& vef);
/// Includes the interior-face flux term when V is an RT space.
CsrMatrix assemble_G(const FeSpace& Y, const FeSpace& V, const VefData& vef);
void assemble_rhs(const FeSpace& Y, const FeSpace& V, const VefData& vef, const VefSources& src,
                  Vec& g, Vec& f);

/// Interior-face part of G alone: ∫ ⟦v·⟨En⟩⟧⟨φ⟩ over Γ0.
CsrMatrix assemble_G_faces(const FeSpace& Y, const FeSpace& V, const VefData& vef);

struct VefBlockSystem {
  VefKind kind = VefKind::RT;
  const FeSpace* Y = nullptr;
  const FeSpace* V = nullptr;
  CsrMatrix A, G, D, Ma;
  Vec g, f;
  /// Element contributions to A in the globally oriented local basis, kept for lumping.
  std::vector<Mat> A_elem;
  /// Elements carrying a boundary term in A.
  std::vector<char> boundary_elem;

  int nv() const { return static_cast<int>(A.rows()); }
  int ny() const { return static_cast<int>(Ma.rows()); }
  /// [[A, G], [D, Ma]].
  CsrMatrix full() const;
  Vec rhs() const;
};

VefBlockSystem assemble_vef_system(VefKind kind, const FeSpace& Y, const FeSpace& V,
                                   const Materials& mat, const VefData& vef,
                                   const VefSources& src, bool boundary_term = true);

}  // namespace vef
