#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vef/basis.hpp"
#include "vef/dense.hpp"
#include "vef/mesh.hpp"

namespace vef {

enum class SpaceKind { Y, V, W, RT, BrokenRT, Lambda };
enum class ScalarFamily { GaussLegendre, GaussLobatto, Bernstein };

std::string to_string(SpaceKind k);

/// Reference basis of Q_{p+1,p} × Q_{p,p+1}: Gauss-Lobatto nodes in the normal
/// direction, Gauss-Legendre nodes in the tangential direction.
/// ξ-component dofs come first (i + (p+2) j), then η-component dofs (i + (p+1) j).
class RtBasis {
 public:
  explicit RtBasis(int p);

  int degree() const { return p_; }
  int size() const { return 2 * (p_ + 1) * (p_ + 2); }
  int component_size() const { return (p_ + 1) * (p_ + 2); }
  int component(int i) const { return i < component_size() ? 0 : 1; }

  /// vals: size×2 reference vectors; div: size; grad: size×4 as (∂ξv̂1, ∂ηv̂1, ∂ξv̂2, ∂ηv̂2).
  void eval(const Vec2& ref, double* vals, double* div = nullptr, double* grad = nullptr) const;

  /// Normal dofs on a local edge, ordered by increasing edge parameter.
  const std::vector<int>& edge_dofs(int edge) const { return edge_dofs_[edge]; }
  const std::vector<int>& interior_dofs() const { return interior_dofs_; }
  /// Sign relating the reference component to the outward reference normal on an edge.
  static double ref_normal_sign(int edge) { return (edge == 1 || edge == 2) ? 1.0 : -1.0; }
  /// Opposite-component dof paired with i for component-wise lumping.
  int partner(int i) const;

 private:
  int p_;
  Basis1D gll_, gl_;
  std::vector<int> edge_dofs_[4];
  std::vector<int> interior_dofs_;
};

/// Finite element space with a global dof map. Immutable after construction.
class FeSpace {
 public:
  static FeSpace Y(const Mesh& mesh, int p, ScalarFamily family = ScalarFamily::GaussLegendre);
  static FeSpace V(const Mesh& mesh, int p);
  static FeSpace W(const Mesh& mesh, int p);
  static FeSpace RT(const Mesh& mesh, int p);
  static FeSpace BrokenRT(const Mesh& mesh, int p);
  static FeSpace Lambda(const Mesh& mesh, int p);

  const Mesh& mesh() const { return *mesh_; }
  SpaceKind kind() const { return kind_; }
  ScalarFamily family() const { return family_; }
  int degree() const { return p_; }
  int ndofs() const { return ndofs_; }
  /// Dofs per element (per interior face for Lambda).
  int local_size() const { return local_size_; }
  bool is_rt() const { return kind_ == SpaceKind::RT || kind_ == SpaceKind::BrokenRT; }

  /// Element dofs (face dofs for Lambda; empty on boundary faces).
  std::span<const int> dofs(int e) const {
    return {dofs_.data() + offsets_[e], static_cast<size_t>(offsets_[e + 1] - offsets_[e])};
  }
  std::span<const double> signs(int e) const {
    return {signs_.data() + offsets_[e], static_cast<size_t>(offsets_[e + 1] - offsets_[e])};
  }

  const TensorBasis& scalar_basis() const { return scalar_; }
  const RtBasis& rt_basis() const { return *rt_; }
  std::string descriptor() const;

 private:
  FeSpace(const Mesh& mesh, SpaceKind kind, int p) : mesh_(&mesh), kind_(kind), p_(p) {}
  void build_c0();
  void build_rt(bool broken);

  const Mesh* mesh_;
  SpaceKind kind_;
  ScalarFamily family_ = ScalarFamily::GaussLobatto;
  int p_;
  int ndofs_ = 0;
  int local_size_ = 0;
  std::vector<int> offsets_;
  std::vector<int> dofs_;
  std::vector<double> signs_;
  TensorBasis scalar_;
  std::shared_ptr<const RtBasis> rt_;
};

FeSpace build_dof_map(const Mesh& mesh, SpaceKind kind, int p);

struct GridFunction {
  const FeSpace* space = nullptr;
  Vec coef;

  GridFunction() = default;
  explicit GridFunction(const FeSpace& s) : space(&s), coef(Vec::Zero(s.ndofs())) {}
  GridFunction(const FeSpace& s, Vec c);
  /// Signed local coefficients of element e.
  Vec local(int e) const;
};

double eval_scalar(const GridFunction& gf, int e, const Vec2& ref);
Vec2 eval_scalar_grad(const GridFunction& gf, int e, const Vec2& ref);
Vec2 eval_vector_h1(const GridFunction& gf, int e, const Vec2& ref);
Mat2 eval_vector_h1_grad(const GridFunction& gf, int e, const Vec2& ref);
Vec2 eval_rt(const GridFunction& gf, int e, const Vec2& ref);
Mat2 eval_rt_grad(const GridFunction& gf, int e, const Vec2& ref);
double eval_rt_div(const GridFunction& gf, int e, const Vec2& ref);
/// Value of any vector field (W, RT, brokenRT) at a reference point.
Vec2 eval_vector(const GridFunction& gf, int e, const Vec2& ref);

/// B̂ from the flattened Hessian, for the physical vector v = (1/J) F v̂.
Mat2 piola_bhat(const ElementGeometry& g, const Vec2& v_phys);
/// ∇v = (1/J) F (∇̂v̂ − B̂) F⁻¹.
Mat2 piola_grad(const ElementGeometry& g, const Vec2& vhat, const Mat2& grad_hat);

/// Element-wise L2 projection onto a DG scalar space.
GridFunction l2_project(const FeSpace& Y, const std::function<double(const Vec2&)>& f,
                        int nq = 0);

/// ∫ f over the mesh with an n-point tensor Gauss rule per element.
double integrate(const Mesh& mesh, const std::function<double(int, const Vec2&, const ElementGeometry&)>& f,
                 int nq);

void save_grid_function(const GridFunction& gf, std::ostream& os);
/// Reads coefficients; the descriptor line must match the space.
GridFunction load_grid_function(const FeSpace& space, std::istream& is);

}  // namespace vef
