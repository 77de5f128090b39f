#pragma once

#include <string>
#include <vector>

#include "vef/fixed_point.hpp"

namespace vef {

/// Manufactured angular flux ψ = (α + Ω·β + ΩΩ:Θ)/4π on [0,1]².
struct MmsSpec {
  double delta = 1.25;
  double zeta = 0.1;
  double omega = 0.05;
  bool anisotropic = true;  ///< false sets Θ = 0
  double sigma_t = 1.0;
  double sigma_s = 0.5;

  double alpha(const Vec2& x) const;
  Vec2 grad_alpha(const Vec2& x) const;
  Vec2 beta(const Vec2& x) const;
  Mat2 grad_beta(const Vec2& x) const;  ///< row i = ∇β_i
  Mat2 theta(const Vec2& x) const;
  /// ∂Θ/∂x and ∂Θ/∂y.
  void grad_theta(const Vec2& x, Mat2& dx, Mat2& dy) const;

  double psi(const Vec2& x, const Vec3& dir) const;
  Vec2 grad_psi(const Vec2& x, const Vec3& dir) const;
  double phi(const Vec2& x) const;
  Vec2 J(const Vec2& x) const;
  /// ∫ΩΩψ dΩ, x-y block.
  Mat2 P(const Vec2& x) const;
  Mat2 E(const Vec2& x) const { return P(x) / phi(x); }
  double sigma_a() const { return sigma_t - sigma_s; }

  /// Ω·∇ψ + σ_t ψ − (σ_s/4π) φ.
  double source(const Vec2& x, const Vec3& dir) const;
  /// Exact angular moments of the source: ∇·J + σ_a φ and ∇·P + σ_t J.
  double Q0(const Vec2& x) const;
  Vec2 Q1(const Vec2& x) const;
  /// Exact ∫_{Ω·n<0} (Ω·n) ψ dΩ for Θ = 0.
  double Jin_linear(const Vec2& x, const Vec2& n) const;
};

enum class MmsMode { Diffusion, TransportP, TransportP1 };
std::string to_string(MmsMode m);
MmsMode parse_mms_mode(const std::string& s);

struct OrderFit {
  double order = 0.0;
  double constant = 0.0;
};
/// Least squares fit of log e = log C + k log h. Needs at least two points.
OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& err);

/// The Taylor-Green MMS mesh: n×n order-3 Cartesian mesh advected to T = 0.3π.
Mesh mms_mesh(int n, int steps = 300);

struct MmsRow {
  VefKind kind = VefKind::RT;
  int p = 0;
  int n = 0;
  double h = 0.0;
  double err_phi = 0.0;
  double err_proj = 0.0;
  double err_J = 0.0;
  SolveStats stats;
};

/// VEF data and moment sources for one MMS case, kept alive together.
struct MmsInputs {
  std::unique_ptr<FeSpace> psi_space;
  TransportProblem prob;
  AngularQuadrature quad;
  VefData vef;
  VefSources src;
  Materials mat;
};
MmsInputs make_mms_inputs(const Mesh& mesh, const MmsSpec& spec, MmsMode mode, int p);

/// Solve one case and measure L2 errors against the exact fields.
MmsRow run_mms_case(const Mesh& mesh, int n, const MmsSpec& spec, MmsMode mode, VefKind kind,
                    int p, const SolverConfig& cfg, MixedSolution* out = nullptr,
                    VefSpaces* spaces_out = nullptr);

struct MmsFit {
  VefKind kind;
  int p;
  OrderFit phi, proj, J;
};

struct MmsStudyConfig {
  MmsMode mode = MmsMode::Diffusion;
  std::vector<int> ps{1, 2, 3};
  std::vector<VefKind> kinds{VefKind::H1, VefKind::RT, VefKind::HRT};
  /// Mesh sizes per p; empty uses mms_default_sizes.
  std::vector<std::vector<int>> sizes;
  SolverConfig solver{.method = SolverConfig::Method::Direct};
  int tg_steps = 300;
};

/// Four refinements per degree.
std::vector<int> mms_default_sizes(int p);

struct MmsStudyResult {
  std::vector<MmsRow> rows;
  std::vector<MmsFit> fits;
  /// Relative L2 gaps between RT and HRT solutions per (p, n), when both kinds ran.
  struct Gap {
    int p, n;
    double phi, J;
  };
  std::vector<Gap> rt_hrt_gaps;
};

MmsStudyResult run_mms_study(const MmsStudyConfig& cfg, const MmsSpec& spec = {});

}  // namespace vef
