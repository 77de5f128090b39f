#include "vef/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "vef/error.hpp"

namespace vef {

namespace {

// Legendre P_n and P_n' at t in [-1,1].
void legendre(int n, double t, double& p, double& dp) {
  double p0 = 1.0, p1 = t;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = (std::abs(1.0 - t * t) < 1e-300) ? 0.0 : n * (p0 - t * p1) / (1.0 - t * t);
}

}  // namespace

QuadRule1D gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("gauss_legendre: n must be >= 1");
  QuadRule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(n, t, p, dp);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    legendre(n, t, p, dp);
    // Ascending order on [0,1].
    r.points[n - 1 - i] = 0.5 * (t + 1.0);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return r;
}

QuadRule1D gauss_lobatto(int n) {
  if (n < 2) throw ArgumentError("gauss_lobatto: n must be >= 2");
  const int N = n - 1;
  QuadRule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = -std::cos(std::numbers::pi * i / N);
    if (i > 0 && i < N) {
      // Newton on P_N'(t); P_N'' from the Legendre equation.
      for (int it = 0; it < 100; ++it) {
        double p, dp;
        legendre(N, t, p, dp);
        const double ddp = (2.0 * t * dp - N * (N + 1) * p) / (1.0 - t * t);
        const double dt = dp / ddp;
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
    }
    double p, dp;
    legendre(N, t, p, dp);
    r.points[i] = 0.5 * (t + 1.0);
    r.weights[i] = 1.0 / (N * (N + 1) * p * p);
  }
  r.points.front() = 0.0;
  r.points.back() = 1.0;
  return r;
}

QuadRule2D tensor_rule(const QuadRule1D& r1, const QuadRule1D& r2) {
  QuadRule2D r;
  r.points.reserve(r1.size() * r2.size());
  r.weights.reserve(r1.size() * r2.size());
  for (int j = 0; j < r2.size(); ++j)
    for (int i = 0; i < r1.size(); ++i) {
      r.points.emplace_back(r1.points[i], r2.points[j]);
      r.weights.push_back(r1.weights[i] * r2.weights[j]);
    }
  return r;
}

double level_symmetric_mu1(int N) {
  switch (N) {
    case 2: return 1.0 / std::sqrt(3.0);
    // Fourth moment condition 2a^2 + (1-2a)^2 = 3/5 with a = mu1^2.
    case 4: return std::sqrt((4.0 - std::sqrt(6.4)) / 12.0);
    case 6: return 0.2666355;
    case 8: return 0.2182179;
    case 12: return 0.1672126;
    default: throw ArgumentError("level_symmetric: unsupported order S" + std::to_string(N));
  }
}

AngularQuadrature level_symmetric(int N) {
  const double mu1 = level_symmetric_mu1(N);
  const int L = N / 2;
  std::vector<double> mu(L);
  for (int i = 0; i < L; ++i) {
    const double m2 = (N == 2) ? mu1 * mu1 : mu1 * mu1 + 2.0 * i * (1.0 - 3.0 * mu1 * mu1) / (N - 2);
    mu[i] = std::sqrt(m2);
  }

  // First-octant points (i,j,k), 0-based, i+j+k = L-1; weight classes are permutation orbits.
  struct Pt {
    std::array<int, 3> idx;
    int cls;
  };
  std::vector<Pt> oct;
  std::map<std::array<int, 3>, int> classes;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j + i < L; ++j) {
      const int k = L - 1 - i - j;
      std::array<int, 3> key{i, j, k};
      std::sort(key.begin(), key.end());
      auto [it, inserted] = classes.try_emplace(key, static_cast<int>(classes.size()));
      oct.push_back({{i, j, k}, it->second});
    }
  const int nc = static_cast<int>(classes.size());

  // Even moments of the first cosine over the octant, normalized: sum w mu^{2m} = 1/(2m+1).
  // m = 1 follows from symmetry and is skipped.
  std::vector<int> moments{0};
  for (int m = 2; static_cast<int>(moments.size()) < nc; ++m) moments.push_back(m);
  Mat A = Mat::Zero(nc, nc);
  Vec b(nc);
  for (int r = 0; r < nc; ++r) {
    const int m = moments[r];
    b[r] = 1.0 / (2 * m + 1);
    for (const Pt& p : oct) A(r, p.cls) += std::pow(mu[p.idx[0]], 2 * m);
  }
  const Vec wc = A.fullPivLu().solve(b);

  AngularQuadrature q;
  q.order = N;
  const double scale = 4.0 * std::numbers::pi / 8.0;
  for (int oz = 0; oz < 2; ++oz)
    for (int oy = 0; oy < 2; ++oy)
      for (int ox = 0; ox < 2; ++ox)
        for (const Pt& p : oct) {
          q.dirs.emplace_back((ox ? -1 : 1) * mu[p.idx[0]], (oy ? -1 : 1) * mu[p.idx[1]],
                              (oz ? -1 : 1) * mu[p.idx[2]]);
          q.weights.push_back(scale * wc[p.cls]);
        }
  return q;
}

}  // namespace vef
