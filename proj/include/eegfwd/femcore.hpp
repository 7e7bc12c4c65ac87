#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "eegfwd/core.hpp"

namespace eegfwd {

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature on the reference cube / face
// ---------------------------------------------------------------------------

enum class Entity { Cell, Face };

/// Tensor-product Gauss-Legendre rule on [0,1]^3 (cell) or [0,1]^2 (face,
/// stored in the x/y slots). Weights sum to the reference measure 1.
struct QuadratureRule {
  Entity entity = Entity::Cell;
  std::vector<Vec3> points;
  std::vector<double> weights;
};

namespace detail {

inline void gaussLegendre1d(int npts, std::vector<double>& x, std::vector<double>& w) {
  // Nodes/weights on [-1,1], mapped to [0,1] below.
  static const double nodes[7][4] = {
      {0.0},
      {0.57735026918962576},
      {0.0, 0.77459666924148338},
      {0.33998104358485626, 0.86113631159405258},
      {0.0, 0.53846931010568309, 0.90617984593866399},
      {0.23861918608319691, 0.66120938646626451, 0.93246951420315203},
      {0.0, 0.40584515137739717, 0.74153118559939444, 0.94910791234275852}};
  static const double weights[7][4] = {
      {2.0},
      {1.0},
      {0.88888888888888889, 0.55555555555555556},
      {0.65214515486254614, 0.34785484513745386},
      {0.56888888888888889, 0.47862867049936647, 0.23692688505618909},
      {0.46791393457269105, 0.36076157304813861, 0.17132449237917035},
      {0.41795918367346939, 0.38183005050511894, 0.27970539148927667, 0.12948496616886969}};
  x.clear();
  w.clear();
  const int half = (npts + 1) / 2;
  const bool odd = npts % 2;
  for (int i = half - 1; i >= 0; --i) {
    if (!(odd && i == 0)) {
      x.push_back(0.5 * (1.0 - nodes[npts - 1][i]));
      w.push_back(0.5 * weights[npts - 1][i]);
    }
  }
  if (odd) {
    x.push_back(0.5);
    w.push_back(0.5 * weights[npts - 1][0]);
  }
  for (int i = odd ? 1 : 0; i < half; ++i) {
    x.push_back(0.5 * (1.0 + nodes[npts - 1][i]));
    w.push_back(0.5 * weights[npts - 1][i]);
  }
}

}  // namespace detail

/// Rule integrating tensor-product polynomials of the given degree exactly;
/// degrees above 13 are unsupported.
inline QuadratureRule quadratureRule(Entity entity, int degree) {
  if (degree < 1) throw InvalidInput("quadrature degree must be >= 1");
  if (degree > 13) throw InvalidInput("quadrature degree > 13 unsupported");
  const int npts = (degree + 2) / 2;
  std::vector<double> x, w;
  detail::gaussLegendre1d(npts, x, w);

  QuadratureRule rule;
  rule.entity = entity;
  if (entity == Entity::Cell) {
    for (int k = 0; k < npts; ++k)
      for (int j = 0; j < npts; ++j)
        for (int i = 0; i < npts; ++i) {
          rule.points.push_back({x[i], x[j], x[k]});
          rule.weights.push_back(w[i] * w[j] * w[k]);
        }
  } else {
    for (int j = 0; j < npts; ++j)
      for (int i = 0; i < npts; ++i) {
        rule.points.push_back({x[i], x[j], 0.0});
        rule.weights.push_back(w[i] * w[j]);
      }
  }
  return rule;
}

/// Embed 2D face coordinates (u,v) into the cell reference cube for local
/// face f = 2*axis + side. The two tangential axes are taken in ascending
/// order, so the embedding agrees between the two cells sharing a face.
inline Vec3 faceToCellRef(int local_face, double u, double v) {
  const int axis = local_face / 2;
  const int side = local_face % 2;
  Vec3 p;
  p[axis] = static_cast<double>(side);
  const int t1 = (axis == 0) ? 1 : 0;
  const int t2 = (axis == 2) ? 1 : 2;
  p[t1] = u;
  p[t2] = v;
  return p;
}

// ---------------------------------------------------------------------------
// Basis sets on the reference cube
// ---------------------------------------------------------------------------
// Local vertex v = ix + 2*iy + 4*iz. CG: trilinear nodal hat functions.
// DG: 8 functions orthonormal w.r.t. the cell-averaged inner product
// (1/|E|) \int_E phi_i phi_j dx, built from the centered Q1 monomials.

enum class BasisKind { CgTrilinear, DgOrthonormalQ1 };

struct BasisEval {
  std::array<double, 8> values;
  std::array<Vec3, 8> gradients;  // w.r.t. reference coordinates; physical = /h
};

namespace detail {
// Centered Q1 monomial exponents in the fixed order 1,x,y,z,xy,xz,yz,xyz.
inline constexpr int kMonomialExp[8][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                           {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};

// \int_0^1 (x - 1/2)^a dx for a <= 2 (odd moments vanish).
inline constexpr double kCenteredMoment[3] = {1.0, 0.0, 1.0 / 12.0};

inline double monomialInner(int m, int n) {
  double g = 1.0;
  for (int a = 0; a < 3; ++a) g *= kCenteredMoment[kMonomialExp[m][a] + kMonomialExp[n][a]];
  return g;
}
}  // namespace detail

struct BasisSet {
  BasisKind kind = BasisKind::CgTrilinear;
  // DG only: coefficients of each basis function over the centered monomials.
  std::array<std::array<double, 8>, 8> coef{};

  BasisEval eval(const Vec3& p) const {
    BasisEval out;
    if (kind == BasisKind::CgTrilinear) {
      const double f[3][2] = {{1.0 - p.x, p.x}, {1.0 - p.y, p.y}, {1.0 - p.z, p.z}};
      for (int v = 0; v < 8; ++v) {
        const int b[3] = {v & 1, (v >> 1) & 1, (v >> 2) & 1};
        out.values[v] = f[0][b[0]] * f[1][b[1]] * f[2][b[2]];
        for (int a = 0; a < 3; ++a) {
          double g = b[a] ? 1.0 : -1.0;
          for (int o = 0; o < 3; ++o)
            if (o != a) g *= f[o][b[o]];
          out.gradients[v][a] = g;
        }
      }
    } else {
      double mono[8];
      Vec3 dmono[8];
      const double c[3] = {p.x - 0.5, p.y - 0.5, p.z - 0.5};
      for (int m = 0; m < 8; ++m) {
        const int* e = detail::kMonomialExp[m];
        mono[m] = (e[0] ? c[0] : 1.0) * (e[1] ? c[1] : 1.0) * (e[2] ? c[2] : 1.0);
        for (int a = 0; a < 3; ++a) {
          if (!e[a]) {
            dmono[m][a] = 0.0;
            continue;
          }
          double g = 1.0;
          for (int o = 0; o < 3; ++o)
            if (o != a) g *= (e[o] ? c[o] : 1.0);
          dmono[m][a] = g;
        }
      }
      for (int i = 0; i < 8; ++i) {
        double v = 0.0;
        Vec3 g{};
        for (int m = 0; m < 8; ++m) {
          v += coef[i][m] * mono[m];
          g += coef[i][m] * dmono[m];
        }
        out.values[i] = v;
        out.gradients[i] = g;
      }
    }
    return out;
  }
};

inline BasisSet cgTrilinearBasis() { return BasisSet{BasisKind::CgTrilinear, {}}; }

/// Gram-Schmidt on the centered Q1 monomials 1,x,y,z,xy,xz,yz,xyz under the
/// cell-averaged L2 inner product, in that fixed order.
inline BasisSet orthonormalizeBrokenBasis() {
  BasisSet set;
  set.kind = BasisKind::DgOrthonormalQ1;
  auto inner = [](const std::array<double, 8>& a, const std::array<double, 8>& b) {
    double s = 0.0;
    for (int m = 0; m < 8; ++m)
      for (int n = 0; n < 8; ++n) s += a[m] * b[n] * detail::monomialInner(m, n);
    return s;
  };
  for (int i = 0; i < 8; ++i) {
    std::array<double, 8> v{};
    v[i] = 1.0;
    for (int j = 0; j < i; ++j) {
      const double proj = inner(v, set.coef[j]);
      for (int m = 0; m < 8; ++m) v[m] -= proj * set.coef[j][m];
    }
    const double nrm = std::sqrt(inner(v, v));
    for (int m = 0; m < 8; ++m) set.coef[i][m] = v[m] / nrm;
  }
  return set;
}

/// Reference basis for the scheme: shared, immutable after construction.
inline const BasisSet& basisFor(BasisKind kind) {
  static const BasisSet cg = cgTrilinearBasis();
  static const BasisSet dg = orthonormalizeBrokenBasis();
  return kind == BasisKind::CgTrilinear ? cg : dg;
}

}  // namespace eegfwd
