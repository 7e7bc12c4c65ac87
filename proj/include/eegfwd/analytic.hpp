#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "eegfwd/core.hpp"

namespace eegfwd {

/// Point dipole at position y with moment p. Potentials come out in volts
/// when lengths are in mm, conductivities in S/m and the moment carries the
/// configured scale factor; the error metrics are invariant to that factor.
struct Dipole {
  Vec3 position_mm{};
  Vec3 moment{};

  enum class Orientation { Radial, Tangential, Free };
  // Annotations filled by source placement; not used by the field formulas.
  double eccentricity = -1.0;
  Orientation orientation = Orientation::Free;
  int id = -1;
};

/// Potential of the dipole in an unbounded homogeneous conductor,
/// u_inf(x) = <p, x-y> / (4 pi sigma |x-y|^3).
inline double uInf(const Dipole& d, double sigma_inf, const Vec3& x) {
  const Vec3 r = x - d.position_mm;
  const double r2 = dot(r, r);
  if (r2 == 0.0) throw std::domain_error("uInf evaluated at the dipole position");
  return dot(d.moment, r) / (4.0 * pi * sigma_inf * r2 * std::sqrt(r2));
}

/// Analytic gradient of uInf.
inline Vec3 gradUInf(const Dipole& d, double sigma_inf, const Vec3& x) {
  const Vec3 r = x - d.position_mm;
  const double r2 = dot(r, r);
  if (r2 == 0.0) throw std::domain_error("gradUInf evaluated at the dipole position");
  const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
  const double pr = dot(d.moment, r);
  return (d.moment * inv_r3 - r * (3.0 * pr * inv_r3 / r2)) * (1.0 / (4.0 * pi * sigma_inf));
}

/// Concentric isotropic shells with a zero-flux outer boundary. The series
/// solution serves as the validation reference for the sphere studies.
struct LayeredSphereModel {
  std::vector<double> radii_mm;              // strictly increasing, outer radii
  std::vector<double> conductivities_S_per_m;
  int truncation = 100;
  double tail_tol = 1e-8;

  void validate() const {
    if (radii_mm.empty() || radii_mm.size() != conductivities_S_per_m.size())
      throw InvalidInput("layered sphere: radii/conductivity size mismatch");
    if (truncation < 1) throw InvalidInput("layered sphere: truncation must be >= 1");
    double prev = 0.0;
    for (std::size_t i = 0; i < radii_mm.size(); ++i) {
      if (radii_mm[i] <= prev) throw InvalidInput("layered sphere: radii must increase");
      if (conductivities_S_per_m[i] <= 0.0)
        throw InvalidInput("layered sphere: conductivities must be positive");
      prev = radii_mm[i];
    }
  }
};

/// The standard four-layer model of the sphere studies, with optional skull
/// outer radius override for the reduced-skull variants.
inline LayeredSphereModel fourLayerSphereModel(double skull_radius_mm = 86.0) {
  LayeredSphereModel m;
  m.radii_mm = {78.0, 80.0, skull_radius_mm, 92.0};
  m.conductivities_S_per_m = {0.33, 1.79, 0.01, 0.43};
  return m;
}

// ---------------------------------------------------------------------------
// Layered sphere series
// ---------------------------------------------------------------------------
// Per spherical-harmonic degree n the radial profile in layer i is
//   R_i(r) = alpha_i (r/r_i)^n + beta_i (r_{i-1}/r)^{n+1},
// with beta absent in the innermost layer (regularity at the origin). The
// dipole's primary field enters the interface conditions at r_0; continuity
// of u and of sigma du/dr propagates the coefficients outward, the outer
// boundary enforces du/dr = 0. The scaled bases keep all matrix entries
// O(n), so the per-degree solves stay well conditioned at large n.

/// Potential of the dipole in the layered sphere at the given points, fixed
/// to zero mean over the point set. Points may lie slightly outside the
/// outermost radius (staircase surface sampling); the outer-layer expansion
/// extends harmonically there.
inline std::vector<double> layeredSphereReference(const LayeredSphereModel& model,
                                                  const Dipole& d,
                                                  const std::vector<Vec3>& points) {
  model.validate();
  const int L = static_cast<int>(model.radii_mm.size());
  const auto& rad = model.radii_mm;
  const auto& sig = model.conductivities_S_per_m;
  const double r0 = rad[0];
  const double r_out = rad[L - 1];

  const double b = norm(d.position_mm);
  if (b >= r0) throw InvalidInput("dipole must lie strictly inside the innermost layer");

  // Dipole frame: radial axis, tangential axis carrying the moment remainder.
  const Vec3 zhat = (b > 0.0) ? d.position_mm / b : Vec3{0.0, 0.0, 1.0};
  const double p_rad = dot(d.moment, zhat);
  Vec3 tvec = d.moment - zhat * p_rad;
  const double p_tan = norm(tvec);
  const Vec3 that = (p_tan > 0.0) ? tvec / p_tan : Vec3{1.0, 0.0, 0.0};

  struct PointState {
    double r, cosg, tau;  // radius, cos(angle to dipole axis), tangential factor
    int layer;
    double q_phi, q_psi;      // ratio bases of the two radial terms
    double pow_phi, pow_psi;  // current powers at degree n
    double P_prev, P_cur;     // Legendre P_{n-1}, P_n at cosg
    double dP_prev, dP_cur;   // derivatives
  };
  const std::size_t m = points.size();
  if (m == 0) return {};
  std::vector<PointState> st(m);
  for (std::size_t p = 0; p < m; ++p) {
    const Vec3& x = points[p];
    const double r = norm(x);
    if (r > r_out * 1.10)
      throw InvalidInput("evaluation point lies too far outside the outermost radius");
    PointState& s = st[p];
    s.r = r;
    if (r == 0.0) {
      s = {0.0, 0.0, 0.0, 0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
      continue;
    }
    s.cosg = std::clamp(dot(x, zhat) / r, -1.0, 1.0);
    s.tau = dot(x, that) / r;
    int layer = L - 1;
    for (int i = 0; i < L; ++i)
      if (r <= rad[i]) {
        layer = i;
        break;
      }
    s.layer = layer;
    s.q_phi = r / rad[layer];
    s.q_psi = (layer > 0) ? rad[layer - 1] / r : 0.0;
    s.pow_phi = s.q_phi;              // (r/r_i)^n at n=1
    s.pow_psi = s.q_psi * s.q_psi;    // (r_{i-1}/r)^{n+1} at n=1
    s.P_prev = 1.0;                   // P_0
    s.P_cur = s.cosg;                 // P_1
    s.dP_prev = 0.0;
    s.dP_cur = 1.0;
  }

  const int N = model.truncation;
  const int nun = 2 * L - 1;  // alpha_0, then (alpha_i, beta_i) outward
  auto idx_a = [](int i) { return i == 0 ? 0 : 1 + 2 * (i - 1); };
  auto idx_b = [](int i) { return 2 + 2 * (i - 1); };

  const double src_norm = 1.0 / (4.0 * pi * sig[0] * r0 * r0);
  const double qs = b / r0;
  double src_pow = 1.0;  // (b/r0)^(n-1)

  std::vector<double> values(m, 0.0);
  std::vector<double> term_max;
  term_max.reserve(N);

  Eigen::MatrixXd A(nun, nun);
  Eigen::VectorXd rhs(nun);
  for (int n = 1; n <= N; ++n) {
    A.setZero();
    rhs.setZero();
    int row = 0;
    for (int i = 0; i + 1 < L; ++i) {
      const double R = rad[i];
      const double psi_i = (i > 0) ? std::pow(rad[i - 1] / R, n + 1) : 0.0;
      const double phi_next = std::pow(R / rad[i + 1], n);
      // continuity of u
      A(row, idx_a(i)) = 1.0;
      if (i > 0) A(row, idx_b(i)) = psi_i;
      A(row, idx_a(i + 1)) = -phi_next;
      A(row, idx_b(i + 1)) = -1.0;
      if (i == 0) rhs(row) = -1.0;
      ++row;
      // continuity of sigma du/dr
      A(row, idx_a(i)) = sig[i] * n / R;
      if (i > 0) A(row, idx_b(i)) = -sig[i] * (n + 1) / R * psi_i;
      A(row, idx_a(i + 1)) = -sig[i + 1] * n / R * phi_next;
      A(row, idx_b(i + 1)) = sig[i + 1] * (n + 1) / R;
      if (i == 0) rhs(row) = sig[0] * (n + 1) / R;
      ++row;
    }
    // zero-flux outer boundary
    A(row, idx_a(L - 1)) = static_cast<double>(n);
    if (L > 1) A(row, idx_b(L - 1)) = -(n + 1.0) * std::pow(rad[L - 2] / r_out, n + 1);
    rhs(row) = (L == 1) ? (n + 1.0) : 0.0;

    Eigen::VectorXd w = A.fullPivLu().solve(rhs);

    const double c_rad = p_rad * n * src_norm * src_pow;
    const double c_tan = p_tan * src_norm * src_pow;
    src_pow *= qs;

    double tmax = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      PointState& s = st[p];
      if (s.r > 0.0) {
        double radial = w(idx_a(s.layer)) * s.pow_phi;
        if (s.layer > 0) radial += w(idx_b(s.layer)) * s.pow_psi;
        const double term = (c_rad * s.P_cur + c_tan * s.tau * s.dP_cur) * radial;
        values[p] += term;
        tmax = std::max(tmax, std::abs(term));
        s.pow_phi *= s.q_phi;
        s.pow_psi *= s.q_psi;
      }
      // advance Legendre recurrences to degree n+1
      const double P_next = ((2 * n + 1) * s.cosg * s.P_cur - n * s.P_prev) / (n + 1);
      const double dP_next = s.dP_prev + (2 * n + 1) * s.P_cur;
      s.P_prev = s.P_cur;
      s.P_cur = P_next;
      s.dP_prev = s.dP_cur;
      s.dP_cur = dP_next;
    }
    term_max.push_back(tmax);
  }

  // Geometric tail estimate from the trailing term magnitudes.
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (N >= 10) {
    double m1 = 0.0, m2 = 0.0;
    for (int i = N - 10; i < N - 5; ++i) m1 = std::max(m1, term_max[i]);
    for (int i = N - 5; i < N; ++i) m2 = std::max(m2, term_max[i]);
    if (m2 > 0.0) {
      const double q = (m1 > 0.0) ? std::min(std::pow(m2 / m1, 0.2), 2.0) : 0.0;
      const double tail = (q < 1.0) ? m2 * q / (1.0 - q) : std::numeric_limits<double>::infinity();
      if (!(tail <= model.tail_tol * std::max(scale, 1e-300)))
        throw ConvergenceFailure("layered sphere series not converged at truncation order", tail);
    }
  }

  // Add the closed-form primary field for points in the source layer and fix
  // the zero-mean gauge over the evaluation set.
  for (std::size_t p = 0; p < m; ++p)
    if (st[p].layer == 0) values[p] += uInf(d, sig[0], points[p]);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  for (double& v : values) v -= mean;
  return values;
}

}  // namespace eegfwd
