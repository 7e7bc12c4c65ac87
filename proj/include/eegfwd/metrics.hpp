#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "eegfwd/analytic.hpp"
#include "eegfwd/assembly.hpp"
#include "eegfwd/core.hpp"
#include "eegfwd/femcore.hpp"
#include "eegfwd/hexmesh.hpp"

namespace eegfwd {

// ---------------------------------------------------------------------------
// Forward solution and point evaluation
// ---------------------------------------------------------------------------

/// Correction-potential coefficients plus everything needed to reconstruct
/// the full potential u_h = u_h^corr + u_inf and to audit the solve.
struct ForwardSolution {
  Scheme scheme = Scheme::Cg;
  std::vector<double> coeffs;  // mean-zero gauge
  const HexMesh* mesh = nullptr;
  const ConductivityField* field = nullptr;
  SubtractionSplit split;
  Dipole dipole;
  double eta = 0.39;
  QuadratureConfig quad;  // rules used at assembly; the audit reuses them
};

/// u_h^corr at a point inside the given cell.
inline double evaluateCorrection(const ForwardSolution& sol, std::int32_t cell, const Vec3& x) {
  const BasisSet& basis =
      basisFor(sol.scheme == Scheme::Cg ? BasisKind::CgTrilinear : BasisKind::DgOrthonormalQ1);
  const BasisEval e = basis.eval(sol.mesh->toReference(cell, x));
  double v = 0.0;
  if (sol.scheme == Scheme::Cg) {
    for (int i = 0; i < 8; ++i) v += sol.coeffs[sol.mesh->cells[cell][i]] * e.values[i];
  } else {
    for (int i = 0; i < 8; ++i) v += sol.coeffs[static_cast<std::size_t>(cell) * 8 + i] * e.values[i];
  }
  return v;
}

/// grad u_h^corr at a point inside the given cell (physical coordinates).
inline Vec3 evaluateCorrectionGradient(const ForwardSolution& sol, std::int32_t cell,
                                       const Vec3& x) {
  const BasisSet& basis =
      basisFor(sol.scheme == Scheme::Cg ? BasisKind::CgTrilinear : BasisKind::DgOrthonormalQ1);
  const BasisEval e = basis.eval(sol.mesh->toReference(cell, x));
  Vec3 g{};
  if (sol.scheme == Scheme::Cg) {
    for (int i = 0; i < 8; ++i) g += e.gradients[i] * sol.coeffs[sol.mesh->cells[cell][i]];
  } else {
    for (int i = 0; i < 8; ++i)
      g += e.gradients[i] * sol.coeffs[static_cast<std::size_t>(cell) * 8 + i];
  }
  return g / sol.mesh->cell_edge_mm;
}

inline void meanCenter(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

/// Full potential u_h^corr + u_inf at the points, mean-centered over the
/// point set. Cell ids may be supplied (surface samplings know theirs);
/// otherwise points are located in the mesh.
inline std::vector<double> evaluatePotential(const ForwardSolution& sol,
                                             const std::vector<Vec3>& points,
                                             const std::vector<std::int32_t>* cells = nullptr) {
  std::vector<double> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::int32_t cell = cells ? (*cells)[p] : locateCell(*sol.mesh, points[p]);
    if (cell < 0) throw InvalidInput("evaluation point lies in no mesh cell");
    out[p] = evaluateCorrection(sol, cell, points[p]) +
             uInf(sol.dipole, sol.split.sigma_inf, points[p]);
  }
  meanCenter(out);
  return out;
}

// ---------------------------------------------------------------------------
// Surface sampling
// ---------------------------------------------------------------------------

/// Centroids of all boundary faces belonging to skin cells: the "whole
/// outer layer" evaluation set shared by numeric and analytic solutions.
struct SurfaceSampling {
  std::vector<Vec3> points;
  std::vector<std::int32_t> cells;
  std::vector<std::uint8_t> local_faces;
};

inline SurfaceSampling makeSurfaceSampling(const HexMesh& mesh, const Skeleton& skeleton,
                                           const CompartmentTable& table) {
  const Compartment* skin = table.findRole(TissueRole::Skin);
  if (!skin) throw InvalidInput("compartment table has no skin label");
  SurfaceSampling s;
  const double h = mesh.cell_edge_mm;
  for (const auto& bf : skeleton.boundary_faces) {
    if (mesh.cell_labels[bf.cell] != skin->label) continue;
    const Vec3 c = mesh.cellMinCorner(bf.cell) + faceToCellRef(bf.local_face, 0.5, 0.5) * h;
    s.points.push_back(c);
    s.cells.push_back(bf.cell);
    s.local_faces.push_back(bf.local_face);
  }
  if (s.points.empty()) throw InvalidInput("model has no skin boundary faces");
  return s;
}

// ---------------------------------------------------------------------------
// Error metrics (inputs must be mean-centered)
// ---------------------------------------------------------------------------

namespace detail {
inline double l2norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}
inline void requireCenteredNonzero(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw InvalidInput(std::string(what) + ": empty vector");
  const double n = l2norm(v);
  if (n == 0.0) throw InvalidInput(std::string(what) + ": zero vector");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (std::abs(mean) > 1e-9 * n)
    throw InvalidInput(std::string(what) + ": inputs must be mean-centered");
}
}  // namespace detail

/// Relative difference measure, || u_h/|u_h| - u/|u| ||_2, in [0,2].
inline double rdm(const std::vector<double>& u_h, const std::vector<double>& u) {
  if (u_h.size() != u.size()) throw InvalidInput("rdm: length mismatch");
  detail::requireCenteredNonzero(u_h, "rdm");
  detail::requireCenteredNonzero(u, "rdm");
  const double nh = detail::l2norm(u_h), nu = detail::l2norm(u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u_h[i] / nh - u[i] / nu;
    s += d * d;
  }
  return std::sqrt(s);
}

/// Logarithmic magnitude error ln(|u_h| / |u|); about the relative
/// magnitude change for small deviations.
inline double lnMag(const std::vector<double>& u_h, const std::vector<double>& u) {
  if (u_h.size() != u.size()) throw InvalidInput("lnMag: length mismatch");
  detail::requireCenteredNonzero(u_h, "lnMag");
  detail::requireCenteredNonzero(u, "lnMag");
  return std::log(detail::l2norm(u_h) / detail::l2norm(u));
}

// ---------------------------------------------------------------------------
// Flux reconstruction and local flux metrics
// ---------------------------------------------------------------------------

/// Cell-centroid current density j = sigma (grad u_h^corr + grad u_inf).
/// The source cell is marked invalid when the dipole sits exactly at its
/// centroid (the fixed visualization dipole does).
struct FluxField {
  std::vector<Vec3> j;
  std::vector<char> valid;
};

inline FluxField computeFlux(const ForwardSolution& sol) {
  const HexMesh& mesh = *sol.mesh;
  const std::size_t nc = mesh.cells.size();
  FluxField f;
  f.j.resize(nc);
  f.valid.assign(nc, 1);
  for (std::size_t c = 0; c < nc; ++c) {
    const Vec3 xc = mesh.cellCenter(static_cast<std::int32_t>(c));
    const Vec3 d = xc - sol.dipole.position_mm;
    if (dot(d, d) == 0.0) {
      f.j[c] = Vec3{};
      f.valid[c] = 0;
      continue;
    }
    const Vec3 g = evaluateCorrectionGradient(sol, static_cast<std::int32_t>(c), xc) +
                   gradUInf(sol.dipole, sol.split.sigma_inf, xc);
    f.j[c] = g * sol.field->sigma[c];
  }
  return f;
}

struct LocalFluxMetrics {
  std::vector<double> lnmag_loc;  // NaN where undefined
  std::vector<Vec3> totdiff;
  std::vector<char> defined;
};

/// Per-cell ln(|j_cg|/|j_dg|) and j_cg - j_dg.
inline LocalFluxMetrics localFluxMetrics(const FluxField& j_cg, const FluxField& j_dg) {
  if (j_cg.j.size() != j_dg.j.size()) throw InvalidInput("flux fields on different meshes");
  const std::size_t nc = j_cg.j.size();
  LocalFluxMetrics m;
  m.lnmag_loc.resize(nc);
  m.totdiff.resize(nc);
  m.defined.assign(nc, 1);
  for (std::size_t c = 0; c < nc; ++c) {
    m.totdiff[c] = j_cg.j[c] - j_dg.j[c];
    const double ncg = norm(j_cg.j[c]), ndg = norm(j_dg.j[c]);
    if (!j_cg.valid[c] || !j_dg.valid[c] || ndg == 0.0 || ncg == 0.0) {
      m.lnmag_loc[c] = std::numeric_limits<double>::quiet_NaN();
      m.defined[c] = 0;
    } else {
      m.lnmag_loc[c] = std::log(ncg / ndg);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Discrete conservation audit (DG)
// ---------------------------------------------------------------------------

struct ConservationReport {
  std::vector<double> residual;  // per cell
  double max_residual = 0.0;
  double flux_scale = 0.0;  // max per-cell sum of absolute face fluxes
};

/// Recompute, independently of the assembled system, the per-cell balance
///   sum over faces of the discrete flux <sigma grad u_h> - eta sh/h [u_h]
/// against the face form of the correction source. The residual is bounded
/// by the solver tolerance scaled by the local flux magnitudes.
inline ConservationReport checkConservation(const ForwardSolution& sol,
                                            const Skeleton& skeleton) {
  if (sol.scheme != Scheme::Dg)
    throw InvalidInput("conservation audit is only supported for DG solutions");
  const HexMesh& mesh = *sol.mesh;
  const ConductivityField& field = *sol.field;
  const double h = mesh.cell_edge_mm;
  const BasisSet& basis = basisFor(BasisKind::DgOrthonormalQ1);
  const std::size_t nc = mesh.cells.size();

  ConservationReport rep;
  rep.residual.assign(nc, 0.0);
  std::vector<double> absflux(nc, 0.0);

  // Discrete flux of u_h^corr through internal faces (polynomial, the
  // stiffness rule integrates it exactly).
  const QuadratureRule frule = quadratureRule(Entity::Face, sol.quad.stiffness_degree);
  std::array<detail::TraceTable, 6> tr;
  for (int f = 0; f < 6; ++f) tr[f] = detail::makeTraceTable(basis, frule, f);
  const DipoleCarrier carrier{sol.dipole, sol.split.sigma_inf};

  for (const auto& fc : skeleton.internal_faces) {
    const FaceCoupling cw = faceCoupling(field.sigma[fc.cell_e], field.sigma[fc.cell_f], h);
    const detail::TraceTable& te = tr[2 * fc.axis + 1];
    const detail::TraceTable& tf = tr[2 * fc.axis];
    const double* ce = &sol.coeffs[static_cast<std::size_t>(fc.cell_e) * 8];
    const double* cf = &sol.coeffs[static_cast<std::size_t>(fc.cell_f) * 8];
    double flux = 0.0;
    for (std::size_t q = 0; q < frule.points.size(); ++q) {
      double ue = 0.0, uf = 0.0, ge = 0.0, gf = 0.0;
      for (int i = 0; i < 8; ++i) {
        ue += ce[i] * te.value[q][i];
        ge += ce[i] * te.dnorm[q][i];
        uf += cf[i] * tf.value[q][i];
        gf += cf[i] * tf.dnorm[q][i];
      }
      const double avg_flux =
          averageWeighted(field.sigma[fc.cell_e] * ge / h, field.sigma[fc.cell_f] * gf / h,
                          cw.w_ef, cw.w_fe);
      const double jump = jumpScalar(ue, uf);
      flux += frule.weights[q] * h * h *
              (avg_flux -
               sol.eta * penaltyDegreeScale() * cw.sigma_hat / cw.h_gamma * jump);
    }
    rep.residual[fc.cell_e] += flux;
    rep.residual[fc.cell_f] -= flux;
    absflux[fc.cell_e] += std::abs(flux);
    absflux[fc.cell_f] += std::abs(flux);
  }

  // Source side, via its face form (same rules as assembly).
  const QuadratureRule srule = quadratureRule(Entity::Face, sol.quad.face_rhs_degree);
  for (const auto& fc : skeleton.internal_faces) {
    const double sc_e = sol.split.sigma_corr[fc.cell_e];
    const double sc_f = sol.split.sigma_corr[fc.cell_f];
    if (sc_e == 0.0 && sc_f == 0.0) continue;
    const FaceCoupling cw = faceCoupling(field.sigma[fc.cell_e], field.sigma[fc.cell_f], h);
    const double avg = averageWeighted(sc_e, sc_f, cw.w_ef, cw.w_fe);
    const Vec3 n = axisVector(fc.axis);
    const Vec3 base = mesh.cellMinCorner(fc.cell_e);
    double flux = 0.0;
    for (std::size_t q = 0; q < srule.points.size(); ++q) {
      const Vec3 p = faceToCellRef(2 * fc.axis + 1, srule.points[q].x, srule.points[q].y);
      flux += srule.weights[q] * h * h * avg * dot(carrier.grad(base + p * h), n);
    }
    rep.residual[fc.cell_e] += flux;
    rep.residual[fc.cell_f] -= flux;
    absflux[fc.cell_e] += std::abs(flux);
    absflux[fc.cell_f] += std::abs(flux);
  }

  // Prescribed boundary flux: the weak Neumann data carries the outflow
  // -sigma_inf dn u_inf through boundary faces.
  const QuadratureRule brule = quadratureRule(Entity::Face, sol.quad.boundary_degree);
  for (const auto& bf : skeleton.boundary_faces) {
    const Vec3 n = Skeleton::outwardNormal(bf.local_face);
    const Vec3 base = mesh.cellMinCorner(bf.cell);
    double flux = 0.0;
    for (std::size_t q = 0; q < brule.points.size(); ++q) {
      const Vec3 p = faceToCellRef(bf.local_face, brule.points[q].x, brule.points[q].y);
      flux += brule.weights[q] * h * h * sol.split.sigma_inf *
              dot(carrier.grad(base + p * h), n);
    }
    rep.residual[bf.cell] -= flux;
    absflux[bf.cell] += std::abs(flux);
  }

  for (std::size_t c = 0; c < nc; ++c) {
    rep.max_residual = std::max(rep.max_residual, std::abs(rep.residual[c]));
    rep.flux_scale = std::max(rep.flux_scale, absflux[c]);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Source placement
// ---------------------------------------------------------------------------

namespace detail {
/// Deterministic uniform doubles from raw mt19937_64 bits, so that seeds
/// reproduce across platforms and standard library versions.
class UniformBits {
 public:
  explicit UniformBits(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  double next() {
    // xorshift* keeps this self-contained and stable.
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    const std::uint64_t r = state_ * 0x2545f4914f6cdd1dull;
    return static_cast<double>(r >> 11) * (1.0 / 9007199254740992.0);
  }

 private:
  std::uint64_t state_;
};
}  // namespace detail

/// Random sources at the requested eccentricities: positions uniform on the
/// sphere of radius e * brain radius, moments radial (parallel) or
/// tangential (random in the tangent plane). Deterministic under the seed.
inline std::vector<Dipole> placeSources(const LayeredSphereModel& model,
                                        const std::vector<double>& eccentricities,
                                        int count_per_ecc, Dipole::Orientation orientation,
                                        std::uint64_t seed, double moment_scale = 1.0) {
  model.validate();
  if (count_per_ecc < 1) throw InvalidInput("count_per_ecc must be >= 1");
  if (orientation == Dipole::Orientation::Free)
    throw InvalidInput("source placement needs a radial or tangential orientation");
  for (double e : eccentricities)
    if (e < 0.0 || e >= 1.0) throw InvalidInput("eccentricity must lie in [0,1)");

  const double r_brain = model.radii_mm.front();
  detail::UniformBits rng(seed);
  std::vector<Dipole> out;
  out.reserve(eccentricities.size() * count_per_ecc);
  int id = 0;
  for (double e : eccentricities)
    for (int i = 0; i < count_per_ecc; ++i) {
      const double z = 2.0 * rng.next() - 1.0;
      const double phi = 2.0 * pi * rng.next();
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec3 dir{s * std::cos(phi), s * std::sin(phi), z};
      Dipole d;
      d.position_mm = dir * (e * r_brain);
      d.eccentricity = e;
      d.orientation = orientation;
      d.id = id++;
      const Vec3 radial = (e == 0.0) ? Vec3{0.0, 0.0, 1.0} : dir;  // +z at the center
      if (orientation == Dipole::Orientation::Radial) {
        d.moment = radial * moment_scale;
        rng.next();  // keep the draw count uniform across orientations
      } else {
        // Random direction in the tangent plane of `radial`.
        const Vec3 seed_axis =
            std::abs(radial.x) <= std::abs(radial.y)
                ? (std::abs(radial.x) <= std::abs(radial.z) ? Vec3{1, 0, 0} : Vec3{0, 0, 1})
                : (std::abs(radial.y) <= std::abs(radial.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
        const Vec3 t1 = normalized(cross(radial, seed_axis));
        const Vec3 t2 = cross(radial, t1);
        const double theta = 2.0 * pi * rng.next();
        d.moment = (t1 * std::cos(theta) + t2 * std::sin(theta)) * moment_scale;
      }
      out.push_back(d);
    }
  return out;
}

}  // namespace eegfwd
