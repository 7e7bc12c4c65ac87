#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegfwd/analytic.hpp"
#include "eegfwd/block_matrix.hpp"
#include "eegfwd/core.hpp"
#include "eegfwd/femcore.hpp"
#include "eegfwd/hexmesh.hpp"
#include "eegfwd/labelgrid.hpp"

namespace eegfwd {

// ---------------------------------------------------------------------------
// Conductivity data and face coupling quantities
// ---------------------------------------------------------------------------

struct ConductivityField {
  std::vector<double> sigma;  // per cell, S/m
};

inline ConductivityField makeConductivityField(const HexMesh& mesh,
                                               const CompartmentTable& table) {
  ConductivityField f;
  f.sigma.reserve(mesh.cells.size());
  for (std::uint8_t lab : mesh.cell_labels) f.sigma.push_back(table.conductivity(lab));
  return f;
}

/// Conductivity-dependent face quantities: weights omega_ef + omega_fe = 1,
/// harmonic face conductivity, and the face width min(|E|)/|gamma| (= h for
/// uniform cubes).
struct FaceCoupling {
  double w_ef, w_fe, sigma_hat, h_gamma;
};

/// Polynomial-degree scaling k(k + d - 1) of the interior penalty, k = 1,
/// d = 3. eta = 0.39 is coercive only together with this factor; the plain
/// eta sigma_hat / h_gamma scaling turns indefinite below eta ~ 1.
inline constexpr double penaltyDegreeScale() { return 3.0; }

inline FaceCoupling faceCoupling(double sigma_e, double sigma_f, double h) {
  FaceCoupling c;
  const double s = sigma_e + sigma_f;
  c.w_ef = sigma_f / s;
  c.w_fe = sigma_e / s;
  c.sigma_hat = 2.0 * sigma_e * sigma_f / s;
  c.h_gamma = (h * h * h) / (h * h);
  return c;
}

// Face operators for piecewise values along a fixed normal from e to f.
// The jump of a scalar is a vector along n; we carry its signed magnitude.
// The jump of a vector is the scalar v_e.n - v_f.n.
inline double jumpScalar(double ue, double uf) { return ue - uf; }
inline double jumpNormal(const Vec3& ve, const Vec3& vf, const Vec3& n) {
  return dot(ve, n) - dot(vf, n);
}
inline double averageWeighted(double xe, double xf, double w_ef, double w_fe) {
  return w_ef * xe + w_fe * xf;
}
inline double averageSwapped(double xe, double xf, double w_ef, double w_fe) {
  return w_fe * xe + w_ef * xf;
}

// ---------------------------------------------------------------------------
// Subtraction split
// ---------------------------------------------------------------------------

/// sigma = sigma_inf + sigma_corr with sigma_inf the conductivity of the
/// cell containing the source. The homogeneous-neighborhood flag is the
/// discrete stand-in for the open neighborhood the split requires: it holds
/// iff all face-neighbors of the source cell share its label.
struct SubtractionSplit {
  double sigma_inf = 0.0;
  std::int32_t source_cell = -1;
  bool homogeneous_neighborhood = false;
  std::vector<double> sigma_corr;
};

inline SubtractionSplit sourceConductivity(const HexMesh& mesh, const ConductivityField& field,
                                           const Dipole& d) {
  const std::int32_t cell = locateCell(mesh, d.position_mm);
  if (cell < 0) throw InvalidInput("dipole position lies outside the mesh");
  SubtractionSplit split;
  split.source_cell = cell;
  split.sigma_inf = field.sigma[cell];
  split.homogeneous_neighborhood = true;
  const std::uint8_t lab = mesh.cell_labels[cell];
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const std::int32_t nbr = mesh.neighbor(cell, axis, side);
      if (nbr < 0 || mesh.cell_labels[nbr] != lab) split.homogeneous_neighborhood = false;
    }
  split.sigma_corr.resize(field.sigma.size());
  for (std::size_t c = 0; c < field.sigma.size(); ++c)
    split.sigma_corr[c] = field.sigma[c] - split.sigma_inf;
  return split;
}

// ---------------------------------------------------------------------------
// DOF layout and linear system
// ---------------------------------------------------------------------------

enum class Scheme { Cg, Dg };

inline const char* schemeName(Scheme s) { return s == Scheme::Cg ? "cg" : "dg"; }

struct DofLayout {
  Scheme scheme = Scheme::Cg;
  int block = 1;           // 1 per vertex (CG) or 8 per cell (DG)
  std::int32_t count = 0;  // vertices or cells
  std::int64_t dofs() const { return static_cast<std::int64_t>(block) * count; }
};

/// Coefficient vector of the constant function 1: all-ones for CG nodal
/// coefficients; for the DG basis the constant is carried by mode 0 alone.
inline std::vector<double> kernelVector(const DofLayout& layout) {
  std::vector<double> k(layout.dofs(), 0.0);
  if (layout.scheme == Scheme::Cg) {
    std::fill(k.begin(), k.end(), 1.0);
  } else {
    for (std::int32_t c = 0; c < layout.count; ++c) k[static_cast<std::size_t>(c) * 8] = 1.0;
  }
  return k;
}

struct LinearSystem {
  BlockSparseMatrix A;
  std::vector<double> b;
  DofLayout layout;
};

struct QuadratureConfig {
  int stiffness_degree = 3;   // polynomial terms: exact at this order
  int volume_rhs_degree = 5;  // grad u_inf is curved
  int face_rhs_degree = 5;
  int boundary_degree = 11;   // keeps the discrete compatibility defect tiny
};

/// Carrier of the singular field: anything providing grad(x). The dipole
/// carrier is the production case; tests inject smooth manufactured fields.
struct DipoleCarrier {
  Dipole dipole;
  double sigma_inf;
  Vec3 grad(const Vec3& x) const { return gradUInf(dipole, sigma_inf, x); }
};

namespace detail {

/// Basis traces on a cell face: values and normal-direction reference
/// derivatives at the face quadrature points.
struct TraceTable {
  std::vector<std::array<double, 8>> value;  // [q][i]
  std::vector<std::array<double, 8>> dnorm;  // [q][i], d/d(axis) in reference coords
};

inline TraceTable makeTraceTable(const BasisSet& basis, const QuadratureRule& face_rule,
                                 int local_face) {
  TraceTable t;
  const int axis = local_face / 2;
  t.value.resize(face_rule.points.size());
  t.dnorm.resize(face_rule.points.size());
  for (std::size_t q = 0; q < face_rule.points.size(); ++q) {
    const Vec3 p = faceToCellRef(local_face, face_rule.points[q].x, face_rule.points[q].y);
    const BasisEval e = basis.eval(p);
    for (int i = 0; i < 8; ++i) {
      t.value[q][i] = e.values[i];
      t.dnorm[q][i] = e.gradients[i][axis];
    }
  }
  return t;
}

/// Reference stiffness \int grad phi_i . grad phi_j over the unit cube.
inline std::array<std::array<double, 8>, 8> referenceStiffness(const BasisSet& basis,
                                                               int degree) {
  const QuadratureRule rule = quadratureRule(Entity::Cell, degree);
  std::array<std::array<double, 8>, 8> S{};
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const BasisEval e = basis.eval(rule.points[q]);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        S[i][j] += rule.weights[q] * dot(e.gradients[i], e.gradients[j]);
  }
  return S;
}

/// Deduplicating block inserter: uniform meshes produce only a handful of
/// distinct blocks, so the matrix stores dictionary indices.
class BlockDict {
 public:
  explicit BlockDict(int bb) : bb_(bb) {}
  std::uint32_t intern(const double* blk, std::vector<double>& store) {
    key_.assign(blk, blk + bb_);
    auto [it, fresh] = map_.try_emplace(key_, static_cast<std::uint32_t>(map_.size()));
    if (fresh) store.insert(store.end(), blk, blk + bb_);
    return it->second;
  }

 private:
  int bb_;
  std::vector<double> key_;
  std::map<std::vector<double>, std::uint32_t> map_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// CG scheme (vertex-based trilinear elements)
// ---------------------------------------------------------------------------

inline BlockSparseMatrix assembleOperatorCG(const HexMesh& mesh, const ConductivityField& field,
                                            const QuadratureConfig& quad = {}) {
  const int nv = static_cast<int>(mesh.vertices.size());
  const double h = mesh.cell_edge_mm;

  // Vertex lattice coordinates for adjacency enumeration.
  std::vector<std::array<int, 3>> vc(nv);
  for (int v = 0; v < nv; ++v)
    for (int a = 0; a < 3; ++a)
      vc[v][a] =
          static_cast<int>(std::lround((mesh.vertices[v][a] - mesh.lattice_origin[a]) / h));

  BlockSparseMatrix A;
  A.block_size = 1;
  A.block_rows = nv;
  A.rowptr.assign(nv + 1, 0);

  // Vertex pair (v, v+d) couples iff some included cell touches both.
  auto coupled = [&](const std::array<int, 3>& c, int di, int dj, int dk) {
    const int d[3] = {di, dj, dk};
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(c[a] - 1, c[a] + d[a] - 1);
      hi[a] = std::min(c[a], c[a] + d[a]);
      if (lo[a] > hi[a]) return false;
    }
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int k = lo[2]; k <= hi[2]; ++k)
          if (mesh.cellAt(i, j, k) >= 0) return true;
    return false;
  };

  const std::int64_t vnx = mesh.lattice_dims[0] + 1;
  const std::int64_t vny = mesh.lattice_dims[1] + 1;
  std::unordered_map<std::int64_t, std::int32_t> vertex_of_key;
  vertex_of_key.reserve(nv * 2);
  for (int v = 0; v < nv; ++v)
    vertex_of_key.emplace(vc[v][0] + vnx * (vc[v][1] + vny * vc[v][2]), v);

  std::vector<std::int32_t> cols;
  cols.reserve(static_cast<std::size_t>(nv) * 27);
  std::vector<std::int32_t> row_cols;
  for (int v = 0; v < nv; ++v) {
    row_cols.clear();
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!coupled(vc[v], di, dj, dk)) continue;
          const std::int64_t key =
              (vc[v][0] + di) + vnx * ((vc[v][1] + dj) + vny * (vc[v][2] + dk));
          const auto it = vertex_of_key.find(key);
          if (it != vertex_of_key.end()) row_cols.push_back(it->second);
        }
    std::sort(row_cols.begin(), row_cols.end());
    cols.insert(cols.end(), row_cols.begin(), row_cols.end());
    A.rowptr[v + 1] = static_cast<std::int64_t>(cols.size());
  }
  A.col = std::move(cols);
  A.store.assign(A.col.size(), 0.0);

  const auto S = detail::referenceStiffness(basisFor(BasisKind::CgTrilinear),
                                            quad.stiffness_degree);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const double scale = field.sigma[c] * h;
    const auto& cv = mesh.cells[c];
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const std::int64_t k = A.findBlock(cv[i], cv[j]);
        A.store[k] += scale * S[i][j];
      }
  }
  return A;
}

template <class Carrier>
inline std::vector<double> assembleRhsCGWith(const HexMesh& mesh, const Skeleton& skeleton,
                                             const ConductivityField& field,
                                             const SubtractionSplit& split,
                                             const Carrier& carrier,
                                             const QuadratureConfig& quad = {}) {
  const double h = mesh.cell_edge_mm;
  const BasisSet& basis = basisFor(BasisKind::CgTrilinear);
  std::vector<double> b(mesh.vertices.size(), 0.0);

  // Volume term: skips every cell with vanishing sigma_corr, which also
  // keeps the integrands smooth (the source cell carries the singularity).
  const QuadratureRule vol = quadratureRule(Entity::Cell, quad.volume_rhs_degree);
  std::vector<BasisEval> vol_basis(vol.points.size());
  for (std::size_t q = 0; q < vol.points.size(); ++q) vol_basis[q] = basis.eval(vol.points[q]);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (split.sigma_corr[c] == 0.0) continue;
    const Vec3 base = mesh.cellMinCorner(c);
    const double scale = split.sigma_corr[c] * h * h;
    for (std::size_t q = 0; q < vol.points.size(); ++q) {
      const Vec3 x = base + vol.points[q] * h;
      const Vec3 g = carrier.grad(x);
      const double wq = vol.weights[q] * scale;
      for (int i = 0; i < 8; ++i)
        b[mesh.cells[c][i]] -= wq * dot(g, vol_basis[q].gradients[i]);
    }
  }

  // Boundary term over all boundary faces.
  const QuadratureRule brule = quadratureRule(Entity::Face, quad.boundary_degree);
  std::array<std::optional<detail::TraceTable>, 6> traces;
  for (const auto& bf : skeleton.boundary_faces) {
    if (!traces[bf.local_face]) traces[bf.local_face] = detail::makeTraceTable(basis, brule, bf.local_face);
    const detail::TraceTable& tt = *traces[bf.local_face];
    const Vec3 n = Skeleton::outwardNormal(bf.local_face);
    const Vec3 base = mesh.cellMinCorner(bf.cell);
    const auto& cv = mesh.cells[bf.cell];
    for (std::size_t q = 0; q < brule.points.size(); ++q) {
      const Vec3 p = faceToCellRef(bf.local_face, brule.points[q].x, brule.points[q].y);
      const Vec3 x = base + p * h;
      const double flux = split.sigma_inf * dot(carrier.grad(x), n);
      const double wq = brule.weights[q] * h * h * flux;
      for (int i = 0; i < 8; ++i) b[cv[i]] -= wq * tt.value[q][i];
    }
  }
  return b;
}

inline std::vector<double> assembleRhsCG(const HexMesh& mesh, const Skeleton& skeleton,
                                         const ConductivityField& field,
                                         const SubtractionSplit& split, const Dipole& d,
                                         const QuadratureConfig& quad = {},
                                         std::vector<std::string>* warnings = nullptr) {
  if (!split.homogeneous_neighborhood && warnings)
    warnings->push_back("dipole source cell has mixed-label neighborhood; "
                        "solution is assembled but flagged as excluded");
  return assembleRhsCGWith(mesh, skeleton, field, split, DipoleCarrier{d, split.sigma_inf},
                           quad);
}

// ---------------------------------------------------------------------------
// DG scheme (SWIP: symmetric weighted interior penalty)
// ---------------------------------------------------------------------------
// Volume term + for every internal face the weighted consistency term, its
// symmetrization, and the penalty eta * (sigma_hat / h_gamma) [u][v]. Only
// internal faces couple; boundary conditions act through the right-hand
// side alone.

inline BlockSparseMatrix assembleOperatorDG(const HexMesh& mesh, const Skeleton& skeleton,
                                            const ConductivityField& field, double eta,
                                            const QuadratureConfig& quad = {}) {
  if (eta <= 0.0) throw InvalidInput("penalty parameter eta must be positive");
  const int nc = static_cast<int>(mesh.cells.size());
  const double h = mesh.cell_edge_mm;
  const BasisSet& basis = basisFor(BasisKind::DgOrthonormalQ1);

  BlockSparseMatrix A;
  A.block_size = 8;
  A.block_rows = nc;
  A.rowptr.assign(nc + 1, 0);
  A.col.reserve(static_cast<std::size_t>(nc) * 7);
  for (int c = 0; c < nc; ++c) {
    std::array<std::int32_t, 7> row;
    int n = 0;
    row[n++] = c;
    for (int axis = 0; axis < 3; ++axis)
      for (int side = 0; side < 2; ++side) {
        const std::int32_t nbr = mesh.neighbor(c, axis, side);
        if (nbr >= 0) row[n++] = nbr;
      }
    std::sort(row.begin(), row.begin() + n);
    A.col.insert(A.col.end(), row.begin(), row.begin() + n);
    A.rowptr[c + 1] = static_cast<std::int64_t>(A.col.size());
  }
  A.dict_idx.resize(A.col.size());

  const auto S = detail::referenceStiffness(basis, quad.stiffness_degree);
  const QuadratureRule frule = quadratureRule(Entity::Face, quad.stiffness_degree);
  std::array<detail::TraceTable, 6> tr;
  for (int f = 0; f < 6; ++f) tr[f] = detail::makeTraceTable(basis, frule, f);

  // Face contribution to the block (test_side, trial_side) as seen with the
  // normal along +axis from e (side +) to f (side -).
  const std::size_t nq = frule.points.size();
  auto faceBlock = [&](int axis, bool test_in_e, bool trial_in_e, double sigma_e,
                       double sigma_f, double* out) {
    const FaceCoupling fc = faceCoupling(sigma_e, sigma_f, h);
    const detail::TraceTable& te = tr[2 * axis + 1];
    const detail::TraceTable& tf = tr[2 * axis];
    const detail::TraceTable& ti = test_in_e ? te : tf;
    const detail::TraceTable& tj = trial_in_e ? te : tf;
    const double wsig_i = test_in_e ? fc.w_ef * sigma_e : fc.w_fe * sigma_f;
    const double wsig_j = trial_in_e ? fc.w_ef * sigma_e : fc.w_fe * sigma_f;
    const double sign_i = test_in_e ? 1.0 : -1.0;   // jump sign of the test side
    const double sign_j = trial_in_e ? 1.0 : -1.0;
    // eta * degree-scale * sigma_hat / h_gamma, with ds = h^2 w folded in.
    const double pen = eta * penaltyDegreeScale() * fc.sigma_hat * (h / fc.h_gamma) * h;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
          const double consist = -wsig_j * tj.dnorm[q][j] * sign_i * ti.value[q][i];
          const double sym = -wsig_i * ti.dnorm[q][i] * sign_j * tj.value[q][j];
          const double jump = sign_i * sign_j * ti.value[q][i] * tj.value[q][j];
          s += frule.weights[q] * ((consist + sym) * h + pen * jump);
        }
        out[i * 8 + j] += s;
      }
  };

  detail::BlockDict dict(64);
  double blk[64];
  for (int c = 0; c < nc; ++c) {
    for (std::int64_t k = A.rowptr[c]; k < A.rowptr[c + 1]; ++k) {
      const std::int32_t cc = A.col[k];
      std::fill(blk, blk + 64, 0.0);
      if (cc == c) {
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) blk[i * 8 + j] = field.sigma[c] * h * S[i][j];
        for (int axis = 0; axis < 3; ++axis)
          for (int side = 0; side < 2; ++side) {
            const std::int32_t nbr = mesh.neighbor(c, axis, side);
            if (nbr < 0) continue;
            if (side == 1)  // c is the lower cell e
              faceBlock(axis, true, true, field.sigma[c], field.sigma[nbr], blk);
            else  // c is the upper cell f
              faceBlock(axis, false, false, field.sigma[nbr], field.sigma[c], blk);
          }
      } else {
        // Off-diagonal: the shared face, with roles determined by side.
        const auto& ca = mesh.cell_coords[c];
        const auto& cb = mesh.cell_coords[cc];
        int axis = 0;
        for (int a = 0; a < 3; ++a)
          if (ca[a] != cb[a]) axis = a;
        if (cb[axis] == ca[axis] + 1)  // c = e (test), cc = f (trial)
          faceBlock(axis, true, false, field.sigma[c], field.sigma[cc], blk);
        else  // c = f, cc = e
          faceBlock(axis, false, true, field.sigma[cc], field.sigma[c], blk);
      }
      A.dict_idx[k] = dict.intern(blk, A.store);
    }
  }
  return A;
}

template <class Carrier>
inline std::vector<double> assembleRhsDGWith(const HexMesh& mesh, const Skeleton& skeleton,
                                             const ConductivityField& field,
                                             const SubtractionSplit& split,
                                             const Carrier& carrier,
                                             const QuadratureConfig& quad = {}) {
  const double h = mesh.cell_edge_mm;
  const BasisSet& basis = basisFor(BasisKind::DgOrthonormalQ1);
  std::vector<double> b(mesh.cells.size() * 8, 0.0);

  // Volume term.
  const QuadratureRule vol = quadratureRule(Entity::Cell, quad.volume_rhs_degree);
  std::vector<BasisEval> vol_basis(vol.points.size());
  for (std::size_t q = 0; q < vol.points.size(); ++q) vol_basis[q] = basis.eval(vol.points[q]);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (split.sigma_corr[c] == 0.0) continue;
    const Vec3 base = mesh.cellMinCorner(static_cast<std::int32_t>(c));
    const double scale = split.sigma_corr[c] * h * h;
    for (std::size_t q = 0; q < vol.points.size(); ++q) {
      const Vec3 x = base + vol.points[q] * h;
      const Vec3 g = carrier.grad(x);
      const double wq = vol.weights[q] * scale;
      for (int i = 0; i < 8; ++i)
        b[c * 8 + i] -= wq * dot(g, vol_basis[q].gradients[i]);
    }
  }

  // Internal-face term with the sigma-weighted average of sigma_corr.
  const QuadratureRule frule = quadratureRule(Entity::Face, quad.face_rhs_degree);
  std::array<detail::TraceTable, 6> tr;
  for (int f = 0; f < 6; ++f) tr[f] = detail::makeTraceTable(basis, frule, f);
  for (const auto& fc : skeleton.internal_faces) {
    const double sc_e = split.sigma_corr[fc.cell_e];
    const double sc_f = split.sigma_corr[fc.cell_f];
    if (sc_e == 0.0 && sc_f == 0.0) continue;
    const FaceCoupling cw = faceCoupling(field.sigma[fc.cell_e], field.sigma[fc.cell_f], h);
    const double avg = averageWeighted(sc_e, sc_f, cw.w_ef, cw.w_fe);
    const Vec3 n = axisVector(fc.axis);
    const detail::TraceTable& te = tr[2 * fc.axis + 1];
    const detail::TraceTable& tf = tr[2 * fc.axis];
    const Vec3 base = mesh.cellMinCorner(fc.cell_e);
    for (std::size_t q = 0; q < frule.points.size(); ++q) {
      const Vec3 p = faceToCellRef(2 * fc.axis + 1, frule.points[q].x, frule.points[q].y);
      const Vec3 x = base + p * h;
      const double gn = avg * dot(carrier.grad(x), n);
      const double wq = frule.weights[q] * h * h * gn;
      for (int i = 0; i < 8; ++i) {
        b[static_cast<std::size_t>(fc.cell_e) * 8 + i] += wq * te.value[q][i];
        b[static_cast<std::size_t>(fc.cell_f) * 8 + i] -= wq * tf.value[q][i];
      }
    }
  }

  // Boundary term.
  const QuadratureRule brule = quadratureRule(Entity::Face, quad.boundary_degree);
  std::array<detail::TraceTable, 6> btr;
  for (int f = 0; f < 6; ++f) btr[f] = detail::makeTraceTable(basis, brule, f);
  for (const auto& bf : skeleton.boundary_faces) {
    const detail::TraceTable& tt = btr[bf.local_face];
    const Vec3 n = Skeleton::outwardNormal(bf.local_face);
    const Vec3 base = mesh.cellMinCorner(bf.cell);
    for (std::size_t q = 0; q < brule.points.size(); ++q) {
      const Vec3 p = faceToCellRef(bf.local_face, brule.points[q].x, brule.points[q].y);
      const Vec3 x = base + p * h;
      const double flux = split.sigma_inf * dot(carrier.grad(x), n);
      const double wq = brule.weights[q] * h * h * flux;
      for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(bf.cell) * 8 + i] -= wq * tt.value[q][i];
    }
  }
  return b;
}

inline std::vector<double> assembleRhsDG(const HexMesh& mesh, const Skeleton& skeleton,
                                         const ConductivityField& field,
                                         const SubtractionSplit& split, const Dipole& d,
                                         const QuadratureConfig& quad = {},
                                         std::vector<std::string>* warnings = nullptr) {
  if (!split.homogeneous_neighborhood && warnings)
    warnings->push_back("dipole source cell has mixed-label neighborhood; "
                        "solution is assembled but flagged as excluded");
  return assembleRhsDGWith(mesh, skeleton, field, split, DipoleCarrier{d, split.sigma_inf},
                           quad);
}

/// Assemble operator and right-hand side for the chosen scheme.
inline LinearSystem assembleSystem(Scheme scheme, const HexMesh& mesh, const Skeleton& skeleton,
                                   const ConductivityField& field, const SubtractionSplit& split,
                                   const Dipole& d, double eta, const QuadratureConfig& quad = {},
                                   std::vector<std::string>* warnings = nullptr) {
  LinearSystem sys;
  if (scheme == Scheme::Cg) {
    sys.layout = {Scheme::Cg, 1, static_cast<std::int32_t>(mesh.vertices.size())};
    sys.A = assembleOperatorCG(mesh, field, quad);
    sys.b = assembleRhsCG(mesh, skeleton, field, split, d, quad, warnings);
  } else {
    sys.layout = {Scheme::Dg, 8, static_cast<std::int32_t>(mesh.cells.size())};
    sys.A = assembleOperatorDG(mesh, skeleton, field, eta, quad);
    sys.b = assembleRhsDG(mesh, skeleton, field, split, d, quad, warnings);
  }
  return sys;
}

}  // namespace eegfwd
