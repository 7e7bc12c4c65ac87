#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "eegfwd/core.hpp"
#include "eegfwd/labelgrid.hpp"

namespace eegfwd {

// Local conventions, fixed for deterministic assembly:
//  - vertex v = ix + 2*iy + 4*iz  (tensor-product order, ix/iy/iz in {0,1})
//  - face f = 2*axis + side       (0:-x, 1:+x, 2:-y, 3:+y, 4:-z, 5:+z)

/// Structured mesh of axis-aligned cubic cells of uniform edge length h.
/// Cells live on a lattice covering the originating label grid; the lattice
/// map supports O(1) point location and neighbor lookup.
struct HexMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int32_t, 8>> cells;
  std::vector<std::uint8_t> cell_labels;
  double cell_edge_mm = 0.0;

  Vec3 lattice_origin{};
  std::array<int, 3> lattice_dims{0, 0, 0};
  std::vector<std::int32_t> lattice_cell;        // cell id or -1 per lattice slot
  std::vector<std::array<int, 3>> cell_coords;   // lattice coords per cell

  double cellVolume() const { return cell_edge_mm * cell_edge_mm * cell_edge_mm; }
  double faceArea() const { return cell_edge_mm * cell_edge_mm; }

  std::int64_t latticeIndex(int i, int j, int k) const {
    return static_cast<std::int64_t>(i) +
           static_cast<std::int64_t>(lattice_dims[0]) *
               (j + static_cast<std::int64_t>(lattice_dims[1]) * k);
  }
  bool inLattice(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < lattice_dims[0] && j < lattice_dims[1] &&
           k < lattice_dims[2];
  }
  std::int32_t cellAt(int i, int j, int k) const {
    return inLattice(i, j, k) ? lattice_cell[latticeIndex(i, j, k)] : -1;
  }
  /// Face-neighbor of a cell along +/-axis, or -1.
  std::int32_t neighbor(std::int32_t cell, int axis, int side) const {
    auto c = cell_coords[cell];
    c[axis] += side ? 1 : -1;
    return cellAt(c[0], c[1], c[2]);
  }
  Vec3 cellMinCorner(std::int32_t cell) const {
    const auto& c = cell_coords[cell];
    return lattice_origin +
           Vec3{c[0] * cell_edge_mm, c[1] * cell_edge_mm, c[2] * cell_edge_mm};
  }
  Vec3 cellCenter(std::int32_t cell) const {
    return cellMinCorner(cell) + Vec3{0.5, 0.5, 0.5} * cell_edge_mm;
  }
  /// Map a physical point into the reference cube [0,1]^3 of a cell.
  Vec3 toReference(std::int32_t cell, const Vec3& x) const {
    const Vec3 c = cellMinCorner(cell);
    return {(x.x - c.x) / cell_edge_mm, (x.y - c.y) / cell_edge_mm, (x.z - c.z) / cell_edge_mm};
  }
};

/// Face skeleton of the mesh. Every internal face is stored once with its
/// normal pointing from cell_e to cell_f along +axis; only face-adjacency
/// creates a coupling face, vertex- or edge-contacts never do.
struct Skeleton {
  struct InternalFace {
    std::int32_t cell_e, cell_f;
    std::uint8_t axis;  // normal = +axis, local faces: e side +, f side -
  };
  struct BoundaryFace {
    std::int32_t cell;
    std::uint8_t local_face;  // 2*axis + side, outward normal
  };
  std::vector<InternalFace> internal_faces;
  std::vector<BoundaryFace> boundary_faces;
  double face_area_mm2 = 0.0;

  static Vec3 outwardNormal(std::uint8_t local_face) {
    Vec3 n = axisVector(local_face / 2);
    return (local_face % 2) ? n : -n;
  }
};

/// Split every non-air voxel into r^3 cells of edge mesh_resolution_mm,
/// where r = grid spacing / mesh resolution must be a positive integer.
inline HexMesh buildHexMesh(const LabelGrid& grid, double mesh_resolution_mm) {
  if (mesh_resolution_mm <= 0.0) throw InvalidInput("mesh resolution must be positive");
  if (grid.size() == 0) throw InvalidInput("empty label grid");
  const double ratio = grid.spacing_mm / mesh_resolution_mm;
  const int r = static_cast<int>(std::lround(ratio));
  if (r < 1 || std::abs(ratio - r) > 1e-9 * ratio)
    throw InvalidInput("mesh resolution must divide the grid spacing exactly");

  HexMesh mesh;
  mesh.cell_edge_mm = mesh_resolution_mm;
  mesh.lattice_origin = grid.origin_mm;
  mesh.lattice_dims = {grid.dims[0] * r, grid.dims[1] * r, grid.dims[2] * r};
  const std::int64_t nlat = static_cast<std::int64_t>(mesh.lattice_dims[0]) *
                            mesh.lattice_dims[1] * mesh.lattice_dims[2];
  mesh.lattice_cell.assign(static_cast<std::size_t>(nlat), -1);

  // Pass 1: enumerate cells in lattice order (x fastest).
  for (int k = 0; k < mesh.lattice_dims[2]; ++k)
    for (int j = 0; j < mesh.lattice_dims[1]; ++j)
      for (int i = 0; i < mesh.lattice_dims[0]; ++i) {
        const std::uint8_t lab = grid.at(i / r, j / r, k / r);
        if (lab == 0) continue;
        const std::int32_t id = static_cast<std::int32_t>(mesh.cells.size());
        mesh.lattice_cell[mesh.latticeIndex(i, j, k)] = id;
        mesh.cells.push_back({});
        mesh.cell_labels.push_back(lab);
        mesh.cell_coords.push_back({i, j, k});
      }
  if (mesh.cells.empty()) throw InvalidInput("label grid has no non-air voxels");

  // Pass 2: vertex ids, assigned on first encounter in (cell, corner) order.
  const std::int64_t vnx = mesh.lattice_dims[0] + 1;
  const std::int64_t vny = mesh.lattice_dims[1] + 1;
  std::unordered_map<std::int64_t, std::int32_t> vertex_ids;
  vertex_ids.reserve(mesh.cells.size() * 2);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cc = mesh.cell_coords[c];
    for (int v = 0; v < 8; ++v) {
      const int vi = cc[0] + (v & 1), vj = cc[1] + ((v >> 1) & 1), vk = cc[2] + ((v >> 2) & 1);
      const std::int64_t key = vi + vnx * (vj + vny * vk);
      auto [it, fresh] = vertex_ids.try_emplace(key, static_cast<std::int32_t>(mesh.vertices.size()));
      if (fresh)
        mesh.vertices.push_back(mesh.lattice_origin + Vec3{vi * mesh_resolution_mm,
                                                           vj * mesh_resolution_mm,
                                                           vk * mesh_resolution_mm});
      mesh.cells[c][v] = it->second;
    }
  }
  return mesh;
}

inline Skeleton computeSkeleton(const HexMesh& mesh) {
  Skeleton s;
  s.face_area_mm2 = mesh.faceArea();
  for (std::int32_t c = 0; c < static_cast<std::int32_t>(mesh.cells.size()); ++c) {
    for (int axis = 0; axis < 3; ++axis) {
      const std::int32_t plus = mesh.neighbor(c, axis, 1);
      if (plus >= 0)
        s.internal_faces.push_back({c, plus, static_cast<std::uint8_t>(axis)});
      else
        s.boundary_faces.push_back({c, static_cast<std::uint8_t>(2 * axis + 1)});
      if (mesh.neighbor(c, axis, 0) < 0)
        s.boundary_faces.push_back({c, static_cast<std::uint8_t>(2 * axis)});
    }
  }
  return s;
}

/// FNV-1a over the mesh geometry; identifies the mesh a transfer matrix
/// belongs to.
inline std::uint64_t meshHash(const HexMesh& mesh) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  mix(&mesh.cell_edge_mm, sizeof(double));
  if (!mesh.vertices.empty())
    mix(mesh.vertices.data(), mesh.vertices.size() * sizeof(Vec3));
  if (!mesh.cells.empty())
    mix(mesh.cells.data(), mesh.cells.size() * sizeof(mesh.cells[0]));
  if (!mesh.cell_labels.empty()) mix(mesh.cell_labels.data(), mesh.cell_labels.size());
  return h;
}

/// Locate the cell containing a point; points exactly on a lattice plane
/// resolve to the lexicographically lowest adjacent cell that exists.
/// Returns -1 when the point lies in no cell.
inline std::int32_t locateCell(const HexMesh& mesh, const Vec3& x) {
  std::array<std::array<int, 2>, 3> cand;  // ascending candidate coords per axis
  std::array<int, 3> ncand;
  for (int a = 0; a < 3; ++a) {
    const double t = (x[a] - mesh.lattice_origin[a]) / mesh.cell_edge_mm;
    const double fl = std::floor(t);
    const int i = static_cast<int>(fl);
    if (t == fl) {
      cand[a] = {i - 1, i};
      ncand[a] = 2;
    } else {
      cand[a] = {i, i};
      ncand[a] = 1;
    }
  }
  for (int ci = 0; ci < ncand[0]; ++ci)
    for (int cj = 0; cj < ncand[1]; ++cj)
      for (int ck = 0; ck < ncand[2]; ++ck) {
        const std::int32_t id = mesh.cellAt(cand[0][ci], cand[1][cj], cand[2][ck]);
        if (id >= 0) return id;
      }
  return -1;
}

}  // namespace eegfwd
