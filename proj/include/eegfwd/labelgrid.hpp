#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "eegfwd/core.hpp"

namespace eegfwd {

/// Voxel segmentation on a regular grid. Label 0 marks exterior air;
/// conductivity outside the head is zero and is never stored.
struct LabelGrid {
  std::array<int, 3> dims{0, 0, 0};
  double spacing_mm = 0.0;
  Vec3 origin_mm{};  // minimum corner of voxel (0,0,0)
  std::vector<std::uint8_t> labels;  // x fastest, then y, then z

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) +
                                                static_cast<std::size_t>(dims[1]) * k);
  }
  std::uint8_t at(int i, int j, int k) const { return labels[index(i, j, k)]; }
  Vec3 voxelCenter(int i, int j, int k) const {
    return origin_mm + Vec3{(i + 0.5) * spacing_mm, (j + 0.5) * spacing_mm, (k + 0.5) * spacing_mm};
  }
};

enum class TissueRole { Brain, Csf, Skull, Skin, Other };

/// One conductive compartment. Sphere models list compartments from the
/// inside out with strictly increasing outer radii.
struct Compartment {
  int label = 0;
  std::string name;
  std::optional<double> outer_radius_mm;
  double conductivity_S_per_m = 0.0;
  TissueRole role = TissueRole::Other;
};

struct CompartmentTable {
  std::vector<Compartment> entries;

  const Compartment* find(int label) const {
    for (const auto& c : entries)
      if (c.label == label) return &c;
    return nullptr;
  }
  const Compartment* findRole(TissueRole role) const {
    for (const auto& c : entries)
      if (c.role == role) return &c;
    return nullptr;
  }
  double conductivity(int label) const {
    const Compartment* c = find(label);
    if (!c) throw InvalidInput("no compartment with label " + std::to_string(label));
    return c->conductivity_S_per_m;
  }

  void validate() const {
    if (entries.empty()) throw InvalidInput("compartment table is empty");
    for (std::size_t a = 0; a < entries.size(); ++a) {
      if (entries[a].conductivity_S_per_m <= 0.0)
        throw InvalidInput("conductivity must be positive for label " +
                           std::to_string(entries[a].label));
      for (std::size_t b = a + 1; b < entries.size(); ++b)
        if (entries[a].label == entries[b].label)
          throw InvalidInput("duplicate label " + std::to_string(entries[a].label));
    }
  }
};

/// The four-compartment table of the standard sphere model
/// (brain 78 / CSF 80 / skull 86 / skin 92 mm). The skull outer radius can
/// be overridden to produce intentionally leaky models.
inline CompartmentTable fourLayerSphereTable(std::optional<double> skull_radius_override = {}) {
  CompartmentTable t;
  t.entries = {
      {1, "brain", 78.0, 0.33, TissueRole::Brain},
      {2, "csf", 80.0, 1.79, TissueRole::Csf},
      {3, "skull", skull_radius_override.value_or(86.0), 0.01, TissueRole::Skull},
      {4, "skin", 92.0, 0.43, TissueRole::Skin},
  };
  return t;
}

/// Result of the leakage audit: grid vertices incident to both a skin voxel
/// and a CSF-or-brain voxel.
struct LeakReport {
  std::size_t leak_vertex_count = 0;
  std::vector<std::int64_t> leak_vertices;             // lattice vertex indices
  std::vector<std::vector<std::uint8_t>> incident_labels;  // per leak vertex, sorted unique
};

// ---------------------------------------------------------------------------
// Sphere segmentation
// ---------------------------------------------------------------------------

/// Classify every voxel by the radial distance of its center: a voxel gets
/// the label of the innermost compartment whose outer radius reaches it,
/// 0 beyond the outermost shell. The grid is centered at the sphere origin
/// with symmetric air padding.
inline LabelGrid generateSphereSegmentation(const CompartmentTable& table, double resolution_mm,
                                            double grid_padding_mm,
                                            std::vector<std::string>* warnings = nullptr) {
  table.validate();
  if (resolution_mm <= 0.0) throw InvalidInput("resolution must be positive");
  std::vector<std::pair<double, int>> shells;  // (outer radius, label), inside out
  for (const auto& c : table.entries) {
    if (!c.outer_radius_mm) throw InvalidInput("compartment " + c.name + " has no radius");
    shells.emplace_back(*c.outer_radius_mm, c.label);
  }
  for (std::size_t i = 1; i < shells.size(); ++i)
    if (shells[i].first <= shells[i - 1].first)
      throw InvalidInput("compartment radii must be strictly increasing outward");

  double thinnest = shells[0].first;
  for (std::size_t i = 1; i < shells.size(); ++i)
    thinnest = std::min(thinnest, shells[i].first - shells[i - 1].first);
  if (warnings && resolution_mm >= thinnest) {
    std::ostringstream os;
    os << "resolution " << resolution_mm << " mm >= thinnest shell " << thinnest
       << " mm; segmentation will contain leaks";
    warnings->push_back(os.str());
  }

  const double outer = shells.back().first;
  const double half_extent = outer + grid_padding_mm;
  const int half_n = static_cast<int>(std::ceil(half_extent / resolution_mm - 1e-12));
  const int n = 2 * half_n;

  LabelGrid grid;
  grid.dims = {n, n, n};
  grid.spacing_mm = resolution_mm;
  grid.origin_mm = {-half_n * resolution_mm, -half_n * resolution_mm, -half_n * resolution_mm};
  grid.labels.assign(grid.size(), 0);

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double r = norm(grid.voxelCenter(i, j, k));
        for (const auto& [radius, label] : shells) {
          if (r <= radius) {
            grid.labels[grid.index(i, j, k)] = static_cast<std::uint8_t>(label);
            break;
          }
        }
      }
  return grid;
}

// ---------------------------------------------------------------------------
// Leak detection
// ---------------------------------------------------------------------------

/// Count grid vertices whose incident voxels (up to 8) contain both a skin
/// voxel and a CSF-or-brain voxel. Such vertices carry spurious current
/// paths for vertex-based discretizations.
inline LeakReport detectLeaks(const LabelGrid& grid, const CompartmentTable& table) {
  const Compartment* skin = table.findRole(TissueRole::Skin);
  const Compartment* csf = table.findRole(TissueRole::Csf);
  const Compartment* brain = table.findRole(TissueRole::Brain);
  if (!skin || (!csf && !brain))
    throw InvalidInput("compartment table must designate skin and CSF or brain labels");

  const int skin_label = skin->label;
  const int csf_label = csf ? csf->label : -1;
  const int brain_label = brain ? brain->label : -1;
  const auto [nx, ny, nz] = grid.dims;

  LeakReport report;
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        bool has_skin = false, has_inner = false;
        std::vector<std::uint8_t> incident;
        for (int dk = -1; dk <= 0; ++dk)
          for (int dj = -1; dj <= 0; ++dj)
            for (int di = -1; di <= 0; ++di) {
              const int vi = i + di, vj = j + dj, vk = k + dk;
              if (vi < 0 || vj < 0 || vk < 0 || vi >= nx || vj >= ny || vk >= nz) continue;
              const std::uint8_t lab = grid.at(vi, vj, vk);
              incident.push_back(lab);
              if (lab == skin_label) has_skin = true;
              if (lab == csf_label || lab == brain_label) has_inner = true;
            }
        if (has_skin && has_inner) {
          std::sort(incident.begin(), incident.end());
          incident.erase(std::unique(incident.begin(), incident.end()), incident.end());
          report.leak_vertices.push_back(
              static_cast<std::int64_t>(i) +
              static_cast<std::int64_t>(nx + 1) * (j + static_cast<std::int64_t>(ny + 1) * k));
          report.incident_labels.push_back(std::move(incident));
        }
      }
  report.leak_vertex_count = report.leak_vertices.size();
  return report;
}

// ---------------------------------------------------------------------------
// SEGv1 file format
// ---------------------------------------------------------------------------
// Four-line text header followed by the label payload:
//   dims nx ny nz
//   spacing_mm s
//   origin_mm ox oy oz
//   labels <ascii|raw8>
// ascii: whitespace-separated integers; raw8: one byte per voxel.
// Payload order: x fastest, then y, then z. Round-trips bit-exactly.

inline void writeSegv1(const LabelGrid& grid, std::ostream& os, bool raw = false) {
  os << "dims " << grid.dims[0] << ' ' << grid.dims[1] << ' ' << grid.dims[2] << '\n';
  char buf[96];
  std::snprintf(buf, sizeof buf, "spacing_mm %.17g\n", grid.spacing_mm);
  os << buf;
  std::snprintf(buf, sizeof buf, "origin_mm %.17g %.17g %.17g\n", grid.origin_mm.x,
                grid.origin_mm.y, grid.origin_mm.z);
  os << buf;
  os << "labels " << (raw ? "raw8" : "ascii") << '\n';
  if (raw) {
    os.write(reinterpret_cast<const char*>(grid.labels.data()),
             static_cast<std::streamsize>(grid.labels.size()));
  } else {
    for (std::size_t i = 0; i < grid.labels.size(); ++i) {
      os << int(grid.labels[i]);
      os << ((i + 1) % 32 == 0 ? '\n' : ' ');
    }
    os << '\n';
  }
}

inline void writeSegv1File(const LabelGrid& grid, const std::string& path, bool raw = false) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open " + path + " for writing");
  writeSegv1(grid, os, raw);
}

inline LabelGrid readSegv1(std::istream& is) {
  LabelGrid grid;
  std::string key, encoding;
  is >> key;
  if (key != "dims") throw InvalidInput("SEGv1: expected 'dims'");
  is >> grid.dims[0] >> grid.dims[1] >> grid.dims[2];
  is >> key;
  if (key != "spacing_mm") throw InvalidInput("SEGv1: expected 'spacing_mm'");
  is >> grid.spacing_mm;
  is >> key;
  if (key != "origin_mm") throw InvalidInput("SEGv1: expected 'origin_mm'");
  is >> grid.origin_mm.x >> grid.origin_mm.y >> grid.origin_mm.z;
  is >> key >> encoding;
  if (key != "labels") throw InvalidInput("SEGv1: expected 'labels'");
  if (!is) throw InvalidInput("SEGv1: malformed header");
  if (grid.dims[0] <= 0 || grid.dims[1] <= 0 || grid.dims[2] <= 0 || grid.spacing_mm <= 0.0)
    throw InvalidInput("SEGv1: invalid dims or spacing");

  grid.labels.resize(grid.size());
  if (encoding == "raw8") {
    is.ignore(1);  // newline terminating the header
    is.read(reinterpret_cast<char*>(grid.labels.data()),
            static_cast<std::streamsize>(grid.labels.size()));
    if (is.gcount() != static_cast<std::streamsize>(grid.labels.size()))
      throw InvalidInput("SEGv1: truncated raw8 payload");
  } else if (encoding == "ascii") {
    for (auto& l : grid.labels) {
      int v;
      if (!(is >> v) || v < 0 || v > 255) throw InvalidInput("SEGv1: bad ascii label");
      l = static_cast<std::uint8_t>(v);
    }
  } else {
    throw InvalidInput("SEGv1: unknown encoding " + encoding);
  }
  return grid;
}

inline LabelGrid readSegv1File(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open " + path);
  return readSegv1(is);
}

}  // namespace eegfwd
