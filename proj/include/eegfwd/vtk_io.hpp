#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "eegfwd/core.hpp"
#include "eegfwd/hexmesh.hpp"

namespace eegfwd {

/// Legacy-ASCII VTK unstructured grid writer (hexahedron cells) with
/// cell-data arrays. Floats are printed with 9 significant digits.
class VtkWriter {
 public:
  explicit VtkWriter(const HexMesh& mesh) : mesh_(mesh) {}

  VtkWriter& addCellScalars(const std::string& name, const std::vector<double>& data) {
    scalars_.emplace_back(name, &data);
    return *this;
  }
  VtkWriter& addCellScalarsInt(const std::string& name, const std::vector<int>& data) {
    int_scalars_.emplace_back(name, &data);
    return *this;
  }
  VtkWriter& addCellVectors(const std::string& name, const std::vector<Vec3>& data) {
    vectors_.emplace_back(name, &data);
    return *this;
  }

  void write(std::ostream& os, const std::string& title = "eegfwd mesh") const {
    char buf[128];
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh_.vertices.size() << " double\n";
    for (const Vec3& v : mesh_.vertices) {
      std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", v.x, v.y, v.z);
      os << buf;
    }
    const std::size_t nc = mesh_.cells.size();
    os << "CELLS " << nc << ' ' << nc * 9 << '\n';
    // VTK hexahedron node order from the tensor-product order.
    static const int perm[8] = {0, 1, 3, 2, 4, 5, 7, 6};
    for (const auto& c : mesh_.cells) {
      os << 8;
      for (int i = 0; i < 8; ++i) os << ' ' << c[perm[i]];
      os << '\n';
    }
    os << "CELL_TYPES " << nc << '\n';
    for (std::size_t i = 0; i < nc; ++i) os << "12\n";

    if (scalars_.empty() && int_scalars_.empty() && vectors_.empty()) return;
    os << "CELL_DATA " << nc << '\n';
    for (const auto& [name, data] : int_scalars_) {
      os << "SCALARS " << name << " int 1\nLOOKUP_TABLE default\n";
      for (int v : *data) os << v << '\n';
    }
    for (const auto& [name, data] : scalars_) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : *data) {
        std::snprintf(buf, sizeof buf, "%.9g\n", v);
        os << buf;
      }
    }
    for (const auto& [name, data] : vectors_) {
      os << "VECTORS " << name << " double\n";
      for (const Vec3& v : *data) {
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", v.x, v.y, v.z);
        os << buf;
      }
    }
  }

  void writeFile(const std::string& path, const std::string& title = "eegfwd mesh") const {
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot open " + path + " for writing");
    write(os, title);
  }

 private:
  const HexMesh& mesh_;
  std::vector<std::pair<std::string, const std::vector<double>*>> scalars_;
  std::vector<std::pair<std::string, const std::vector<int>*>> int_scalars_;
  std::vector<std::pair<std::string, const std::vector<Vec3>*>> vectors_;
};

}  // namespace eegfwd
