#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "eegfwd/core.hpp"

namespace eegfwd {

/// Symmetric block-sparse matrix in block-CSR form. Blocks are dense BxB,
/// stored row-major. Storage is either direct (one value run per block) or
/// dictionary-compressed: on uniform meshes the face and volume blocks take
/// only a handful of distinct values, so `dict_idx` maps each block to a
/// shared run in `store`.
class BlockSparseMatrix {
 public:
  int block_size = 1;
  int block_rows = 0;
  std::vector<std::int64_t> rowptr;      // size block_rows+1
  std::vector<std::int32_t> col;         // block column per entry
  std::vector<double> store;             // B*B runs
  std::vector<std::uint32_t> dict_idx;   // empty => direct storage

  int dim() const { return block_rows * block_size; }
  std::int64_t numBlocks() const { return static_cast<std::int64_t>(col.size()); }

  const double* blockData(std::int64_t k) const {
    const std::size_t bb = static_cast<std::size_t>(block_size) * block_size;
    return dict_idx.empty() ? &store[k * bb] : &store[static_cast<std::size_t>(dict_idx[k]) * bb];
  }
  double* blockDataMut(std::int64_t k) {
    if (!dict_idx.empty()) throw std::logic_error("cannot mutate dictionary-compressed blocks");
    const std::size_t bb = static_cast<std::size_t>(block_size) * block_size;
    return &store[k * bb];
  }

  /// Entry index of block (brow, bcol), or -1.
  std::int64_t findBlock(int brow, int bcol) const {
    const auto first = col.begin() + rowptr[brow];
    const auto last = col.begin() + rowptr[brow + 1];
    auto it = std::lower_bound(first, last, bcol);
    if (it == last || *it != bcol) return -1;
    return it - col.begin();
  }

  void multiply(const double* x, double* y) const {
    const int B = block_size;
    if (B == 8) {
      for (int r = 0; r < block_rows; ++r) {
        double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k) {
          const double* blk = blockData(k);
          const double* xv = x + static_cast<std::size_t>(col[k]) * 8;
          for (int i = 0; i < 8; ++i) {
            double s = 0.0;
            for (int j = 0; j < 8; ++j) s += blk[i * 8 + j] * xv[j];
            acc[i] += s;
          }
        }
        double* yv = y + static_cast<std::size_t>(r) * 8;
        for (int i = 0; i < 8; ++i) yv[i] = acc[i];
      }
      return;
    }
    for (int r = 0; r < block_rows; ++r) {
      double* yv = y + static_cast<std::size_t>(r) * B;
      for (int i = 0; i < B; ++i) yv[i] = 0.0;
      for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k) {
        const double* blk = blockData(k);
        const double* xv = x + static_cast<std::size_t>(col[k]) * B;
        for (int i = 0; i < B; ++i) {
          double s = 0.0;
          for (int j = 0; j < B; ++j) s += blk[i * B + j] * xv[j];
          yv[i] += s;
        }
      }
    }
  }

  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(dim());
    multiply(x.data(), y.data());
    return y;
  }

  double maxAbs() const {
    double m = 0.0;
    const std::size_t bb = static_cast<std::size_t>(block_size) * block_size;
    if (dict_idx.empty()) {
      for (double v : store) m = std::max(m, std::abs(v));
    } else {
      for (std::int64_t k = 0; k < numBlocks(); ++k) {
        const double* blk = blockData(k);
        for (std::size_t q = 0; q < bb; ++q) m = std::max(m, std::abs(blk[q]));
      }
    }
    return m;
  }

  /// max |A_ij - A_ji| over all entries.
  double maxAsymmetry() const {
    const int B = block_size;
    double worst = 0.0;
    for (int r = 0; r < block_rows; ++r)
      for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k) {
        const std::int64_t kt = findBlock(col[k], r);
        const double* blk = blockData(k);
        if (kt < 0) {
          for (int q = 0; q < B * B; ++q) worst = std::max(worst, std::abs(blk[q]));
          continue;
        }
        const double* tblk = blockData(kt);
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < B; ++j)
            worst = std::max(worst, std::abs(blk[i * B + j] - tblk[j * B + i]));
      }
    return worst;
  }

  /// Debugging dump: coordinate triplets with block indices. Not a stable
  /// interchange format.
  void dump(std::ostream& os) const {
    const int B = block_size;
    os << "blockmatrix rows " << block_rows << " block " << B << " nblocks " << numBlocks()
       << "\n";
    char buf[64];
    for (int r = 0; r < block_rows; ++r)
      for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k) {
        const double* blk = blockData(k);
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < B; ++j) {
            if (blk[i * B + j] == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", r, col[k], i, j,
                          blk[i * B + j]);
            os << buf;
          }
      }
  }
};

}  // namespace eegfwd
