#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "eegfwd/assembly.hpp"
#include "eegfwd/block_matrix.hpp"
#include "eegfwd/core.hpp"

namespace eegfwd {

enum class PreconKind { None, Diagonal, BlockDiagonal };

struct SolveConfig {
  double tol = 1e-10;  // relative residual
  int max_iter = 20000;
  PreconKind precon = PreconKind::Diagonal;
  bool deflate = true;  // project out the constant mode each iteration
  const std::vector<double>* initial_guess = nullptr;

  void validate() const {
    if (!(tol > 0.0 && tol < 1.0)) throw InvalidInput("solver tolerance must be in (0,1)");
    if (max_iter < 1) throw InvalidInput("max_iter must be >= 1");
  }
};

struct SolveResult {
  std::vector<double> x;
  int iterations = 0;
  double rel_residual = 0.0;
  std::vector<double> history;  // relative residual per iteration
};

class SolverFailure : public ConvergenceFailure {
 public:
  SolverFailure(const std::string& msg, double residual, std::vector<double> hist)
      : ConvergenceFailure(msg, residual), history(std::move(hist)) {}
  std::vector<double> history;
};

/// Preconditioned conjugate gradients for the pure-Neumann systems. The
/// one-dimensional kernel (constants) is handled by per-iteration deflation
/// rather than pinning a DOF, and the returned solution is the mean-zero
/// representative. The preconditioner setup is reused across right-hand
/// sides (one operator serves all dipoles of a model).
class PcgSolver {
 public:
  PcgSolver(const BlockSparseMatrix& A, DofLayout layout, SolveConfig cfg)
      : A_(A), layout_(layout), cfg_(cfg) {
    cfg_.validate();
    kernel_ = kernelVector(layout);
    kk_ = 0.0;
    for (double v : kernel_) kk_ += v * v;
    setupPreconditioner();
  }

  const SolveConfig& config() const { return cfg_; }

  SolveResult solve(const std::vector<double>& b) const {
    const std::int64_t n = layout_.dofs();
    if (static_cast<std::int64_t>(b.size()) != n) throw InvalidInput("rhs size mismatch");
    SolveResult res;
    double bnorm = 0.0, kb = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      bnorm += b[i] * b[i];
      kb += kernel_[i] * b[i];
    }
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
      res.x.assign(n, 0.0);
      return res;
    }
    if (cfg_.deflate && std::abs(kb) / std::sqrt(kk_) > 1e-6 * bnorm)
      throw InvalidInput("right-hand side has a constant-mode component; assembly bug");

    std::vector<double> x(n, 0.0);
    if (cfg_.initial_guess) {
      if (cfg_.initial_guess->size() != static_cast<std::size_t>(n))
        throw InvalidInput("initial guess size mismatch");
      x = *cfg_.initial_guess;
      project(x);
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    A_.multiply(x.data(), r.data());
    for (std::int64_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    project(r);
    applyPrecon(r, z);
    project(z);
    p = z;
    double rz = dotv(r, z);
    double rel = std::sqrt(dotv(r, r)) / bnorm;
    res.history.push_back(rel);
    if (rel <= cfg_.tol) {
      project(x);
      res.x = std::move(x);
      res.rel_residual = rel;
      return res;
    }

    for (int it = 1; it <= cfg_.max_iter; ++it) {
      A_.multiply(p.data(), q.data());
      const double pq = dotv(p, q);
      if (pq <= 0.0)
        throw SolverFailure(
            "operator is numerically indefinite on the deflated space; increase eta", rel,
            res.history);
      const double alpha = rz / pq;
      for (std::int64_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      project(r);
      rel = std::sqrt(dotv(r, r)) / bnorm;
      res.history.push_back(rel);
      res.iterations = it;
      if (rel <= cfg_.tol) {
        project(x);
        res.x = std::move(x);
        res.rel_residual = rel;
        return res;
      }
      applyPrecon(r, z);
      project(z);
      const double rz_new = dotv(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::int64_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverFailure("conjugate gradients did not converge within max_iter", rel,
                        res.history);
  }

 private:
  static double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  void project(std::vector<double>& v) const {
    if (!cfg_.deflate) return;
    double kv = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) kv += kernel_[i] * v[i];
    const double f = kv / kk_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= f * kernel_[i];
  }

  void setupPreconditioner() {
    const std::int64_t n = layout_.dofs();
    if (cfg_.precon == PreconKind::None) return;
    if (cfg_.precon == PreconKind::Diagonal) {
      inv_diag_.resize(n);
      const int B = A_.block_size;
      for (int r = 0; r < A_.block_rows; ++r) {
        const std::int64_t k = A_.findBlock(r, r);
        for (int i = 0; i < B; ++i) {
          const double d = (k >= 0) ? A_.blockData(k)[i * B + i] : 0.0;
          inv_diag_[static_cast<std::int64_t>(r) * B + i] = (d != 0.0) ? 1.0 / d : 1.0;
        }
      }
      return;
    }
    if (layout_.block != 8)
      throw InvalidInput("block-diagonal preconditioner is only valid for DG layouts");
    inv_blocks_.resize(static_cast<std::size_t>(A_.block_rows) * 64);
    Eigen::Matrix<double, 8, 8> D;
    for (int r = 0; r < A_.block_rows; ++r) {
      const std::int64_t k = A_.findBlock(r, r);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) D(i, j) = A_.blockData(k)[i * 8 + j];
      Eigen::Matrix<double, 8, 8> inv = D.inverse();
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          inv_blocks_[static_cast<std::size_t>(r) * 64 + i * 8 + j] = inv(i, j);
    }
  }

  void applyPrecon(const std::vector<double>& r, std::vector<double>& z) const {
    const std::int64_t n = layout_.dofs();
    if (cfg_.precon == PreconKind::None) {
      z = r;
    } else if (cfg_.precon == PreconKind::Diagonal) {
      for (std::int64_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
    } else {
      for (int br = 0; br < A_.block_rows; ++br) {
        const double* blk = &inv_blocks_[static_cast<std::size_t>(br) * 64];
        const double* rv = &r[static_cast<std::size_t>(br) * 8];
        double* zv = &z[static_cast<std::size_t>(br) * 8];
        for (int i = 0; i < 8; ++i) {
          double s = 0.0;
          for (int j = 0; j < 8; ++j) s += blk[i * 8 + j] * rv[j];
          zv[i] = s;
        }
      }
    }
  }

  const BlockSparseMatrix& A_;
  DofLayout layout_;
  SolveConfig cfg_;
  std::vector<double> kernel_;
  double kk_ = 0.0;
  std::vector<double> inv_diag_;
  std::vector<double> inv_blocks_;
};

inline SolveResult solve(const LinearSystem& system, const SolveConfig& cfg) {
  return PcgSolver(system.A, system.layout, cfg).solve(system.b);
}

inline PreconKind defaultPrecon(Scheme scheme) {
  return scheme == Scheme::Cg ? PreconKind::Diagonal : PreconKind::BlockDiagonal;
}

// ---------------------------------------------------------------------------
// Transfer matrices
// ---------------------------------------------------------------------------

/// Sparse linear functional on the DOF vector (point evaluation minus the
/// reference electrode's evaluation).
struct Restriction {
  std::vector<std::pair<std::int64_t, double>> entries;
};

struct TransferMatrix {
  int sensors = 0;
  std::int64_t ndofs = 0;
  Scheme scheme = Scheme::Cg;
  std::uint64_t mesh_hash = 0;
  std::vector<double> rows;  // row-major, sensors x ndofs
};

/// One solve per sensor: row i solves A t_i = r_i, after which any dipole's
/// sensor readings are T b (plus the analytic part added downstream).
inline TransferMatrix computeTransferMatrix(const BlockSparseMatrix& A, DofLayout layout,
                                            const std::vector<Restriction>& restrictions,
                                            const SolveConfig& cfg, std::uint64_t mesh_hash = 0) {
  PcgSolver solver(A, layout, cfg);
  TransferMatrix T;
  T.sensors = static_cast<int>(restrictions.size());
  T.ndofs = layout.dofs();
  T.scheme = layout.scheme;
  T.mesh_hash = mesh_hash;
  T.rows.resize(static_cast<std::size_t>(T.sensors) * T.ndofs);
  std::vector<double> rhs(T.ndofs);
  for (int s = 0; s < T.sensors; ++s) {
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (const auto& [dof, w] : restrictions[s].entries) rhs[dof] += w;
    SolveResult r = solver.solve(rhs);
    std::copy(r.x.begin(), r.x.end(), T.rows.begin() + static_cast<std::size_t>(s) * T.ndofs);
  }
  return T;
}

inline std::vector<double> applyTransfer(const TransferMatrix& T, const std::vector<double>& b) {
  if (static_cast<std::int64_t>(b.size()) != T.ndofs)
    throw InvalidInput("transfer matrix / rhs size mismatch");
  std::vector<double> out(T.sensors, 0.0);
  for (int s = 0; s < T.sensors; ++s) {
    const double* row = &T.rows[static_cast<std::size_t>(s) * T.ndofs];
    double acc = 0.0;
    for (std::int64_t i = 0; i < T.ndofs; ++i) acc += row[i] * b[i];
    out[s] = acc;
  }
  return out;
}

// Binary export: one text header line, then row-major float64 payload.
inline void writeTransferMatrix(const TransferMatrix& T, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open " + path + " for writing");
  os << "transfer sensors " << T.sensors << " dofs " << T.ndofs << " scheme "
     << schemeName(T.scheme) << " mesh_hash " << T.mesh_hash << "\n";
  os.write(reinterpret_cast<const char*>(T.rows.data()),
           static_cast<std::streamsize>(T.rows.size() * sizeof(double)));
}

inline TransferMatrix readTransferMatrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open " + path);
  std::string tag, f1, f2, f3, f4, scheme;
  TransferMatrix T;
  is >> tag >> f1 >> T.sensors >> f2 >> T.ndofs >> f3 >> scheme >> f4 >> T.mesh_hash;
  if (tag != "transfer" || f1 != "sensors" || f2 != "dofs" || f3 != "scheme")
    throw InvalidInput("malformed transfer matrix header");
  T.scheme = (scheme == "cg") ? Scheme::Cg : Scheme::Dg;
  is.ignore(1);
  T.rows.resize(static_cast<std::size_t>(T.sensors) * T.ndofs);
  is.read(reinterpret_cast<char*>(T.rows.data()),
          static_cast<std::streamsize>(T.rows.size() * sizeof(double)));
  if (!is) throw InvalidInput("truncated transfer matrix payload");
  return T;
}

}  // namespace eegfwd
