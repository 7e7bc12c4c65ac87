#include <Eigen/Dense>
#include <chrono>
#include <cstdio>

#include "eegfwd/eegfwd.hpp"

using namespace eegfwd;

static LabelGrid boxGrid(int n, bool two_material) {
  LabelGrid g;
  g.dims = {n, n, n};
  g.spacing_mm = 1.0;
  g.origin_mm = {0, 0, 0};
  g.labels.assign(g.size(), 1);
  if (two_material)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = n / 2; i < n; ++i) g.labels[g.index(i, j, k)] = 3;
  return g;
}

int main() {
  // DG basis orthonormality
  {
    const BasisSet& dg = basisFor(BasisKind::DgOrthonormalQ1);
    auto rule = quadratureRule(Entity::Cell, 3);
    double worst = 0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        double s = 0;
        for (size_t q = 0; q < rule.points.size(); ++q) {
          auto e = dg.eval(rule.points[q]);
          s += rule.weights[q] * e.values[i] * e.values[j];
        }
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    std::printf("DG gram deviation: %.3e\n", worst);
  }

  // Two-material 4^3 mesh: symmetry, kernel, eigenvalues at eta=0.39
  {
    auto grid = boxGrid(4, true);
    CompartmentTable table = fourLayerSphereTable();
    auto mesh = buildHexMesh(grid, 1.0);
    auto skel = computeSkeleton(mesh);
    auto field = makeConductivityField(mesh, table);
    auto A = assembleOperatorDG(mesh, skel, field, 0.39);
    std::printf("4^3 DG: dim=%d nblocks=%lld dict=%zu asym=%.3e maxabs=%.3e\n", A.dim(),
                (long long)A.numBlocks(), A.store.size() / 64, A.maxAsymmetry(), A.maxAbs());
    DofLayout layout{Scheme::Dg, 8, (int)mesh.cells.size()};
    auto k = kernelVector(layout);
    auto Ak = A.multiply(k);
    double nAk = 0;
    for (double v : Ak) nAk = std::max(nAk, std::abs(v));
    std::printf("  ||A 1||_inf = %.3e\n", nAk);

    // dense eigenvalues of deflated operator
    int n = A.dim();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < A.block_rows; ++r)
      for (auto kk = A.rowptr[r]; kk < A.rowptr[r + 1]; ++kk) {
        const double* blk = A.blockData(kk);
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) D(r * 8 + i, A.col[kk] * 8 + j) = blk[i * 8 + j];
      }
    Eigen::VectorXd kv = Eigen::Map<Eigen::VectorXd>(k.data(), n);
    kv.normalize();
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - kv * kv.transpose();
    Eigen::MatrixXd PAP = P * D * P;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((PAP + PAP.transpose()) / 2);
    std::printf("  eig[0..2] = %.3e %.3e %.3e  max=%.3e\n", es.eigenvalues()(0),
                es.eigenvalues()(1), es.eigenvalues()(2), es.eigenvalues()(n - 1));
  }

  // seg-4-h-4 DG assemble+solve timing, one radial e=0.5 dipole
  {
    auto t0 = std::chrono::steady_clock::now();
    SphereModelSpec spec;
    spec.seg_mm = spec.h_mm = 4.0;
    Model model = buildSphereModel(spec);
    auto t1 = std::chrono::steady_clock::now();
    ForwardOptions opts = ForwardOptions::forScheme(Scheme::Dg);
    opts.solver.tol = 1e-10;
    ForwardEngine engine(model, opts);
    auto t2 = std::chrono::steady_clock::now();
    auto sphere = layeredModelFromTable(model.table);
    auto dips = placeSources(sphere, {0.5}, 1, Dipole::Orientation::Radial, 42);
    SolveResult stats;
    std::vector<std::string> warn;
    auto sol = engine.solve(dips[0], &warn, &stats);
    auto t3 = std::chrono::steady_clock::now();
    auto ms = [](auto a, auto b) {
      return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
    };
    std::printf("seg-4-h-4 dg: dict=%zu build=%lldms assemble=%lldms solve=%lldms iters=%d rel=%.2e warn=%zu\n",
                engine.matrix().store.size() / 64, (long long)ms(t0, t1), (long long)ms(t1, t2),
                (long long)ms(t2, t3), stats.iterations, stats.rel_residual, warn.size());

    // conservation audit
    auto rep = checkConservation(sol, model.skeleton);
    std::printf("  conservation: max_res=%.3e flux_scale=%.3e ratio=%.3e\n", rep.max_residual,
                rep.flux_scale, rep.max_residual / rep.flux_scale);

    // surface values vs reference
    auto uh = engine.surfaceValues(sol);
    auto uref = layeredSphereReference(sphere, dips[0], model.sampling.points);
    std::printf("  rdm=%.4f lnmag=%.4f (npts=%zu)\n", rdm(uh, uref), lnMag(uh, uref),
                uh.size());
  }
  return 0;
}
