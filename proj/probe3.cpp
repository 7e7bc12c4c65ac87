#include <chrono>
#include <cstdio>
#include "eegfwd/eegfwd.hpp"
using namespace eegfwd;
using clk = std::chrono::steady_clock;
static double secs(clk::time_point a, clk::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}
int main() {
  SphereModelSpec spec;
  spec.seg_mm = spec.h_mm = 2.0;
  auto t0 = clk::now();
  Model model = buildSphereModel(spec);
  auto t1 = clk::now();
  std::printf("seg-2-h-2: cells=%zu verts=%zu surf=%zu build=%.1fs\n", model.mesh.cells.size(),
              model.mesh.vertices.size(), model.sampling.points.size(), secs(t0, t1));
  std::fflush(stdout);

  ForwardOptions opts = ForwardOptions::forScheme(Scheme::Dg);
  opts.solver.tol = 1e-6;
  ForwardEngine engine(model, opts);
  auto t2 = clk::now();
  std::printf("dg assemble=%.1fs dict=%zu blocks=%lld\n", secs(t1, t2),
              engine.matrix().store.size() / 64, (long long)engine.matrix().numBlocks());
  std::fflush(stdout);

  // raw matvec timing
  {
    std::vector<double> x(engine.layout().dofs(), 1.0), y(engine.layout().dofs());
    auto ta = clk::now();
    for (int i = 0; i < 10; ++i) engine.matrix().multiply(x.data(), y.data());
    auto tb = clk::now();
    std::printf("matvec: %.3f s each\n", secs(ta, tb) / 10);
    std::fflush(stdout);
  }

  auto sphere = layeredModelFromTable(model.table);
  auto dips = placeSources(sphere, {0.5}, 1, Dipole::Orientation::Radial, 42);
  SolveResult stats;
  auto t3 = clk::now();
  auto b = engine.assembleRhs(dips[0]);
  auto t4 = clk::now();
  std::printf("rhs assemble=%.1fs\n", secs(t3, t4));
  std::fflush(stdout);
  auto sol = engine.solve(dips[0], nullptr, &stats);
  auto t5 = clk::now();
  std::printf("dg solve(tol 1e-6): %.1fs iters=%d\n", secs(t4, t5), stats.iterations);
  std::fflush(stdout);
  auto uh = engine.surfaceValues(sol);
  auto uref = layeredSphereReference(sphere, dips[0], model.sampling.points);
  auto t6 = clk::now();
  std::printf("eval+ref=%.1fs rdm=%.4f lnmag=%.4f\n", secs(t5, t6), rdm(uh, uref), lnMag(uh, uref));
  std::fflush(stdout);

  // CG scheme too
  ForwardOptions copts = ForwardOptions::forScheme(Scheme::Cg);
  copts.solver.tol = 1e-6;
  auto t7 = clk::now();
  ForwardEngine cg(model, copts);
  auto t8 = clk::now();
  SolveResult cstats;
  auto csol = cg.solve(dips[0], nullptr, &cstats);
  auto t9 = clk::now();
  auto cuh = cg.surfaceValues(csol);
  std::printf("cg assemble=%.1fs solve=%.1fs iters=%d rdm=%.4f lnmag=%.4f\n", secs(t7, t8),
              secs(t8, t9), cstats.iterations, rdm(cuh, uref), lnMag(cuh, uref));
  return 0;
}
