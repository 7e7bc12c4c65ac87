#include <Eigen/Dense>
#include <cstdio>
#include "eegfwd/eegfwd.hpp"
using namespace eegfwd;

static LabelGrid boxGrid(int n, bool two_material) {
  LabelGrid g; g.dims = {n,n,n}; g.spacing_mm = 1.0; g.origin_mm = {0,0,0};
  g.labels.assign(g.size(), 1);
  if (two_material)
    for (int k=0;k<n;++k) for (int j=0;j<n;++j) for (int i=n/2;i<n;++i) g.labels[g.index(i,j,k)] = 3;
  return g;
}

static void eigprobe(double eta, bool two_material) {
  auto grid = boxGrid(4, two_material);
  CompartmentTable table = fourLayerSphereTable();
  auto mesh = buildHexMesh(grid, 1.0);
  auto skel = computeSkeleton(mesh);
  auto field = makeConductivityField(mesh, table);
  auto A = assembleOperatorDG(mesh, skel, field, eta);
  int n = A.dim();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < A.block_rows; ++r)
    for (auto kk = A.rowptr[r]; kk < A.rowptr[r+1]; ++kk) {
      const double* blk = A.blockData(kk);
      for (int i=0;i<8;++i) for (int j=0;j<8;++j) D(r*8+i, A.col[kk]*8+j) = blk[i*8+j];
    }
  DofLayout layout{Scheme::Dg, 8, (int)mesh.cells.size()};
  auto k = kernelVector(layout);
  Eigen::VectorXd kv = Eigen::Map<Eigen::VectorXd>(k.data(), n);
  kv.normalize();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n,n) - kv*kv.transpose();
  Eigen::MatrixXd PAP = P*D*P;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((PAP+PAP.transpose())/2);
  std::printf("eta=%.3f two_mat=%d: asym=%.2e eig[0..3] = %.4e %.4e %.4e %.4e max=%.3e\n",
              eta, (int)two_material, A.maxAsymmetry(), es.eigenvalues()(0), es.eigenvalues()(1),
              es.eigenvalues()(2), es.eigenvalues()(3), es.eigenvalues()(n-1));
  std::fflush(stdout);
}

int main() {
  for (double eta : {0.39, 0.5, 1.0, 1.17, 2.0, 4.0}) eigprobe(eta, false);
  for (double eta : {0.39, 1.17, 2.0}) eigprobe(eta, true);
  return 0;
}
