#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eegfwd/analytic.hpp"
#include "eegfwd/assembly.hpp"
#include "eegfwd/hexmesh.hpp"
#include "eegfwd/labelgrid.hpp"
#include "eegfwd/metrics.hpp"
#include "eegfwd/run_config.hpp"
#include "eegfwd/solve.hpp"

namespace eegfwd {

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

struct SphereModelSpec {
  CompartmentTable table = fourLayerSphereTable();
  double seg_mm = 4.0;
  double h_mm = 4.0;
  double padding_mm = -1.0;  // < 0: one voxel of air
  std::string name;

  std::string autoName() const {
    std::ostringstream os;
    os << "seg-" << seg_mm << "-h-" << h_mm;
    const Compartment* skull = table.findRole(TissueRole::Skull);
    if (skull && skull->outer_radius_mm && *skull->outer_radius_mm != 86.0)
      os << "-R" << *skull->outer_radius_mm;
    return os.str();
  }
};

/// Everything a forward run needs: geometry, conductivities, and the
/// surface evaluation points.
struct Model {
  std::string name;
  CompartmentTable table;
  LabelGrid grid;
  HexMesh mesh;
  Skeleton skeleton;
  ConductivityField field;
  SurfaceSampling sampling;
  std::uint64_t hash = 0;
};

inline Model buildModelFromGrid(const LabelGrid& grid, const CompartmentTable& table,
                                double h_mm, const std::string& name) {
  Model m;
  m.name = name;
  m.table = table;
  m.grid = grid;
  m.mesh = buildHexMesh(m.grid, h_mm);
  m.skeleton = computeSkeleton(m.mesh);
  m.field = makeConductivityField(m.mesh, table);
  m.sampling = makeSurfaceSampling(m.mesh, m.skeleton, table);
  m.hash = meshHash(m.mesh);
  return m;
}

inline Model buildSphereModel(const SphereModelSpec& spec,
                              std::vector<std::string>* warnings = nullptr) {
  const double padding = spec.padding_mm < 0.0 ? spec.seg_mm : spec.padding_mm;
  LabelGrid grid = generateSphereSegmentation(spec.table, spec.seg_mm, padding, warnings);
  return buildModelFromGrid(grid, spec.table, spec.h_mm,
                            spec.name.empty() ? spec.autoName() : spec.name);
}

/// Series reference model matching a sphere compartment table.
inline LayeredSphereModel layeredModelFromTable(const CompartmentTable& table,
                                                int truncation = 100, double tail_tol = 1e-8) {
  LayeredSphereModel m;
  for (const auto& c : table.entries) {
    if (!c.outer_radius_mm) throw InvalidInput("compartment " + c.name + " has no radius");
    m.radii_mm.push_back(*c.outer_radius_mm);
    m.conductivities_S_per_m.push_back(c.conductivity_S_per_m);
  }
  m.truncation = truncation;
  m.tail_tol = tail_tol;
  return m;
}

// ---------------------------------------------------------------------------
// Forward engine: one assembled operator serves many dipoles
// ---------------------------------------------------------------------------

struct ForwardOptions {
  Scheme scheme = Scheme::Dg;
  double eta = 0.39;
  SolveConfig solver;
  QuadratureConfig quad;

  static ForwardOptions forScheme(Scheme s) {
    ForwardOptions o;
    o.scheme = s;
    o.solver.precon = defaultPrecon(s);
    return o;
  }
};

class ForwardEngine {
 public:
  ForwardEngine(const Model& model, const ForwardOptions& opts)
      : model_(model), opts_(opts) {
    layout_ = opts.scheme == Scheme::Cg
                  ? DofLayout{Scheme::Cg, 1, static_cast<std::int32_t>(model.mesh.vertices.size())}
                  : DofLayout{Scheme::Dg, 8, static_cast<std::int32_t>(model.mesh.cells.size())};
    A_ = opts.scheme == Scheme::Cg
             ? assembleOperatorCG(model.mesh, model.field, opts.quad)
             : assembleOperatorDG(model.mesh, model.skeleton, model.field, opts.eta, opts.quad);
    solver_.emplace(A_, layout_, opts.solver);
  }

  const BlockSparseMatrix& matrix() const { return A_; }
  const DofLayout& layout() const { return layout_; }
  const Model& model() const { return model_; }
  const ForwardOptions& options() const { return opts_; }

  std::vector<double> assembleRhs(const Dipole& d, SubtractionSplit* split_out = nullptr,
                                  std::vector<std::string>* warnings = nullptr) const {
    SubtractionSplit split = sourceConductivity(model_.mesh, model_.field, d);
    std::vector<double> b =
        opts_.scheme == Scheme::Cg
            ? assembleRhsCG(model_.mesh, model_.skeleton, model_.field, split, d, opts_.quad,
                            warnings)
            : assembleRhsDG(model_.mesh, model_.skeleton, model_.field, split, d, opts_.quad,
                            warnings);
    if (split_out) *split_out = std::move(split);
    return b;
  }

  ForwardSolution solve(const Dipole& d, std::vector<std::string>* warnings = nullptr,
                        SolveResult* stats = nullptr) const {
    ForwardSolution sol;
    sol.scheme = opts_.scheme;
    sol.mesh = &model_.mesh;
    sol.field = &model_.field;
    sol.dipole = d;
    sol.eta = opts_.eta;
    sol.quad = opts_.quad;
    const std::vector<double> b = assembleRhs(d, &sol.split, warnings);
    SolveResult r = solver_->solve(b);
    sol.coeffs = std::move(r.x);
    if (stats) {
      stats->iterations = r.iterations;
      stats->rel_residual = r.rel_residual;
      stats->history = std::move(r.history);
    }
    return sol;
  }

  /// Surface potential at the model's sampling points, mean-centered.
  std::vector<double> surfaceValues(const ForwardSolution& sol) const {
    return evaluatePotential(sol, model_.sampling.points, &model_.sampling.cells);
  }

  /// Point-evaluation restriction minus the reference electrode row, for
  /// transfer-matrix sensors.
  Restriction restriction(const Vec3& sensor, const Vec3& reference) const {
    Restriction r;
    appendPointFunctional(sensor, 1.0, r);
    appendPointFunctional(reference, -1.0, r);
    return r;
  }

 private:
  void appendPointFunctional(const Vec3& x, double weight, Restriction& r) const {
    const std::int32_t cell = locateCell(model_.mesh, x);
    if (cell < 0) throw InvalidInput("sensor point lies in no mesh cell");
    const BasisSet& basis = basisFor(opts_.scheme == Scheme::Cg ? BasisKind::CgTrilinear
                                                                : BasisKind::DgOrthonormalQ1);
    const BasisEval e = basis.eval(model_.mesh.toReference(cell, x));
    for (int i = 0; i < 8; ++i) {
      const std::int64_t dof = opts_.scheme == Scheme::Cg
                                   ? model_.mesh.cells[cell][i]
                                   : static_cast<std::int64_t>(cell) * 8 + i;
      r.entries.emplace_back(dof, weight * e.values[i]);
    }
  }

  const Model& model_;
  ForwardOptions opts_;
  DofLayout layout_;
  BlockSparseMatrix A_;
  std::optional<PcgSolver> solver_;
};

// ---------------------------------------------------------------------------
// Config-driven construction
// ---------------------------------------------------------------------------

inline SphereModelSpec sphereSpecFromConfig(const RunConfig& cfg) {
  SphereModelSpec spec;
  const std::vector<double> radii = cfg.numbers("model.radii", {78.0, 80.0, 86.0, 92.0});
  const std::vector<double> cond =
      cfg.numbers("model.conductivities", {0.33, 1.79, 0.01, 0.43});
  if (radii.size() != cond.size())
    throw InvalidInput("config: model.radii and model.conductivities differ in length");
  if (radii.size() == 4) {
    spec.table = fourLayerSphereTable();
    for (std::size_t i = 0; i < 4; ++i) {
      spec.table.entries[i].outer_radius_mm = radii[i];
      spec.table.entries[i].conductivity_S_per_m = cond[i];
    }
  } else {
    spec.table.entries.clear();
    for (std::size_t i = 0; i < radii.size(); ++i)
      spec.table.entries.push_back({static_cast<int>(i + 1), "layer" + std::to_string(i + 1),
                                    radii[i], cond[i],
                                    i == 0 ? TissueRole::Brain
                                           : (i + 1 == radii.size() ? TissueRole::Skin
                                                                    : TissueRole::Other)});
  }
  if (cfg.has("model.skull_radius_override")) {
    Compartment* skull = nullptr;
    for (auto& c : spec.table.entries)
      if (c.role == TissueRole::Skull) skull = &c;
    if (!skull) throw InvalidInput("config: skull override set but no skull compartment");
    skull->outer_radius_mm = cfg.num("model.skull_radius_override");
  }
  spec.seg_mm = cfg.num("resolutions.seg_mm", 4.0);
  spec.h_mm = cfg.num("resolutions.h_mm", spec.seg_mm);
  spec.padding_mm = cfg.num("resolutions.padding_mm", -1.0);
  spec.name = cfg.str("model.name", "");
  return spec;
}

inline SolveConfig solverFromConfig(const RunConfig& cfg, Scheme scheme) {
  SolveConfig s;
  s.tol = cfg.num("solver.tol", 1e-10);
  s.max_iter = cfg.integer("solver.max_iter", 50000);
  const std::string p = cfg.str("solver.preconditioner", "default");
  if (p == "none")
    s.precon = PreconKind::None;
  else if (p == "diag" || p == "diagonal")
    s.precon = PreconKind::Diagonal;
  else if (p == "block" || p == "block-diagonal")
    s.precon = PreconKind::BlockDiagonal;
  else if (p == "default")
    s.precon = defaultPrecon(scheme);
  else
    throw InvalidInput("config: unknown preconditioner " + p);
  s.deflate = cfg.flag("solver.deflate", true);
  return s;
}

inline ForwardOptions forwardOptionsFromConfig(const RunConfig& cfg, Scheme scheme) {
  ForwardOptions o;
  o.scheme = scheme;
  o.eta = cfg.num("scheme.eta", 0.39);
  o.solver = solverFromConfig(cfg, scheme);
  o.quad.volume_rhs_degree = cfg.integer("quadrature.volume_rhs_degree", 5);
  o.quad.face_rhs_degree = cfg.integer("quadrature.face_rhs_degree", 5);
  o.quad.boundary_degree = cfg.integer("quadrature.boundary_degree", 11);
  return o;
}

/// The ten default eccentricities; the spread mirrors the sphere studies
/// and is overridable in [sources].
inline std::vector<double> defaultEccentricities() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.964};
}

inline std::vector<Dipole> sourcesFromConfig(const RunConfig& cfg,
                                             const LayeredSphereModel& sphere) {
  const std::vector<double> eccs = cfg.numbers("sources.eccentricities", defaultEccentricities());
  const int count = cfg.integer("sources.count_per_ecc", 10);
  const std::string orient = cfg.str("sources.orientation", "radial");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.num("sources.seed", 42));
  const double moment = cfg.num("sources.moment", 1.0);
  Dipole::Orientation o;
  if (orient == "radial")
    o = Dipole::Orientation::Radial;
  else if (orient == "tangential")
    o = Dipole::Orientation::Tangential;
  else
    throw InvalidInput("config: sources.orientation must be radial or tangential");
  return placeSources(sphere, eccs, count, o, seed, moment);
}

}  // namespace eegfwd
