#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distlab/critical.hpp"
#include "distlab/field.hpp"
#include "distlab/geometry.hpp"

namespace distlab {

// Extracted distance sphere S_r = {x : d_F(x) = r}. Vertices lie on grid cell
// edges; cells are polyline edges (2D) or triangles (3D). r_snapped is the
// actually-extracted level after collision snapping.
struct LevelSetMesh {
  int dim = 2;
  double r = 0;
  double r_snapped = 0;
  double h = 0;
  std::vector<Vec> vertices;
  std::vector<std::array<int, 2>> edges;      // 2D cells
  std::vector<std::array<int, 3>> triangles;  // 3D cells
  std::vector<int> cell_component;            // per cell, first-use order
  int component_count = 0;

  size_t cell_count() const { return dim == 2 ? edges.size() : triangles.size(); }
  double total_length() const;  // 2D: sum of edge lengths
};

struct ManifoldDefect {
  Vec location;
  std::string kind;
};

struct ManifoldReport {
  bool manifold = true;
  int components = 0;
  std::vector<ManifoldDefect> defects;
};

struct GraphSample {
  int vertex = 0;
  Vec point;
  double lipschitz = 0;
  int neighbors = 0;
  bool pass = true;
};

struct SemiTriple {
  Vec a, b, m;
  double lhs = 0;  // midpoint-test value; negative beyond tolerance = violation
};

struct SemiconcavityResult {
  bool pass = true;
  long tested = 0;
  double worst = 0;  // minimum midpoint-test value seen
  std::optional<SemiTriple> violation;
};

struct BoundaryReport {
  double r = 0;
  double hausdorff = 0;
  bool coincide = false;
  size_t level_count = 0;     // S_r vertex set size
  size_t boundary_count = 0;  // sublevel-boundary vertex set size
  Vec worst_level;            // S_r point farthest from the boundary set
  Vec worst_boundary;
};

struct SweepEntry {
  double r = 0;
  int components = 0;
  bool manifold = true;
  int defects = 0;
  double nearest_critical_value = 0;  // inf when no critical values known
};

struct SweepParams {
  std::vector<double> critical_values;
  double delta = 0;        // Hausdorff-estimate scale; 0 -> 4h
  double cluster_tol = 0;  // manifold-check vertex clustering; 0 -> 0.02h
  int threads = 1;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  HausdorffEstimate exceptional;  // of NonManifold radii, s = (dim-1)/2
  std::string to_json() const;
};

// Marching squares / cubes with linear edge interpolation; saddle cells are
// disambiguated by the multilinear center value. If r collides with a vertex
// value (within 1e-12) it is offset by +1e-10 * value range, retried <= 5x.
LevelSetMesh extract_level_set(const DistanceField& field, double r);

// Combinatorial manifold conditions after clustering vertices at cluster_tol
// (default 0.02h; merges sub-grid pinches the marching cells cannot see):
// 2D every vertex degree 2 and each component one cycle; 3D every edge borders
// exactly 2 triangles and every vertex link is a single cycle.
ManifoldReport manifold_check(const LevelSetMesh& mesh, double cluster_tol = 0);

// Local-graph probe at sampled mesh vertices: heights over the plane normal to
// the field gradient must be single-valued with a finite fitted Lipschitz
// constant. max_samples = 0 checks every vertex.
std::vector<GraphSample> lipschitz_graph_check(const DistanceField& field,
                                               const LevelSetMesh& mesh,
                                               double window,
                                               int max_samples = 50);

// Midpoint semiconcavity test of x -> d(x) - (c/2)|x|^2 (Euclidean |.|, the
// Hilbert structure) on {x in region : d_lo <= d_F(x) <= d_hi}; a triple is
// admissible when 17 points along [a,b] all lie in that set. Distances are
// exact scene queries via the field's embedded scene.
SemiconcavityResult semiconcavity_check(const DistanceField& field,
                                        const Box& region, double c,
                                        long triples, uint64_t seed,
                                        double d_lo = 0,
                                        double d_hi = 1e308);

// Compares S_r (mesh vertices plus grid vertices with d exactly = r) against
// the boundary of the sublevel region {d <= r}; coincide iff Hausdorff <= 2h.
BoundaryReport boundary_vs_level(const DistanceField& field, double r);

SweepReport radius_sweep(const DistanceField& field, double r_min, double r_max,
                         int count, const SweepParams& params);

}  // namespace distlab
