#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "distlab/field.hpp"
#include "distlab/geometry.hpp"
#include "distlab/levelset.hpp"

namespace distlab {

struct ProjectionResult {
  Vec nearest;      // minimizing contact on A = {d_F >= r}
  double distance = 0;
  bool unique = true;
  std::vector<Vec> competing;  // contacts that trip the non-uniqueness rule
};

// Nearest-point queries against the superlevel set A = {d_F >= r}. Candidates
// are the extracted r-level cells plus grid vertices of A within 4 layers of
// the boundary (so components thinner than a grid cell still attract).
// Projection is declared non-unique when a second contact a' sits farther than
// uniqueness_tol from the minimizer yet its excess distance is within the
// curvature-style allowance theta * |a' - a0|^2 / (2 max(m, h)).
class SuperlevelProjector {
 public:
  SuperlevelProjector(const DistanceField& field, double r,
                      double theta = 0.05, double uniqueness_tol = 0);

  // pre: q inside the grid box
  ProjectionResult project(const Vec& q) const;
  const LevelSetMesh& boundary() const { return mesh_; }
  double uniqueness_tol() const { return utol_; }

 private:
  struct Prim {
    Vec a, b, c;
    int kind;  // 0 point, 1 segment, 2 triangle
  };

  const DistanceField& field_;
  double r_, theta_, utol_, cell_;
  LevelSetMesh mesh_;
  std::vector<Prim> prims_;
  std::unordered_map<uint64_t, std::vector<int>> buckets_;

  uint64_t bucket_key(int64_t i, int64_t j, int64_t k) const;
  void insert_prim(int id);
};

ProjectionResult project_to_superlevel(const DistanceField& field, double r,
                                       const Vec& q);

struct ReachAtParams {
  double cap = 0;  // 0 -> half the grid box diameter
  int samples = 64;
  uint64_t seed = 1;
  double theta = 0.05;
  double uniqueness_tol = 0;  // 0 -> 3h
};

struct ReachEstimate {
  Vec p;
  double epsilon = 0;  // largest ball radius whose samples all project uniquely
  double cap = 0;
  int samples = 0;
  bool capped = false;  // epsilon hit the cap (the set looks convex from p)
};

// Bisection estimate of reach at boundary point p: accept(eps) draws `samples`
// ball points (seeded per index, so results are monotone under sample-count
// growth) plus deterministic probes along the inward normal, and requires a
// unique projection for each. pre: |d_F(p) - r| <= 2h.
ReachEstimate estimate_reach_at(const DistanceField& field, double r,
                                const Vec& p, const ReachAtParams& params);

struct ReachParams {
  int boundary_samples = 32;  // stride-sampled mesh vertices
  ReachAtParams at;
  int threads = 1;
};

struct ReachReport {
  double r = 0;
  double global_reach = 0;
  std::vector<ReachEstimate> per_point;
  std::string to_json() const;
};

ReachReport estimate_reach(const DistanceField& field, double r,
                           const ReachParams& params);

}  // namespace distlab
