#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distlab/critical.hpp"
#include "distlab/geometry.hpp"
#include "json.hpp"

namespace distlab {

struct AffinePiece {
  Vec g;
  double b = 0;
};

// max of affine pieces; the convex half of a DC representation. Exact
// duplicate pieces are merged on insert; the piece budget guards the
// multiplicative growth of sums and compositions.
class PolyConvex {
 public:
  PolyConvex() = default;
  explicit PolyConvex(int dim) : dim_(dim) {}
  static PolyConvex constant(int dim, double c);

  int dim() const { return dim_; }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  void add_piece(const AffinePiece& p);
  double eval(const Vec& x) const;

 private:
  int dim_ = 1;
  std::vector<AffinePiece> pieces_;
};

constexpr size_t kMaxPieces = 10000;

struct DCFunction {
  int dim = 1;
  PolyConvex plus, minus;

  double eval(const Vec& x) const { return plus.eval(x) - minus.eval(x); }
  double eval1(double t) const;  // dim == 1 convenience

  static DCFunction from_json(const nlohmann::json& j);
  static DCFunction load(const std::string& path);
  std::string to_json() const;
};

// (p1 - m1) + (p2 - m2) = (p1 + p2) - (m1 + m2); sums of maxes expand to
// pairwise piece sums. Self-checked on 100 probe points (1e-12).
DCFunction dc_sum(const DCFunction& a, const DCFunction& b);

// Composition f(g(x)) for piecewise-affine 1D outer f: f is rewritten as
// alpha + beta t + sum_k j_k (t - t_k)_+ from its envelope breakpoints, and
// (g - t_k)_+ = max(p - t_k, m) - m keeps each term convex. Self-checked on
// 100 probe points (1e-10).
DCFunction dc_compose_pa(const DCFunction& outer, const DCFunction& inner);

struct StationaryInterval {
  double lo = 0, hi = 0;
  double value = 0;
};

struct StationaryRegion {
  std::vector<Vec> polygon;  // CCW
  double value = 0;
};

struct StationarySet {
  int dim = 1;
  std::vector<StationaryInterval> intervals;  // 1D cells
  std::vector<StationaryRegion> regions;      // 2D cells
  std::vector<double> values;                 // sorted, deduplicated at 1e-12
};

// Cells of the affine activity decomposition on which grad f = 0. 1D: common
// refinement of the two envelopes' breakpoints; 2D: activity polygons of
// stationary piece pairs, clipped to box (slivers below 1e-12 * area dropped).
StationarySet stationary_set(const DCFunction& f, const Box& box);

// Box-counting estimate of the stationary VALUE set at scale delta.
HausdorffEstimate morse_sard_check(const DCFunction& f, const Box& box,
                                   double s, double delta);

}  // namespace distlab
