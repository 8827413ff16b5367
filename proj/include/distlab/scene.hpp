#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "distlab/geometry.hpp"
#include "json.hpp"

namespace distlab {

struct PointPrim {
  Vec p;
};
struct SegmentPrim {
  Vec a, b;
};
// Solid Euclidean ball; as a set it does not depend on the active norm.
struct BallPrim {
  Vec center;
  double radius;
};

using Primitive = std::variant<PointPrim, SegmentPrim, BallPrim>;

// Compact closed set F given as a finite union of primitives. Polyline loops
// from scene files are decomposed into segments at load time.
class ClosedSet {
 public:
  ClosedSet(int dim, std::vector<Primitive> prims);

  static ClosedSet from_json(const nlohmann::json& j);
  static ClosedSet load(const std::string& path);
  nlohmann::json to_json() const;
  // FNV-1a over the canonical serialized form
  uint64_t hash() const;

  int dim() const { return dim_; }
  const std::vector<Primitive>& primitives() const { return prims_; }
  Box bounding_box() const;

 private:
  int dim_;
  std::vector<Primitive> prims_;
};

// Result of a nearest-point query at x (x must not lie in F).
struct NearestSet {
  Vec query;
  double distance = 0;
  // all witnesses within `tolerance` of the global minimum, deduplicated at
  // spatial resolution `tolerance`
  std::vector<Vec> witnesses;
  // norm-unit vectors from the query toward each witness
  std::vector<Vec> directions;
  double tolerance = 0;
};

// d_F(x) under the given norm. Exact closed forms for Euclidean; for lp the
// segment/ball cases reduce to 1-D convex minimization solved to 1e-12.
double scene_distance(const ClosedSet& F, const Vec& x, const Norm& norm);

NearestSet nearest_points(const ClosedSet& F, const Vec& x, const Norm& norm,
                          double tau);

}  // namespace distlab
