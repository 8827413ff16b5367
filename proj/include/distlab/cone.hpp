#pragma once

#include <array>
#include <cstdint>

namespace distlab {

// Point on the product of the cone {z = alpha * sqrt(x^2 + y^2)} with a line:
// planar radius r, planar angle theta, line coordinate s.
struct ConePoint {
  double r = 0;
  double theta = 0;
  double s = 0;
};

// Threshold steepness: at or above it every triple of unit directions has a
// pair meeting at a non-obtuse angle.
double cone_auto_alpha();  // sqrt(2 pi^2 - 1)

// distance from the apex ray (r=0, s=0): sqrt(r^2 (1+alpha^2) + s^2)
double cone_norm(const ConePoint& p, double alpha);

// Geodesic distance in the product metric: the cone factor unrolls to a wedge
// of angle 2 pi / sqrt(1+alpha^2), so chords use the wrapped angle scaled by
// k = 1/sqrt(1+alpha^2); the line factor adds in squares.
double cone_intrinsic_distance(const ConePoint& a, const ConePoint& b,
                               double alpha);

// Length of the constant-radius corridor path: rotate by the raw (unwrapped)
// angle difference at fixed r while moving linearly in s. pre: a.r == b.r.
double cone_path_length(const ConePoint& a, const ConePoint& b, double alpha);

struct AngleResult {
  double angle = 0;   // comparison angle at the apex
  double cosine = 0;  // law-of-cosines argument before acos
};

// Comparison angle from the intrinsic triangle (apex, a, b).
// errors: DomainError when the cosine argument exceeds 1 + 1e-9 in magnitude.
AngleResult cone_angle(const ConePoint& a, const ConePoint& b, double alpha);

struct DistanceBounds {
  double dist2 = 0;   // intrinsic distance squared
  double len2 = 0;    // corridor path length squared
  double mid2 = 0;    // 4 pi^2 r^2 + s1^2 + s2^2
  double norms2 = 0;  // |xi1|^2 + |xi2|^2
  bool ok = false;    // chain dist2 <= len2 <= mid2 <= norms2 holds
};

// Verifies dist^2 <= len^2 <= 4 pi^2 r^2 + s1^2 + s2^2 <= |xi1|^2 + |xi2|^2
// (each within 1e-9 * (1 + |rhs|)). pre: equal radii, s1 * s2 >= 0, and
// alpha >= cone_auto_alpha() - 1e-12 for the final bound.
DistanceBounds cone_distance_bounds(const ConePoint& a, const ConePoint& b,
                                    double alpha);

struct ObtuseTriple {
  bool found = false;
  std::array<ConePoint, 3> points;
  double max_min_angle = 0;  // best min-pairwise comparison angle seen
};

// Randomized search (refined by coordinate descent) for three unit directions
// with all pairwise comparison angles obtuse. Deterministic for a fixed seed
// regardless of thread count. found iff max_min_angle > pi/2 + 1e-6.
ObtuseTriple obtuse_triple_search(double alpha, int samples, uint64_t seed,
                                  int threads = 1);

}  // namespace distlab
