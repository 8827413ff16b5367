#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "distlab/field.hpp"
#include "distlab/geometry.hpp"
#include "distlab/scene.hpp"

namespace distlab {

enum class Criterion { Hull, Directional };

// Regular verdicts carry a norm-unit descent witness v and a rate epsilon > 0:
// d decreases at rate >= epsilon along v near the point. margin is the raw
// criterion margin (negative or ~0 at critical points).
struct CriticalVerdict {
  Vec point;
  bool critical = true;
  Criterion criterion = Criterion::Hull;
  double margin = 0;
  double epsilon = 0;
  Vec witness;
};

struct Interval {
  double lo = 0;
  double hi = 0;
};

// Greedy delta-cover premeasure: an upper-bound proxy for the s-dimensional
// Hausdorff measure at scale delta, never a true measure.
struct HausdorffEstimate {
  double s = 0;
  double delta = 0;
  std::vector<Interval> cover;
  double premeasure = 0;
};

struct CriticalScanParams {
  double eta = 1e-3;       // hull margin
  double delta = 0;        // directional neighborhood; 0 -> 4h
  int directions = 0;      // 0 -> 32 in 2D, 128 in 3D
  int probes = 16;
  uint64_t seed = 0;
  int threads = 1;
  bool use_directional = false;  // force the directional criterion on any norm
  double tau = 0;          // witness tolerance; 0 -> 2h
};

struct CriticalReport {
  uint64_t scene_hash = 0;
  std::string norm_spec;
  CriticalScanParams params;
  double h = 0;
  int scanned = 0;
  std::vector<CriticalVerdict> verdicts;     // one per scanned vertex
  std::vector<Vec> critical_points;
  std::vector<double> critical_values;       // sorted, deduplicated at 1e-12
  HausdorffEstimate hausdorff;               // of critical_values, s=(dim-1)/2
  std::string to_json() const;
};

// Flat Grove criterion: Regular iff some Euclidean-unit w has <w,u> <= -eta
// for every witness direction u, i.e. dist(0, conv(directions)) >= eta.
// Decided exactly: 2D by angular sweep, 3D by min-norm point enumeration.
CriticalVerdict hull_criterion(const NearestSet& near, double eta);

// Sampled descent test on the interpolated field: Regular iff some direction v
// has (f(z+tv) - f(z))/t < -margin < 0 for all sampled z in B(x,delta) and
// t in {delta/4, delta/2, delta} that stay inside the ball.
CriticalVerdict directional_criterion(const DistanceField& field, const Vec& x,
                                      double delta, int directions, int probes,
                                      uint64_t seed);

// Classifies every interior grid vertex with d_F > 3h. Also asserts the
// no-stationary-point property (some sampled direction has one-sided quotient
// <= -0.5 at every scanned vertex); a violation throws FalsificationError.
CriticalReport critical_scan(const DistanceField& field, const ClosedSet& scene,
                             const Norm& norm, const CriticalScanParams& params);

// Greedy cover of the sorted values by intervals [v, v+delta]; each interval
// is counted at its maximal length, so premeasure = count * delta^s.
HausdorffEstimate hausdorff_box_estimate(std::vector<double> values, double s,
                                         double delta);

enum class ProbeVerdict { Regular, Inconclusive };

// One-directional regularity probe for a DC pair f = plus - minus: Regular iff
// both parts have stable two-sided directional derivatives along v that differ
// by more than 1e-3. Never claims Critical.
ProbeVerdict dc_regularity_probe(const std::function<double(const Vec&)>& f_plus,
                                 const std::function<double(const Vec&)>& f_minus,
                                 const Vec& x, const Vec& v);

std::string hausdorff_to_json(const HausdorffEstimate& est);

}  // namespace distlab
