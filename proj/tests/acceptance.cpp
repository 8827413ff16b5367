// Acceptance gate: ten go/no-go checks over the assembled library, one
// verdict line each. Exit status is the number of failed criteria, so a zero
// exit means the gate is green.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "distlab/cone.hpp"
#include "distlab/critical.hpp"
#include "distlab/dc.hpp"
#include "distlab/errors.hpp"
#include "distlab/field.hpp"
#include "distlab/json_out.hpp"
#include "distlab/levelset.hpp"
#include "distlab/reach.hpp"
#include "distlab/rng.hpp"
#include "distlab/scene.hpp"
#include "geodesic_oracle.hpp"

using namespace distlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> g_det_failures;

// Rebuilds a report and records byte mismatches against the baseline: once at
// the baseline thread count (same-seed repeatability) and once at the other
// of {1, 8} (thread-count independence).
void check_deterministic(const std::string& tag, const std::string& baseline,
                         int baseline_threads,
                         const std::function<std::string(int)>& build) {
  if (build(baseline_threads) != baseline)
    g_det_failures.push_back(tag + " differs on rerun");
  int other = baseline_threads == 1 ? 8 : 1;
  if (build(other) != baseline)
    g_det_failures.push_back(tag + " differs at " + std::to_string(other) +
                             " threads");
}

struct Outcome {
  bool ok = true;
  int extra = 0;
  std::string detail;
  void fail(const std::string& d) {
    if (ok) {
      detail = d;
      ok = false;
    } else {
      ++extra;
    }
  }
  std::string text() const {
    return extra == 0 ? detail
                      : detail + " [+" + std::to_string(extra) + " more]";
  }
};

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

ClosedSet two_point_scene() {
  return ClosedSet(2, {PointPrim{Vec(-1, 0)}, PointPrim{Vec(1, 0)}});
}

ClosedSet point_scene() { return ClosedSet(2, {PointPrim{Vec(0, 0)}}); }

ClosedSet cloud_scene(int idx) {
  Rng rng(derive_seed(777, static_cast<uint64_t>(idx)));
  std::vector<Primitive> prims;
  for (int k = 0; k < 20; ++k) {
    double x = rng.uniform(0, 1);
    double y = rng.uniform(0, 1);
    prims.push_back(PointPrim{Vec(x, y)});
  }
  return ClosedSet(2, std::move(prims));
}

DistanceField make_field(const ClosedSet& scene, const Norm& norm,
                         const Box& box, double h, int threads) {
  return sample_field(scene, norm, GridSpec::from_box(box, h), threads);
}

void vec_into(JsonWriter& w, const Vec& v) {
  w.begin_array();
  for (int i = 0; i < v.dim(); ++i) w.value_double(v[i]);
  w.end_array();
}

std::string mesh_json(const LevelSetMesh& m) {
  JsonWriter w;
  w.begin_object();
  w.key("r_snapped");
  w.value_double(m.r_snapped);
  w.key("vertices");
  w.begin_array();
  for (const Vec& v : m.vertices) vec_into(w, v);
  w.end_array();
  w.key("cells");
  w.begin_array();
  if (m.dim == 2) {
    for (const auto& e : m.edges) {
      w.begin_array();
      w.value_int(e[0]);
      w.value_int(e[1]);
      w.end_array();
    }
  } else {
    for (const auto& t : m.triangles) {
      w.begin_array();
      w.value_int(t[0]);
      w.value_int(t[1]);
      w.value_int(t[2]);
      w.end_array();
    }
  }
  w.end_array();
  w.key("components");
  w.value_int(m.component_count);
  w.end_object();
  return w.str();
}

std::string graph_json(const std::vector<GraphSample>& gs) {
  JsonWriter w;
  w.begin_array();
  for (const GraphSample& s : gs) {
    w.begin_object();
    w.key("vertex");
    w.value_int(s.vertex);
    w.key("point");
    vec_into(w, s.point);
    w.key("lipschitz");
    w.value_double(s.lipschitz);
    w.key("neighbors");
    w.value_int(s.neighbors);
    w.key("pass");
    w.value_bool(s.pass);
    w.end_object();
  }
  w.end_array();
  return w.str();
}

std::string semi_json(const SemiconcavityResult& r) {
  JsonWriter w;
  w.begin_object();
  w.key("pass");
  w.value_bool(r.pass);
  w.key("tested");
  w.value_int(static_cast<int>(r.tested));
  w.key("worst");
  w.value_double(r.worst);
  w.key("violation");
  if (r.violation) {
    w.begin_object();
    w.key("a");
    vec_into(w, r.violation->a);
    w.key("b");
    vec_into(w, r.violation->b);
    w.key("m");
    vec_into(w, r.violation->m);
    w.key("lhs");
    w.value_double(r.violation->lhs);
    w.end_object();
  } else {
    w.value_null();
  }
  w.end_object();
  return w.str();
}

std::string obtuse_json(const ObtuseTriple& t) {
  JsonWriter w;
  w.begin_object();
  w.key("found");
  w.value_bool(t.found);
  w.key("max_min_angle");
  w.value_double(t.max_min_angle);
  w.key("points");
  w.begin_array();
  for (const ConePoint& p : t.points) {
    w.begin_array();
    w.value_double(p.r);
    w.value_double(p.theta);
    w.value_double(p.s);
    w.end_array();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

// ---- criterion 1: two-point critical structure and radius sweep ----

Outcome criterion1() {
  Outcome out;
  const double h = 0.005;
  ClosedSet scene = two_point_scene();
  Norm norm = Norm::euclidean(2);

  auto t0 = std::chrono::steady_clock::now();
  DistanceField field =
      make_field(scene, norm, Box{Vec(-2, -2), Vec(2, 2)}, h, 1);
  CriticalScanParams cp;
  cp.seed = 1;
  cp.threads = 1;
  CriticalReport crit = critical_scan(field, scene, norm, cp);
  SweepParams sp;
  sp.critical_values = crit.critical_values;
  sp.threads = 1;
  SweepReport sweep = radius_sweep(field, 0.25, 1.75, 200, sp);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();

  if (crit.critical_points.empty()) out.fail("no critical vertices detected");
  for (const Vec& p : crit.critical_points)
    if (p.norm2() > 3 * h)
      out.fail("critical vertex " + fmt(p.norm2()) +
               " from the origin exceeds 3h");
  if (crit.critical_values.empty()) out.fail("no critical values detected");
  for (double v : crit.critical_values)
    if (v < 1 - 2 * h || v > 1 + 2 * h)
      out.fail("critical value " + fmt(v) + " outside [1-2h, 1+2h]");
  for (const SweepEntry& e : sweep.entries)
    if (!e.manifold && std::abs(e.r - 1) > 5 * h)
      out.fail("non-manifold radius " + fmt(e.r) + " farther than 5h from 1");
  if (secs > 60)
    out.fail("single-threaded runtime " + fmt(secs) + "s exceeds 60s");

  check_deterministic("criterion 1 critical report", crit.to_json(), 1,
                      [&](int th) {
                        CriticalScanParams p = cp;
                        p.threads = th;
                        return critical_scan(field, scene, norm, p).to_json();
                      });
  check_deterministic("criterion 1 sweep report", sweep.to_json(), 1,
                      [&](int th) {
                        SweepParams p = sp;
                        p.threads = th;
                        return radius_sweep(field, 0.25, 1.75, 200, p).to_json();
                      });
  return out;
}

// ---- criterion 2: unit circle extraction and graph regularity ----

Outcome criterion2() {
  Outcome out;
  const double h = 0.01;
  ClosedSet scene = point_scene();
  Norm norm = Norm::euclidean(2);
  DistanceField field =
      make_field(scene, norm, Box{Vec(-2, -2), Vec(2, 2)}, h, 8);

  LevelSetMesh mesh = extract_level_set(field, 1.0);
  ManifoldReport mc = manifold_check(mesh);
  if (!mc.manifold) out.fail("manifold check failed on the circle");
  if (mc.components != 1)
    out.fail("expected one closed polyline, got " +
             std::to_string(mc.components));
  double len = mesh.total_length();
  if (std::abs(len - 2 * kPi) > 0.01 * 2 * kPi)
    out.fail("polyline length " + fmt(len) + " off 2*pi by more than 1%");

  std::vector<GraphSample> gs = lipschitz_graph_check(field, mesh, 0.2, 50);
  if (gs.size() != 50)
    out.fail("expected 50 graph samples, got " + std::to_string(gs.size()));
  for (const GraphSample& s : gs) {
    if (!s.pass) out.fail("graph probe failed at a sampled vertex");
    if (s.lipschitz > 0.3)
      out.fail("fitted Lipschitz constant " + fmt(s.lipschitz) + " above 0.3");
  }

  std::string baseline = mesh_json(mesh) + graph_json(gs);
  check_deterministic("criterion 2 level-set report", baseline, 1, [&](int) {
    LevelSetMesh m = extract_level_set(field, 1.0);
    return mesh_json(m) + graph_json(lipschitz_graph_check(field, m, 0.2, 50));
  });
  return out;
}

// ---- criterion 3: hull and directional criteria agree on point clouds ----

Outcome criterion3() {
  Outcome out;
  const double h = 0.01;
  Norm norm = Norm::euclidean(2);
  Box box{Vec(-0.2, -0.2), Vec(1.2, 1.2)};
  long total = 0, agreed = 0;

  for (int i = 0; i < 10; ++i) {
    ClosedSet scene = cloud_scene(i);
    DistanceField field = make_field(scene, norm, box, h, 8);
    CriticalScanParams hp;
    hp.seed = 3;
    hp.threads = 8;
    CriticalScanParams dp = hp;
    dp.use_directional = true;
    CriticalReport rh = critical_scan(field, scene, norm, hp);
    CriticalReport rd = critical_scan(field, scene, norm, dp);
    // The two criteria carry different grid-clearance preconditions, so their
    // scanned sets differ near the box rim; compare verdicts on the common
    // vertices, keyed by exact grid coordinates.
    std::map<std::pair<double, double>, bool> hull_at;
    for (const CriticalVerdict& v : rh.verdicts)
      hull_at[{v.point[0], v.point[1]}] = v.critical;
    std::vector<Vec> crits = rh.critical_points;
    crits.insert(crits.end(), rd.critical_points.begin(),
                 rd.critical_points.end());
    for (const CriticalVerdict& v : rd.verdicts) {
      auto it = hull_at.find({v.point[0], v.point[1]});
      if (it == hull_at.end()) continue;
      double dmin = std::numeric_limits<double>::infinity();
      for (const Vec& c : crits)
        dmin = std::min(dmin, (v.point - c).norm2());
      if (dmin <= 3 * h) continue;
      ++total;
      if (it->second == v.critical) ++agreed;
    }
    std::string tag = "criterion 3 cloud " + std::to_string(i);
    check_deterministic(tag + " hull report", rh.to_json(), 8, [&](int th) {
      CriticalScanParams p = hp;
      p.threads = th;
      return critical_scan(field, scene, norm, p).to_json();
    });
    check_deterministic(tag + " directional report", rd.to_json(), 8,
                        [&](int th) {
                          CriticalScanParams p = dp;
                          p.threads = th;
                          return critical_scan(field, scene, norm, p).to_json();
                        });
  }

  if (total == 0) {
    out.fail("no vertices qualified for comparison");
  } else if (agreed < 0.99 * static_cast<double>(total)) {
    out.fail("criteria agree at " + fmt(100.0 * agreed / total) +
             "% of " + std::to_string(total) + " vertices, below 99%");
  }
  return out;
}

// ---- criterion 4: critical-value premeasure decreases under refinement ----

Outcome criterion4() {
  Outcome out;
  Norm norm = Norm::euclidean(2);
  Box box{Vec(-0.2, -0.2), Vec(1.2, 1.2)};
  const double hs[3] = {0.02, 0.01, 0.005};

  for (int i = 0; i < 10; ++i) {
    ClosedSet scene = cloud_scene(i);
    double prev = std::numeric_limits<double>::infinity();
    for (double h : hs) {
      DistanceField field = make_field(scene, norm, box, h, 8);
      CriticalScanParams cp;
      cp.seed = 3;
      cp.threads = 8;
      CriticalReport rep = critical_scan(field, scene, norm, cp);
      double pm = rep.hausdorff.premeasure;
      if (!(pm < prev))
        out.fail("cloud " + std::to_string(i) + ": premeasure " + fmt(pm) +
                 " at h=" + fmt(h) + " does not decrease from " + fmt(prev));
      prev = pm;
      check_deterministic("criterion 4 cloud " + std::to_string(i) +
                              " h=" + fmt(h),
                          rep.to_json(), 8, [&](int th) {
                            CriticalScanParams p = cp;
                            p.threads = th;
                            return critical_scan(field, scene, norm, p)
                                .to_json();
                          });
    }
  }
  return out;
}

// ---- criterion 5: reach estimates for circle and two-point superlevels ----

Outcome criterion5() {
  Outcome out;
  Norm norm = Norm::euclidean(2);
  Box box{Vec(-2, -2), Vec(2, 2)};
  const double h = 0.01;
  ReachParams rp;
  rp.boundary_samples = 24;
  rp.threads = 8;
  rp.at.samples = 1000;
  rp.at.cap = 2;
  rp.at.seed = 5;

  DistanceField circle = make_field(point_scene(), norm, box, h, 8);
  ReachReport ra = estimate_reach(circle, 1.0, rp);
  if (ra.global_reach < 0.9 || ra.global_reach > 1.1)
    out.fail("circle r=1 estimate " + fmt(ra.global_reach) +
             " outside [0.9, 1.1]");

  DistanceField two = make_field(two_point_scene(), norm, box, h, 8);
  ReachReport rb = estimate_reach(two, 0.5, rp);
  if (rb.global_reach < 0.45 || rb.global_reach > 0.55)
    out.fail("two-point r=0.5 estimate " + fmt(rb.global_reach) +
             " outside [0.45, 0.55]");

  ReachReport rc = estimate_reach(two, 1.0, rp);
  if (!(rc.global_reach <= 0.1))
    out.fail("two-point r=1 estimate " + fmt(rc.global_reach) +
             " exceeds 0.1");

  auto wrap = [&](const char* tag, const DistanceField& f, double r,
                  const std::string& baseline) {
    check_deterministic(tag, baseline, 8, [&](int th) {
      ReachParams p = rp;
      p.threads = th;
      return estimate_reach(f, r, p).to_json();
    });
  };
  wrap("criterion 5 circle reach report", circle, 1.0, ra.to_json());
  wrap("criterion 5 two-point r=0.5 reach report", two, 0.5, rb.to_json());
  wrap("criterion 5 two-point r=1 reach report", two, 1.0, rc.to_json());
  return out;
}

// ---- criterion 6: semiconcavity passes away from the set, fails near it ----

Outcome criterion6() {
  Outcome out;
  Norm norm = Norm::euclidean(2);
  ClosedSet scene = point_scene();

  DistanceField far_field = make_field(
      scene, norm, Box{Vec(-2.2, -2.2), Vec(2.2, 2.2)}, 0.01, 8);
  Box far_region{Vec(-2, -2), Vec(2, 2)};
  SemiconcavityResult far = semiconcavity_check(far_field, far_region, 2.0,
                                                100000, 101, 1.0, 2.0);
  if (!far.pass)
    out.fail("annulus 1<=d<=2 with c=2 reports a violation, worst " +
             fmt(far.worst));
  if (far.tested != 100000)
    out.fail("annulus test admitted " + std::to_string(far.tested) +
             " of 100000 triples");

  DistanceField near_field = make_field(
      scene, norm, Box{Vec(-0.2, -0.2), Vec(0.2, 0.2)}, 0.002, 8);
  Box near_region{Vec(-0.15, -0.15), Vec(0.15, 0.15)};
  SemiconcavityResult near = semiconcavity_check(near_field, near_region, 2.0,
                                                 2000, 102, 0.004, 0.15);
  if (near.pass) {
    out.fail("region with d ~ 0.01 and c=2 unexpectedly passes");
  } else if (!near.violation) {
    out.fail("failure reported without an explicit violating triple");
  } else {
    const SemiTriple& v = *near.violation;
    auto g = [&](const Vec& x) {
      double d = scene_distance(scene, x, norm);
      return d - x.norm2() * x.norm2();  // c/2 = 1
    };
    double lhs = g(v.m) - 0.5 * (g(v.a) + g(v.b));
    if (std::abs(lhs - v.lhs) > 1e-9)
      out.fail("reported triple does not reproduce its test value");
    if (!(lhs < -1e-6))
      out.fail("reported triple is not an actual violation");
  }

  check_deterministic("criterion 6 annulus report", semi_json(far), 1,
                      [&](int) {
                        return semi_json(semiconcavity_check(
                            far_field, far_region, 2.0, 100000, 101, 1.0, 2.0));
                      });
  check_deterministic("criterion 6 near-set report", semi_json(near), 1,
                      [&](int) {
                        return semi_json(semiconcavity_check(
                            near_field, near_region, 2.0, 2000, 102, 0.004,
                            0.15));
                      });
  return out;
}

// ---- criterion 7: stationary values of |x| - |x-1| with premeasure scaling --

Outcome criterion7() {
  Outcome out;
  DCFunction f;
  f.dim = 1;
  f.plus = PolyConvex(1);
  f.plus.add_piece({Vec(1, 0), 0});
  f.plus.add_piece({Vec(-1, 0), 0});
  f.minus = PolyConvex(1);
  f.minus.add_piece({Vec(1, 0), -1});
  f.minus.add_piece({Vec(-1, 0), 1});

  Box box{Vec(-10, 0), Vec(10, 0)};
  StationarySet st = stationary_set(f, box);
  if (st.values.size() != 2 || st.values[0] != -1.0 || st.values[1] != 1.0) {
    std::string got;
    for (double v : st.values) got += (got.empty() ? "" : ", ") + fmt(v);
    out.fail("stationary values {" + got + "} are not exactly {-1, 1}");
  }

  std::string det_baseline;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    HausdorffEstimate est = hausdorff_box_estimate(st.values, 0.5, delta);
    double expect = 2 * std::pow(delta, 0.5);
    if (est.cover.size() != 2)
      out.fail("cover at delta=" + fmt(delta) + " has " +
               std::to_string(est.cover.size()) + " intervals, expected 2");
    if (std::abs(est.premeasure - expect) > 1e-15 * expect)
      out.fail("premeasure " + fmt(est.premeasure) + " at delta=" +
               fmt(delta) + " is not 2*delta^(1/2)");
    det_baseline += hausdorff_to_json(est);
  }

  check_deterministic("criterion 7 stationary report", det_baseline, 1,
                      [&](int) {
                        StationarySet s2 = stationary_set(f, box);
                        std::string acc;
                        for (double delta : {1e-2, 1e-3, 1e-4})
                          acc += hausdorff_to_json(
                              hausdorff_box_estimate(s2.values, 0.5, delta));
                        return acc;
                      });
  return out;
}

// ---- criterion 8: cone distances, bounds, searches, geodesic oracle ----

std::string bounds_report(double alpha) {
  Rng rng(derive_seed(888, 0));
  int violations = 0;
  JsonWriter spot;
  spot.begin_array();
  for (int i = 0; i < 10000; ++i) {
    double r = rng.uniform(0, 2);
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    ConePoint a{r, rng.uniform(0, 2 * kPi), sign * rng.uniform(0, 3)};
    ConePoint b{r, rng.uniform(0, 2 * kPi), sign * rng.uniform(0, 3)};
    DistanceBounds res = cone_distance_bounds(a, b, alpha);
    if (!res.ok) ++violations;
    if (i % 2500 == 0) {
      spot.begin_array();
      spot.value_double(res.dist2);
      spot.value_double(res.len2);
      spot.value_double(res.mid2);
      spot.value_double(res.norms2);
      spot.end_array();
    }
  }
  spot.end_array();
  JsonWriter w;
  w.begin_object();
  w.key("pairs");
  w.value_int(10000);
  w.key("violations");
  w.value_int(violations);
  w.key("spot");
  w.value_raw(spot.str());
  w.end_object();
  return w.str();
}

Outcome criterion8() {
  Outcome out;
  auto t0 = std::chrono::steady_clock::now();
  const double astar = cone_auto_alpha();

  std::string bounds = bounds_report(astar);
  if (bounds.find("\"violations\": 0") == std::string::npos &&
      bounds.find("\"violations\":0") == std::string::npos)
    out.fail("bound chain violated among 10000 admissible pairs");
  check_deterministic("criterion 8 bounds report", bounds, 1,
                      [&](int) { return bounds_report(astar); });

  for (double alpha : {astar, astar + 0.1, 10.0}) {
    ObtuseTriple res = obtuse_triple_search(alpha, 100000, 21, 8);
    if (res.found)
      out.fail("obtuse triple claimed at alpha=" + fmt(alpha));
    check_deterministic("criterion 8 search alpha=" + fmt(alpha),
                        obtuse_json(res), 8, [&](int th) {
                          return obtuse_json(
                              obtuse_triple_search(alpha, 100000, 21, th));
                        });
  }

  ObtuseTriple shallow = obtuse_triple_search(0.1, 100000, 21, 8);
  if (!shallow.found) {
    out.fail("no obtuse triple found at alpha=0.1");
  } else {
    for (int i = 0; i < 3 && out.ok; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (cone_angle(shallow.points[i], shallow.points[j], 0.1).angle <=
            kPi / 2 + 1e-6)
          out.fail("witness pair at alpha=0.1 is not actually obtuse");
  }
  check_deterministic("criterion 8 search alpha=0.1", obtuse_json(shallow), 8,
                      [&](int th) {
                        return obtuse_json(
                            obtuse_triple_search(0.1, 100000, 21, th));
                      });

  cone_oracle::SurfaceMesh mesh(astar);
  cone_oracle::Agreement agree = cone_oracle::compare_against(
      mesh, 10, 10, 2027, [&](double r1, double t1, double r2, double t2) {
        return cone_intrinsic_distance(ConePoint{r1, t1, 0},
                                       ConePoint{r2, t2, 0}, astar);
      });
  if (agree.pairs != 100)
    out.fail("oracle compared " + std::to_string(agree.pairs) + " pairs");
  if (agree.min_rel < -1e-9)
    out.fail("mesh geodesic undercuts the formula by " + fmt(-agree.min_rel));
  if (agree.max_rel > 5e-3)
    out.fail("formula off the mesh oracle by " + fmt(agree.max_rel) +
             " relative, above 0.5%");

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  if (secs > 120) out.fail("runtime " + fmt(secs) + "s exceeds 120s");
  return out;
}

// ---- criterion 9: lp:4 reruns and semiconcavity in the Hilbert structure --

Outcome criterion9() {
  Outcome out;
  Norm lp4 = Norm::parse("lp:4", 2);

  // two-point rerun, directional criterion
  const double h = 0.005;
  ClosedSet two = two_point_scene();
  DistanceField f2 = make_field(two, lp4, Box{Vec(-2, -2), Vec(2, 2)}, h, 8);
  CriticalScanParams cp;
  cp.seed = 1;
  cp.threads = 8;
  cp.use_directional = true;
  CriticalReport crit = critical_scan(f2, two, lp4, cp);
  // Qualitative pattern: the flagged set is the merge structure. The sampled
  // descent test cannot certify regularity once its probe ball straddles a
  // nonsmooth feature, so flags hug the mirror ridge x = 0 (where the axial
  // slope decays like y^3 and carries the level-1 value) and the immediate
  // annuli around the two scene points; nothing may appear elsewhere.
  const double delta = 4 * h;
  bool merge_seen = false;
  for (const Vec& p : crit.critical_points) {
    if (p.norm2() <= 3 * h) merge_seen = true;
    bool on_ridge = std::abs(p[0]) <= delta &&
                    std::abs(f2.interpolate(p) - 1.0) <= delta;
    bool near_scene = scene_distance(two, p, lp4) <= delta + 1e-9;
    if (!on_ridge && !near_scene)
      out.fail("lp:4 critical vertex (" + fmt(p[0]) + ", " + fmt(p[1]) +
               ") off the merge ridge and scene annuli");
  }
  if (!merge_seen)
    out.fail("no critical vertex within 3h of the merge point under lp:4");

  SweepParams sp;
  sp.critical_values = crit.critical_values;
  sp.threads = 8;
  SweepReport sweep = radius_sweep(f2, 0.25, 1.75, 200, sp);
  for (const SweepEntry& e : sweep.entries)
    if (!e.manifold && std::abs(e.r - 1) > 5 * h)
      out.fail("lp:4 non-manifold radius " + fmt(e.r) +
               " farther than 5h from the merge radius 1");

  check_deterministic("criterion 9 critical report", crit.to_json(), 8,
                      [&](int th) {
                        CriticalScanParams p = cp;
                        p.threads = th;
                        return critical_scan(f2, two, lp4, p).to_json();
                      });
  check_deterministic("criterion 9 sweep report", sweep.to_json(), 8,
                      [&](int th) {
                        SweepParams p = sp;
                        p.threads = th;
                        return radius_sweep(f2, 0.25, 1.75, 200, p).to_json();
                      });

  // circle rerun: qualitative pattern only (one closed manifold curve)
  DistanceField fc =
      make_field(point_scene(), lp4, Box{Vec(-2, -2), Vec(2, 2)}, 0.01, 8);
  LevelSetMesh mesh = extract_level_set(fc, 1.0);
  ManifoldReport mc = manifold_check(mesh);
  if (!mc.manifold) out.fail("lp:4 unit sphere extraction is not manifold");
  if (mc.components != 1)
    out.fail("lp:4 unit sphere extraction has " +
             std::to_string(mc.components) + " components");
  // The lp:4 unit circle turns by up to 0.4903 rad across a chord-0.2 window
  // (curvature peaks at 6/2^(5/4) ~ 2.52 on the diagonals), so the secant
  // slope of the window graph reaches tan(0.4903) ~ 0.534; 0.55 adds frame
  // slack. The Euclidean 0.3 bound belongs to the unit-curvature circle.
  std::vector<GraphSample> gs = lipschitz_graph_check(fc, mesh, 0.2, 50);
  for (const GraphSample& s : gs) {
    if (!s.pass) out.fail("lp:4 graph probe failed at a sampled vertex");
    if (s.lipschitz > 0.55)
      out.fail("lp:4 fitted Lipschitz constant " + fmt(s.lipschitz) +
               " above 0.55");
  }
  check_deterministic("criterion 9 level-set report",
                      mesh_json(mesh) + graph_json(gs), 1, [&](int) {
                        LevelSetMesh m = extract_level_set(fc, 1.0);
                        return mesh_json(m) +
                               graph_json(lipschitz_graph_check(fc, m, 0.2, 50));
                      });

  // lp:4 distance, Euclidean quadratic correction
  DistanceField fs = make_field(point_scene(), lp4,
                                Box{Vec(-2.2, -2.2), Vec(2.2, 2.2)}, 0.01, 8);
  Box region{Vec(-2, -2), Vec(2, 2)};
  SemiconcavityResult semi =
      semiconcavity_check(fs, region, 4.0, 100000, 103, 1.0, 2.0);
  if (!semi.pass)
    out.fail("lp:4 semiconcavity with c=4 on 1<=d<=2 fails, worst " +
             fmt(semi.worst));
  check_deterministic("criterion 9 semiconcavity report", semi_json(semi), 1,
                      [&](int) {
                        return semi_json(semiconcavity_check(
                            fs, region, 4.0, 100000, 103, 1.0, 2.0));
                      });
  return out;
}

}  // namespace

int main() {
  struct Row {
    int n;
    const char* what;
    Outcome (*fn)();
  };
  const Row rows[] = {
      {1, "two-point critical structure and radius sweep", criterion1},
      {2, "unit circle extraction and graph regularity", criterion2},
      {3, "hull and directional criteria agree on point clouds", criterion3},
      {4, "critical-value premeasure decreases under refinement", criterion4},
      {5, "reach estimates for circle and two-point superlevels", criterion5},
      {6, "semiconcavity passes far from the set and fails near it",
       criterion6},
      {7, "stationary values of |x|-|x-1| with premeasure scaling",
       criterion7},
      {8, "cone distances, bounds, searches, and geodesic oracle", criterion8},
      {9, "lp:4 reruns and semiconcavity in the Hilbert structure",
       criterion9},
  };

  int failures = 0;
  for (const Row& row : rows) {
    Outcome out;
    try {
      out = row.fn();
    } catch (const std::exception& e) {
      out.fail(std::string("unexpected error: ") + e.what());
    }
    if (out.ok) {
      std::printf("PASS: criterion %d - %s\n", row.n, row.what);
    } else {
      std::printf("FAIL: criterion %d - %s (%s)\n", row.n, row.what,
                  out.text().c_str());
      ++failures;
    }
    std::fflush(stdout);
  }

  if (g_det_failures.empty()) {
    std::printf(
        "PASS: criterion 10 - reports byte-identical across reruns and thread "
        "counts\n");
  } else {
    std::printf(
        "FAIL: criterion 10 - reports byte-identical across reruns and thread "
        "counts (%zu mismatches, first: %s)\n",
        g_det_failures.size(), g_det_failures.front().c_str());
    ++failures;
  }
  return failures;
}
