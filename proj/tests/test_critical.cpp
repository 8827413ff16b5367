#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "distlab/critical.hpp"
#include "distlab/field.hpp"
#include "distlab/rng.hpp"
#include "doctest.h"

using namespace distlab;

namespace {

NearestSet fake_near(std::vector<Vec> dirs) {
  NearestSet n;
  n.query = Vec::zero(dirs[0].dim());
  n.distance = 1.0;
  n.tolerance = 1e-9;
  n.directions = std::move(dirs);
  for (const Vec& d : n.directions) n.witnesses.push_back(d);
  return n;
}

struct Fixture {
  ClosedSet scene;
  Norm norm;
  DistanceField field;
};

Fixture two_point_fixture(double h, double half = 2.0) {
  ClosedSet scene(2, {PointPrim{Vec(-1, 0)}, PointPrim{Vec(1, 0)}});
  Norm norm = Norm::euclidean(2);
  DistanceField f = sample_field(
      scene, norm, GridSpec::from_box({Vec(-half, -half), Vec(half, half)}, h));
  return {scene, norm, std::move(f)};
}

}  // namespace

TEST_CASE("hull criterion on canonical direction sets") {
  auto at = [](double deg) {
    return Vec(std::cos(deg * M_PI / 180), std::sin(deg * M_PI / 180));
  };

  CriticalVerdict v = hull_criterion(fake_near({Vec(1, 0), Vec(-1, 0)}), 1e-3);
  CHECK(v.critical);
  CHECK(v.margin == doctest::Approx(0.0).epsilon(1e-12));

  v = hull_criterion(fake_near({Vec(1, 0)}), 1e-3);
  CHECK(!v.critical);
  CHECK(v.epsilon == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.witness[0] == doctest::Approx(-1.0).epsilon(1e-12));

  v = hull_criterion(fake_near({at(90), at(210), at(330)}), 1e-3);
  CHECK(v.critical);
  CHECK(v.margin == doctest::Approx(-0.5).epsilon(1e-9));

  // 3D: four directions spanning a tetrahedron around the origin -> critical
  CriticalVerdict v3 = hull_criterion(
      fake_near({Vec(1, 1, 1).normalized2(), Vec(1, -1, -1).normalized2(),
                 Vec(-1, 1, -1).normalized2(), Vec(-1, -1, 1).normalized2()}),
      1e-3);
  CHECK(v3.critical);
  // 3D: all directions in a half-space -> regular
  v3 = hull_criterion(
      fake_near({Vec(1, 0, 0), Vec(0, 1, 0), Vec(0, 0, 1)}), 1e-3);
  CHECK(!v3.critical);
  CHECK(v3.margin == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));

  NearestSet empty;
  empty.query = Vec(0, 0);
  CHECK_THROWS_AS((void)hull_criterion(empty, 1e-3), InputError);
}

TEST_CASE("hull margin is monotone in eta") {
  auto at = [](double deg) {
    return Vec(std::cos(deg * M_PI / 180), std::sin(deg * M_PI / 180));
  };
  std::vector<std::vector<Vec>> sets = {
      {Vec(1, 0)},
      {at(10), at(170)},
      {at(0), at(120), at(240)},
      {at(0), at(40)},
      {at(0), at(179.9)}};
  for (const auto& dirs : sets) {
    bool crit_small = hull_criterion(fake_near(dirs), 1e-4).critical;
    bool crit_large = hull_criterion(fake_near(dirs), 0.2).critical;
    if (crit_small) CHECK(crit_large);  // Regular -> Critical only as eta grows
  }
}

TEST_CASE("directional criterion agrees with geometry") {
  Fixture fx = two_point_fixture(0.02);
  CriticalVerdict v =
      directional_criterion(fx.field, Vec(0, 0), 0.08, 32, 16, 7);
  CHECK(v.critical);

  v = directional_criterion(fx.field, Vec(0.5, 0.3), 0.08, 32, 16, 7);
  CHECK(!v.critical);
  CHECK(v.epsilon > 0);

  // single point: descent rate toward F is ~1
  ClosedSet pt(2, {PointPrim{Vec(0, 0)}});
  DistanceField pf = sample_field(
      pt, Norm::euclidean(2), GridSpec::from_box({Vec(-2, -2), Vec(2, 2)}, 0.02));
  v = directional_criterion(pf, Vec(1, 0), 0.08, 64, 16, 7);
  CHECK(!v.critical);
  CHECK(v.epsilon >= 0.8);
  CHECK(v.epsilon <= 1.05);

  CHECK_THROWS_AS(
      (void)directional_criterion(pf, Vec(1.99, 0), 0.08, 32, 16, 7),
      DomainError);
}

TEST_CASE("critical_scan on the two-point fixture") {
  Fixture fx = two_point_fixture(0.01);
  CriticalScanParams p;
  p.threads = 4;
  CriticalReport rep = critical_scan(fx.field, fx.scene, fx.norm, p);
  CHECK(rep.scanned > 100000);
  REQUIRE(!rep.critical_points.empty());
  const double h = 0.01;
  for (const Vec& c : rep.critical_points)
    CHECK(c.norm2() <= 3 * h + 1e-12);
  for (double cv : rep.critical_values) {
    CHECK(cv >= 1 - 2 * h);
    CHECK(cv <= 1 + 2 * h);
  }
  // values sorted, deduplicated at 1e-12
  for (size_t i = 1; i < rep.critical_values.size(); ++i)
    CHECK(rep.critical_values[i] > rep.critical_values[i - 1] + 1e-12);

  // report JSON is stable across identical runs and thread counts
  CriticalScanParams p1 = p;
  p1.threads = 1;
  std::string j1 = critical_scan(fx.field, fx.scene, fx.norm, p1).to_json();
  CHECK(j1 == rep.to_json());
}

TEST_CASE("critical_scan: single point has no critical vertices") {
  ClosedSet pt(2, {PointPrim{Vec(0, 0)}});
  Norm e2 = Norm::euclidean(2);
  DistanceField f = sample_field(
      pt, e2, GridSpec::from_box({Vec(-1.5, -1.5), Vec(1.5, 1.5)}, 0.02));
  CriticalScanParams p;
  p.threads = 4;
  CriticalReport rep = critical_scan(f, pt, e2, p);
  CHECK(rep.scanned > 1000);
  CHECK(rep.critical_points.empty());
  CHECK(rep.hausdorff.premeasure == 0.0);
}

TEST_CASE("critical_scan: circumcenter of a three-point scene") {
  auto at = [](double deg) {
    return Vec(std::cos(deg * M_PI / 180), std::sin(deg * M_PI / 180));
  };
  ClosedSet tri(2, {PointPrim{at(90)}, PointPrim{at(210)}, PointPrim{at(330)}});
  Norm e2 = Norm::euclidean(2);
  const double h = 0.01;
  DistanceField f = sample_field(
      tri, e2, GridSpec::from_box({Vec(-1.6, -1.6), Vec(1.6, 1.6)}, h));
  CriticalScanParams p;
  p.threads = 4;
  CriticalReport rep = critical_scan(f, tri, e2, p);
  REQUIRE(!rep.critical_points.empty());
  bool near_origin = false;
  for (const Vec& c : rep.critical_points)
    if (c.norm2() <= 3 * h) near_origin = true;
  CHECK(near_origin);
  // critical values cluster at the circumradius (max) and the edge-midpoint
  // saddles at sqrt(3)/2
  bool max_seen = false, saddle_seen = false;
  for (double cv : rep.critical_values) {
    if (std::abs(cv - 1.0) <= 0.05) max_seen = true;
    if (std::abs(cv - std::sqrt(3.0) / 2) <= 0.05) saddle_seen = true;
    CHECK((std::abs(cv - 1.0) <= 0.05 ||
           std::abs(cv - std::sqrt(3.0) / 2) <= 0.05));
  }
  CHECK(max_seen);
  CHECK(saddle_seen);
}

TEST_CASE("hull and directional criteria agree away from Crit") {
  Rng rng(derive_seed(1000, 3));
  std::vector<Primitive> prims;
  for (int i = 0; i < 20; ++i)
    prims.push_back(PointPrim{Vec(rng.uniform(0, 1), rng.uniform(0, 1))});
  ClosedSet cloud(2, prims);
  Norm e2 = Norm::euclidean(2);
  const double h = 0.02;
  DistanceField f = sample_field(
      cloud, e2, GridSpec::from_box({Vec(-0.3, -0.3), Vec(1.3, 1.3)}, h));

  CriticalScanParams hp;
  hp.threads = 4;
  CriticalReport hull = critical_scan(f, cloud, e2, hp);
  CriticalScanParams dp = hp;
  dp.use_directional = true;
  CriticalReport dir = critical_scan(f, cloud, e2, dp);

  std::vector<Vec> crit;
  for (const Vec& c : hull.critical_points) crit.push_back(c);
  for (const Vec& c : dir.critical_points) crit.push_back(c);

  auto key = [&](const Vec& p) {
    return std::pair<long, long>(std::lround(p[0] / h), std::lround(p[1] / h));
  };
  std::map<std::pair<long, long>, bool> hull_verdict;
  for (const CriticalVerdict& v : hull.verdicts)
    hull_verdict[key(v.point)] = v.critical;

  int both = 0, agree = 0;
  for (const CriticalVerdict& v : dir.verdicts) {
    auto it = hull_verdict.find(key(v.point));
    if (it == hull_verdict.end()) continue;
    double dc = 1e300;
    for (const Vec& c : crit) dc = std::min(dc, (v.point - c).norm2());
    if (dc <= 3 * h) continue;
    ++both;
    if (it->second == v.critical) ++agree;
  }
  REQUIRE(both > 1000);
  CHECK(static_cast<double>(agree) >= 0.99 * both);
}

TEST_CASE("strict differentiability implies regular") {
  const double h = 0.02;
  Fixture fx = two_point_fixture(h);
  CriticalScanParams p;
  p.threads = 4;
  CriticalReport rep = critical_scan(fx.field, fx.scene, fx.norm, p);
  int checked = 0;
  for (const CriticalVerdict& v : rep.verdicts) {
    if (!fx.field.contains(v.point, 2 * h)) continue;
    // the tau-window makes near-medial vertices legitimately two-witness
    // critical while the grid gradient still looks smooth: stay outside the
    // discretization margin around Crit
    double dc = 1e300;
    for (const Vec& c : rep.critical_points)
      dc = std::min(dc, (v.point - c).norm2());
    if (dc <= 3 * h) continue;
    FieldGradient g = fx.field.gradient(v.point);
    if (g.nonsmooth || g.g.norm2() < 0.9) continue;
    ++checked;
    CHECK(!v.critical);
  }
  CHECK(checked > 1000);
}

TEST_CASE("refining h never enlarges the critical set") {
  Fixture coarse = two_point_fixture(0.02);
  Fixture fine = two_point_fixture(0.01);
  CriticalScanParams p;
  p.threads = 4;
  CriticalReport rc = critical_scan(coarse.field, coarse.scene, coarse.norm, p);
  CriticalReport rf = critical_scan(fine.field, fine.scene, fine.norm, p);
  // the flagged region contracts toward the true critical point (the origin)
  // at the grid scale; vertex counts inside it are O(1) and not monotone
  REQUIRE(!rc.critical_points.empty());
  REQUIRE(!rf.critical_points.empty());
  for (const Vec& c : rc.critical_points) CHECK(c.norm2() <= 3 * 0.02);
  for (const Vec& c : rf.critical_points) CHECK(c.norm2() <= 3 * 0.01);
  for (const Vec& c : rc.critical_points) {
    double d = 1e300;
    for (const Vec& cf : rf.critical_points)
      d = std::min(d, (c - cf).norm2());
    CHECK(d <= 2 * 0.02);
  }
}

TEST_CASE("hausdorff box estimate") {
  HausdorffEstimate e = hausdorff_box_estimate({1.0}, 0.5, 0.01);
  CHECK(e.premeasure == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(e.cover.size() == 1);

  e = hausdorff_box_estimate({}, 0.5, 0.01);
  CHECK(e.premeasure == 0.0);
  CHECK(e.cover.empty());

  // greedy cover: values within delta share an interval
  e = hausdorff_box_estimate({0.0, 0.005, 0.5, 1.0, 1.009}, 0.5, 0.01);
  CHECK(e.cover.size() == 3);
  CHECK(e.premeasure == doctest::Approx(3 * std::sqrt(0.01)).epsilon(1e-12));
  for (const Interval& iv : e.cover)
    CHECK(iv.hi - iv.lo <= 0.01 + 1e-15);
  // intervals cover every value
  for (double v : {0.0, 0.005, 0.5, 1.0, 1.009}) {
    bool covered = false;
    for (const Interval& iv : e.cover)
      if (v >= iv.lo - 1e-15 && v <= iv.hi + 1e-15) covered = true;
    CHECK(covered);
  }

  CHECK_THROWS_AS((void)hausdorff_box_estimate({1.0}, -0.5, 0.01), InputError);
  CHECK_THROWS_AS((void)hausdorff_box_estimate({1.0}, 0.5, 0.0), InputError);
}

TEST_CASE("premeasure of two-point critical values decreases under refinement") {
  double prev = 1e300;
  for (double h : {0.02, 0.01, 0.005}) {
    Fixture fx = two_point_fixture(h);
    CriticalScanParams p;
    p.threads = 8;
    CriticalReport rep = critical_scan(fx.field, fx.scene, fx.norm, p);
    CHECK(rep.hausdorff.premeasure < prev);
    prev = rep.hausdorff.premeasure;
  }
}

TEST_CASE("dc regularity probe") {
  // f = |x| - 2x at x=1 along v=1: part derivatives 1 vs 2 -> Regular
  auto abs1 = [](const Vec& x) { return std::abs(x[0]); };
  auto twox = [](const Vec& x) { return 2 * x[0]; };
  CHECK(dc_regularity_probe(abs1, twox, Vec(1, 0), Vec(1, 0)) ==
        ProbeVerdict::Regular);

  // f = |x| - |x|: derivatives equal -> Inconclusive
  CHECK(dc_regularity_probe(abs1, abs1, Vec(0.3, 0), Vec(1, 0)) ==
        ProbeVerdict::Inconclusive);

  // f = ||x|| - <(2,0), x> at (1,0) along (1,0): 1 vs 2 -> Regular
  auto nrm = [](const Vec& x) { return x.norm2(); };
  auto lin = [](const Vec& x) { return 2 * x[0]; };
  CHECK(dc_regularity_probe(nrm, lin, Vec(1, 0), Vec(1, 0)) ==
        ProbeVerdict::Regular);
}
