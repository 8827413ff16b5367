#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "distlab/field.hpp"
#include "distlab/rng.hpp"
#include "doctest.h"

using namespace distlab;

namespace {

DistanceField point_field(double h, double half, int dim = 2) {
  ClosedSet F = dim == 2 ? ClosedSet(2, {PointPrim{Vec(0, 0)}})
                         : ClosedSet(3, {PointPrim{Vec(0, 0, 0)}});
  Norm n = Norm::euclidean(dim);
  Box box = dim == 2 ? Box{Vec(-half, -half), Vec(half, half)}
                     : Box{Vec(-half, -half, -half), Vec(half, half, half)};
  return sample_field(F, n, GridSpec::from_box(box, h));
}

}  // namespace

TEST_CASE("sampling stores exact scene distances") {
  // 3x3 grid on [-1,1]^2, h=1: corner value sqrt(2)
  DistanceField f = point_field(1.0, 1.0);
  CHECK(f.grid().dims[0] == 3);
  CHECK(f.value(0, 0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(f.value(1, 1, 0) == doctest::Approx(0.0));
  CHECK(f.min_value() == doctest::Approx(0.0));

  ClosedSet two(2, {PointPrim{Vec(-1, 0)}, PointPrim{Vec(1, 0)}});
  DistanceField f2 = sample_field(two, Norm::euclidean(2),
                                  GridSpec::from_box({Vec(-2, -2), Vec(2, 2)}, 0.5));
  // vertex at (0,0) -> distance 1
  CHECK(f2.value(4, 4, 0) == doctest::Approx(1.0));

  ClosedSet ball(2, {BallPrim{Vec(0, 0), 1.0}});
  DistanceField f3 = sample_field(ball, Norm::euclidean(2),
                                  GridSpec::from_box({Vec(-3, -3), Vec(3, 3)}, 1.0));
  CHECK(f3.value(6, 3, 0) == doctest::Approx(2.0));  // vertex (3,0)
}

TEST_CASE("interpolation: vertices, edges, and the bilinear error bound") {
  DistanceField f = point_field(1.0, 3.0);
  const GridSpec& g = f.grid();
  // vertex query returns the stored value exactly
  for (int j = 0; j < g.dims[1]; j += 2)
    for (int i = 0; i < g.dims[0]; i += 2)
      CHECK(f.interpolate(g.vertex(i, j, 0)) == f.value(i, j, 0));
  // edge midpoint with endpoint values 1 and 2 -> 1.5
  CHECK(f.interpolate(Vec(1.5, 0)) == doctest::Approx(1.5).epsilon(1e-15));
  // bilinear value at the cell center vs exact sqrt(0.5)
  double got = f.interpolate(Vec(0.5, 0.5));
  CHECK(std::abs(got - std::sqrt(0.5)) <= 0.25);
  CHECK_THROWS_AS((void)f.interpolate(Vec(9, 0)), DomainError);
}

TEST_CASE("gradient and the nonsmooth flag") {
  DistanceField f = point_field(0.1, 4.0);
  FieldGradient g = f.gradient(Vec(1, 0));
  CHECK(!g.nonsmooth);
  CHECK(g.g[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.g[1] == doctest::Approx(0.0));

  // medial axis of a two-point scene: flagged or nearly tangential
  ClosedSet two(2, {PointPrim{Vec(-1, 0)}, PointPrim{Vec(1, 0)}});
  DistanceField f2 = sample_field(two, Norm::euclidean(2),
                                  GridSpec::from_box({Vec(-3, -3), Vec(3, 3)}, 0.1));
  FieldGradient g2 = f2.gradient(Vec(0, 0.5));
  CHECK((g2.nonsmooth || std::abs(g2.g[0]) <= 0.3));

  // long segment: gradient is the unit normal above it
  ClosedSet edge(2, {SegmentPrim{Vec(-50, 0), Vec(50, 0)}});
  DistanceField f3 = sample_field(edge, Norm::euclidean(2),
                                  GridSpec::from_box({Vec(-2, -2), Vec(2, 2)}, 0.1));
  FieldGradient g3 = f3.gradient(Vec(0.35, 1.15));
  CHECK(!g3.nonsmooth);
  CHECK(g3.g[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(g3.g[1] == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS((void)f.gradient(Vec(3.95, 0)), DomainError);
}

TEST_CASE("discrete Lipschitz invariant holds for sampled fields") {
  CHECK(point_field(0.25, 2.0).lipschitz_excess() <= 1e-9);
  ClosedSet two(2, {PointPrim{Vec(-1, 0)}, PointPrim{Vec(1, 0)}});
  DistanceField l4 = sample_field(two, Norm::lp(2, 4),
                                  GridSpec::from_box({Vec(-2, -2), Vec(2, 2)}, 0.05));
  CHECK(l4.lipschitz_excess() <= 1e-9);
}

TEST_CASE("refinement convergence on a point cloud") {
  Rng rng(23);
  std::vector<Primitive> prims;
  for (int i = 0; i < 8; ++i)
    prims.push_back(PointPrim{Vec(rng.uniform(0, 1), rng.uniform(0, 1))});
  ClosedSet cloud(2, prims);
  Norm e2 = Norm::euclidean(2);
  auto max_err = [&](double h) {
    DistanceField f = sample_field(
        cloud, e2, GridSpec::from_box({Vec(-0.5, -0.5), Vec(1.5, 1.5)}, h));
    Rng probe_rng(5);
    double worst = 0;
    for (int k = 0; k < 500; ++k) {
      Vec x(probe_rng.uniform(-0.4, 1.4), probe_rng.uniform(-0.4, 1.4));
      worst = std::max(worst,
                       std::abs(f.interpolate(x) - scene_distance(cloud, x, e2)));
    }
    return worst;
  };
  double coarse = max_err(0.08), fine = max_err(0.04);
  CHECK(coarse >= 1.5 * fine);
}

TEST_CASE("parallel sampling is bit-identical to serial") {
  ClosedSet two(2, {PointPrim{Vec(-1, 0)}, PointPrim{Vec(1, 0)}});
  GridSpec grid = GridSpec::from_box({Vec(-2, -2), Vec(2, 2)}, 0.03);
  DistanceField a = sample_field(two, Norm::euclidean(2), grid, 1);
  DistanceField b = sample_field(two, Norm::euclidean(2), grid, 8);
  REQUIRE(a.values().size() == b.values().size());
  for (size_t i = 0; i < a.values().size(); ++i)
    CHECK(a.values()[i] == b.values()[i]);
}

TEST_CASE("dump and load round-trip") {
  DistanceField f = point_field(0.5, 2.0);
  dump_field(f, "field_tmp.bin", "field_tmp.json");
  DistanceField g = load_field("field_tmp.json");
  CHECK(g.grid().h == f.grid().h);
  CHECK(g.grid().dims[0] == f.grid().dims[0]);
  CHECK(g.norm().spec_string() == f.norm().spec_string());
  CHECK(g.scene_hash() == f.scene_hash());
  REQUIRE(g.values().size() == f.values().size());
  for (size_t i = 0; i < f.values().size(); ++i)
    CHECK(g.values()[i] == f.values()[i]);

  // dumping twice produces identical bytes
  dump_field(f, "field_tmp2.bin", "field_tmp2.json");
  auto slurp = [](const char* p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp("field_tmp.bin") == slurp("field_tmp2.bin"));
  CHECK(slurp("field_tmp.json") == slurp("field_tmp2.json"));

  export_csv(f, "field_tmp.csv");
  std::ifstream csv("field_tmp.csv");
  CHECK(csv.good());
  for (const char* p : {"field_tmp.bin", "field_tmp.json", "field_tmp2.bin",
                        "field_tmp2.json", "field_tmp.csv"})
    std::remove(p);
}

TEST_CASE("grid validation and the memory cap") {
  CHECK_THROWS_AS((void)GridSpec::from_box({Vec(0, 0), Vec(1, 1)}, -1.0),
                  InputError);
  CHECK_THROWS_AS((void)GridSpec::from_box({Vec(0, 0), Vec(0, 1)}, 0.1),
                  InputError);
  ClosedSet pt(2, {PointPrim{Vec(0, 0)}});
  GridSpec big = GridSpec::from_box({Vec(-1, -1), Vec(1, 1)}, 0.01);
  CHECK_THROWS_AS(
      (void)sample_field(pt, Norm::euclidean(2), big, 1, /*mem_cap=*/1024),
      ResourceError);
  CHECK(default_mem_cap_bytes() > (1u << 20));
}

TEST_CASE("3D sampling") {
  DistanceField f = point_field(0.5, 2.0, 3);
  CHECK(f.grid().dim == 3);
  CHECK(f.value(8, 4, 4) == doctest::Approx(2.0));  // vertex (2,0,0)
  CHECK(f.interpolate(Vec(1.25, 0, 0)) ==
        doctest::Approx(1.25).epsilon(1e-12));
  CHECK(f.lipschitz_excess() <= 1e-9);
}
