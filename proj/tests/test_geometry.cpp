#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "distlab/geometry.hpp"
#include "distlab/rng.hpp"
#include "doctest.h"

using namespace distlab;

namespace {

Vec random_vec(Rng& rng, int dim, double lo, double hi) {
  Vec v = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

// central finite differences of the norm, step 1e-6
Vec fd_gradient(const Norm& n, const Vec& v) {
  const double s = 1e-6;
  Vec g = Vec::zero(v.dim());
  for (int i = 0; i < v.dim(); ++i) {
    Vec a = v, b = v;
    a[i] += s;
    b[i] -= s;
    g[i] = (n.eval(a) - n.eval(b)) / (2 * s);
  }
  return g;
}

double angle_between(const Vec& a, const Vec& b) {
  double c = a.dot(b) / (a.norm2() * b.norm2());
  return std::acos(std::min(1.0, std::max(-1.0, c)));
}

}  // namespace

TEST_CASE("norm evaluation closed forms") {
  Norm e2 = Norm::euclidean(2);
  CHECK(e2.eval(Vec(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));

  Norm l4 = Norm::lp(2, 4);
  CHECK(l4.eval(Vec(1, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l4.eval(Vec(1, 1)) ==
        doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-15));

  Norm e3 = Norm::euclidean(3);
  CHECK(e3.eval(Vec(1, 2, 2)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(e2.eval(Vec(0, 0)) == 0.0);
}

TEST_CASE("norm gradients: closed forms and finite differences") {
  Norm e2 = Norm::euclidean(2);
  Vec g = e2.gradient(Vec(3, 4));
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(0.8).epsilon(1e-12));
  g = e2.gradient(Vec(0, 1));
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(1.0));

  // lp gradient at (1,1): both components 2^{-3/4}; cross-check the closed
  // form against central differences
  Norm l4 = Norm::lp(2, 4);
  Vec gl = l4.gradient(Vec(1, 1));
  const double expect = std::pow(2.0, -0.75);
  CHECK(gl[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(gl[1] == doctest::Approx(expect).epsilon(1e-12));
  Vec fd = fd_gradient(l4, Vec(1, 1));
  CHECK(gl[0] == doctest::Approx(fd[0]).epsilon(1e-8));
  CHECK(gl[1] == doctest::Approx(fd[1]).epsilon(1e-8));

  CHECK_THROWS_AS((void)e2.gradient(Vec(0, 0)), DomainError);
}

TEST_CASE("homogeneity, triangle inequality, Euler identity") {
  std::vector<Norm> norms = {Norm::euclidean(2), Norm::lp(2, 4),
                             Norm::lp(2, 2.5), Norm::euclidean(3),
                             Norm::lp(3, 3)};
  Rng rng(42);
  for (const Norm& n : norms) {
    for (int k = 0; k < 200; ++k) {
      Vec v = random_vec(rng, n.dim(), -5, 5);
      Vec w = random_vec(rng, n.dim(), -5, 5);
      double nv = n.eval(v);
      if (nv < 1e-9) continue;
      double lam = rng.uniform(0, 3);
      CHECK(n.eval(v * lam) == doctest::Approx(lam * nv).epsilon(1e-12));
      CHECK(n.eval(v + w) <= nv + n.eval(w) + 1e-12 * (nv + n.eval(w)));
      Vec g = n.gradient(v);
      CHECK(std::abs(g.dot(v) - nv) <= 1e-10 * nv);
      // 0-homogeneous gradient
      Vec g2 = n.gradient(v * 2.0);
      for (int i = 0; i < n.dim(); ++i)
        CHECK(std::abs(g[i] - g2[i]) <= 1e-10);
    }
  }
}

TEST_CASE("lp sphere gradient is Lipschitz: estimate once, assert on fresh") {
  Norm l4 = Norm::lp(2, 4);
  auto unit = [&](Rng& rng) {
    Vec v = random_vec(rng, 2, -1, 1);
    while (v.norm2() < 1e-3) v = random_vec(rng, 2, -1, 1);
    return v * (1.0 / l4.eval(v));
  };
  Rng est_rng(7);
  double L = 0;
  for (int k = 0; k < 2000; ++k) {
    Vec u1 = unit(est_rng), u2 = unit(est_rng);
    double du = (u1 - u2).norm2();
    if (du < 1e-6) continue;
    L = std::max(L, (l4.gradient(u1) - l4.gradient(u2)).norm2() / du);
  }
  CHECK(std::isfinite(L));
  CHECK(L > 0);
  Rng fresh(8);
  for (int k = 0; k < 2000; ++k) {
    Vec u1 = unit(fresh), u2 = unit(fresh);
    double du = (u1 - u2).norm2();
    if (du < 1e-6) continue;
    double dg = (l4.gradient(u1) - l4.gradient(u2)).norm2();
    CHECK(dg <= L * du * 1.05 + 1e-12);
  }
}

TEST_CASE("sample_unit_sphere coverage") {
  Norm e2 = Norm::euclidean(2);
  auto d4 = sample_unit_sphere(e2, 4, 0);
  REQUIRE(d4.size() == 4);
  // equiangular fan: consecutive gaps pi/2
  for (const Vec& u : d4) CHECK(u.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> th;
  for (const Vec& u : d4) th.push_back(std::atan2(u[1], u[0]));
  std::sort(th.begin(), th.end());
  for (size_t i = 1; i < th.size(); ++i)
    CHECK(th[i] - th[i - 1] == doctest::Approx(M_PI / 2).epsilon(1e-9));

  Norm l4 = Norm::lp(2, 4);
  auto dl = sample_unit_sphere(l4, 8, 0);
  REQUIRE(dl.size() == 8);
  for (const Vec& u : dl)
    CHECK(std::abs(l4.eval(u) - 1.0) <= 1e-12);

  // 3D: max nearest-neighbor angular gap <= 0.5 rad for 100 samples
  Norm e3 = Norm::euclidean(3);
  auto d3 = sample_unit_sphere(e3, 100, 1);
  REQUIRE(d3.size() == 100);
  double worst = 0;
  for (size_t i = 0; i < d3.size(); ++i) {
    double nn = 1e300;
    for (size_t j = 0; j < d3.size(); ++j) {
      if (i == j) continue;
      nn = std::min(nn, angle_between(d3[i], d3[j]));
    }
    worst = std::max(worst, nn);
  }
  CHECK(worst <= 0.5);

  // deterministic for a fixed seed
  auto again = sample_unit_sphere(e3, 100, 1);
  for (size_t i = 0; i < d3.size(); ++i)
    for (int a = 0; a < 3; ++a) CHECK(d3[i][a] == again[i][a]);
}

TEST_CASE("norm spec parsing round trips") {
  Norm e = Norm::parse("euclid", 2);
  CHECK(e.kind() == Norm::Kind::Euclidean);
  CHECK(e.spec_string() == "euclid");
  Norm l = Norm::parse("lp:4", 2);
  CHECK(l.kind() == Norm::Kind::Lp);
  CHECK(l.p() == doctest::Approx(4.0));
  CHECK(Norm::parse(l.spec_string(), 2).p() == doctest::Approx(4.0));
  CHECK_THROWS_AS((void)Norm::parse("nope", 2), InputError);
  CHECK_THROWS_AS((void)Norm::parse("lp:abc", 2), InputError);
}

TEST_CASE("tabulated norm tracks its source") {
  Norm l4 = Norm::lp(2, 4);
  Norm tab = Norm::tabulate_from(l4, 512);
  CHECK(tab.kind() == Norm::Kind::Tabulated);
  Rng rng(99);
  for (int k = 0; k < 200; ++k) {
    Vec v = random_vec(rng, 2, -3, 3);
    if (v.norm2() < 1e-3) continue;
    double a = l4.eval(v), b = tab.eval(v);
    CHECK(std::abs(a - b) <= 1e-3 * a);
    Vec g = tab.gradient(v);
    // Euler identity within the coarser table tolerance
    CHECK(std::abs(g.dot(v) - b) <= 1e-3 * b);
  }
}

TEST_CASE("box membership") {
  Box b{Vec(-1, -1), Vec(1, 2)};
  CHECK(b.dim() == 2);
  CHECK(b.contains(Vec(0, 0)));
  CHECK(b.contains(Vec(1, 2)));
  CHECK(!b.contains(Vec(1.1, 0)));
  CHECK(b.extent(1) == doctest::Approx(3.0));
}
