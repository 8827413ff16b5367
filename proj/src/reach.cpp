#include "distlab/reach.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_set>

#include "distlab/errors.hpp"
#include "distlab/json_out.hpp"
#include "distlab/parallel.hpp"
#include "distlab/rng.hpp"

namespace distlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist2(const Vec& a, const Vec& b, int dim) {
  double s = 0;
  for (int ax = 0; ax < dim; ++ax) s += (a[ax] - b[ax]) * (a[ax] - b[ax]);
  return s;
}

Vec closest_on_segment(const Vec& q, const Vec& a, const Vec& b, int dim) {
  double ab2 = dist2(a, b, dim);
  double t = 0;
  if (ab2 > 0) {
    for (int ax = 0; ax < dim; ++ax) t += (q[ax] - a[ax]) * (b[ax] - a[ax]);
    t = std::clamp(t / ab2, 0.0, 1.0);
  }
  Vec p = a;
  for (int ax = 0; ax < dim; ++ax) p[ax] += t * (b[ax] - a[ax]);
  return p;
}

// closest point on triangle abc (Ericson, Real-Time Collision Detection)
Vec closest_on_triangle(const Vec& q, const Vec& a, const Vec& b, const Vec& c) {
  auto sub = [](const Vec& x, const Vec& y) {
    Vec r = x;
    for (int i = 0; i < 3; ++i) r[i] -= y[i];
    return r;
  };
  auto dot = [](const Vec& x, const Vec& y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
  };
  Vec ab = sub(b, a), ac = sub(c, a), aq = sub(q, a);
  double d1 = dot(ab, aq), d2 = dot(ac, aq);
  if (d1 <= 0 && d2 <= 0) return a;
  Vec bq = sub(q, b);
  double d3 = dot(ab, bq), d4 = dot(ac, bq);
  if (d3 >= 0 && d4 <= d3) return b;
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    double v = d1 / (d1 - d3);
    Vec r = a;
    for (int i = 0; i < 3; ++i) r[i] += v * ab[i];
    return r;
  }
  Vec cq = sub(q, c);
  double d5 = dot(ab, cq), d6 = dot(ac, cq);
  if (d6 >= 0 && d5 <= d6) return c;
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    double w = d2 / (d2 - d6);
    Vec r = a;
    for (int i = 0; i < 3; ++i) r[i] += w * ac[i];
    return r;
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    Vec r = b;
    for (int i = 0; i < 3; ++i) r[i] += w * (c[i] - b[i]);
    return r;
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  Vec r = a;
  for (int i = 0; i < 3; ++i) r[i] += v * ab[i] + w * ac[i];
  return r;
}

}  // namespace

uint64_t SuperlevelProjector::bucket_key(int64_t i, int64_t j, int64_t k) const {
  // grid boxes are far smaller than 2^20 buckets per axis
  auto fold = [](int64_t v) { return static_cast<uint64_t>(v + (1 << 20)); };
  return (fold(i) << 42) | (fold(j) << 21) | fold(k);
}

void SuperlevelProjector::insert_prim(int id) {
  const Prim& pr = prims_[id];
  Vec lo = pr.a, hi = pr.a;
  auto widen = [&](const Vec& v) {
    for (int ax = 0; ax < 3; ++ax) {
      lo[ax] = std::min(lo[ax], v[ax]);
      hi[ax] = std::max(hi[ax], v[ax]);
    }
  };
  if (pr.kind >= 1) widen(pr.b);
  if (pr.kind >= 2) widen(pr.c);
  const Vec& org = field_.grid().origin;
  int64_t c0[3], c1[3];
  for (int ax = 0; ax < 3; ++ax) {
    c0[ax] = static_cast<int64_t>(std::floor((lo[ax] - org[ax]) / cell_));
    c1[ax] = static_cast<int64_t>(std::floor((hi[ax] - org[ax]) / cell_));
  }
  for (int64_t i = c0[0]; i <= c1[0]; ++i)
    for (int64_t j = c0[1]; j <= c1[1]; ++j)
      for (int64_t k = c0[2]; k <= c1[2]; ++k)
        buckets_[bucket_key(i, j, k)].push_back(id);
}

SuperlevelProjector::SuperlevelProjector(const DistanceField& field, double r,
                                         double theta, double uniqueness_tol)
    : field_(field),
      r_(r),
      theta_(theta),
      utol_(uniqueness_tol > 0 ? uniqueness_tol : 3 * field.grid().h),
      cell_(4 * field.grid().h),
      mesh_(extract_level_set(field, r)) {
  const GridSpec& g = field.grid();
  if (mesh_.dim == 2) {
    // nearest points of {d >= r} lie on the level itself, never on the
    // domain-boundary closure runs (their field value sits below r)
    for (const auto& e : mesh_.edges) {
      Vec m = mesh_.vertices[e[0]];
      for (int ax = 0; ax < 2; ++ax)
        m[ax] = 0.5 * (m[ax] + mesh_.vertices[e[1]][ax]);
      if (field.interpolate(m) < mesh_.r_snapped - 0.5 * g.h) continue;
      prims_.push_back({mesh_.vertices[e[0]], mesh_.vertices[e[1]], Vec{}, 1});
    }
  } else {
    for (const auto& t : mesh_.triangles)
      prims_.push_back({mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                        mesh_.vertices[t[2]], 2});
  }

  // shell vertices: in A, with a sub-level vertex within Chebyshev distance 4
  size_t n = g.vertex_count();
  std::vector<char> low(n), dil(n);
  for (size_t i = 0; i < n; ++i) low[i] = field.value(i) < r ? 1 : 0;
  // separable Chebyshev dilation, 4 layers per axis
  for (int axis = 0; axis < g.dim; ++axis) {
    std::fill(dil.begin(), dil.end(), 0);
    for (size_t i = 0; i < n; ++i) {
      if (!low[i]) continue;
      auto c = g.coords(i);
      for (int s = -4; s <= 4; ++s) {
        std::array<int, 3> nb = c;
        nb[axis] += s;
        if (nb[axis] < 0 || nb[axis] >= g.dims[axis]) continue;
        dil[g.index(nb[0], nb[1], nb[2])] = 1;
      }
    }
    low.swap(dil);
  }
  for (size_t i = 0; i < n; ++i) {
    if (!low[i] || field.value(i) < r) continue;
    auto c = g.coords(i);
    prims_.push_back({g.vertex(c[0], c[1], c[2]), Vec{}, Vec{}, 0});
  }
  if (prims_.empty())
    throw DomainError("reach: superlevel set has no boundary in the grid");
  for (size_t i = 0; i < prims_.size(); ++i) insert_prim(static_cast<int>(i));
}

ProjectionResult SuperlevelProjector::project(const Vec& q) const {
  const GridSpec& g = field_.grid();
  const int dim = g.dim;
  if (field_.interpolate(q) >= r_) return {q, 0, true, {}};

  int64_t base[3] = {0, 0, 0};
  for (int ax = 0; ax < 3; ++ax)
    base[ax] = static_cast<int64_t>(std::floor((q[ax] - g.origin[ax]) / cell_));

  struct Cand {
    Vec x;
    double d;
  };
  std::vector<Cand> cands;
  std::unordered_set<int> seen;
  double best = std::numeric_limits<double>::infinity();
  Vec best_pt{};

  auto visit_cell = [&](int64_t i, int64_t j, int64_t k) {
    auto it = buckets_.find(bucket_key(i, j, k));
    if (it == buckets_.end()) return;
    for (int id : it->second) {
      if (!seen.insert(id).second) continue;
      const Prim& pr = prims_[id];
      Vec x;
      if (pr.kind == 0)
        x = pr.a;
      else if (pr.kind == 1)
        x = closest_on_segment(q, pr.a, pr.b, dim);
      else
        x = closest_on_triangle(q, pr.a, pr.b, pr.c);
      double d = std::sqrt(dist2(q, x, dim));
      cands.push_back({x, d});
      if (d < best) {
        best = d;
        best_pt = x;
      }
    }
  };

  Box gb = g.box();
  double diag = 0;
  for (int ax = 0; ax < dim; ++ax)
    diag += (gb.hi[ax] - gb.lo[ax]) * (gb.hi[ax] - gb.lo[ax]);
  diag = std::sqrt(diag);
  int64_t max_ring = static_cast<int64_t>(diag / cell_) + 2;

  for (int64_t ring = 0; ring <= max_ring; ++ring) {
    double lower = ring > 0 ? (ring - 1) * cell_ : 0;
    // candidates farther than best*(1+max excess ratio of the flag rule)
    // cannot change the verdict
    if (std::isfinite(best) && lower > 1.27 * best + g.h) break;
    int64_t kr = dim == 3 ? ring : 0;
    for (int64_t di = -ring; di <= ring; ++di)
      for (int64_t dj = -ring; dj <= ring; ++dj)
        for (int64_t dk = -kr; dk <= kr; ++dk) {
          int64_t cheb = std::max({std::abs(di), std::abs(dj), std::abs(dk)});
          if (cheb != ring) continue;
          visit_cell(base[0] + di, base[1] + dj, base[2] + dk);
        }
  }
  if (!std::isfinite(best))
    throw DomainError("reach: no projection candidates found");

  ProjectionResult res;
  res.nearest = best_pt;
  res.distance = best;
  for (const auto& cd : cands) {
    double sep = std::sqrt(dist2(cd.x, best_pt, dim));
    if (sep <= utol_) continue;
    double allowance = theta_ * sep * sep / (2 * std::max(best, g.h));
    if (cd.d - best <= allowance) {
      res.unique = false;
      if (res.competing.size() < 8) res.competing.push_back(cd.x);
    }
  }
  return res;
}

ProjectionResult project_to_superlevel(const DistanceField& field, double r,
                                       const Vec& q) {
  return SuperlevelProjector(field, r).project(q);
}

namespace {

// accept(eps): every probe in B(p, eps) projects uniquely. Probes are `samples`
// seeded ball draws plus deterministic steps along the inward normal (the
// first non-unique points appear on the normal ray, so detection does not
// depend on a lucky random draw).
bool accept_radius(const DistanceField& field, const SuperlevelProjector& proj,
                   double r, const Vec& p, const Vec& normal, bool has_normal,
                   double eps, const ReachAtParams& params) {
  const int dim = field.grid().dim;
  if (has_normal) {
    int steps = std::min(params.samples, 64);
    for (int j = 1; j <= steps; ++j) {
      Vec q = p;
      double t = eps * j / steps;
      for (int ax = 0; ax < dim; ++ax) q[ax] -= t * normal[ax];
      if (!field.contains(q)) continue;
      if (field.interpolate(q) >= r) continue;
      if (!proj.project(q).unique) return false;
    }
  }
  for (int i = 0; i < params.samples; ++i) {
    Rng rng(derive_seed(params.seed, 1000 + static_cast<uint64_t>(i)));
    Vec u = Vec::zero(dim);
    if (dim == 2) {
      double a = 2 * kPi * rng.uniform();
      u[0] = std::cos(a);
      u[1] = std::sin(a);
    } else {
      double z = 2 * rng.uniform() - 1;
      double a = 2 * kPi * rng.uniform();
      double s = std::sqrt(std::max(0.0, 1 - z * z));
      u[0] = s * std::cos(a);
      u[1] = s * std::sin(a);
      u[2] = z;
    }
    double rho = eps * std::pow(rng.uniform(), 1.0 / dim);
    Vec q = p;
    for (int ax = 0; ax < dim; ++ax) q[ax] += rho * u[ax];
    if (!field.contains(q)) continue;
    if (field.interpolate(q) >= r) continue;
    if (!proj.project(q).unique) return false;
  }
  return true;
}

ReachEstimate reach_at_impl(const DistanceField& field,
                            const SuperlevelProjector& proj, double r,
                            const Vec& p, const ReachAtParams& params) {
  const GridSpec& g = field.grid();
  if (std::abs(field.interpolate(p) - r) > 2 * g.h)
    throw DomainError("reach: p is not within 2h of the r-level");
  double cap = params.cap;
  if (cap <= 0) {
    Box gb = g.box();
    double diag = 0;
    for (int ax = 0; ax < g.dim; ++ax)
      diag += (gb.hi[ax] - gb.lo[ax]) * (gb.hi[ax] - gb.lo[ax]);
    cap = std::sqrt(diag) / 2;
  }
  Vec normal{};
  bool has_normal = false;
  if (field.contains(p, 2 * g.h)) {
    FieldGradient fg = field.gradient(p);
    double gn = 0;
    for (int ax = 0; ax < g.dim; ++ax) gn += fg.g[ax] * fg.g[ax];
    gn = std::sqrt(gn);
    if (gn > 1e-9) {
      normal = fg.g;
      for (int ax = 0; ax < g.dim; ++ax) normal[ax] /= gn;
      has_normal = true;
    }
  }

  ReachEstimate est;
  est.p = p;
  est.cap = cap;
  est.samples = params.samples;
  if (accept_radius(field, proj, r, p, normal, has_normal, cap, params)) {
    est.epsilon = cap;
    est.capped = true;
    return est;
  }
  double lo = 0, hi = cap;
  for (int it = 0; it < 12; ++it) {
    double mid = 0.5 * (lo + hi);
    if (accept_radius(field, proj, r, p, normal, has_normal, mid, params))
      lo = mid;
    else
      hi = mid;
  }
  est.epsilon = lo;
  return est;
}

}  // namespace

ReachEstimate estimate_reach_at(const DistanceField& field, double r,
                                const Vec& p, const ReachAtParams& params) {
  SuperlevelProjector proj(field, r, params.theta, params.uniqueness_tol);
  return reach_at_impl(field, proj, r, p, params);
}

ReachReport estimate_reach(const DistanceField& field, double r,
                           const ReachParams& params) {
  if (params.boundary_samples < 1)
    throw InputError("reach: boundary_samples must be >= 1");
  SuperlevelProjector proj(field, r, params.at.theta,
                           params.at.uniqueness_tol);
  const auto& verts = proj.boundary().vertices;
  // probe centers must sit on the level; closure vertices along the domain
  // perimeter carry sublevel values and are not boundary points of A
  std::vector<size_t> on_level;
  for (size_t i = 0; i < verts.size(); ++i)
    if (std::abs(field.interpolate(verts[i]) - r) <= 2 * field.grid().h)
      on_level.push_back(i);
  size_t n = on_level.size();
  size_t want = std::min<size_t>(params.boundary_samples, n);
  size_t stride = n ? std::max<size_t>(1, n / want) : 1;
  std::vector<size_t> picks;
  for (size_t i = 0; i < n && picks.size() < want; i += stride)
    picks.push_back(on_level[i]);

  ReachReport rep;
  rep.r = r;
  rep.per_point.resize(picks.size());
  std::atomic<bool> failed(false);
  std::exception_ptr first_error;
  std::mutex err_mu;
  parallel_for(picks.size(), params.threads, [&](size_t k) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      ReachAtParams ap = params.at;
      ap.seed = derive_seed(params.at.seed, 500 + static_cast<uint64_t>(k));
      rep.per_point[k] = reach_at_impl(field, proj, r, verts[picks[k]], ap);
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!failed.exchange(true)) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  rep.global_reach = std::numeric_limits<double>::infinity();
  for (const auto& e : rep.per_point)
    rep.global_reach = std::min(rep.global_reach, e.epsilon);
  if (rep.per_point.empty()) rep.global_reach = 0;
  return rep;
}

std::string ReachReport::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("r");
  w.value_double(r);
  w.key("global_reach");
  w.value_double(global_reach);
  w.key("per_point");
  w.begin_array();
  for (const auto& e : per_point) {
    w.begin_object();
    w.key("p");
    w.begin_array();
    for (int ax = 0; ax < e.p.dim(); ++ax) w.value_double(e.p[ax]);
    w.end_array();
    w.key("epsilon");
    w.value_double(e.epsilon);
    w.key("cap");
    w.value_double(e.cap);
    w.key("samples");
    w.value_int(e.samples);
    w.key("capped");
    w.value_bool(e.capped);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

}  // namespace distlab
