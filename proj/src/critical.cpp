#include "distlab/critical.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>

#include "distlab/errors.hpp"
#include "distlab/json_out.hpp"
#include "distlab/parallel.hpp"
#include "distlab/rng.hpp"

namespace distlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exact distance from the origin to the convex hull of <= 4 points (recursive
// facet descent). Returns the min-norm point of the hull.
Vec min_norm_point(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts.size());
  const int dim = pts[0].dim();
  if (n == 1) return pts[0];
  if (n == 2) {
    Vec d = pts[1] - pts[0];
    double dd = d.dot(d);
    if (dd < 1e-30) return pts[0];
    double t = std::clamp(-pts[0].dot(d) / dd, 0.0, 1.0);
    return pts[0] + t * d;
  }
  // Project the origin onto the affine hull; accept when all barycentric
  // weights are nonnegative, otherwise recurse on facets.
  auto facets_best = [&]() {
    Vec best = Vec::zero(dim);
    double bn = std::numeric_limits<double>::infinity();
    for (int skip = 0; skip < n; ++skip) {
      std::vector<Vec> sub;
      for (int i = 0; i < n; ++i)
        if (i != skip) sub.push_back(pts[i]);
      Vec c = min_norm_point(sub);
      double cn = c.dot(c);
      if (cn < bn) {
        bn = cn;
        best = c;
      }
    }
    return best;
  };
  const int m = n - 1;              // affine dimension of the spanning set
  double G[3][3], rhs[3];           // Gram system for edge vectors e_i = p_i - p_0
  std::array<Vec, 3> e;
  for (int i = 0; i < m; ++i) e[i] = pts[i + 1] - pts[0];
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) G[i][j] = e[i].dot(e[j]);
    rhs[i] = -pts[0].dot(e[i]);
  }
  // Gaussian elimination with partial pivoting; degenerate -> facets only.
  int piv[3] = {0, 1, 2};
  double a[3][4];
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a[i][j] = G[i][j];
    a[i][m] = rhs[i];
  }
  double scale = 0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(G[i][i]));
  for (int col = 0; col < m; ++col) {
    int best = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    std::swap(a[col], a[best]);
    std::swap(piv[col], piv[best]);
    if (std::abs(a[col][col]) < 1e-14 * std::max(1.0, scale)) return facets_best();
    for (int r = col + 1; r < m; ++r) {
      double f = a[r][col] / a[col][col];
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  double t[3];
  for (int i = m - 1; i >= 0; --i) {
    double s = a[i][m];
    for (int c = i + 1; c < m; ++c) s -= a[i][c] * t[c];
    t[i] = s / a[i][i];
  }
  (void)piv;
  double w0 = 1;
  for (int i = 0; i < m; ++i) w0 -= t[i];
  bool inside = w0 >= -1e-12;
  for (int i = 0; i < m; ++i) inside = inside && t[i] >= -1e-12;
  if (inside) {
    Vec p = pts[0];
    for (int i = 0; i < m; ++i) p += t[i] * e[i];
    return p;
  }
  return facets_best();
}

double hull_distance(const std::vector<Vec>& dirs, Vec* witness_out) {
  const int dim = dirs[0].dim();
  const size_t n = dirs.size();
  Vec best = Vec::zero(dim);
  double bn = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<Vec>& sub) {
    Vec c = min_norm_point(sub);
    double cn = c.dot(c);
    if (cn < bn) {
      bn = cn;
      best = c;
    }
  };
  size_t k = std::min<size_t>(n, static_cast<size_t>(dim) + 1);
  if (n <= k) {
    consider(dirs);
  } else {
    // Caratheodory: the min-norm point lies in some (dim+1)-subset simplex.
    std::vector<size_t> idx(k);
    std::function<void(size_t, size_t)> rec = [&](size_t start, size_t depth) {
      if (depth == k) {
        std::vector<Vec> sub;
        for (size_t i : idx) sub.push_back(dirs[i]);
        consider(sub);
        return;
      }
      for (size_t i = start; i + (k - depth) <= n; ++i) {
        idx[depth] = i;
        rec(i + 1, depth + 1);
      }
    };
    rec(0, 0);
  }
  if (witness_out) *witness_out = best;
  return std::sqrt(std::max(0.0, bn));
}

}  // namespace

CriticalVerdict hull_criterion(const NearestSet& near, double eta) {
  if (near.directions.empty()) throw InputError("hull criterion: no witness directions");
  if (!(eta > 0)) throw InputError("hull criterion: eta must be positive");
  const int dim = near.directions[0].dim();
  for (const Vec& u : near.directions)
    if (std::abs(std::sqrt(u.dot(u)) - 1.0) > 1e-6)
      throw InputError("hull criterion: directions must be Euclidean-unit (Euclidean norm only)");

  CriticalVerdict v;
  v.point = near.query;
  v.criterion = Criterion::Hull;
  v.witness = Vec::zero(dim);

  double margin;
  Vec w = Vec::zero(dim);
  if (dim == 2) {
    // Exact angular sweep: with g the largest angular gap between witness
    // directions, dist(0, conv) = -cos(g/2) and the escape direction points
    // into the middle of the gap.
    std::vector<double> ang;
    ang.reserve(near.directions.size());
    for (const Vec& u : near.directions) ang.push_back(std::atan2(u[1], u[0]));
    std::sort(ang.begin(), ang.end());
    double gmax = 2 * kPi + ang.front() - ang.back();
    double mid = ang.back() + gmax / 2;
    for (size_t i = 0; i + 1 < ang.size(); ++i) {
      double g = ang[i + 1] - ang[i];
      if (g > gmax) {
        gmax = g;
        mid = ang[i] + g / 2;
      }
    }
    margin = -std::cos(gmax / 2);
    w = Vec(std::cos(mid), std::sin(mid));
  } else {
    Vec c = Vec::zero(3);
    margin = hull_distance(near.directions, &c);
    if (margin > 1e-300) {
      w = (-1.0 / margin) * c;
    }
  }
  v.margin = margin;
  if (margin >= eta) {
    v.critical = false;
    v.epsilon = margin;
    double wn = std::sqrt(w.dot(w));
    v.witness = (wn > 1e-300) ? (1.0 / wn) * w : w;
  }
  return v;
}

CriticalVerdict directional_criterion(const DistanceField& field, const Vec& x,
                                      double delta, int directions, int probes,
                                      uint64_t seed) {
  if (!(delta > 0)) throw InputError("directional criterion: delta must be positive");
  if (directions < 1 || probes < 1)
    throw InputError("directional criterion: need at least one direction and probe");
  const Norm& norm = field.norm();
  const int dim = field.grid().dim;

  std::vector<Vec> dirs = sample_unit_sphere(norm, directions, derive_seed(seed, 1));
  // sup-norm reach of the delta-ball, for the 2*delta grid-clearance check
  double reach = 0;
  for (const Vec& u : dirs)
    for (int a = 0; a < dim; ++a) reach = std::max(reach, std::abs(u[a]));
  if (!field.contains(x, 2 * delta * reach - 1e-12))
    throw DomainError("directional criterion: B(x, 2*delta) leaves the grid");

  std::vector<Vec> zs;
  zs.push_back(x);
  {
    std::vector<Vec> us = sample_unit_sphere(norm, std::max(1, probes - 1),
                                             derive_seed(seed, 2));
    Rng rng(derive_seed(seed, 3));
    for (int i = 0; i < probes - 1; ++i) {
      double rho = std::pow(rng.uniform(), 1.0 / dim) * delta;
      zs.push_back(x + rho * us[i]);
    }
  }
  std::vector<double> fz(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) fz[i] = field.interpolate(zs[i]);

  const double ts[3] = {delta / 4, delta / 2, delta};
  double best = -std::numeric_limits<double>::infinity();
  Vec best_dir = Vec::zero(dim);
  for (const Vec& v : dirs) {
    double worst = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (size_t i = 0; i < zs.size(); ++i)
      for (double t : ts) {
        Vec y = zs[i] + t * v;
        if (norm.eval(y - x) > delta + 1e-12) continue;
        worst = std::max(worst, (field.interpolate(y) - fz[i]) / t);
        any = true;
      }
    if (!any) continue;
    if (-worst > best) {
      best = -worst;
      best_dir = v;
    }
  }

  CriticalVerdict out;
  out.point = x;
  out.criterion = Criterion::Directional;
  out.margin = best;
  out.witness = Vec::zero(dim);
  if (best > 0) {
    out.critical = false;
    out.epsilon = best;
    out.witness = best_dir;
  }
  return out;
}

HausdorffEstimate hausdorff_box_estimate(std::vector<double> values, double s,
                                         double delta) {
  if (!(s > 0) || !(delta > 0))
    throw InputError("hausdorff estimate: s and delta must be positive");
  HausdorffEstimate est;
  est.s = s;
  est.delta = delta;
  std::sort(values.begin(), values.end());
  size_t i = 0;
  while (i < values.size()) {
    double start = values[i];
    while (i < values.size() && values[i] <= start + delta) ++i;
    est.cover.push_back({start, start + delta});
  }
  est.premeasure = static_cast<double>(est.cover.size()) * std::pow(delta, s);
  return est;
}

std::string hausdorff_to_json(const HausdorffEstimate& est) {
  JsonWriter w;
  w.begin_object();
  w.key("s");
  w.value_double(est.s);
  w.key("delta");
  w.value_double(est.delta);
  w.key("intervals");
  w.value_int(static_cast<int64_t>(est.cover.size()));
  w.key("premeasure");
  w.value_double(est.premeasure);
  w.end_object();
  return w.str();
}

CriticalReport critical_scan(const DistanceField& field, const ClosedSet& scene,
                             const Norm& norm, const CriticalScanParams& params) {
  const GridSpec& g = field.grid();
  const double h = g.h;
  const int dim = g.dim;
  CriticalScanParams p = params;
  if (p.delta <= 0) p.delta = 4 * h;
  if (p.directions <= 0) p.directions = (dim == 2) ? 32 : 128;
  if (p.tau <= 0) p.tau = 2 * h;
  const bool hull = !p.use_directional && norm.kind() == Norm::Kind::Euclidean;

  // Shared direction set for the no-stationary-point assertion.
  std::vector<Vec> probe_dirs =
      sample_unit_sphere(norm, p.directions, derive_seed(p.seed, 7));
  double reach = 0;
  for (const Vec& u : probe_dirs)
    for (int a = 0; a < dim; ++a) reach = std::max(reach, std::abs(u[a]));
  const double clearance =
      hull ? (2 * h * std::max(1.0, reach)) : (2 * p.delta * reach + h);

  struct Slot {
    bool scanned = false;
    CriticalVerdict verdict;
  };
  std::vector<Slot> slots(g.vertex_count());
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;

  parallel_for(g.vertex_count(), p.threads, [&](size_t idx) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      if (field.value(idx) <= 3 * h) return;
      auto c = g.coords(idx);
      Vec x = g.vertex(c[0], c[1], c[2]);
      if (!field.contains(x, clearance)) return;

      CriticalVerdict v;
      if (hull) {
        v = hull_criterion(nearest_points(scene, x, norm, p.tau), p.eta);
      } else {
        v = directional_criterion(field, x, p.delta, p.directions, p.probes,
                                  derive_seed(p.seed, idx));
      }

      // No-stationary-point property: some direction must descend at rate
      // >= 0.5 at grid scale (true for any distance field: the quotient along
      // the witness direction is -1).
      double f0 = field.value(idx);
      double qmin = std::numeric_limits<double>::infinity();
      for (const Vec& u : probe_dirs)
        qmin = std::min(qmin, (field.interpolate(x + h * u) - f0) / h);
      if (!v.critical)
        qmin = std::min(qmin, (field.interpolate(x + h * v.witness) - f0) / h);
      if (qmin > -0.5)
        throw FalsificationError("critical scan: stationary point at a scanned vertex");

      slots[idx].scanned = true;
      slots[idx].verdict = v;
    } catch (...) {
      bool expected = false;
      if (failed.compare_exchange_strong(expected, true)) {
        std::lock_guard<std::mutex> lk(err_mu);
        first_error = std::current_exception();
      }
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  CriticalReport rep;
  rep.scene_hash = scene.hash();
  rep.norm_spec = norm.spec_string();
  rep.params = p;
  rep.h = h;
  for (size_t idx = 0; idx < slots.size(); ++idx) {
    if (!slots[idx].scanned) continue;
    ++rep.scanned;
    rep.verdicts.push_back(slots[idx].verdict);
    if (slots[idx].verdict.critical) {
      rep.critical_points.push_back(slots[idx].verdict.point);
      rep.critical_values.push_back(field.value(idx));
    }
  }
  std::sort(rep.critical_values.begin(), rep.critical_values.end());
  std::vector<double> dedup;
  for (double v : rep.critical_values)
    if (dedup.empty() || v - dedup.back() > 1e-12) dedup.push_back(v);
  rep.critical_values = std::move(dedup);
  rep.hausdorff =
      hausdorff_box_estimate(rep.critical_values, (dim - 1) / 2.0, 4 * h);
  return rep;
}

std::string CriticalReport::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("params");
  w.begin_object();
  w.key("eta");
  w.value_double(params.eta);
  w.key("delta");
  w.value_double(params.delta);
  w.key("directions");
  w.value_int(params.directions);
  w.key("probes");
  w.value_int(params.probes);
  w.key("seed");
  w.value_uint(params.seed);
  w.key("criterion");
  w.value_string(params.use_directional ? "directional" : "auto");
  w.key("tau");
  w.value_double(params.tau);
  w.key("norm");
  w.value_string(norm_spec);
  w.key("scene_hash");
  w.value_uint(scene_hash);
  w.key("h");
  w.value_double(h);
  w.key("scanned");
  w.value_int(scanned);
  w.end_object();
  w.key("critical_points");
  w.begin_array();
  for (const Vec& p : critical_points) {
    w.begin_array();
    for (int a = 0; a < p.dim(); ++a) w.value_double(p[a]);
    w.end_array();
  }
  w.end_array();
  w.key("critical_values");
  w.begin_array();
  for (double v : critical_values) w.value_double(v);
  w.end_array();
  w.key("hausdorff");
  w.value_raw(hausdorff_to_json(hausdorff));
  w.end_object();
  return w.str();
}

ProbeVerdict dc_regularity_probe(const std::function<double(const Vec&)>& f_plus,
                                 const std::function<double(const Vec&)>& f_minus,
                                 const Vec& x, const Vec& v) {
  const double steps[3] = {1e-3, 1e-4, 1e-5};
  // One-sided derivative of one convex part along +v and -v, with a
  // Richardson-style stability requirement across the three steps.
  auto part_derivative = [&](const std::function<double(const Vec&)>& f,
                             double* out) -> bool {
    double f0 = f(x);
    double qp[3], qm[3];
    for (int i = 0; i < 3; ++i) {
      qp[i] = (f(x + steps[i] * v) - f0) / steps[i];
      qm[i] = (f(x - steps[i] * v) - f0) / steps[i];
    }
    for (int i = 0; i + 1 < 3; ++i) {
      if (std::abs(qp[i + 1] - qp[i]) > 1e-4) return false;
      if (std::abs(qm[i + 1] - qm[i]) > 1e-4) return false;
    }
    // Two-sided: for a convex part, f'(x;v) + f'(x;-v) = 0 iff differentiable
    // along the line through v.
    if (std::abs(qp[2] + qm[2]) > 1e-4) return false;
    *out = qp[2];
    return true;
  };
  double dp, dm;
  if (!part_derivative(f_plus, &dp)) return ProbeVerdict::Inconclusive;
  if (!part_derivative(f_minus, &dm)) return ProbeVerdict::Inconclusive;
  if (std::abs(dp - dm) > 1e-3) return ProbeVerdict::Regular;
  return ProbeVerdict::Inconclusive;
}

}  // namespace distlab
