#include "distlab/dc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include "distlab/errors.hpp"
#include "distlab/json_out.hpp"
#include "distlab/rng.hpp"

namespace distlab {

namespace {

// Vec only carries 2 or 3 ambient components; 1D work uses component 0 and
// every loop below runs over the true dim
Vec vec_nd(int dim) { return Vec::zero(dim == 3 ? 3 : 2); }

bool same_piece(const AffinePiece& a, const AffinePiece& b, int dim) {
  if (a.b != b.b) return false;
  for (int i = 0; i < dim; ++i)
    if (a.g[i] != b.g[i]) return false;
  return true;
}

PolyConvex scale(const PolyConvex& p, double c) {
  // pre: c >= 0 (a negative factor would flip max into min)
  PolyConvex out(p.dim());
  if (c == 0) {
    out.add_piece({Vec{}, 0});
    return out;
  }
  for (const auto& pc : p.pieces()) {
    AffinePiece s = pc;
    for (int i = 0; i < p.dim(); ++i) s.g[i] *= c;
    s.b *= c;
    out.add_piece(s);
  }
  return out;
}

PolyConvex shift_arg(const PolyConvex& p, double t) {
  // pieces of t' -> p(t') - t applied to offsets: max_i (g x + b - t)
  PolyConvex out(p.dim());
  for (const auto& pc : p.pieces()) {
    AffinePiece s = pc;
    s.b -= t;
    out.add_piece(s);
  }
  return out;
}

PolyConvex psum(const PolyConvex& a, const PolyConvex& b) {
  PolyConvex out(a.dim());
  for (const auto& pa : a.pieces())
    for (const auto& pb : b.pieces()) {
      AffinePiece s = pa;
      for (int i = 0; i < a.dim(); ++i) s.g[i] += pb.g[i];
      s.b += pb.b;
      out.add_piece(s);
    }
  return out;
}

PolyConvex pmax(const PolyConvex& a, const PolyConvex& b) {
  PolyConvex out(a.dim());
  for (const auto& pa : a.pieces()) out.add_piece(pa);
  for (const auto& pb : b.pieces()) out.add_piece(pb);
  return out;
}

struct Line {
  double s, b;  // slope, offset
};

// upper envelope of 1D affine pieces; returns active lines in slope order
std::vector<Line> envelope(const PolyConvex& p) {
  std::vector<Line> lines;
  for (const auto& pc : p.pieces()) lines.push_back({pc.g[0], pc.b});
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.s != b.s ? a.s < b.s : a.b < b.b;
  });
  // among equal slopes only the largest offset survives
  std::vector<Line> dedup;
  for (const auto& l : lines) {
    if (!dedup.empty() && dedup.back().s == l.s)
      dedup.back() = l;
    else
      dedup.push_back(l);
  }
  auto cross = [](const Line& a, const Line& b) {
    return (a.b - b.b) / (b.s - a.s);
  };
  std::vector<Line> env;
  for (const auto& l : dedup) {
    while (env.size() >= 2 &&
           cross(env[env.size() - 2], l) <= cross(env[env.size() - 2], env.back()))
      env.pop_back();
    env.push_back(l);
  }
  return env;
}

struct Canonical {
  double alpha = 0, beta = 0;
  std::vector<std::pair<double, double>> jumps;  // (t_k, j_k), t ascending
};

// f = P - M as alpha + beta t + sum j_k (t - t_k)_+
Canonical canonical_form(const DCFunction& f) {
  std::vector<Line> ep = envelope(f.plus), em = envelope(f.minus);
  Canonical c;
  c.beta = ep.front().s - em.front().s;
  c.alpha = ep.front().b - em.front().b;
  auto cross = [](const Line& a, const Line& b) {
    return (a.b - b.b) / (b.s - a.s);
  };
  std::vector<std::pair<double, double>> ev;
  for (size_t i = 0; i + 1 < ep.size(); ++i)
    ev.push_back({cross(ep[i], ep[i + 1]), ep[i + 1].s - ep[i].s});
  for (size_t i = 0; i + 1 < em.size(); ++i)
    ev.push_back({cross(em[i], em[i + 1]), -(em[i + 1].s - em[i].s)});
  std::sort(ev.begin(), ev.end());
  for (const auto& [t, j] : ev) {
    if (!c.jumps.empty() && c.jumps.back().first == t)
      c.jumps.back().second += j;
    else
      c.jumps.push_back({t, j});
  }
  return c;
}

void self_check(const DCFunction& got,
                const std::function<double(const Vec&)>& expect, int dim,
                double tol, const char* what) {
  Rng rng(derive_seed(0x5eedful, 17));
  for (int i = 0; i < 100; ++i) {
    Vec x = vec_nd(dim);
    for (int a = 0; a < dim; ++a) x[a] = rng.uniform(-10, 10);
    double e = expect(x);
    if (std::abs(got.eval(x) - e) > tol * (1 + std::abs(e)))
      throw FalsificationError(std::string(what) +
                               ": probe disagrees with the composed value");
  }
}

double polygon_area(const std::vector<Vec>& poly) {
  double a = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

// Sutherland-Hodgman clip of CCW polygon by halfplane a.x <= c
std::vector<Vec> clip_halfplane(const std::vector<Vec>& poly, const Vec& a,
                                double c) {
  std::vector<Vec> out;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % n];
    double fp = a[0] * p[0] + a[1] * p[1] - c;
    double fq = a[0] * q[0] + a[1] * q[1] - c;
    bool in_p = fp <= 0, in_q = fq <= 0;
    if (in_p) out.push_back(p);
    if (in_p != in_q) {
      double t = fp / (fp - fq);
      out.push_back(Vec(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])));
    }
  }
  return out;
}

}  // namespace

PolyConvex PolyConvex::constant(int dim, double c) {
  PolyConvex p(dim);
  p.add_piece({Vec{}, c});
  return p;
}

void PolyConvex::add_piece(const AffinePiece& p) {
  for (const auto& q : pieces_)
    if (same_piece(p, q, dim_)) return;
  if (pieces_.size() >= kMaxPieces)
    throw ResourceError("dc: affine piece budget exceeded");
  pieces_.push_back(p);
}

double PolyConvex::eval(const Vec& x) const {
  if (pieces_.empty()) throw InputError("dc: empty convex part");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_) {
    double v = p.b;
    for (int i = 0; i < dim_; ++i) v += p.g[i] * x[i];
    best = std::max(best, v);
  }
  return best;
}

double DCFunction::eval1(double t) const {
  Vec x = vec_nd(1);
  x[0] = t;
  return eval(x);
}

DCFunction DCFunction::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("plus") ||
      !j.contains("minus"))
    throw InputError("dc: expected {dim, plus, minus}");
  DCFunction f;
  if (!j["dim"].is_number_integer())
    throw InputError("dc: dim must be an integer");
  f.dim = j["dim"].get<int>();
  if (f.dim < 1 || f.dim > 3) throw InputError("dc: dim must be 1, 2 or 3");
  f.plus = PolyConvex(f.dim);
  f.minus = PolyConvex(f.dim);
  auto read_part = [&](const nlohmann::json& arr, PolyConvex& part,
                       const char* name) {
    if (!arr.is_array() || arr.empty())
      throw InputError(std::string("dc: ") + name +
                       " must be a non-empty array of pieces");
    for (const auto& pj : arr) {
      if (!pj.is_array() || pj.size() != static_cast<size_t>(f.dim) + 1)
        throw InputError(std::string("dc: each ") + name +
                         " piece needs dim gradients plus an offset");
      AffinePiece p;
      p.g = vec_nd(f.dim);
      for (int i = 0; i <= f.dim; ++i) {
        if (!pj[i].is_number())
          throw InputError("dc: piece entries must be numbers");
        double v = pj[i].get<double>();
        if (!std::isfinite(v)) throw InputError("dc: piece entries must be finite");
        if (i < f.dim)
          p.g[i] = v;
        else
          p.b = v;
      }
      part.add_piece(p);
    }
  };
  read_part(j["plus"], f.plus, "plus");
  read_part(j["minus"], f.minus, "minus");
  return f;
}

DCFunction DCFunction::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("dc: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("dc: " + path + ": " + e.what());
  }
  return from_json(j);
}

std::string DCFunction::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("dim");
  w.value_int(dim);
  auto part = [&](const char* name, const PolyConvex& p) {
    w.key(name);
    w.begin_array();
    for (const auto& pc : p.pieces()) {
      w.begin_array();
      for (int i = 0; i < dim; ++i) w.value_double(pc.g[i]);
      w.value_double(pc.b);
      w.end_array();
    }
    w.end_array();
  };
  part("plus", plus);
  part("minus", minus);
  w.end_object();
  return w.str();
}

DCFunction dc_sum(const DCFunction& a, const DCFunction& b) {
  if (a.dim != b.dim) throw InputError("dc: dimension mismatch in sum");
  DCFunction f;
  f.dim = a.dim;
  f.plus = psum(a.plus, b.plus);
  f.minus = psum(a.minus, b.minus);
  self_check(
      f, [&](const Vec& x) { return a.eval(x) + b.eval(x); }, f.dim, 1e-12,
      "dc_sum");
  return f;
}

DCFunction dc_compose_pa(const DCFunction& outer, const DCFunction& inner) {
  if (outer.dim != 1)
    throw InputError("dc: composition requires a 1D outer function");
  Canonical c = canonical_form(outer);
  DCFunction f;
  f.dim = inner.dim;
  f.plus = PolyConvex::constant(f.dim, c.alpha);
  f.minus = PolyConvex::constant(f.dim, 0);
  if (c.beta >= 0) {
    f.plus = psum(f.plus, scale(inner.plus, c.beta));
    f.minus = psum(f.minus, scale(inner.minus, c.beta));
  } else {
    f.plus = psum(f.plus, scale(inner.minus, -c.beta));
    f.minus = psum(f.minus, scale(inner.plus, -c.beta));
  }
  for (const auto& [t, j] : c.jumps) {
    if (j == 0) continue;
    // (g - t)_+ = max(p - t, m) - m
    PolyConvex ramp = pmax(shift_arg(inner.plus, t), inner.minus);
    if (j >= 0) {
      f.plus = psum(f.plus, scale(ramp, j));
      f.minus = psum(f.minus, scale(inner.minus, j));
    } else {
      f.plus = psum(f.plus, scale(inner.minus, -j));
      f.minus = psum(f.minus, scale(ramp, -j));
    }
  }
  self_check(
      f, [&](const Vec& x) { return outer.eval1(inner.eval(x)); }, f.dim, 1e-10,
      "dc_compose_pa");
  return f;
}

StationarySet stationary_set(const DCFunction& f, const Box& box) {
  if (f.dim > 2)
    throw InputError("dc: stationary cells are available in 1D and 2D only");
  StationarySet out;
  out.dim = f.dim;
  double scale_g = 1;
  for (const auto& p : f.plus.pieces())
    for (int i = 0; i < f.dim; ++i) scale_g = std::max(scale_g, std::abs(p.g[i]));
  for (const auto& p : f.minus.pieces())
    for (int i = 0; i < f.dim; ++i) scale_g = std::max(scale_g, std::abs(p.g[i]));
  const double gtol = 1e-12 * scale_g;

  if (f.dim == 1) {
    Canonical c = canonical_form(f);
    std::vector<double> cuts = {box.lo[0]};
    for (const auto& [t, j] : c.jumps)
      if (t > box.lo[0] && t < box.hi[0]) cuts.push_back(t);
    cuts.push_back(box.hi[0]);
    double slope = c.beta;
    size_t next = 0;
    // advance past jumps at or below the box start
    std::vector<std::pair<double, double>> jumps = c.jumps;
    while (next < jumps.size() && jumps[next].first <= box.lo[0])
      slope += jumps[next++].second;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      double lo = cuts[i], hi = cuts[i + 1];
      if (std::abs(slope) <= gtol) {
        double value = f.eval1(0.5 * (lo + hi));
        if (!out.intervals.empty() &&
            out.intervals.back().hi == lo &&
            std::abs(out.intervals.back().value - value) <= 1e-12)
          out.intervals.back().hi = hi;
        else
          out.intervals.push_back({lo, hi, value});
      }
      if (next < jumps.size() && jumps[next].first == hi)
        slope += jumps[next++].second;
    }
    for (const auto& iv : out.intervals) out.values.push_back(iv.value);
  } else {
    std::vector<Vec> boxpoly = {Vec(box.lo[0], box.lo[1]),
                                Vec(box.hi[0], box.lo[1]),
                                Vec(box.hi[0], box.hi[1]),
                                Vec(box.lo[0], box.hi[1])};
    double box_area = (box.hi[0] - box.lo[0]) * (box.hi[1] - box.lo[1]);
    const auto& P = f.plus.pieces();
    const auto& M = f.minus.pieces();
    for (size_t i = 0; i < P.size(); ++i) {
      for (size_t j = 0; j < M.size(); ++j) {
        if (std::abs(P[i].g[0] - M[j].g[0]) > gtol ||
            std::abs(P[i].g[1] - M[j].g[1]) > gtol)
          continue;
        std::vector<Vec> poly = boxpoly;
        auto clip_active = [&](const std::vector<AffinePiece>& part, size_t keep) {
          for (size_t k = 0; k < part.size() && !poly.empty(); ++k) {
            if (k == keep) continue;
            // g_keep.x + b_keep >= g_k.x + b_k
            Vec a(part[k].g[0] - part[keep].g[0],
                  part[k].g[1] - part[keep].g[1]);
            poly = clip_halfplane(poly, a, part[keep].b - part[k].b);
          }
        };
        clip_active(P, i);
        clip_active(M, j);
        if (poly.size() < 3) continue;
        double area = polygon_area(poly);
        if (area <= 1e-12 * box_area) continue;
        Vec cen(0, 0);
        for (const auto& v : poly) {
          cen[0] += v[0];
          cen[1] += v[1];
        }
        cen[0] /= poly.size();
        cen[1] /= poly.size();
        out.regions.push_back({poly, f.eval(cen)});
        out.values.push_back(out.regions.back().value);
      }
    }
  }
  std::sort(out.values.begin(), out.values.end());
  out.values.erase(std::unique(out.values.begin(), out.values.end(),
                               [](double a, double b) {
                                 return std::abs(a - b) <= 1e-12;
                               }),
                   out.values.end());
  return out;
}

HausdorffEstimate morse_sard_check(const DCFunction& f, const Box& box,
                                   double s, double delta) {
  StationarySet st = stationary_set(f, box);
  return hausdorff_box_estimate(st.values, s, delta);
}

}  // namespace distlab
