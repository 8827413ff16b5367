#include "distlab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace distlab {

namespace {

void require_finite(const Vec& v, const char* what) {
  for (int i = 0; i < v.dim(); ++i)
    if (!std::isfinite(v[i]))
      throw InputError(std::string("scene: non-finite coordinate in ") + what);
}

Vec parse_vec(const nlohmann::json& arr, int dim, const char* what) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
    throw InputError(std::string("scene: ") + what + " must be an array of length " +
                     std::to_string(dim));
  Vec v = dim == 2 ? Vec(arr.at(0).get<double>(), arr.at(1).get<double>())
                   : Vec(arr.at(0).get<double>(), arr.at(1).get<double>(),
                         arr.at(2).get<double>());
  require_finite(v, what);
  return v;
}

// Minimize the convex map t -> norm(a + t*(b-a) - x) over [0,1] by bisection
// on the directional derivative; the derivative of a convex function is
// monotone, so 80 halvings pin t far below the 1e-12 value tolerance.
double segment_param_lp(const Vec& a, const Vec& b, const Vec& x, const Norm& norm) {
  Vec d = b - a;
  auto deriv = [&](double t) {
    Vec v = a + d * t - x;
    if (norm.eval(v) < 1e-300) return 0.0;  // on the segment
    return norm.gradient(v).dot(d);
  };
  double g0 = deriv(0.0);
  if (g0 >= 0) return 0.0;
  double g1 = deriv(1.0);
  if (g1 <= 0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    (deriv(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct PrimHit {
  double dist;
  Vec point;
  int prim = -1;
};

PrimHit point_hit(const PointPrim& pr, const Vec& x, const Norm& norm) {
  return {norm.eval(pr.p - x), pr.p};
}

PrimHit segment_hit(const SegmentPrim& pr, const Vec& x, const Norm& norm) {
  double t;
  if (norm.kind() == Norm::Kind::Euclidean) {
    Vec d = pr.b - pr.a;
    double dd = d.dot(d);
    t = dd > 0 ? std::clamp((x - pr.a).dot(d) / dd, 0.0, 1.0) : 0.0;
  } else {
    t = segment_param_lp(pr.a, pr.b, x, norm);
  }
  Vec w = pr.a + (pr.b - pr.a) * t;
  return {norm.eval(w - x), w};
}

// All local minimizers of the ball primitive within `keep` of its best value.
// Euclidean: radial projection. Other norms (2D only): minimize over the
// boundary circle; the map is piecewise unimodal, so a dense scan plus local
// refinement recovers every minimum to 1e-12.
void ball_hits(const BallPrim& pr, const Vec& x, const Norm& norm, double keep,
               std::vector<PrimHit>& out) {
  Vec cx = x - pr.center;
  double ro = cx.norm2();
  if (ro <= pr.radius) {
    out.push_back({0.0, x});
    return;
  }
  if (norm.kind() == Norm::Kind::Euclidean) {
    Vec w = pr.center + cx * (pr.radius / ro);
    out.push_back({ro - pr.radius, w});
    return;
  }
  if (pr.center.dim() != 2)
    throw InputError("scene: ball primitives under non-Euclidean norms are 2D only");
  auto val = [&](double th) {
    Vec w = pr.center + Vec(std::cos(th), std::sin(th)) * pr.radius;
    return norm.eval(w - x);
  };
  const int N = 512;
  std::vector<double> vs(N);
  for (int i = 0; i < N; ++i) vs[i] = val(2.0 * M_PI * i / N);
  std::vector<PrimHit> local;
  for (int i = 0; i < N; ++i) {
    double vp = vs[(i + N - 1) % N], vc = vs[i], vn = vs[(i + 1) % N];
    if (vc <= vp && vc <= vn) {
      // golden-section refine inside the bracketing arc
      double a = 2.0 * M_PI * (i - 1) / N, b = 2.0 * M_PI * (i + 1) / N;
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = val(c), fd = val(d);
      for (int it = 0; it < 90; ++it) {
        if (fc < fd) {
          b = d; d = c; fd = fc;
          c = b - gr * (b - a); fc = val(c);
        } else {
          a = c; c = d; fc = fd;
          d = a + gr * (b - a); fd = val(d);
        }
      }
      double th = 0.5 * (a + b);
      Vec w = pr.center + Vec(std::cos(th), std::sin(th)) * pr.radius;
      local.push_back({norm.eval(w - x), w});
    }
  }
  double best = local.empty() ? 0.0 : local[0].dist;
  for (const auto& h : local) best = std::min(best, h.dist);
  for (const auto& h : local)
    if (h.dist <= best + keep) out.push_back(h);
}

// Nearest point of the primitive to c: exact for points and segments; balls
// map radially onto the boundary sphere, where every exterior witness lives.
Vec project_to_primitive(const Primitive& pr, const Vec& c, const Norm& norm) {
  if (std::holds_alternative<PointPrim>(pr)) return std::get<PointPrim>(pr).p;
  if (std::holds_alternative<SegmentPrim>(pr))
    return segment_hit(std::get<SegmentPrim>(pr), c, norm).point;
  const auto& b = std::get<BallPrim>(pr);
  Vec d = c - b.center;
  double n = d.norm2();
  if (n < 1e-300) {
    Vec e = Vec::zero(c.dim());
    e[0] = 1.0;  // centroid degenerated to the center: any boundary point works
    return b.center + e * b.radius;
  }
  return b.center + d * (b.radius / n);
}

}  // namespace

ClosedSet::ClosedSet(int dim, std::vector<Primitive> prims)
    : dim_(dim), prims_(std::move(prims)) {
  if (dim_ != 2 && dim_ != 3) throw InputError("scene: dim must be 2 or 3");
  if (prims_.empty()) throw InputError("scene: at least one primitive required");
}

ClosedSet ClosedSet::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("scene: top level must be an object");
  int dim = j.value("dim", 0);
  if (dim != 2 && dim != 3) throw InputError("scene: dim must be 2 or 3");
  if (!j.contains("primitives") || !j.at("primitives").is_array())
    throw InputError("scene: missing primitives array");
  std::vector<Primitive> prims;
  for (const auto& p : j.at("primitives")) {
    std::string type = p.value("type", "");
    if (type == "point") {
      prims.push_back(PointPrim{parse_vec(p.at("coords"), dim, "point coords")});
    } else if (type == "segment") {
      prims.push_back(SegmentPrim{parse_vec(p.at("a"), dim, "segment endpoint"),
                                  parse_vec(p.at("b"), dim, "segment endpoint")});
    } else if (type == "loop") {
      const auto& vs = p.at("vertices");
      if (!vs.is_array() || vs.size() < 3)
        throw InputError("scene: loop needs at least 3 vertices");
      std::vector<Vec> pts;
      for (const auto& v : vs) pts.push_back(parse_vec(v, dim, "loop vertex"));
      for (size_t i = 0; i < pts.size(); ++i)
        prims.push_back(SegmentPrim{pts[i], pts[(i + 1) % pts.size()]});
    } else if (type == "ball") {
      double r = p.at("radius").get<double>();
      if (!std::isfinite(r) || r <= 0)
        throw InputError("scene: ball radius must be finite and positive");
      prims.push_back(BallPrim{parse_vec(p.at("center"), dim, "ball center"), r});
    } else {
      throw InputError("scene: unknown primitive type '" + type + "'");
    }
  }
  return ClosedSet(dim, std::move(prims));
}

ClosedSet ClosedSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("scene: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // convert the byte offset to a line number for the schema error
    size_t line = 1;
    for (size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
      if (text[i] == '\n') ++line;
    throw InputError("scene: " + path + ":" + std::to_string(line) +
                     ": parse error: " + e.what());
  }
  return from_json(j);
}

nlohmann::json ClosedSet::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  auto arr = nlohmann::json::array();
  for (const auto& pr : prims_) {
    nlohmann::json p;
    if (std::holds_alternative<PointPrim>(pr)) {
      const auto& pt = std::get<PointPrim>(pr);
      p["type"] = "point";
      auto c = nlohmann::json::array();
      for (int i = 0; i < dim_; ++i) c.push_back(pt.p[i]);
      p["coords"] = c;
    } else if (std::holds_alternative<SegmentPrim>(pr)) {
      const auto& sg = std::get<SegmentPrim>(pr);
      p["type"] = "segment";
      auto a = nlohmann::json::array(), b = nlohmann::json::array();
      for (int i = 0; i < dim_; ++i) {
        a.push_back(sg.a[i]);
        b.push_back(sg.b[i]);
      }
      p["a"] = a;
      p["b"] = b;
    } else {
      const auto& bl = std::get<BallPrim>(pr);
      p["type"] = "ball";
      auto c = nlohmann::json::array();
      for (int i = 0; i < dim_; ++i) c.push_back(bl.center[i]);
      p["center"] = c;
      p["radius"] = bl.radius;
    }
    arr.push_back(p);
  }
  j["primitives"] = arr;
  return j;
}

uint64_t ClosedSet::hash() const {
  std::string s = to_json().dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Box ClosedSet::bounding_box() const {
  Vec lo = Vec::zero(dim_), hi = Vec::zero(dim_);
  bool first = true;
  auto absorb = [&](const Vec& p, double pad) {
    for (int i = 0; i < dim_; ++i) {
      double a = p[i] - pad, b = p[i] + pad;
      if (first) {
        lo[i] = a;
        hi[i] = b;
      } else {
        lo[i] = std::min(lo[i], a);
        hi[i] = std::max(hi[i], b);
      }
    }
    first = false;
  };
  for (const auto& pr : prims_) {
    if (std::holds_alternative<PointPrim>(pr)) {
      absorb(std::get<PointPrim>(pr).p, 0);
    } else if (std::holds_alternative<SegmentPrim>(pr)) {
      absorb(std::get<SegmentPrim>(pr).a, 0);
      absorb(std::get<SegmentPrim>(pr).b, 0);
    } else {
      const auto& b = std::get<BallPrim>(pr);
      absorb(b.center, b.radius);
    }
  }
  return {lo, hi};
}

double scene_distance(const ClosedSet& F, const Vec& x, const Norm& norm) {
  if (x.dim() != F.dim()) throw InputError("scene: query dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  std::vector<PrimHit> hits;
  for (const auto& pr : F.primitives()) {
    if (std::holds_alternative<PointPrim>(pr)) {
      best = std::min(best, point_hit(std::get<PointPrim>(pr), x, norm).dist);
    } else if (std::holds_alternative<SegmentPrim>(pr)) {
      best = std::min(best, segment_hit(std::get<SegmentPrim>(pr), x, norm).dist);
    } else {
      hits.clear();
      ball_hits(std::get<BallPrim>(pr), x, norm, 0.0, hits);
      for (const auto& h : hits) best = std::min(best, h.dist);
    }
  }
  return best;
}

NearestSet nearest_points(const ClosedSet& F, const Vec& x, const Norm& norm,
                          double tau) {
  if (tau <= 0) throw InputError("nearest_points: tau must be positive");
  std::vector<PrimHit> hits;
  const auto& prims = F.primitives();
  for (size_t i = 0; i < prims.size(); ++i) {
    const auto& pr = prims[i];
    if (std::holds_alternative<PointPrim>(pr)) {
      hits.push_back(point_hit(std::get<PointPrim>(pr), x, norm));
      hits.back().prim = static_cast<int>(i);
    } else if (std::holds_alternative<SegmentPrim>(pr)) {
      hits.push_back(segment_hit(std::get<SegmentPrim>(pr), x, norm));
      hits.back().prim = static_cast<int>(i);
    } else {
      size_t before = hits.size();
      ball_hits(std::get<BallPrim>(pr), x, norm, tau, hits);
      for (size_t k = before; k < hits.size(); ++k)
        hits[k].prim = static_cast<int>(i);
    }
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& h : hits) dmin = std::min(dmin, h.dist);
  if (dmin <= tau)
    throw DomainError("nearest_points: on-set query (distance <= tau)");

  NearestSet out;
  out.query = x;
  out.distance = dmin;
  out.tolerance = tau;
  // Keep hits within tau of the optimum. Witnesses closer than tau merge into
  // one representative: the cluster centroid projected back onto the
  // primitive of the cluster's best hit.
  struct Cluster {
    Vec sum;
    int count = 0;
    const PrimHit* best = nullptr;
    std::vector<Vec> pts;
  };
  std::vector<Cluster> clusters;
  for (const auto& h : hits) {
    if (h.dist > dmin + tau) continue;
    Cluster* home = nullptr;
    for (auto& cl : clusters) {
      for (const auto& p : cl.pts)
        if ((p - h.point).norm2() <= tau) {
          home = &cl;
          break;
        }
      if (home) break;
    }
    if (!home) {
      clusters.push_back({Vec::zero(x.dim()), 0, nullptr, {}});
      home = &clusters.back();
    }
    home->sum = home->sum + h.point;
    home->count++;
    home->pts.push_back(h.point);
    if (!home->best || h.dist < home->best->dist) home->best = &h;
  }
  for (const auto& cl : clusters) {
    Vec centroid = cl.sum * (1.0 / cl.count);
    out.witnesses.push_back(
        project_to_primitive(prims[cl.best->prim], centroid, norm));
  }
  for (const auto& w : out.witnesses) {
    Vec d = w - x;
    out.directions.push_back(d * (1.0 / norm.eval(d)));
  }
  return out;
}

}  // namespace distlab
