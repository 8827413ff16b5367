#include "distlab/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "distlab/rng.hpp"
#include "json.hpp"

namespace distlab {

Norm Norm::euclidean(int dim) {
  if (dim != 2 && dim != 3) throw InputError("norm: dim must be 2 or 3");
  Norm n;
  n.kind_ = Kind::Euclidean;
  n.dim_ = dim;
  return n;
}

Norm Norm::lp(int dim, double p) {
  if (dim != 2 && dim != 3) throw InputError("norm: dim must be 2 or 3");
  if (!(p > 1.0) || !std::isfinite(p))
    throw InputError("norm: lp exponent must be finite and > 1");
  if (p < 2.0)
    std::fprintf(stderr,
                 "warning: lp norm with p=%g < 2 is outside the validated "
                 "range; proceeding\n",
                 p);
  Norm n;
  n.kind_ = Kind::Lp;
  n.dim_ = dim;
  n.p_ = p;
  return n;
}

Norm Norm::tabulated(std::vector<TableSample> samples) {
  if (samples.size() < 8)
    throw InputError("norm: tabulated norm needs at least 8 samples");
  for (const auto& s : samples) {
    if (!std::isfinite(s.theta) || !std::isfinite(s.value) || s.value <= 0)
      throw InputError("norm: tabulated sample with non-finite or non-positive value");
    if (s.grad.dim() != 2)
      throw InputError("norm: tabulated norms are 2D only");
  }
  std::sort(samples.begin(), samples.end(),
            [](const TableSample& a, const TableSample& b) { return a.theta < b.theta; });
  Norm n;
  n.kind_ = Kind::Tabulated;
  n.dim_ = 2;
  n.table_ = std::move(samples);
  return n;
}

Norm Norm::parse(const std::string& spec, int dim) {
  if (spec == "euclid") return euclidean(dim);
  if (spec.rfind("lp:", 0) == 0) {
    double p;
    try {
      p = std::stod(spec.substr(3));
    } catch (const std::exception&) {
      throw InputError("norm: cannot parse exponent in '" + spec + "'");
    }
    return lp(dim, p);
  }
  if (spec.rfind("table:", 0) == 0) {
    Norm n = load_table(spec.substr(6));
    if (n.dim_ != dim)
      throw InputError("norm: table dimension does not match scene dimension");
    return n;
  }
  throw InputError("norm: unknown spec '" + spec + "' (expected euclid, lp:<p>, table:<path>)");
}

Norm Norm::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("norm: cannot open table file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("norm: table parse error in " + path + ": " + e.what());
  }
  if (!j.is_object() || j.value("dim", 0) != 2)
    throw InputError("norm: table file must be an object with dim=2 (3D tables are not supported)");
  std::vector<TableSample> samples;
  for (const auto& s : j.at("samples")) {
    TableSample t;
    t.theta = s.at("theta").get<double>();
    t.value = s.at("value").get<double>();
    auto g = s.at("grad");
    t.grad = Vec(g.at(0).get<double>(), g.at(1).get<double>());
    samples.push_back(t);
  }
  return tabulated(std::move(samples));
}

Norm Norm::tabulate_from(const Norm& src, int count) {
  if (src.dim() != 2) throw InputError("norm: tabulate_from is 2D only");
  std::vector<TableSample> samples;
  samples.reserve(count);
  for (int k = 0; k < count; ++k) {
    double th = 2.0 * M_PI * k / count;
    Vec u(std::cos(th), std::sin(th));
    samples.push_back({th, src.eval(u), src.gradient(u)});
  }
  return tabulated(std::move(samples));
}

std::string Norm::spec_string() const {
  switch (kind_) {
    case Kind::Euclidean:
      return "euclid";
    case Kind::Lp: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "lp:%.17g", p_);
      return buf;
    }
    case Kind::Tabulated:
      return "table";
  }
  return "euclid";
}

double Norm::eval(const Vec& v) const {
  switch (kind_) {
    case Kind::Euclidean:
      return v.norm2();
    case Kind::Lp: {
      // scale by the largest component to avoid overflow/underflow of pow
      double m = 0;
      for (int i = 0; i < dim_; ++i) m = std::max(m, std::fabs(v[i]));
      if (m < 1e-300) return 0.0;
      double s = 0;
      for (int i = 0; i < dim_; ++i) {
        double a = std::fabs(v[i]);
        if (a < 1e-300) continue;
        s += std::pow(a / m, p_);
      }
      return m * std::pow(s, 1.0 / p_);
    }
    case Kind::Tabulated: {
      double r = v.norm2();
      if (r < 1e-300) return 0.0;
      double th = std::atan2(v[1], v[0]);
      if (th < 0) th += 2.0 * M_PI;  // table spans [0, 2pi)
      // find bracketing samples on the circle (table sorted by theta)
      const auto& T = table_;
      size_t n = T.size();
      auto it = std::lower_bound(
          T.begin(), T.end(), th,
          [](const TableSample& s, double t) { return s.theta < t; });
      size_t hi = static_cast<size_t>(it - T.begin()) % n;
      size_t lo = (hi + n - 1) % n;
      double t0 = T[lo].theta, t1 = T[hi].theta;
      double span = t1 - t0, off = th - t0;
      if (span <= 0) span += 2.0 * M_PI;
      if (off < 0) off += 2.0 * M_PI;
      double w = span > 0 ? off / span : 0.0;
      double val = (1.0 - w) * T[lo].value + w * T[hi].value;
      return r * val;
    }
  }
  return 0.0;
}

Vec Norm::gradient(const Vec& v) const {
  double n = eval(v);
  if (n <= 0) throw DomainError("norm gradient undefined at the origin");
  switch (kind_) {
    case Kind::Euclidean:
      return v * (1.0 / n);
    case Kind::Lp: {
      // d/dv_i ||v||_p = sign(v_i) (|v_i| / ||v||_p)^(p-1); explicitly
      // 0-homogeneous, so evaluate on v/||v||_p
      Vec g = Vec::zero(dim_);
      for (int i = 0; i < dim_; ++i) {
        double a = std::fabs(v[i]);
        if (a < 1e-300) continue;
        double t = std::pow(a / n, p_ - 1.0);
        g[i] = v[i] < 0 ? -t : t;
      }
      return g;
    }
    case Kind::Tabulated: {
      double th = std::atan2(v[1], v[0]);
      if (th < 0) th += 2.0 * M_PI;  // table spans [0, 2pi)
      const auto& T = table_;
      size_t nn = T.size();
      auto it = std::lower_bound(
          T.begin(), T.end(), th,
          [](const TableSample& s, double t) { return s.theta < t; });
      size_t hi = static_cast<size_t>(it - T.begin()) % nn;
      size_t lo = (hi + nn - 1) % nn;
      double t0 = T[lo].theta, t1 = T[hi].theta;
      double span = t1 - t0, off = th - t0;
      if (span <= 0) span += 2.0 * M_PI;
      if (off < 0) off += 2.0 * M_PI;
      double w = span > 0 ? off / span : 0.0;
      return T[lo].grad * (1.0 - w) + T[hi].grad * w;
    }
  }
  return Vec::zero(dim_);
}

std::vector<Vec> sample_unit_sphere(const Norm& norm, int count, uint64_t seed) {
  if (count < 1) throw InputError("sample_unit_sphere: count must be >= 1");
  std::vector<Vec> out;
  out.reserve(count);
  Rng rng(derive_seed(seed, 0xd1A));
  if (norm.dim() == 2) {
    // equiangular fan with seeded phase: pairwise angular gaps are exactly
    // 2*pi/count
    double phase = rng.uniform(0.0, 2.0 * M_PI / count);
    for (int k = 0; k < count; ++k) {
      double th = phase + 2.0 * M_PI * k / count;
      out.emplace_back(std::cos(th), std::sin(th));
    }
  } else {
    // Fibonacci sphere rotated by a seeded rotation about a random axis
    double ga = M_PI * (3.0 - std::sqrt(5.0));
    // seeded rotation: compose two rotations about z and x
    double a = rng.uniform(0.0, 2.0 * M_PI), b = rng.uniform(0.0, 2.0 * M_PI);
    double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    for (int k = 0; k < count; ++k) {
      double zc = count == 1 ? 0.0 : 1.0 - 2.0 * (k + 0.5) / count;
      double rc = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      double th = ga * k;
      double x = rc * std::cos(th), y = rc * std::sin(th), z = zc;
      // Rz(a)
      double x1 = ca * x - sa * y, y1 = sa * x + ca * y, z1 = z;
      // Rx(b)
      double x2 = x1, y2 = cb * y1 - sb * z1, z2 = sb * y1 + cb * z1;
      out.emplace_back(x2, y2, z2);
    }
  }
  if (norm.kind() != Norm::Kind::Euclidean) {
    for (auto& u : out) {
      double n = norm.eval(u);
      u = u * (1.0 / n);
    }
  }
  return out;
}

}  // namespace distlab
