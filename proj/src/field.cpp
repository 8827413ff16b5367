#include "distlab/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>

#include "distlab/errors.hpp"
#include "distlab/json_out.hpp"
#include "distlab/parallel.hpp"

namespace distlab {

GridSpec GridSpec::from_box(const Box& box, double spacing) {
  if (!(spacing > 0) || !std::isfinite(spacing))
    throw InputError("grid: spacing must be positive and finite");
  GridSpec g;
  g.dim = box.dim();
  g.origin = box.lo;
  g.h = spacing;
  for (int a = 0; a < g.dim; ++a) {
    double extent = box.hi[a] - box.lo[a];
    if (!(extent > 0)) throw InputError("grid: box has empty extent");
    // count vertices so the last one lands within half a cell of box.hi
    g.dims[a] = static_cast<int>(std::floor(extent / spacing + 0.5)) + 1;
    if (g.dims[a] < 2) throw InputError("grid: fewer than 2 vertices along an axis");
  }
  if (g.dim == 2) g.dims[2] = 1;
  return g;
}

void GridSpec::validate(size_t mem_cap_bytes) const {
  if (dim != 2 && dim != 3) throw InputError("grid: dim must be 2 or 3");
  if (!(h > 0) || !std::isfinite(h)) throw InputError("grid: spacing must be positive");
  for (int a = 0; a < dim; ++a)
    if (dims[a] < 2) throw InputError("grid: fewer than 2 vertices along an axis");
  if (dim == 2 && dims[2] != 1) throw InputError("grid: 2D grid must have dims[2] == 1");
  size_t n = vertex_count();
  if (mem_cap_bytes > 0 && n > mem_cap_bytes / sizeof(double))
    throw ResourceError("grid: " + std::to_string(n) +
                        " vertices exceed the memory cap (set DISTLAB_MEM_CAP_MB to raise it)");
}

size_t default_mem_cap_bytes() {
  const char* env = std::getenv("DISTLAB_MEM_CAP_MB");
  size_t mb = 512;
  if (env && *env) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) mb = static_cast<size_t>(v);
  }
  return mb * 1024 * 1024;
}

DistanceField::DistanceField(GridSpec grid, std::vector<double> values, Norm norm,
                             nlohmann::json scene_json, uint64_t scene_hash)
    : grid_(grid),
      values_(std::move(values)),
      norm_(std::move(norm)),
      scene_json_(std::move(scene_json)),
      scene_hash_(scene_hash) {
  if (values_.size() != grid_.vertex_count())
    throw InputError("field: value count does not match the grid");
  vmin_ = std::numeric_limits<double>::infinity();
  vmax_ = -vmin_;
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("field: non-finite sample");
    vmin_ = std::min(vmin_, v);
    vmax_ = std::max(vmax_, v);
  }
}

bool DistanceField::contains(const Vec& x, double margin) const {
  Box b = grid_.box();
  for (int a = 0; a < grid_.dim; ++a)
    if (x[a] < b.lo[a] + margin || x[a] > b.hi[a] - margin) return false;
  return true;
}

namespace {

struct CellPos {
  int i[3] = {0, 0, 0};
  double t[3] = {0, 0, 0};
};

CellPos locate(const GridSpec& g, const Vec& x) {
  CellPos c;
  for (int a = 0; a < g.dim; ++a) {
    double u = (x[a] - g.origin[a]) / g.h;
    double lo = -1e-9, hi = g.dims[a] - 1 + 1e-9;
    if (u < lo || u > hi) throw DomainError("field: point outside the sampled grid");
    u = std::clamp(u, 0.0, static_cast<double>(g.dims[a] - 1));
    int i = std::min(static_cast<int>(u), g.dims[a] - 2);
    c.i[a] = i;
    c.t[a] = u - i;
  }
  return c;
}

}  // namespace

double DistanceField::interpolate(const Vec& x) const {
  CellPos c = locate(grid_, x);
  if (grid_.dim == 2) {
    double f00 = value(c.i[0], c.i[1]);
    double f10 = value(c.i[0] + 1, c.i[1]);
    double f01 = value(c.i[0], c.i[1] + 1);
    double f11 = value(c.i[0] + 1, c.i[1] + 1);
    double a = f00 + (f10 - f00) * c.t[0];
    double b = f01 + (f11 - f01) * c.t[0];
    return a + (b - a) * c.t[1];
  }
  double acc = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        double w = (di ? c.t[0] : 1 - c.t[0]) * (dj ? c.t[1] : 1 - c.t[1]) *
                   (dk ? c.t[2] : 1 - c.t[2]);
        acc += w * value(c.i[0] + di, c.i[1] + dj, c.i[2] + dk);
      }
  return acc;
}

FieldGradient DistanceField::gradient(const Vec& x, double nonsmooth_threshold) const {
  double h = grid_.h;
  if (!contains(x, 2 * h - 1e-12))
    throw DomainError("field: gradient needs 2h clearance from the grid boundary");
  FieldGradient out;
  out.g = Vec::zero(grid_.dim);
  double f0 = interpolate(x);
  for (int a = 0; a < grid_.dim; ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    double fp = interpolate(xp), fm = interpolate(xm);
    double fwd = (fp - f0) / h, bwd = (f0 - fm) / h;
    out.g[a] = (fp - fm) / (2 * h);
    if (std::abs(fwd - bwd) > nonsmooth_threshold) out.nonsmooth = true;
  }
  return out;
}

double DistanceField::lipschitz_excess() const {
  double worst = -std::numeric_limits<double>::infinity();
  const auto& d = grid_.dims;
  for (int i = 0; i < d[0]; ++i)
    for (int j = 0; j < d[1]; ++j)
      for (int k = 0; k < d[2]; ++k) {
        double f = value(i, j, k);
        if (i + 1 < d[0]) worst = std::max(worst, std::abs(value(i + 1, j, k) - f) - grid_.h);
        if (j + 1 < d[1]) worst = std::max(worst, std::abs(value(i, j + 1, k) - f) - grid_.h);
        if (k + 1 < d[2]) worst = std::max(worst, std::abs(value(i, j, k + 1) - f) - grid_.h);
      }
  return worst;
}

DistanceField sample_field(const ClosedSet& F, const Norm& norm, const GridSpec& grid,
                           int threads, size_t mem_cap_bytes) {
  if (norm.dim() != grid.dim || F.dim() != grid.dim)
    throw InputError("field: scene, norm and grid dimensions must agree");
  if (mem_cap_bytes == 0) mem_cap_bytes = default_mem_cap_bytes();
  grid.validate(mem_cap_bytes);
  std::vector<double> values(grid.vertex_count());
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  parallel_for(values.size(), threads, [&](size_t idx) {
    if (failed.load(std::memory_order_relaxed)) return;
    auto c = grid.coords(idx);
    try {
      values[idx] = scene_distance(F, grid.vertex(c[0], c[1], c[2]), norm);
    } catch (...) {
      bool expected = false;
      if (failed.compare_exchange_strong(expected, true)) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);
  return DistanceField(grid, std::move(values), norm, F.to_json(), F.hash());
}

void dump_field(const DistanceField& f, const std::string& bin_path,
                const std::string& sidecar_path) {
  {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw InputError("field: cannot open " + bin_path + " for writing");
    for (double v : f.values()) {
      uint64_t bits;
      std::memcpy(&bits, &v, 8);
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
    if (!out) throw InputError("field: write failed for " + bin_path);
  }
  const GridSpec& g = f.grid();
  JsonWriter w;
  w.begin_object();
  w.key("dim");
  w.value_int(g.dim);
  w.key("origin");
  w.begin_array();
  for (int a = 0; a < g.dim; ++a) w.value_double(g.origin[a]);
  w.end_array();
  w.key("h");
  w.value_double(g.h);
  w.key("dims");
  w.begin_array();
  for (int a = 0; a < g.dim; ++a) w.value_int(g.dims[a]);
  w.end_array();
  w.key("norm");
  w.value_string(f.norm().spec_string());
  w.key("scene_hash");
  w.value_uint(f.scene_hash());
  w.key("scene");
  w.value_raw(f.scene_json().dump());
  w.end_object();
  std::ofstream side(sidecar_path);
  if (!side) throw InputError("field: cannot open " + sidecar_path + " for writing");
  side << w.str() << "\n";
  if (!side) throw InputError("field: write failed for " + sidecar_path);
}

DistanceField load_field(const std::string& sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw InputError("field: cannot open " + sidecar_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("field: " + sidecar_path + ": " + e.what());
  }
  try {
    GridSpec g;
    g.dim = j.at("dim").get<int>();
    if (g.dim != 2 && g.dim != 3) throw InputError("field: dim must be 2 or 3");
    auto o = j.at("origin");
    g.origin = Vec::zero(g.dim);
    for (int a = 0; a < g.dim; ++a) g.origin[a] = o.at(a).get<double>();
    g.h = j.at("h").get<double>();
    auto d = j.at("dims");
    for (int a = 0; a < g.dim; ++a) g.dims[a] = d.at(a).get<int>();
    if (g.dim == 2) g.dims[2] = 1;
    g.validate(0);
    Norm norm = Norm::parse(j.at("norm").get<std::string>(), g.dim);
    ClosedSet scene = ClosedSet::from_json(j.at("scene"));
    uint64_t hash = j.at("scene_hash").get<uint64_t>();
    if (hash != scene.hash()) throw InputError("field: scene_hash does not match the embedded scene");

    std::string bin_path = sidecar_path;
    auto pos = bin_path.rfind(".json");
    if (pos == bin_path.size() - 5) bin_path.resize(pos);
    bin_path += ".bin";
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw InputError("field: cannot open " + bin_path);
    size_t n = g.vertex_count();
    std::vector<double> values(n);
    std::vector<unsigned char> raw(n * 8);
    bin.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(bin.gcount()) != raw.size())
      throw InputError("field: " + bin_path + " is shorter than the grid requires");
    for (size_t i = 0; i < n; ++i) {
      uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(raw[i * 8 + b]) << (8 * b);
      std::memcpy(&values[i], &bits, 8);
    }
    return DistanceField(g, std::move(values), std::move(norm), scene.to_json(), hash);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("field: " + sidecar_path + ": " + e.what());
  }
}

void export_csv(const DistanceField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("field: cannot open " + path + " for writing");
  const GridSpec& g = f.grid();
  out << (g.dim == 2 ? "x,y,d\n" : "x,y,z,d\n");
  char buf[128];
  for (size_t idx = 0; idx < f.values().size(); ++idx) {
    auto c = g.coords(idx);
    Vec v = g.vertex(c[0], c[1], c[2]);
    if (g.dim == 2)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", v[0], v[1], f.value(idx));
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", v[0], v[1], v[2], f.value(idx));
    out << buf;
  }
  if (!out) throw InputError("field: write failed for " + path);
}

}  // namespace distlab
