#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distlab/geometry.hpp"
#include "distlab/scene.hpp"

namespace distlab {

// Uniform grid: vertex (i,j[,k]) sits at origin + h*(i,j[,k]).
// Linear index is C-order with the last axis fastest.
struct GridSpec {
  Vec origin;
  double h = 0;
  std::array<int, 3> dims = {0, 0, 1};  // dims[2] == 1 in 2D
  int dim = 2;

  static GridSpec from_box(const Box& box, double spacing);

  size_t vertex_count() const {
    return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
  }
  size_t index(int i, int j, int k = 0) const {
    return (static_cast<size_t>(i) * dims[1] + j) * dims[2] + k;
  }
  std::array<int, 3> coords(size_t idx) const {
    int k = static_cast<int>(idx % dims[2]);
    idx /= dims[2];
    int j = static_cast<int>(idx % dims[1]);
    int i = static_cast<int>(idx / dims[1]);
    return {i, j, k};
  }
  Vec vertex(int i, int j, int k = 0) const {
    Vec v = origin;
    v[0] += h * i;
    v[1] += h * j;
    if (dim == 3) v[2] += h * k;
    return v;
  }
  Box box() const {
    Vec hi = origin;
    hi[0] += h * (dims[0] - 1);
    hi[1] += h * (dims[1] - 1);
    if (dim == 3) hi[2] += h * (dims[2] - 1);
    return {origin, hi};
  }
  void validate(size_t mem_cap_bytes) const;
};

struct FieldGradient {
  Vec g;
  bool nonsmooth = false;  // one-sided quotients disagree beyond the threshold
};

// Sampled distance field with multilinear interpolation.
class DistanceField {
 public:
  DistanceField(GridSpec grid, std::vector<double> values, Norm norm,
                nlohmann::json scene_json, uint64_t scene_hash);

  const GridSpec& grid() const { return grid_; }
  const Norm& norm() const { return norm_; }
  const std::vector<double>& values() const { return values_; }
  double value(size_t idx) const { return values_[idx]; }
  double value(int i, int j, int k = 0) const { return values_[grid_.index(i, j, k)]; }
  double min_value() const { return vmin_; }
  double max_value() const { return vmax_; }
  const nlohmann::json& scene_json() const { return scene_json_; }
  uint64_t scene_hash() const { return scene_hash_; }

  bool contains(const Vec& x, double margin = 0) const;
  // multilinear interpolation; throws DomainError outside the grid
  double interpolate(const Vec& x) const;
  // central differences with step h; x must be >= 2h from the grid boundary
  FieldGradient gradient(const Vec& x, double nonsmooth_threshold = 0.2) const;

  // max over grid-neighbor pairs of |f_i - f_j| - ||x_i - x_j|| (positive
  // values violate the discrete 1-Lipschitz invariant)
  double lipschitz_excess() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
  Norm norm_;
  nlohmann::json scene_json_;
  uint64_t scene_hash_;
  double vmin_, vmax_;
};

// Evaluate d_F at every vertex (parallel over chunks, write-once, so the
// result is independent of the thread count). Enforces the memory cap from
// DISTLAB_MEM_CAP_MB (default 512 MB) unless mem_cap_bytes overrides it.
DistanceField sample_field(const ClosedSet& F, const Norm& norm,
                           const GridSpec& grid, int threads = 1,
                           size_t mem_cap_bytes = 0);

size_t default_mem_cap_bytes();

// Binary dump: 8-byte little-endian doubles in linear-index order, plus a JSON
// sidecar with origin/h/dims/norm/scene (scene embedded so downstream commands
// can re-run witness queries).
void dump_field(const DistanceField& f, const std::string& bin_path,
                const std::string& sidecar_path);
DistanceField load_field(const std::string& sidecar_path);
void export_csv(const DistanceField& f, const std::string& path);

}  // namespace distlab
