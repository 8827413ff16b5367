#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "distlab/errors.hpp"

namespace distlab {

// Small fixed-capacity vector for ambient dimension 2 or 3.
class Vec {
 public:
  Vec() = default;
  Vec(double x, double y) : c_{x, y, 0.0}, dim_(2) {}
  Vec(double x, double y, double z) : c_{x, y, z}, dim_(3) {}

  static Vec zero(int dim) { return dim == 2 ? Vec(0, 0) : Vec(0, 0, 0); }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }
  double x() const { return c_[0]; }
  double y() const { return c_[1]; }
  double z() const { return c_[2]; }

  Vec operator+(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] += o.c_[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] -= o.c_[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] *= s;
    return r;
  }
  Vec operator-() const { return *this * -1.0; }
  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }

  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  // Euclidean length; ambient Hilbert structure, independent of the active norm
  double norm2() const { return std::sqrt(dot(*this)); }
  Vec normalized2() const {
    double n = norm2();
    return n > 0 ? *this * (1.0 / n) : *this;
  }

 private:
  std::array<double, 3> c_{0, 0, 0};
  int dim_ = 2;
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

struct Box {
  Vec lo, hi;
  int dim() const { return lo.dim(); }
  bool contains(const Vec& p) const {
    for (int i = 0; i < p.dim(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
};

// Minkowski norm: Euclidean, l^p, or tabulated from unit-sphere samples.
// Tabulated norms interpolate value and gradient linearly between samples;
// their accuracy is whatever the table provides and is reported, not enforced.
class Norm {
 public:
  enum class Kind { Euclidean, Lp, Tabulated };

  struct TableSample {
    double theta;  // Euclidean angle of the sample direction (2D tables)
    double value;  // norm of the Euclidean-unit vector at that angle
    Vec grad;      // gradient of the norm at that direction
  };

  static Norm euclidean(int dim);
  static Norm lp(int dim, double p);
  static Norm tabulated(std::vector<TableSample> samples);
  // spec strings: "euclid", "lp:<p>", "table:<path>"
  static Norm parse(const std::string& spec, int dim);
  static Norm load_table(const std::string& path);
  // build a table by sampling another norm (test/tooling helper)
  static Norm tabulate_from(const Norm& src, int count);

  double eval(const Vec& v) const;
  double operator()(const Vec& v) const { return eval(v); }
  // gradient of v -> eval(v) at v != 0; 0-homogeneous, Euler identity
  // grad(v).dot(v) == eval(v) holds for the closed forms
  Vec gradient(const Vec& v) const;

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double p() const { return p_; }
  std::string spec_string() const;

 private:
  Kind kind_ = Kind::Euclidean;
  int dim_ = 2;
  double p_ = 2.0;
  std::vector<TableSample> table_;  // sorted by theta, 2D only
};

// `count` directions of norm 1, deterministic for a fixed seed. Euclidean 2D:
// equiangular fan with a seeded phase; Euclidean 3D: Fibonacci sphere under a
// seeded rotation; other norms: Euclidean samples rescaled to norm 1.
std::vector<Vec> sample_unit_sphere(const Norm& norm, int count, uint64_t seed);

}  // namespace distlab
