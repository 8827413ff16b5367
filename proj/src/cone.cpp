#include "distlab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "distlab/errors.hpp"
#include "distlab/parallel.hpp"
#include "distlab/rng.hpp"

namespace distlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_alpha(double alpha) {
  if (!(alpha >= 0) || !std::isfinite(alpha))
    throw InputError("cone: alpha must be finite and non-negative");
}

double wrap_angle(double t) {
  t = std::fmod(std::abs(t), 2 * kPi);
  return std::min(t, 2 * kPi - t);
}

}  // namespace

double cone_auto_alpha() { return std::sqrt(2 * kPi * kPi - 1); }

double cone_norm(const ConePoint& p, double alpha) {
  check_alpha(alpha);
  return std::sqrt(p.r * p.r * (1 + alpha * alpha) + p.s * p.s);
}

double cone_intrinsic_distance(const ConePoint& a, const ConePoint& b,
                               double alpha) {
  check_alpha(alpha);
  if (a.r < 0 || b.r < 0) throw InputError("cone: radii must be non-negative");
  double root = std::sqrt(1 + alpha * alpha);
  double k = 1 / root;
  double la = a.r * root, lb = b.r * root;  // slant lengths
  double phi = k * wrap_angle(b.theta - a.theta);
  double dc2;
  if (phi <= kPi) {
    dc2 = la * la + lb * lb - 2 * la * lb * std::cos(phi);
  } else {
    // unrolled angle beyond pi: the geodesic passes through the apex
    // (unreachable for k <= 1, kept for completeness)
    dc2 = (la + lb) * (la + lb);
  }
  double ds = b.s - a.s;
  return std::sqrt(dc2 + ds * ds);
}

double cone_path_length(const ConePoint& a, const ConePoint& b, double alpha) {
  check_alpha(alpha);
  if (std::abs(a.r - b.r) > 1e-12 * std::max(1.0, std::abs(a.r)))
    throw InputError("cone: corridor path needs equal radii");
  double dtheta = b.theta - a.theta;  // raw, so the corridor may wind around
  double ds = b.s - a.s;
  return std::sqrt(a.r * a.r * dtheta * dtheta + ds * ds);
}

AngleResult cone_angle(const ConePoint& a, const ConePoint& b, double alpha) {
  double na = cone_norm(a, alpha), nb = cone_norm(b, alpha);
  if (na <= 0 || nb <= 0)
    throw InputError("cone: angle needs points away from the apex");
  double d = cone_intrinsic_distance(a, b, alpha);
  double arg = (na * na + nb * nb - d * d) / (2 * na * nb);
  if (std::abs(arg) > 1 + 1e-9)
    throw DomainError("cone: law-of-cosines argument out of range");
  AngleResult res;
  res.cosine = std::clamp(arg, -1.0, 1.0);
  res.angle = std::acos(res.cosine);
  return res;
}

DistanceBounds cone_distance_bounds(const ConePoint& a, const ConePoint& b,
                                    double alpha) {
  check_alpha(alpha);
  if (alpha < cone_auto_alpha() - 1e-12)
    throw InputError("cone: bounds need alpha >= the threshold steepness");
  if (a.s * b.s < 0)
    throw InputError("cone: bounds need s coordinates of equal sign");
  double d = cone_intrinsic_distance(a, b, alpha);
  double len = cone_path_length(a, b, alpha);  // also enforces equal radii
  DistanceBounds res;
  res.dist2 = d * d;
  res.len2 = len * len;
  res.mid2 = 4 * kPi * kPi * a.r * a.r + a.s * a.s + b.s * b.s;
  double na = cone_norm(a, alpha), nb = cone_norm(b, alpha);
  res.norms2 = na * na + nb * nb;
  auto leq = [](double lhs, double rhs) {
    return lhs <= rhs + 1e-9 * (1 + std::abs(rhs));
  };
  res.ok = leq(res.dist2, res.len2) && leq(res.len2, res.mid2) &&
           leq(res.mid2, res.norms2);
  return res;
}

namespace {

// (theta1, phi1, theta2, phi2, theta3, phi3) -> unit triple; phi tilts into
// the line factor: r = cos(phi)/sqrt(1+alpha^2), s = sin(phi)
std::array<ConePoint, 3> triple_from(const std::array<double, 6>& c,
                                     double alpha) {
  double root = std::sqrt(1 + alpha * alpha);
  std::array<ConePoint, 3> pts;
  for (int i = 0; i < 3; ++i) {
    double phi = c[2 * i + 1];
    pts[i].theta = c[2 * i];
    pts[i].r = std::cos(phi) / root;
    pts[i].s = std::sin(phi);
  }
  return pts;
}

double min_pairwise_angle(const std::array<ConePoint, 3>& pts, double alpha) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      if (cone_norm(pts[i], alpha) <= 1e-12 || cone_norm(pts[j], alpha) <= 1e-12)
        return 0;  // a direction collapsed onto the apex ray
      best = std::min(best, cone_angle(pts[i], pts[j], alpha).angle);
    }
  return best;
}

}  // namespace

ObtuseTriple obtuse_triple_search(double alpha, int samples, uint64_t seed,
                                  int threads) {
  check_alpha(alpha);
  if (samples < 1) throw InputError("cone: samples must be >= 1");
  std::vector<double> score(samples);
  std::vector<std::array<double, 6>> coords(samples);
  parallel_for(static_cast<size_t>(samples), threads, [&](size_t i) {
    Rng rng(derive_seed(seed, 3000 + static_cast<uint64_t>(i)));
    std::array<double, 6> c;
    for (int k = 0; k < 3; ++k) {
      c[2 * k] = rng.uniform(0, 2 * kPi);
      c[2 * k + 1] = rng.uniform(-kPi / 2, kPi / 2);
    }
    coords[i] = c;
    score[i] = min_pairwise_angle(triple_from(c, alpha), alpha);
  });
  size_t arg = 0;
  for (size_t i = 1; i < score.size(); ++i)
    if (score[i] > score[arg]) arg = i;  // ties keep the smallest index

  std::array<double, 6> c = coords[arg];
  double best = score[arg];
  double step = 0.3;
  for (int round = 0; round < 20; ++round) {
    for (int k = 0; k < 6; ++k) {
      for (double sgn : {1.0, -1.0}) {
        std::array<double, 6> t = c;
        t[k] += sgn * step;
        if (k % 2 == 1) t[k] = std::clamp(t[k], -kPi / 2, kPi / 2);
        double v = min_pairwise_angle(triple_from(t, alpha), alpha);
        if (v > best) {
          best = v;
          c = t;
        }
      }
    }
    step *= 0.8;
  }

  ObtuseTriple res;
  res.points = triple_from(c, alpha);
  res.max_min_angle = best;
  res.found = best > kPi / 2 + 1e-6;
  return res;
}

}  // namespace distlab
