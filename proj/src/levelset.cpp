#include "distlab/levelset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <unordered_map>

#include "distlab/errors.hpp"
#include "distlab/json_out.hpp"
#include "distlab/parallel.hpp"
#include "distlab/rng.hpp"
#include "distlab/scene.hpp"

namespace distlab {

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Offsets r until no grid value collides with it (vertex exactly on the level
// would break the straddle invariant of edge interpolation).
double snap_level(const DistanceField& f, double r) {
  double range = f.max_value() - f.min_value();
  for (int tries = 0; tries < 5; ++tries) {
    bool collision = false;
    for (double v : f.values()) {
      if (std::abs(v - r) <= 1e-12) {
        collision = true;
        break;
      }
    }
    if (!collision) return r;
    r += 1e-10 * range;
  }
  throw DomainError("level-set extraction: could not snap r away from grid values");
}

// Global edge ids: edge along `axis` starting at vertex (i,j,k).
uint64_t edge_id(const GridSpec& g, int i, int j, int k, int axis) {
  return static_cast<uint64_t>(g.index(i, j, k)) * 3 + axis;
}

struct VertexBank {
  const DistanceField& f;
  double rs;
  std::unordered_map<uint64_t, int> by_edge;
  std::vector<Vec>& out;

  int on_edge(int i, int j, int k, int axis) {
    uint64_t id = edge_id(f.grid(), i, j, k, axis);
    auto it = by_edge.find(id);
    if (it != by_edge.end()) return it->second;
    int di = axis == 0 ? 1 : 0, dj = axis == 1 ? 1 : 0, dk = axis == 2 ? 1 : 0;
    double fa = f.value(i, j, k);
    double fb = f.value(i + di, j + dj, k + dk);
    double t = (rs - fa) / (fb - fa);
    Vec p = f.grid().vertex(i, j, k);
    p[axis] += f.grid().h * t;
    int idx = static_cast<int>(out.size());
    out.push_back(p);
    by_edge.emplace(id, idx);
    return idx;
  }
};

// Per-case edge pairs for marching squares; corner bit b set iff value < r at
// corner b of (c0,c1,c2,c3) = (i,j),(i+1,j),(i+1,j+1),(i,j+1); edges 0..3 =
// bottom,right,top,left. Cases 5 and 10 are resolved by the cell center value.
void march_square_cells(VertexBank& bank, const DistanceField& f, double rs,
                        std::vector<std::array<int, 2>>& edges) {
  const GridSpec& g = f.grid();
  auto emit = [&](int i, int j, int ea, int eb) {
    auto on = [&](int e) {
      switch (e) {
        case 0: return bank.on_edge(i, j, 0, 0);
        case 1: return bank.on_edge(i + 1, j, 0, 1);
        case 2: return bank.on_edge(i, j + 1, 0, 0);
        default: return bank.on_edge(i, j, 0, 1);
      }
    };
    edges.push_back({on(ea), on(eb)});
  };
  for (int i = 0; i + 1 < g.dims[0]; ++i) {
    for (int j = 0; j + 1 < g.dims[1]; ++j) {
      double f00 = f.value(i, j), f10 = f.value(i + 1, j);
      double f11 = f.value(i + 1, j + 1), f01 = f.value(i, j + 1);
      int c = (f00 < rs ? 1 : 0) | (f10 < rs ? 2 : 0) | (f11 < rs ? 4 : 0) |
              (f01 < rs ? 8 : 0);
      switch (c) {
        case 0:
        case 15:
          break;
        case 1: emit(i, j, 3, 0); break;
        case 2: emit(i, j, 0, 1); break;
        case 3: emit(i, j, 3, 1); break;
        case 4: emit(i, j, 1, 2); break;
        case 5:
          if ((f00 + f10 + f11 + f01) / 4 < rs) {
            emit(i, j, 3, 2);
            emit(i, j, 0, 1);
          } else {
            emit(i, j, 3, 0);
            emit(i, j, 1, 2);
          }
          break;
        case 6: emit(i, j, 0, 2); break;
        case 7: emit(i, j, 3, 2); break;
        case 8: emit(i, j, 2, 3); break;
        case 9: emit(i, j, 0, 2); break;
        case 10:
          if ((f00 + f10 + f11 + f01) / 4 < rs) {
            emit(i, j, 0, 3);
            emit(i, j, 1, 2);
          } else {
            emit(i, j, 0, 1);
            emit(i, j, 2, 3);
          }
          break;
        case 11: emit(i, j, 1, 2); break;
        case 12: emit(i, j, 3, 1); break;
        case 13: emit(i, j, 0, 1); break;
        default: emit(i, j, 3, 0); break;  // 14
      }
    }
  }
}

// Where the sublevel region {d < rs} meets the domain boundary, the level
// curve is clipped open; closing it along the perimeter yields the boundary
// of the clipped region, so every component is again a closed cycle. Clip
// vertices are shared with the marching pass via the bank's edge cache.
void close_domain_boundary_2d(VertexBank& bank, const DistanceField& f,
                              double rs,
                              std::vector<std::array<int, 2>>& edges) {
  const GridSpec& g = f.grid();
  std::unordered_map<int, int> grid_vertex;
  auto gv = [&](int i, int j) {
    int idx = g.index(i, j, 0);
    auto it = grid_vertex.find(idx);
    if (it != grid_vertex.end()) return it->second;
    int id = static_cast<int>(bank.out.size());
    bank.out.push_back(g.vertex(i, j, 0));
    grid_vertex.emplace(idx, id);
    return id;
  };
  auto run = [&](int i, int j, int axis) {
    int ni = i + (axis == 0 ? 1 : 0), nj = j + (axis == 1 ? 1 : 0);
    bool au = f.value(i, j) < rs, av = f.value(ni, nj) < rs;
    if (au && av)
      edges.push_back({gv(i, j), gv(ni, nj)});
    else if (au)
      edges.push_back({gv(i, j), bank.on_edge(i, j, 0, axis)});
    else if (av)
      edges.push_back({bank.on_edge(i, j, 0, axis), gv(ni, nj)});
  };
  int nx = g.dims[0], ny = g.dims[1];
  for (int i = 0; i + 1 < nx; ++i) run(i, 0, 0);
  for (int j = 0; j + 1 < ny; ++j) run(nx - 1, j, 1);
  for (int i = 0; i + 1 < nx; ++i) run(i, ny - 1, 0);
  for (int j = 0; j + 1 < ny; ++j) run(0, j, 1);
}

// Marching cubes lookup tables (corner b set iff value < r; corners 0..7 =
// (i,j,k),(i+1,j,k),(i+1,j+1,k),(i,j+1,k) then the same square at k+1; edges
// 0..11 in the usual order: bottom ring, top ring, then verticals).
const int kEdgeCorner[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                {0, 4}, {1, 5}, {2, 6}, {3, 7}};

const int kTriTable[256][16] = {
    {-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 1, 9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 8, 3, 9, 8, 1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 10, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 3, 1, 2, 10, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {9, 2, 10, 0, 2, 9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, 8, 3, 2, 10, 8, 10, 9, 8, -1, -1, -1, -1, -1, -1, -1},
    {3, 11, 2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 11, 2, 8, 11, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 9, 0, 2, 3, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 11, 2, 1, 9, 11, 9, 8, 11, -1, -1, -1, -1, -1, -1, -1},
    {3, 10, 1, 11, 10, 3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 10, 1, 0, 8, 10, 8, 11, 10, -1, -1, -1, -1, -1, -1, -1},
    {3, 9, 0, 3, 11, 9, 11, 10, 9, -1, -1, -1, -1, -1, -1, -1},
    {9, 8, 10, 10, 8, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 7, 8, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 3, 0, 7, 3, 4, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 1, 9, 8, 4, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 1, 9, 4, 7, 1, 7, 3, 1, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 10, 8, 4, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {3, 4, 7, 3, 0, 4, 1, 2, 10, -1, -1, -1, -1, -1, -1, -1},
    {9, 2, 10, 9, 0, 2, 8, 4, 7, -1, -1, -1, -1, -1, -1, -1},
    {2, 10, 9, 2, 9, 7, 2, 7, 3, 7, 9, 4, -1, -1, -1, -1},
    {8, 4, 7, 3, 11, 2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {11, 4, 7, 11, 2, 4, 2, 0, 4, -1, -1, -1, -1, -1, -1, -1},
    {9, 0, 1, 8, 4, 7, 2, 3, 11, -1, -1, -1, -1, -1, -1, -1},
    {4, 7, 11, 9, 4, 11, 9, 11, 2, 9, 2, 1, -1, -1, -1, -1},
    {3, 10, 1, 3, 11, 10, 7, 8, 4, -1, -1, -1, -1, -1, -1, -1},
    {1, 11, 10, 1, 4, 11, 1, 0, 4, 7, 11, 4, -1, -1, -1, -1},
    {4, 7, 8, 9, 0, 11, 9, 11, 10, 11, 0, 3, -1, -1, -1, -1},
    {4, 7, 11, 4, 11, 9, 9, 11, 10, -1, -1, -1, -1, -1, -1, -1},
    {9, 5, 4, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {9, 5, 4, 0, 8, 3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 5, 4, 1, 5, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {8, 5, 4, 8, 3, 5, 3, 1, 5, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 10, 9, 5, 4, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {3, 0, 8, 1, 2, 10, 4, 9, 5, -1, -1, -1, -1, -1, -1, -1},
    {5, 2, 10, 5, 4, 2, 4, 0, 2, -1, -1, -1, -1, -1, -1, -1},
    {2, 10, 5, 3, 2, 5, 3, 5, 4, 3, 4, 8, -1, -1, -1, -1},
    {9, 5, 4, 2, 3, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 11, 2, 0, 8, 11, 4, 9, 5, -1, -1, -1, -1, -1, -1, -1},
    {0, 5, 4, 0, 1, 5, 2, 3, 11, -1, -1, -1, -1, -1, -1, -1},
    {2, 1, 5, 2, 5, 8, 2, 8, 11, 4, 8, 5, -1, -1, -1, -1},
    {10, 3, 11, 10, 1, 3, 9, 5, 4, -1, -1, -1, -1, -1, -1, -1},
    {4, 9, 5, 0, 8, 1, 8, 10, 1, 8, 11, 10, -1, -1, -1, -1},
    {5, 4, 0, 5, 0, 11, 5, 11, 10, 11, 0, 3, -1, -1, -1, -1},
    {5, 4, 8, 5, 8, 10, 10, 8, 11, -1, -1, -1, -1, -1, -1, -1},
    {9, 7, 8, 5, 7, 9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {9, 3, 0, 9, 5, 3, 5, 7, 3, -1, -1, -1, -1, -1, -1, -1},
    {0, 7, 8, 0, 1, 7, 1, 5, 7, -1, -1, -1, -1, -1, -1, -1},
    {1, 5, 3, 3, 5, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {9, 7, 8, 9, 5, 7, 10, 1, 2, -1, -1, -1, -1, -1, -1, -1},
    {10, 1, 2, 9, 5, 0, 5, 3, 0, 5, 7, 3, -1, -1, -1, -1},
    {8, 0, 2, 8, 2, 5, 8, 5, 7, 10, 5, 2, -1, -1, -1, -1},
    {2, 10, 5, 2, 5, 3, 3, 5, 7, -1, -1, -1, -1, -1, -1, -1},
    {7, 9, 5, 7, 8, 9, 3, 11, 2, -1, -1, -1, -1, -1, -1, -1},
    {9, 5, 7, 9, 7, 2, 9, 2, 0, 2, 7, 11, -1, -1, -1, -1},
    {2, 3, 11, 0, 1, 8, 1, 7, 8, 1, 5, 7, -1, -1, -1, -1},
    {11, 2, 1, 11, 1, 7, 7, 1, 5, -1, -1, -1, -1, -1, -1, -1},
    {9, 5, 8, 8, 5, 7, 10, 1, 3, 10, 3, 11, -1, -1, -1, -1},
    {5, 7, 0, 5, 0, 9, 7, 11, 0, 1, 0, 10, 11, 10, 0, -1},
    {11, 10, 0, 11, 0, 3, 10, 5, 0, 8, 0, 7, 5, 7, 0, -1},
    {11, 10, 5, 7, 11, 5, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {10, 6, 5, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 3, 5, 10, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {9, 0, 1, 5, 10, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 8, 3, 1, 9, 8, 5, 10, 6, -1, -1, -1, -1, -1, -1, -1},
    {1, 6, 5, 2, 6, 1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 6, 5, 1, 2, 6, 3, 0, 8, -1, -1, -1, -1, -1, -1, -1},
    {9, 6, 5, 9, 0, 6, 0, 2, 6, -1, -1, -1, -1, -1, -1, -1},
    {5, 9, 8, 5, 8, 2, 5, 2, 6, 3, 2, 8, -1, -1, -1, -1},
    {2, 3, 11, 10, 6, 5, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {11, 0, 8, 11, 2, 0, 10, 6, 5, -1, -1, -1, -1, -1, -1, -1},
    {0, 1, 9, 2, 3, 11, 5, 10, 6, -1, -1, -1, -1, -1, -1, -1},
    {5, 10, 6, 1, 9, 2, 9, 11, 2, 9, 8, 11, -1, -1, -1, -1},
    {6, 3, 11, 6, 5, 3, 5, 1, 3, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 11, 0, 11, 5, 0, 5, 1, 5, 11, 6, -1, -1, -1, -1},
    {3, 11, 6, 0, 3, 6, 0, 6, 5, 0, 5, 9, -1, -1, -1, -1},
    {6, 5, 9, 6, 9, 11, 11, 9, 8, -1, -1, -1, -1, -1, -1, -1},
    {5, 10, 6, 4, 7, 8, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 3, 0, 4, 7, 3, 6, 5, 10, -1, -1, -1, -1, -1, -1, -1},
    {1, 9, 0, 5, 10, 6, 8, 4, 7, -1, -1, -1, -1, -1, -1, -1},
    {10, 6, 5, 1, 9, 7, 1, 7, 3, 7, 9, 4, -1, -1, -1, -1},
    {6, 1, 2, 6, 5, 1, 4, 7, 8, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 5, 5, 2, 6, 3, 0, 4, 3, 4, 7, -1, -1, -1, -1},
    {8, 4, 7, 9, 0, 5, 0, 6, 5, 0, 2, 6, -1, -1, -1, -1},
    {7, 3, 9, 7, 9, 4, 3, 2, 9, 5, 9, 6, 2, 6, 9, -1},
    {3, 11, 2, 7, 8, 4, 10, 6, 5, -1, -1, -1, -1, -1, -1, -1},
    {5, 10, 6, 4, 7, 2, 4, 2, 0, 2, 7, 11, -1, -1, -1, -1},
    {0, 1, 9, 4, 7, 8, 2, 3, 11, 5, 10, 6, -1, -1, -1, -1},
    {9, 2, 1, 9, 11, 2, 9, 4, 11, 7, 11, 4, 5, 10, 6, -1},
    {8, 4, 7, 3, 11, 5, 3, 5, 1, 5, 11, 6, -1, -1, -1, -1},
    {5, 1, 11, 5, 11, 6, 1, 0, 11, 7, 11, 4, 0, 4, 11, -1},
    {0, 5, 9, 0, 6, 5, 0, 3, 6, 11, 6, 3, 8, 4, 7, -1},
    {6, 5, 9, 6, 9, 11, 4, 7, 9, 7, 11, 9, -1, -1, -1, -1},
    {10, 4, 9, 6, 4, 10, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 10, 6, 4, 9, 10, 0, 8, 3, -1, -1, -1, -1, -1, -1, -1},
    {10, 0, 1, 10, 6, 0, 6, 4, 0, -1, -1, -1, -1, -1, -1, -1},
    {8, 3, 1, 8, 1, 6, 8, 6, 4, 6, 1, 10, -1, -1, -1, -1},
    {1, 4, 9, 1, 2, 4, 2, 6, 4, -1, -1, -1, -1, -1, -1, -1},
    {3, 0, 8, 1, 2, 9, 2, 4, 9, 2, 6, 4, -1, -1, -1, -1},
    {0, 2, 4, 4, 2, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {8, 3, 2, 8, 2, 4, 4, 2, 6, -1, -1, -1, -1, -1, -1, -1},
    {10, 4, 9, 10, 6, 4, 11, 2, 3, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 2, 2, 8, 11, 4, 9, 10, 4, 10, 6, -1, -1, -1, -1},
    {3, 11, 2, 0, 1, 6, 0, 6, 4, 6, 1, 10, -1, -1, -1, -1},
    {6, 4, 1, 6, 1, 10, 4, 8, 1, 2, 1, 11, 8, 11, 1, -1},
    {9, 6, 4, 9, 3, 6, 9, 1, 3, 11, 6, 3, -1, -1, -1, -1},
    {8, 11, 1, 8, 1, 0, 11, 6, 1, 9, 1, 4, 6, 4, 1, -1},
    {3, 11, 6, 3, 6, 0, 0, 6, 4, -1, -1, -1, -1, -1, -1, -1},
    {6, 4, 8, 11, 6, 8, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {7, 10, 6, 7, 8, 10, 8, 9, 10, -1, -1, -1, -1, -1, -1, -1},
    {0, 7, 3, 0, 10, 7, 0, 9, 10, 6, 7, 10, -1, -1, -1, -1},
    {10, 6, 7, 1, 10, 7, 1, 7, 8, 1, 8, 0, -1, -1, -1, -1},
    {10, 6, 7, 10, 7, 1, 1, 7, 3, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 6, 1, 6, 8, 1, 8, 9, 8, 6, 7, -1, -1, -1, -1},
    {2, 6, 9, 2, 9, 1, 6, 7, 9, 0, 9, 3, 7, 3, 9, -1},
    {7, 8, 0, 7, 0, 6, 6, 0, 2, -1, -1, -1, -1, -1, -1, -1},
    {7, 3, 2, 6, 7, 2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, 3, 11, 10, 6, 8, 10, 8, 9, 8, 6, 7, -1, -1, -1, -1},
    {2, 0, 7, 2, 7, 11, 0, 9, 7, 6, 7, 10, 9, 10, 7, -1},
    {1, 8, 0, 1, 7, 8, 1, 10, 7, 6, 7, 10, 2, 3, 11, -1},
    {11, 2, 1, 11, 1, 7, 10, 6, 1, 6, 7, 1, -1, -1, -1, -1},
    {8, 9, 6, 8, 6, 7, 9, 1, 6, 11, 6, 3, 1, 3, 6, -1},
    {0, 9, 1, 11, 6, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {7, 8, 0, 7, 0, 6, 3, 11, 0, 11, 6, 0, -1, -1, -1, -1},
    {7, 11, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {7, 6, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {3, 0, 8, 11, 7, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 1, 9, 11, 7, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {8, 1, 9, 8, 3, 1, 11, 7, 6, -1, -1, -1, -1, -1, -1, -1},
    {10, 1, 2, 6, 11, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 10, 3, 0, 8, 6, 11, 7, -1, -1, -1, -1, -1, -1, -1},
    {2, 9, 0, 2, 10, 9, 6, 11, 7, -1, -1, -1, -1, -1, -1, -1},
    {6, 11, 7, 2, 10, 3, 10, 8, 3, 10, 9, 8, -1, -1, -1, -1},
    {7, 2, 3, 6, 2, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {7, 0, 8, 7, 6, 0, 6, 2, 0, -1, -1, -1, -1, -1, -1, -1},
    {2, 7, 6, 2, 3, 7, 0, 1, 9, -1, -1, -1, -1, -1, -1, -1},
    {1, 6, 2, 1, 8, 6, 1, 9, 8, 8, 7, 6, -1, -1, -1, -1},
    {10, 7, 6, 10, 1, 7, 1, 3, 7, -1, -1, -1, -1, -1, -1, -1},
    {10, 7, 6, 1, 7, 10, 1, 8, 7, 1, 0, 8, -1, -1, -1, -1},
    {0, 3, 7, 0, 7, 10, 0, 10, 9, 6, 10, 7, -1, -1, -1, -1},
    {7, 6, 10, 7, 10, 8, 8, 10, 9, -1, -1, -1, -1, -1, -1, -1},
    {6, 8, 4, 11, 8, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {3, 6, 11, 3, 0, 6, 0, 4, 6, -1, -1, -1, -1, -1, -1, -1},
    {8, 6, 11, 8, 4, 6, 9, 0, 1, -1, -1, -1, -1, -1, -1, -1},
    {9, 4, 6, 9, 6, 3, 9, 3, 1, 11, 3, 6, -1, -1, -1, -1},
    {6, 8, 4, 6, 11, 8, 2, 10, 1, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 10, 3, 0, 11, 0, 6, 11, 0, 4, 6, -1, -1, -1, -1},
    {4, 11, 8, 4, 6, 11, 0, 2, 9, 2, 10, 9, -1, -1, -1, -1},
    {10, 9, 3, 10, 3, 2, 9, 4, 3, 11, 3, 6, 4, 6, 3, -1},
    {8, 2, 3, 8, 4, 2, 4, 6, 2, -1, -1, -1, -1, -1, -1, -1},
    {0, 4, 2, 4, 6, 2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 9, 0, 2, 3, 4, 2, 4, 6, 4, 3, 8, -1, -1, -1, -1},
    {1, 9, 4, 1, 4, 2, 2, 4, 6, -1, -1, -1, -1, -1, -1, -1},
    {8, 1, 3, 8, 6, 1, 8, 4, 6, 6, 10, 1, -1, -1, -1, -1},
    {10, 1, 0, 10, 0, 6, 6, 0, 4, -1, -1, -1, -1, -1, -1, -1},
    {4, 6, 3, 4, 3, 8, 6, 10, 3, 0, 3, 9, 10, 9, 3, -1},
    {10, 9, 4, 6, 10, 4, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 9, 5, 7, 6, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 3, 4, 9, 5, 11, 7, 6, -1, -1, -1, -1, -1, -1, -1},
    {5, 0, 1, 5, 4, 0, 7, 6, 11, -1, -1, -1, -1, -1, -1, -1},
    {11, 7, 6, 8, 3, 4, 3, 5, 4, 3, 1, 5, -1, -1, -1, -1},
    {9, 5, 4, 10, 1, 2, 7, 6, 11, -1, -1, -1, -1, -1, -1, -1},
    {6, 11, 7, 1, 2, 10, 0, 8, 3, 4, 9, 5, -1, -1, -1, -1},
    {7, 6, 11, 5, 4, 10, 4, 2, 10, 4, 0, 2, -1, -1, -1, -1},
    {3, 4, 8, 3, 5, 4, 3, 2, 5, 10, 5, 2, 11, 7, 6, -1},
    {7, 2, 3, 7, 6, 2, 5, 4, 9, -1, -1, -1, -1, -1, -1, -1},
    {9, 5, 4, 0, 8, 6, 0, 6, 2, 6, 8, 7, -1, -1, -1, -1},
    {3, 6, 2, 3, 7, 6, 1, 5, 0, 5, 4, 0, -1, -1, -1, -1},
    {6, 2, 8, 6, 8, 7, 2, 1, 8, 4, 8, 5, 1, 5, 8, -1},
    {9, 5, 4, 10, 1, 6, 1, 7, 6, 1, 3, 7, -1, -1, -1, -1},
    {1, 6, 10, 1, 7, 6, 1, 0, 7, 8, 7, 0, 9, 5, 4, -1},
    {4, 0, 10, 4, 10, 5, 0, 3, 10, 6, 10, 7, 3, 7, 10, -1},
    {7, 6, 10, 7, 10, 8, 5, 4, 10, 4, 8, 10, -1, -1, -1, -1},
    {6, 9, 5, 6, 11, 9, 11, 8, 9, -1, -1, -1, -1, -1, -1, -1},
    {3, 6, 11, 0, 6, 3, 0, 5, 6, 0, 9, 5, -1, -1, -1, -1},
    {0, 11, 8, 0, 5, 11, 0, 1, 5, 5, 6, 11, -1, -1, -1, -1},
    {6, 11, 3, 6, 3, 5, 5, 3, 1, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 10, 9, 5, 11, 9, 11, 8, 11, 5, 6, -1, -1, -1, -1},
    {0, 11, 3, 0, 6, 11, 0, 9, 6, 5, 6, 9, 1, 2, 10, -1},
    {11, 8, 5, 11, 5, 6, 8, 0, 5, 10, 5, 2, 0, 2, 5, -1},
    {6, 11, 3, 6, 3, 5, 2, 10, 3, 10, 5, 3, -1, -1, -1, -1},
    {5, 8, 9, 5, 2, 8, 5, 6, 2, 3, 8, 2, -1, -1, -1, -1},
    {9, 5, 6, 9, 6, 0, 0, 6, 2, -1, -1, -1, -1, -1, -1, -1},
    {1, 5, 8, 1, 8, 0, 5, 6, 8, 3, 8, 2, 6, 2, 8, -1},
    {1, 5, 6, 2, 1, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 3, 6, 1, 6, 10, 3, 8, 6, 5, 6, 9, 8, 9, 6, -1},
    {10, 1, 0, 10, 0, 6, 9, 5, 0, 5, 6, 0, -1, -1, -1, -1},
    {0, 3, 8, 5, 6, 10, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {10, 5, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {11, 5, 10, 7, 5, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {11, 5, 10, 11, 7, 5, 8, 3, 0, -1, -1, -1, -1, -1, -1, -1},
    {5, 11, 7, 5, 10, 11, 1, 9, 0, -1, -1, -1, -1, -1, -1, -1},
    {10, 7, 5, 10, 11, 7, 9, 8, 1, 8, 3, 1, -1, -1, -1, -1},
    {11, 1, 2, 11, 7, 1, 7, 5, 1, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 3, 1, 2, 7, 1, 7, 5, 7, 2, 11, -1, -1, -1, -1},
    {9, 7, 5, 9, 2, 7, 9, 0, 2, 2, 11, 7, -1, -1, -1, -1},
    {7, 5, 2, 7, 2, 11, 5, 9, 2, 3, 2, 8, 9, 8, 2, -1},
    {2, 5, 10, 2, 3, 5, 3, 7, 5, -1, -1, -1, -1, -1, -1, -1},
    {8, 2, 0, 8, 5, 2, 8, 7, 5, 10, 2, 5, -1, -1, -1, -1},
    {9, 0, 1, 5, 10, 3, 5, 3, 7, 3, 10, 2, -1, -1, -1, -1},
    {9, 8, 2, 9, 2, 1, 8, 7, 2, 10, 2, 5, 7, 5, 2, -1},
    {1, 3, 5, 3, 7, 5, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 7, 0, 7, 1, 1, 7, 5, -1, -1, -1, -1, -1, -1, -1},
    {9, 0, 3, 9, 3, 5, 5, 3, 7, -1, -1, -1, -1, -1, -1, -1},
    {9, 8, 7, 5, 9, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {5, 8, 4, 5, 10, 8, 10, 11, 8, -1, -1, -1, -1, -1, -1, -1},
    {5, 0, 4, 5, 11, 0, 5, 10, 11, 11, 3, 0, -1, -1, -1, -1},
    {0, 1, 9, 8, 4, 10, 8, 10, 11, 10, 4, 5, -1, -1, -1, -1},
    {10, 11, 4, 10, 4, 5, 11, 3, 4, 9, 4, 1, 3, 1, 4, -1},
    {2, 5, 1, 2, 8, 5, 2, 11, 8, 4, 5, 8, -1, -1, -1, -1},
    {0, 4, 11, 0, 11, 3, 4, 5, 11, 2, 11, 1, 5, 1, 11, -1},
    {0, 2, 5, 0, 5, 9, 2, 11, 5, 4, 5, 8, 11, 8, 5, -1},
    {9, 4, 5, 2, 11, 3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, 5, 10, 3, 5, 2, 3, 4, 5, 3, 8, 4, -1, -1, -1, -1},
    {5, 10, 2, 5, 2, 4, 4, 2, 0, -1, -1, -1, -1, -1, -1, -1},
    {3, 10, 2, 3, 5, 10, 3, 8, 5, 4, 5, 8, 0, 1, 9, -1},
    {5, 10, 2, 5, 2, 4, 1, 9, 2, 9, 4, 2, -1, -1, -1, -1},
    {8, 4, 5, 8, 5, 3, 3, 5, 1, -1, -1, -1, -1, -1, -1, -1},
    {0, 4, 5, 1, 0, 5, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {8, 4, 5, 8, 5, 3, 9, 0, 5, 0, 3, 5, -1, -1, -1, -1},
    {9, 4, 5, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 11, 7, 4, 9, 11, 9, 10, 11, -1, -1, -1, -1, -1, -1, -1},
    {0, 8, 3, 4, 9, 7, 9, 11, 7, 9, 10, 11, -1, -1, -1, -1},
    {1, 10, 11, 1, 11, 4, 1, 4, 0, 7, 4, 11, -1, -1, -1, -1},
    {3, 1, 4, 3, 4, 8, 1, 10, 4, 7, 4, 11, 10, 11, 4, -1},
    {4, 11, 7, 9, 11, 4, 9, 2, 11, 9, 1, 2, -1, -1, -1, -1},
    {9, 7, 4, 9, 11, 7, 9, 1, 11, 2, 11, 1, 0, 8, 3, -1},
    {11, 7, 4, 11, 4, 2, 2, 4, 0, -1, -1, -1, -1, -1, -1, -1},
    {11, 7, 4, 11, 4, 2, 8, 3, 4, 3, 2, 4, -1, -1, -1, -1},
    {2, 9, 10, 2, 7, 9, 2, 3, 7, 7, 4, 9, -1, -1, -1, -1},
    {9, 10, 7, 9, 7, 4, 10, 2, 7, 8, 7, 0, 2, 0, 7, -1},
    {3, 7, 10, 3, 10, 2, 7, 4, 10, 1, 10, 0, 4, 0, 10, -1},
    {1, 10, 2, 8, 7, 4, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 9, 1, 4, 1, 7, 7, 1, 3, -1, -1, -1, -1, -1, -1, -1},
    {4, 9, 1, 4, 1, 7, 0, 8, 1, 8, 7, 1, -1, -1, -1, -1},
    {4, 0, 3, 7, 4, 3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {4, 8, 7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {9, 10, 8, 10, 11, 8, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {3, 0, 9, 3, 9, 11, 11, 9, 10, -1, -1, -1, -1, -1, -1, -1},
    {0, 1, 10, 0, 10, 8, 8, 10, 11, -1, -1, -1, -1, -1, -1, -1},
    {3, 1, 10, 11, 3, 10, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 2, 11, 1, 11, 9, 9, 11, 8, -1, -1, -1, -1, -1, -1, -1},
    {3, 0, 9, 3, 9, 11, 1, 2, 9, 2, 11, 9, -1, -1, -1, -1},
    {0, 2, 11, 8, 0, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {3, 2, 11, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, 3, 8, 2, 8, 10, 10, 8, 9, -1, -1, -1, -1, -1, -1, -1},
    {9, 10, 2, 0, 9, 2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, 3, 8, 2, 8, 10, 0, 1, 8, 1, 10, 8, -1, -1, -1, -1},
    {1, 10, 2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {1, 3, 8, 9, 1, 8, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 9, 1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {0, 3, 8, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1}};

void march_cube_cells(VertexBank& bank, const DistanceField& f, double rs,
                      std::vector<std::array<int, 3>>& tris) {
  const GridSpec& g = f.grid();
  // cube-local edge -> (corner offset of the edge start, axis)
  static const int kEdgeBase[12][4] = {
      {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
      {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
      {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2}};
  static const int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  for (int i = 0; i + 1 < g.dims[0]; ++i) {
    for (int j = 0; j + 1 < g.dims[1]; ++j) {
      for (int k = 0; k + 1 < g.dims[2]; ++k) {
        int code = 0;
        for (int c = 0; c < 8; ++c) {
          if (f.value(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]) < rs)
            code |= 1 << c;
        }
        const int* row = kTriTable[code];
        for (int t = 0; row[t] != -1; t += 3) {
          std::array<int, 3> tri;
          for (int v = 0; v < 3; ++v) {
            const int* eb = kEdgeBase[row[t + v]];
            tri[v] = bank.on_edge(i + eb[0], j + eb[1], k + eb[2], eb[3]);
          }
          tris.push_back(tri);
        }
      }
    }
  }
}

void label_components(LevelSetMesh& mesh) {
  Dsu dsu(mesh.vertices.size());
  if (mesh.dim == 2) {
    for (const auto& e : mesh.edges) dsu.unite(e[0], e[1]);
  } else {
    for (const auto& t : mesh.triangles) {
      dsu.unite(t[0], t[1]);
      dsu.unite(t[0], t[2]);
    }
  }
  std::unordered_map<int, int> label;  // root -> first-use order
  size_t n = mesh.cell_count();
  mesh.cell_component.resize(n);
  for (size_t c = 0; c < n; ++c) {
    int v0 = mesh.dim == 2 ? mesh.edges[c][0] : mesh.triangles[c][0];
    int root = dsu.find(v0);
    auto [it, fresh] = label.emplace(root, static_cast<int>(label.size()));
    mesh.cell_component[c] = it->second;
  }
  mesh.component_count = static_cast<int>(label.size());
}

// Clusters mesh vertices within tol; returns per-vertex cluster id and fills
// centroids (cluster positions for defect reporting).
std::vector<int> cluster_vertices(const std::vector<Vec>& verts, int dim,
                                  double tol, std::vector<Vec>& centroids) {
  size_t n = verts.size();
  Dsu dsu(n);
  std::map<std::array<int64_t, 3>, std::vector<int>> buckets;
  auto key_of = [&](const Vec& v) {
    std::array<int64_t, 3> k = {0, 0, 0};
    for (int a = 0; a < dim; ++a)
      k[a] = static_cast<int64_t>(std::floor(v[a] / tol));
    return k;
  };
  for (size_t i = 0; i < n; ++i) buckets[key_of(verts[i])].push_back(static_cast<int>(i));
  auto near = [&](const Vec& a, const Vec& b) {
    double s = 0;
    for (int ax = 0; ax < dim; ++ax) s += (a[ax] - b[ax]) * (a[ax] - b[ax]);
    return s <= tol * tol;
  };
  for (size_t i = 0; i < n; ++i) {
    auto base = key_of(verts[i]);
    std::array<int64_t, 3> nb = base;
    int kmax = dim == 3 ? 1 : 0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -kmax; dk <= kmax; ++dk) {
          nb = {base[0] + di, base[1] + dj, base[2] + dk};
          auto it = buckets.find(nb);
          if (it == buckets.end()) continue;
          for (int j : it->second)
            if (j > static_cast<int>(i) && near(verts[i], verts[j]))
              dsu.unite(static_cast<int>(i), j);
        }
  }
  std::unordered_map<int, int> order;
  std::vector<int> id(n);
  for (size_t i = 0; i < n; ++i) {
    int root = dsu.find(static_cast<int>(i));
    auto [it, fresh] = order.emplace(root, static_cast<int>(order.size()));
    id[i] = it->second;
  }
  centroids.assign(order.size(), Vec::zero(dim));
  std::vector<int> counts(order.size(), 0);
  for (size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) centroids[id[i]][a] += verts[i][a];
    counts[id[i]]++;
  }
  for (size_t c = 0; c < centroids.size(); ++c)
    for (int a = 0; a < 3; ++a) centroids[c][a] /= counts[c];
  return id;
}

}  // namespace

double LevelSetMesh::total_length() const {
  double s = 0;
  for (const auto& e : edges) {
    double d2 = 0;
    for (int a = 0; a < dim; ++a) {
      double d = vertices[e[0]][a] - vertices[e[1]][a];
      d2 += d * d;
    }
    s += std::sqrt(d2);
  }
  return s;
}

LevelSetMesh extract_level_set(const DistanceField& field, double r) {
  if (!(r > field.min_value() && r < field.max_value()))
    throw DomainError("level-set extraction: r outside the sampled value range");
  double rs = snap_level(field, r);
  LevelSetMesh mesh;
  mesh.dim = field.grid().dim;
  mesh.r = r;
  mesh.r_snapped = rs;
  mesh.h = field.grid().h;
  VertexBank bank{field, rs, {}, mesh.vertices};
  if (mesh.dim == 2) {
    march_square_cells(bank, field, rs, mesh.edges);
    close_domain_boundary_2d(bank, field, rs, mesh.edges);
  } else {
    march_cube_cells(bank, field, rs, mesh.triangles);
  }
  label_components(mesh);
  return mesh;
}

ManifoldReport manifold_check(const LevelSetMesh& mesh, double cluster_tol) {
  // Default sits above the strand gap of a genuinely pinched neck at a
  // snapped level (~1e-2 h) and below the gap between distinct strands
  // crossing one grid row on either side of a crease kink (~1e-1 h).
  double tol = cluster_tol > 0 ? cluster_tol : 0.02 * mesh.h;
  ManifoldReport rep;
  if (mesh.vertices.empty()) return rep;
  std::vector<Vec> pos;
  std::vector<int> id = cluster_vertices(mesh.vertices, mesh.dim, tol, pos);
  size_t nc = pos.size();
  auto defect = [&](size_t cluster, std::string kind) {
    rep.manifold = false;
    rep.defects.push_back({pos[cluster], std::move(kind)});
  };
  Dsu comp(nc);
  if (mesh.dim == 2) {
    std::vector<int> degree(nc, 0);
    for (const auto& e : mesh.edges) {
      int a = id[e[0]], b = id[e[1]];
      if (a == b) continue;  // edge collapsed by clustering
      degree[a]++;
      degree[b]++;
      comp.unite(a, b);
    }
    std::unordered_map<int, std::array<long, 2>> per_comp;  // edges, vertices
    for (const auto& e : mesh.edges) {
      int a = id[e[0]], b = id[e[1]];
      if (a != b) per_comp[comp.find(a)][0]++;
    }
    for (size_t c = 0; c < nc; ++c) {
      if (degree[c] == 0) continue;
      per_comp[comp.find(static_cast<int>(c))][1]++;
      if (degree[c] != 2)
        defect(c, "vertex degree " + std::to_string(degree[c]));
    }
    rep.components = static_cast<int>(per_comp.size());
    for (auto& [root, ev] : per_comp) {
      if (ev[0] != ev[1])
        defect(root, "component is not a single closed curve");
    }
  } else {
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : mesh.triangles) {
      std::array<int, 3> c = {id[t[0]], id[t[1]], id[t[2]]};
      if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2]) continue;  // degenerate
      tris.push_back(c);
      comp.unite(c[0], c[1]);
      comp.unite(c[0], c[2]);
    }
    std::map<std::pair<int, int>, int> edge_count;
    auto ek = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    std::unordered_map<int, std::vector<std::pair<int, int>>> links;
    for (const auto& t : tris) {
      for (int v = 0; v < 3; ++v) {
        edge_count[ek(t[v], t[(v + 1) % 3])]++;
        links[t[v]].push_back({t[(v + 1) % 3], t[(v + 2) % 3]});
      }
    }
    for (const auto& [e, cnt] : edge_count) {
      if (cnt != 2)
        defect(e.first, "edge borders " + std::to_string(cnt) + " triangles");
    }
    std::unordered_map<int, int> used;
    for (size_t c = 0; c < nc; ++c) {
      auto it = links.find(static_cast<int>(c));
      if (it == links.end()) continue;
      used[comp.find(static_cast<int>(c))]++;
      // link must be one closed cycle: every link vertex has degree 2 and the
      // link edges form a single connected component
      std::map<int, int> deg;
      std::map<int, int> lroot;
      std::function<int(int)> lfind = [&](int a) {
        while (lroot[a] != a) a = lroot[a] = lroot[lroot[a]];
        return a;
      };
      for (const auto& [a, b] : it->second) {
        deg[a]++;
        deg[b]++;
        lroot.emplace(a, a);
        lroot.emplace(b, b);
      }
      for (const auto& [a, b] : it->second) {
        int ra = lfind(a), rb = lfind(b);
        if (ra != rb) lroot[std::max(ra, rb)] = std::min(ra, rb);
      }
      bool ok = true;
      for (const auto& [v, d] : deg)
        if (d != 2) ok = false;
      int roots = 0;
      for (auto& [v, p] : lroot)
        if (lfind(v) == v) roots++;
      if (roots != 1) ok = false;
      if (!ok) defect(c, "vertex link is not a single cycle");
    }
    rep.components = static_cast<int>(used.size());
  }
  return rep;
}

std::vector<GraphSample> lipschitz_graph_check(const DistanceField& field,
                                               const LevelSetMesh& mesh,
                                               double window, int max_samples) {
  if (window <= 0) throw InputError("graph check: window must be positive");
  const double h = mesh.h;
  size_t n = mesh.vertices.size();
  std::vector<GraphSample> out;
  if (n == 0) return out;
  // vertices on the domain perimeter belong to the boundary closure, not to
  // the level set proper; they carry no graph structure
  const Box domain = field.grid().box();
  auto on_perimeter = [&](const Vec& v) {
    for (int a = 0; a < mesh.dim; ++a)
      if (std::abs(v[a] - domain.lo[a]) <= 1e-9 * h ||
          std::abs(v[a] - domain.hi[a]) <= 1e-9 * h)
        return true;
    return false;
  };
  size_t stride = 1;
  if (max_samples > 0 && n > static_cast<size_t>(max_samples))
    stride = n / max_samples;
  for (size_t base = 0; base < n; base += stride) {
    if (max_samples > 0 && out.size() >= static_cast<size_t>(max_samples)) break;
    const Vec& p = mesh.vertices[base];
    if (!field.contains(p, 2 * h)) continue;
    FieldGradient fg = field.gradient(p);
    double gn = 0;
    for (int a = 0; a < mesh.dim; ++a) gn += fg.g[a] * fg.g[a];
    gn = std::sqrt(gn);
    if (gn < 1e-9) continue;
    Vec nrm = fg.g;
    for (int a = 0; a < mesh.dim; ++a) nrm[a] /= gn;

    struct UV {
      Vec u;
      double v;
    };
    std::vector<UV> pts;
    for (size_t j = 0; j < n; ++j) {
      if (on_perimeter(mesh.vertices[j])) continue;
      double d2 = 0;
      for (int a = 0; a < mesh.dim; ++a) {
        double d = mesh.vertices[j][a] - p[a];
        d2 += d * d;
      }
      if (d2 > window * window) continue;
      Vec q = mesh.vertices[j];
      double height = 0;
      for (int a = 0; a < mesh.dim; ++a) height += (q[a] - p[a]) * nrm[a];
      Vec u = Vec::zero(mesh.dim);
      for (int a = 0; a < mesh.dim; ++a) u[a] = q[a] - p[a] - height * nrm[a];
      pts.push_back({u, height});
    }
    if (pts.size() < 4)
      throw DomainError("graph check: fewer than 4 mesh vertices in the window");

    // fitted slope from bin centroids (bin width h/2 in the tangent plane)
    std::map<std::array<int64_t, 3>, std::pair<UV, int>> bins;
    double bw = h / 2;
    for (const auto& s : pts) {
      std::array<int64_t, 3> key = {0, 0, 0};
      for (int a = 0; a < mesh.dim; ++a)
        key[a] = static_cast<int64_t>(std::floor(s.u[a] / bw));
      auto& slot = bins[key];
      for (int a = 0; a < 3; ++a) slot.first.u[a] += s.u[a];
      slot.first.v += s.v;
      slot.second++;
    }
    std::vector<UV> cent;
    for (auto& [k, slot] : bins) {
      UV c = slot.first;
      for (int a = 0; a < 3; ++a) c.u[a] /= slot.second;
      c.v /= slot.second;
      cent.push_back(c);
    }
    double lfit = 0;
    for (size_t a = 0; a < cent.size(); ++a)
      for (size_t b = a + 1; b < cent.size(); ++b) {
        double du = 0;
        for (int ax = 0; ax < mesh.dim; ++ax) {
          double d = cent[a].u[ax] - cent[b].u[ax];
          du += d * d;
        }
        du = std::sqrt(du);
        if (du < 1e-12) continue;
        lfit = std::max(lfit, std::abs(cent[a].v - cent[b].v) / du);
      }

    // single-valuedness: nearby tangent coordinates must carry nearby heights
    bool pass = true;
    for (size_t a = 0; a < pts.size() && pass; ++a)
      for (size_t b = a + 1; b < pts.size(); ++b) {
        double du = 0;
        for (int ax = 0; ax < mesh.dim; ++ax) {
          double d = pts[a].u[ax] - pts[b].u[ax];
          du += d * d;
        }
        if (du > bw * bw) continue;
        if (std::abs(pts[a].v - pts[b].v) > lfit * bw + 4 * h * h) {
          pass = false;
          break;
        }
      }
    out.push_back({static_cast<int>(base), p, lfit,
                   static_cast<int>(pts.size()), pass});
  }
  return out;
}

SemiconcavityResult semiconcavity_check(const DistanceField& field,
                                        const Box& region, double c,
                                        long triples, uint64_t seed,
                                        double d_lo, double d_hi) {
  if (triples <= 0) throw InputError("semiconcavity: triples must be positive");
  const Box grid_box = field.grid().box();
  for (int a = 0; a < field.grid().dim; ++a) {
    if (region.lo[a] < grid_box.lo[a] - 1e-12 || region.hi[a] > grid_box.hi[a] + 1e-12)
      throw DomainError("semiconcavity: region extends outside the sampled grid");
    if (region.lo[a] > region.hi[a])
      throw InputError("semiconcavity: empty region");
  }
  ClosedSet scene = ClosedSet::from_json(field.scene_json());
  const Norm& norm = field.norm();
  const int dim = field.grid().dim;

  auto dist = [&](const Vec& x) {
    double d = scene_distance(scene, x, norm);
    if (d < 1e-9) throw DomainError("semiconcavity: region touches F");
    return d;
  };
  auto g_of = [&](const Vec& x, double d) {
    double n2 = 0;
    for (int a = 0; a < dim; ++a) n2 += x[a] * x[a];
    return d - 0.5 * c * n2;
  };

  Rng rng(seed);
  auto draw = [&]() {
    Vec x = Vec::zero(dim);
    for (int a = 0; a < dim; ++a)
      x[a] = region.lo[a] + rng.uniform() * (region.hi[a] - region.lo[a]);
    return x;
  };

  SemiconcavityResult res;
  res.worst = std::numeric_limits<double>::infinity();
  long attempts = 0;
  const long max_attempts = 200 * triples;
  while (res.tested < triples) {
    if (++attempts > max_attempts)
      throw DomainError("semiconcavity: could not sample enough admissible segments");
    Vec a = draw(), b = draw();
    // admissible iff 17 equispaced segment points stay in the region band
    bool ok = true;
    double da = 0, db = 0, dm = 0;
    Vec m = Vec::zero(dim);
    for (int ax = 0; ax < dim; ++ax) m[ax] = 0.5 * (a[ax] + b[ax]);
    for (int s = 0; s <= 16 && ok; ++s) {
      double t = s / 16.0;
      Vec x = Vec::zero(dim);
      for (int ax = 0; ax < dim; ++ax) x[ax] = (1 - t) * a[ax] + t * b[ax];
      for (int ax = 0; ax < dim && ok; ++ax)
        if (x[ax] < region.lo[ax] || x[ax] > region.hi[ax]) ok = false;
      if (!ok) break;
      double d = dist(x);
      if (d < d_lo || d > d_hi) ok = false;
      if (s == 0) da = d;
      if (s == 8) dm = d;
      if (s == 16) db = d;
    }
    if (!ok) continue;
    res.tested++;
    double lhs = g_of(m, dm) - 0.5 * (g_of(a, da) + g_of(b, db));
    if (lhs < res.worst) {
      res.worst = lhs;
      if (lhs < -1e-6) {
        res.pass = false;
        if (!res.violation) res.violation = SemiTriple{a, b, m, lhs};
        if (lhs < res.violation->lhs) res.violation = SemiTriple{a, b, m, lhs};
      }
    }
  }
  return res;
}

BoundaryReport boundary_vs_level(const DistanceField& field, double r) {
  BoundaryReport rep;
  rep.r = r;
  LevelSetMesh mesh = extract_level_set(field, r);
  const GridSpec& g = field.grid();
  const double tol = 1e-12 * std::max(1.0, std::abs(r));

  std::vector<Vec> level = mesh.vertices;
  for (size_t idx = 0; idx < g.vertex_count(); ++idx) {
    if (std::abs(field.value(idx) - r) <= tol) {
      auto c = g.coords(idx);
      level.push_back(g.vertex(c[0], c[1], c[2]));
    }
  }
  std::vector<Vec> boundary;
  for (size_t idx = 0; idx < g.vertex_count(); ++idx) {
    if (field.value(idx) > r) continue;
    auto c = g.coords(idx);
    bool frontier = false;
    for (int a = 0; a < g.dim && !frontier; ++a) {
      for (int s = -1; s <= 1; s += 2) {
        std::array<int, 3> nb = c;
        nb[a] += s;
        if (nb[a] < 0 || nb[a] >= g.dims[a]) continue;
        if (field.value(nb[0], nb[1], nb[2]) > r) {
          frontier = true;
          break;
        }
      }
    }
    if (frontier) boundary.push_back(g.vertex(c[0], c[1], c[2]));
  }

  rep.level_count = level.size();
  rep.boundary_count = boundary.size();
  if (level.empty() || boundary.empty()) {
    rep.hausdorff = (level.empty() && boundary.empty())
                        ? 0
                        : std::numeric_limits<double>::infinity();
    rep.coincide = level.empty() && boundary.empty();
    return rep;
  }
  auto directed = [&](const std::vector<Vec>& from, const std::vector<Vec>& to,
                      Vec& worst) {
    double hmax = 0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        double d2 = 0;
        for (int a = 0; a < g.dim; ++a) d2 += (p[a] - q[a]) * (p[a] - q[a]);
        if (d2 < best) best = d2;
        if (best == 0) break;
      }
      best = std::sqrt(best);
      if (best > hmax) {
        hmax = best;
        worst = p;
      }
    }
    return hmax;
  };
  rep.worst_level = level[0];
  rep.worst_boundary = boundary[0];
  double a = directed(level, boundary, rep.worst_level);
  double b = directed(boundary, level, rep.worst_boundary);
  rep.hausdorff = std::max(a, b);
  rep.coincide = rep.hausdorff <= 2 * g.h;
  return rep;
}

SweepReport radius_sweep(const DistanceField& field, double r_min, double r_max,
                         int count, const SweepParams& params) {
  if (count < 1) throw InputError("sweep: count must be >= 1");
  if (r_min > r_max) throw InputError("sweep: r_min > r_max");
  if (!(r_min > field.min_value() && r_max < field.max_value()))
    throw DomainError("sweep: radius range outside the sampled value range");

  SweepReport rep;
  rep.entries.resize(count);
  std::atomic<bool> failed(false);
  std::exception_ptr first_error;
  std::mutex err_mu;

  parallel_for(static_cast<size_t>(count), params.threads, [&](size_t i) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      double r = count == 1 ? r_min
                            : r_min + (r_max - r_min) * static_cast<double>(i) /
                                          (count - 1);
      LevelSetMesh mesh = extract_level_set(field, r);
      ManifoldReport mc = manifold_check(mesh, params.cluster_tol);
      SweepEntry e;
      e.r = r;
      e.components = mc.components;
      e.manifold = mc.manifold;
      e.defects = static_cast<int>(mc.defects.size());
      e.nearest_critical_value = std::numeric_limits<double>::infinity();
      for (double cv : params.critical_values)
        e.nearest_critical_value =
            std::min(e.nearest_critical_value, std::abs(r - cv));
      rep.entries[i] = e;
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!failed.exchange(true)) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  std::vector<double> failing;
  for (const auto& e : rep.entries)
    if (!e.manifold) failing.push_back(e.r);
  double delta = params.delta > 0 ? params.delta : 4 * field.grid().h;
  double s = (field.grid().dim - 1) / 2.0;
  rep.exceptional = hausdorff_box_estimate(failing, s, delta);
  return rep;
}

std::string SweepReport::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("entries");
  w.begin_array();
  for (const auto& e : entries) {
    w.begin_object();
    w.key("r");
    w.value_double(e.r);
    w.key("components");
    w.value_int(e.components);
    w.key("manifold");
    w.value_bool(e.manifold);
    w.key("defects");
    w.value_int(e.defects);
    w.key("nearest_critical_value");
    w.value_double(e.nearest_critical_value);
    w.end_object();
  }
  w.end_array();
  w.key("exceptional");
  w.value_raw(hausdorff_to_json(exceptional));
  w.end_object();
  return w.str();
}

}  // namespace distlab
