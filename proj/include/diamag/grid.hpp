#pragma once

#include <array>

#include "diamag/common.hpp"

namespace diamag {

// Dirichlet grid on the open box (-L/2, L/2)^d: n_per_side interior nodes per
// axis, spacing h = L/(n+1), boundary nodes excluded.  Node coordinates are
// origin-symmetric: x_i = (i+1)h - L/2.
struct Grid {
  int dim = 1;
  double side = 1.0;
  int n_per_side = 1;

  double spacing() const { return side / (n_per_side + 1); }
  long long nodes() const {
    long long n = 1;
    for (int a = 0; a < dim; ++a) n *= n_per_side;
    return n;
  }
  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= side;
    return v;
  }

  double axis_coord(int i) const { return (i + 1) * spacing() - side / 2.0; }

  // flat index <-> per-axis indices; axis 0 is the fastest-varying one
  std::array<int, 3> unflatten(long long idx) const {
    std::array<int, 3> m{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      m[a] = static_cast<int>(idx % n_per_side);
      idx /= n_per_side;
    }
    return m;
  }
  long long flatten(const std::array<int, 3>& m) const {
    long long idx = 0;
    for (int a = dim - 1; a >= 0; --a) idx = idx * n_per_side + m[a];
    return idx;
  }

  Eigen::Vector3d coord(const std::array<int, 3>& m) const {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int a = 0; a < dim; ++a) x[a] = axis_coord(m[a]);
    return x;
  }
  Eigen::Vector3d coord(long long idx) const { return coord(unflatten(idx)); }

  // distance to the box boundary
  double depth(const Eigen::Vector3d& x) const {
    double d = side / 2.0;
    for (int a = 0; a < dim; ++a) d = std::min(d, side / 2.0 - std::abs(x[a]));
    return d;
  }
};

Grid make_grid(int dim, double side, int n_per_side);

}  // namespace diamag
