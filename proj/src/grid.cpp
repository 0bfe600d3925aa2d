#include "diamag/grid.hpp"

namespace diamag {

Grid make_grid(int dim, double side, int n_per_side) {
  if (dim < 1 || dim > 3) throw Error("grid: dim must be 1, 2 or 3");
  if (!(side > 0.0)) throw Error("grid: box side must be positive");
  if (n_per_side < 1) throw Error("grid: need at least one interior node per axis");
  return Grid{dim, side, n_per_side};
}

}  // namespace diamag
