#pragma once

#include "diamag/common.hpp"

namespace diamag {

// Bounded, compactly supported single-site profiles.  The box indicator is
// half-open per axis so that unit-cell translates tile space exactly.
struct SingleSiteProfile {
  enum class Kind { Gaussian, Box, Cosine, Zero };

  Kind kind = Kind::Zero;
  double radius = 1.0;  // support radius (box: half-width per axis)
  double height = 1.0;
  double width = 0.35;  // Gaussian only

  static SingleSiteProfile gaussian(double radius, double width, double height = 1.0);
  static SingleSiteProfile box(double half_width, double height = 1.0);
  static SingleSiteProfile cosine(double radius, double height = 1.0);
  static SingleSiteProfile zero();

  // r = x - center; only the first dim components are used
  double value(const Eigen::Vector3d& r, int dim) const;
  double max_abs() const { return std::abs(height); }
  bool nonnegative() const { return height >= 0.0; }

  // numerical integral over R^dim (midpoint rule), used by moment tests
  double integral(int dim, int samples_per_unit = 64) const;
};

}  // namespace diamag
