#include "diamag/profile.hpp"

#include <cmath>

namespace diamag {

SingleSiteProfile SingleSiteProfile::gaussian(double radius, double width, double height) {
  if (!(radius > 0.0) || !(width > 0.0)) throw Error("profile: radius and width must be positive");
  return {Kind::Gaussian, radius, height, width};
}

SingleSiteProfile SingleSiteProfile::box(double half_width, double height) {
  if (!(half_width > 0.0)) throw Error("profile: half width must be positive");
  return {Kind::Box, half_width, height, 0.0};
}

SingleSiteProfile SingleSiteProfile::cosine(double radius, double height) {
  if (!(radius > 0.0)) throw Error("profile: radius must be positive");
  return {Kind::Cosine, radius, height, 0.0};
}

SingleSiteProfile SingleSiteProfile::zero() { return {Kind::Zero, 0.0, 0.0, 0.0}; }

double SingleSiteProfile::value(const Eigen::Vector3d& r, int dim) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Box: {
      for (int a = 0; a < dim; ++a)
        if (r[a] < -radius || r[a] >= radius) return 0.0;
      return height;
    }
    case Kind::Gaussian: {
      double s2 = 0.0;
      for (int a = 0; a < dim; ++a) s2 += r[a] * r[a];
      if (s2 >= radius * radius) return 0.0;
      return height * std::exp(-s2 / (2.0 * width * width));
    }
    case Kind::Cosine: {
      double s2 = 0.0;
      for (int a = 0; a < dim; ++a) s2 += r[a] * r[a];
      if (s2 >= radius * radius) return 0.0;
      double c = std::cos(kPi * std::sqrt(s2) / (2.0 * radius));
      return height * c * c;
    }
  }
  return 0.0;
}

double SingleSiteProfile::integral(int dim, int samples_per_unit) const {
  if (kind == Kind::Zero) return 0.0;
  const double r = radius;
  const int n = std::max(2, static_cast<int>(2.0 * r * samples_per_unit));
  const double dx = 2.0 * r / n;
  double total = 0.0;
  // midpoint rule over the support cube
  std::array<int, 3> idx{0, 0, 0};
  long long cells = 1;
  for (int a = 0; a < dim; ++a) cells *= n;
  for (long long c = 0; c < cells; ++c) {
    long long t = c;
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int a = 0; a < dim; ++a) {
      idx[a] = static_cast<int>(t % n);
      t /= n;
      x[a] = -r + (idx[a] + 0.5) * dx;
    }
    total += value(x, dim);
  }
  return total * std::pow(dx, dim);
}

}  // namespace diamag
