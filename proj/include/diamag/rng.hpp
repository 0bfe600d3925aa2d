#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based (stateless) random streams.  A draw is a pure function of the
// key it is derived from, so disorder indexed by lattice sites is exactly
// stationary under index shifts: no sequential generator state exists.
namespace diamag::rng {

// SplitMix64 finalizer; bijective 64-bit mixer with good avalanche.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Key {
  std::uint64_t state;

  explicit Key(std::uint64_t seed) : state(mix(seed ^ 0x6d616764696d6167ULL)) {}

  Key fold(std::uint64_t v) const {
    Key k = *this;
    k.state = mix(k.state ^ mix(v));
    return k;
  }
  Key fold_int(std::int64_t v) const { return fold(static_cast<std::uint64_t>(v)); }
  Key fold_site(const std::array<int, 3>& m) const {
    return fold_int(m[0]).fold_int(m[1]).fold_int(m[2]);
  }

  std::uint64_t bits() const { return mix(state); }
  // uniform in [0, 1)
  double u01() const { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
  // uniform in [-1, 1)
  double sym() const { return 2.0 * u01() - 1.0; }
};

// Poisson count by inversion of the uniform product (Knuth); fine for the
// modest intensities used here.  Sub-draws are keyed by an internal counter.
inline int poisson(const Key& k, double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  double p = 1.0;
  int n = 0;
  while (true) {
    p *= k.fold(0x706f6973ULL).fold_int(n).u01();
    if (p <= limit) return n;
    ++n;
  }
}

}  // namespace diamag::rng
