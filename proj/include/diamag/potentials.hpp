#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "diamag/grid.hpp"
#include "diamag/profile.hpp"

namespace diamag {

enum class CouplingLaw { Uniform, Degenerate, Rademacher };

struct ZeroModel {};

struct AlloyModel {
  double g = 1.0;
  CouplingLaw law = CouplingLaw::Uniform;
  double degenerate_value = 1.0;  // used when law == Degenerate; must lie in [-1, 1]
  SingleSiteProfile profile = SingleSiteProfile::gaussian(1.0, 0.35);
};

struct PoissonModel {
  double lambda = 1.0;
  SingleSiteProfile profile = SingleSiteProfile::cosine(1.0);
};

struct PeriodicModel {
  SingleSiteProfile profile = SingleSiteProfile::cosine(0.5);
};

struct SparseBarrierModel {
  double alpha = 0.2;  // growth exponent, must be < 1/3
  int spacing = 3;     // barrier pitch on the integer lattice
  double height_scale = 1.0;
  SingleSiteProfile profile = SingleSiteProfile::cosine(1.0);
  bool force_origin = false;  // force a barrier of maximal height at the origin
};

using PotentialModel =
    std::variant<ZeroModel, AlloyModel, PoissonModel, PeriodicModel, SparseBarrierModel>;

struct PotentialField {
  Grid grid;
  VectorXd values;
  PotentialModel model;
  std::uint64_t seed = 0;
  std::array<int, 3> shift{0, 0, 0};
};

PotentialField sample_zero(const Grid& grid);
PotentialField sample_alloy(const Grid& grid, const AlloyModel& m, std::uint64_t seed);
PotentialField sample_poisson(const Grid& grid, const PoissonModel& m, std::uint64_t seed);
PotentialField sample_periodic(const Grid& grid, const SingleSiteProfile& profile);
PotentialField sample_sparse_barrier(const Grid& grid, const SparseBarrierModel& m,
                                     std::uint64_t seed);
PotentialField sample_model(const Grid& grid, const PotentialModel& m, std::uint64_t seed);

// Disorder-index shift (stationarity): new field(x) = old field(x - k) exactly
// on the interior where both sides see the full profile sum.
PotentialField shift_realization(const PotentialField& f, const std::array<int, 3>& k);

// field = sum of profile translates centered at the given points (Poisson with
// a hand-picked point set; exposed for tests)
PotentialField field_from_points(const Grid& grid, const SingleSiteProfile& profile,
                                 const std::vector<Eigen::Vector3d>& points);

// flat binary layout: magic, dim, n_per_side, spacing, seed, shift, payload
void save_field_binary(const PotentialField& f, std::ostream& os);
// values + grid metadata only; the model is not round-tripped
PotentialField load_field_binary(std::istream& is);
void save_field_csv(const PotentialField& f, std::ostream& os);

}  // namespace diamag
