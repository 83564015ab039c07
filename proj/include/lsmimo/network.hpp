// Network topology layer: PPP base stations on a square window, user
// placement (fixed pool per cell or PPP), nearest-BS association, random
// scheduling, and nulling-cluster formation in fixed-range and
// range-adaptive flavors.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lsmimo/params.hpp"
#include "lsmimo/rng.hpp"
#include "lsmimo/types.hpp"

namespace lsmimo {

enum class UserModel {
  fixed_pool, // exactly users_per_cell candidates uniform in each Voronoi cell
  ppp_users,  // one PPP of density users_per_cell * bs_density over the window
};

struct Topology {
  double window_half_width_m = 0.0;
  double measurement_region_half_width_m = 0.0; // strictly inside the window
  Points bs_positions;   // 2 x n_bs, coordinates in [-window, window]
  Points user_positions; // 2 x n_users
  std::vector<int> association;        // user -> nearest BS (lowest index on ties)
  std::vector<double> serving_distance_m; // cached |user - associated BS|
  std::vector<std::vector<int>> cell_users; // BS -> its associated users, ascending

  int bs_count() const { return static_cast<int>(bs_positions.cols()); }
  int user_count() const { return static_cast<int>(user_positions.cols()); }
  bool in_measurement_region(int user) const;
};

// Draw one topology. BS count is Poisson over the window; the measurement
// half-width must leave a guard band (caller enforces the clustering-range
// rule) and be strictly smaller than the window. Zero-BS draws are retried
// internally; persistent failure raises numerical_error.
Topology sample_topology(const SystemParams& params, double window_half_width_m,
                         double measurement_half_width_m, UserModel model,
                         Rng& rng);

// BS process alone (Poisson count with the same zero-retry rule), for
// callers that place their own evaluation points.
Points sample_bs_positions(const SystemParams& params,
                           double window_half_width_m, Rng& rng);

// Brute-force nearest point; `dist` receives the distance. Lowest index on
// ties.
int nearest_bs(const Points& bs, double x, double y, double& dist);

struct Schedule {
  int multiplexing = 0;                    // requested users per BS (K)
  std::vector<std::vector<int>> scheduled; // per BS, ascending user indices
  std::vector<double> fraction;            // per BS: K / pool size
  std::vector<bool> short_cell;            // pool smaller than K (ppp mode only)
};

// Uniform selection of K users per cell without replacement. In fixed_pool
// mode every cell holds exactly users_per_cell candidates and K must not
// exceed it; in ppp_users mode an undersized cell schedules everyone and is
// flagged, and its fraction uses the realized pool size.
Schedule schedule_users(const Topology& topo, int multiplexing,
                        int users_per_cell, UserModel model, Rng& rng);

struct ClusterAssignment {
  // Request radius per scheduled user (R_c, or nu * serving distance).
  std::vector<double> request_radius_m;        // per user; 0 for unscheduled
  std::vector<std::vector<int>> user_cluster;  // user -> in-range non-serving BSs
  std::vector<std::vector<int>> user_residual; // subset whose grant was denied
  std::vector<std::vector<int>> bs_granted_users; // BS -> out-of-cell users it nulls
  std::vector<int> spare_dimensions;           // per BS: O minus grants used
};

// Grant magnitude source: full channel norm for (user, bs), used to rank
// competing nulling requests.
using MagnitudeFn = std::function<double(int user, int bs)>;

// Fixed-range clustering: every scheduled user requests nulling from all
// non-serving BSs within derived.cluster_radius_m; each BS keeps the
// op.nulling strongest requests (ties to the lower user index) and denies
// the rest.
ClusterAssignment assign_clusters_fixed(const Topology& topo,
                                        const Schedule& sched,
                                        const OperatingPoint& op,
                                        const DerivedParams& derived,
                                        const MagnitudeFn& magnitude);

// Range-adaptive clustering: identical grant logic, but each user's request
// radius scales with its serving distance, nu = sqrt((K + O) / K).
ClusterAssignment assign_clusters_adaptive(const Topology& topo,
                                           const Schedule& sched,
                                           const OperatingPoint& op,
                                           const DerivedParams& derived,
                                           const MagnitudeFn& magnitude);

double adaptive_range_factor(const OperatingPoint& op);

// Seed-derivation rules shared by every engine: one child per realization,
// one stream per (user, BS) channel. Documented in rng.hpp.
uint64_t topology_seed(uint64_t realization_seed);
uint64_t schedule_seed(uint64_t realization_seed);

} // namespace lsmimo
